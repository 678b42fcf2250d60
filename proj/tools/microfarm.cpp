#include <atomic>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "microfarm/api.hpp"
#include "microfarm/config.hpp"
#include "microfarm/datastore.hpp"
#include "microfarm/heights.hpp"
#include "microfarm/report.hpp"
#include "microfarm/stack.hpp"
#include "microfarm/stats.hpp"

namespace {

using namespace microfarm;

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted = true; }

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Config config_from(const std::string& path) {
  if (path.empty()) {
    Config c;
    validate(c);
    return c;
  }
  return load_config(path);
}

int serve(const Config& config, StackOptions options, double duration_s) {
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  Stack stack(config, options);
  stack.start();
  if (options.gateway) {
    std::cerr << "node listener on " << config.node_listen.host << ":" << stack.node_port() << ", api on "
              << config.api_listen.host << ":" << stack.api_port() << "\n";
  }
  if (options.node) std::cerr << "node " << config.node.node_id << " running\n";
  const auto deadline =
      std::chrono::steady_clock::now() + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                             std::chrono::duration<double>(duration_s));
  while (!g_interrupted && (duration_s <= 0 || std::chrono::steady_clock::now() < deadline)) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  stack.stop();
  if (auto* store = stack.store()) std::cerr << store->reading_count() << " readings in memory window\n";
  return kOk;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void print_ttest(std::ostream& out, const std::string& day, const stats::TTestResult& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "day: %s\n"
                "n: %zu\n"
                "mean: %.4f\n"
                "sd: %.4f\n"
                "se: %.4f\n"
                "test_value: %.4f\n"
                "mean_diff: %.4f\n"
                "t: %.4f\n"
                "df: %d\n"
                "p_two_tailed: %.4f\n"
                "ci_95: %.4f %.4f\n",
                day.c_str(), r.n, r.mean, r.sd, r.se, r.test_value, r.mean_diff, r.t, r.df,
                r.p_two_tailed, r.ci_low, r.ci_high);
  out << buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Microfarm monitoring and control stack"};
  app.require_subcommand(1);

  std::string config_path;
  double duration_s = 0;
  std::int64_t first_seq = 0;

  auto* run = app.add_subcommand("run", "Run datastore, control engine, gateway and a simulated node");
  run->add_option("-c,--config", config_path, "key=value config file")->check(CLI::ExistingFile);
  run->add_option("--duration", duration_s, "Stop after this many wall seconds (default: until interrupted)");

  auto* gw = app.add_subcommand("gateway", "Run the gateway side only (datastore, engine, listeners)");
  gw->add_option("-c,--config", config_path, "key=value config file")->check(CLI::ExistingFile);
  gw->add_option("--duration", duration_s, "Stop after this many wall seconds");

  auto* nd = app.add_subcommand("node", "Run a simulated chamber and sensor node against net.gateway_addr");
  nd->add_option("-c,--config", config_path, "key=value config file")->check(CLI::ExistingFile);
  nd->add_option("--duration", duration_s, "Stop after this many wall seconds");
  nd->add_option("--first-seq", first_seq, "First SENSOR sequence number (continue after a previous run)")
      ->check(CLI::PositiveNumber);

  std::string readings_path, out_path;
  auto* rp = app.add_subcommand("replay", "Feed a readings CSV through the engine in AUTO; print events CSV");
  rp->add_option("readings", readings_path, "readings.csv")->required();
  rp->add_option("-c,--config", config_path, "key=value config file (thresholds, node.id)")
      ->check(CLI::ExistingFile);
  rp->add_option("-o,--out", out_path, "Write here instead of stdout");

  std::string heights_path, day_label;
  double test_value = 0;
  bool as_json = false;
  auto* tt = app.add_subcommand("ttest", "One-sample t-test on a height table column");
  tt->add_option("heights", heights_path, "Height CSV")->required()->check(CLI::ExistingFile);
  tt->add_option("--day", day_label, "Day label or unique prefix (default: last day)");
  tt->add_option("--test-value", test_value, "Hypothesized mean")->required();
  tt->add_flag("--json", as_json, "Print full-precision JSON");

  std::string data_dir, report_out = ".";
  int date = 1;
  auto* rep = app.add_subcommand("report", "Per-parameter value and regulator series for one virtual day");
  rep->add_option("data_dir", data_dir, "Datastore directory")->required();
  rep->add_option("--date", date, "Virtual day, 1-based")->check(CLI::PositiveNumber);
  rep->add_option("-o,--out", report_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*run || *gw || *nd) {
      Config config = config_from(config_path);
      StackOptions opts;
      opts.gateway = !*nd;
      opts.node = !*gw;
      if (*nd && first_seq > 0) opts.first_seq = first_seq;
      try {
        return serve(config, opts, duration_s);
      } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
      }
    }

    if (*rp) {
      Config config = config_from(config_path);
      auto readings = store::read_readings_csv(readings_path);
      auto csv = report::events_csv(report::replay_events(readings, config.thresholds, config.node.node_id));
      if (out_path.empty()) {
        std::cout << csv;
      } else {
        std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
        out << csv;
        if (!out) throw std::runtime_error("cannot write " + out_path);
      }
      return kOk;
    }

    if (*tt) {
      auto table = stats::parse_height_csv(read_file(heights_path));
      std::size_t day = table.day_count() - 1;
      if (!day_label.empty()) {
        auto found = table.find_day(day_label);
        if (!found) {
          std::cerr << "error: unknown day '" << day_label << "'; available:\n";
          for (const auto& l : table.day_labels) std::cerr << "  " << l << "\n";
          return kUsage;
        }
        day = *found;
      }
      auto col = table.column(day);
      auto r = stats::one_sample_ttest(col, test_value);
      if (as_json) {
        std::cout << api::ttest_json(table.day_labels[day], r) << "\n";
      } else {
        print_ttest(std::cout, table.day_labels[day], r);
      }
      return kOk;
    }

    if (*rep) {
      auto files = report::report_from_dir(data_dir, date);
      report::write_files(files, report_out);
      for (const auto& [name, _] : files) std::cout << (std::filesystem::path(report_out) / name).string() << "\n";
      return kOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const store::CsvError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  } catch (const stats::HeightParseError& e) {
    std::cerr << "error: " << heights_path << " row " << e.row() << ": " << e.what() << "\n";
    return kFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}
