#include "microfarm/datastore.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace microfarm::store {

namespace fs = std::filesystem;

namespace {

std::vector<std::string_view> split(std::string_view row) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    auto c = row.find(',', start);
    if (c == std::string_view::npos) {
      out.push_back(row.substr(start));
      return out;
    }
    out.push_back(row.substr(start, c - start));
    start = c + 1;
  }
}

void expect_fields(const std::vector<std::string_view>& f, std::size_t n) {
  if (f.size() != n) {
    throw std::invalid_argument("expected " + std::to_string(n) + " fields, got " +
                                std::to_string(f.size()));
  }
}

std::int64_t to_int(std::string_view s, const char* name) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || p != s.data() + s.size()) {
    throw std::invalid_argument(std::string("bad ") + name + " '" + std::string(s) + "'");
  }
  return v;
}

double to_double(std::string_view s, const char* name) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(v)) {
    throw std::invalid_argument(std::string("bad ") + name + " '" + std::string(s) + "'");
  }
  return v;
}

std::string label(std::string_view s, const char* name) {
  if (!valid_label(s)) throw std::invalid_argument(std::string("bad ") + name + " '" + std::string(s) + "'");
  return std::string(s);
}

std::string format_cause_value(Actuator a, double v) {
  if (a == Actuator::Cooler) return format_temp(v);
  return std::to_string(std::llround(v));
}

template <class Row, class Parse>
std::vector<Row> read_csv(const fs::path& path, const char* header, Parse parse) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CsvError(path.string(), 0, "cannot open");
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<Row> rows;
  std::size_t pos = 0, line_no = 0;
  bool saw_header = false;
  while (pos < content.size()) {
    auto nl = content.find('\n', pos);
    if (nl == std::string::npos) break;  // torn final line
    std::string_view line(content.data() + pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!saw_header) {
      if (line != header) throw CsvError(path.string(), line_no, "expected header '" + std::string(header) + "'");
      saw_header = true;
      continue;
    }
    try {
      rows.push_back(parse(line));
    } catch (const std::invalid_argument& e) {
      throw CsvError(path.string(), line_no, e.what());
    }
  }
  if (!saw_header) throw CsvError(path.string(), 1, "missing header");
  return rows;
}

}  // namespace

CsvError::CsvError(std::string file, std::size_t line, const std::string& what)
    : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
      file_(std::move(file)),
      line_(line) {}

bool valid_label(std::string_view s) {
  if (s.empty() || s.size() > 128) return false;
  for (char c : s) {
    if (c < 0x20 || c >= 0x7f || c == ',' || c == '"') return false;
  }
  return true;
}

std::string format_reading_row(const SensorReading& r) {
  return std::to_string(r.timestamp_ms) + "," + r.node_id + "," + std::to_string(r.seq) + "," +
         format_temp(r.temp_c) + "," + std::to_string(r.moisture_adc) + "," + std::to_string(r.lux);
}

std::string format_event_row(const ActuationEvent& e) {
  std::string row = std::to_string(e.ts_ms) + "," + std::string(to_string(e.actuator)) + "," +
                    std::string(to_string(e.action)) + "," + std::string(to_string(e.source)) + ",";
  if (e.cause_reading_seq) row += std::to_string(*e.cause_reading_seq);
  row += ",";
  if (e.cause_param_value) row += format_cause_value(e.actuator, *e.cause_param_value);
  return row;
}

std::string format_mode_row(const ControlMode& m) {
  return std::to_string(m.changed_at_ms) + "," + std::string(to_string(m.mode)) + "," + m.changed_by;
}

std::string format_visit_row(const VisitRecord& v) {
  return v.user + "," + std::to_string(v.ts_ms) + "," + format_temp(v.snapshot.temp_c) + "," +
         std::to_string(v.snapshot.moisture_adc) + "," + std::to_string(v.snapshot.lux);
}

SensorReading parse_reading_row(std::string_view row) {
  auto f = split(row);
  expect_fields(f, 6);
  SensorReading r;
  r.timestamp_ms = to_int(f[0], "ts_ms");
  r.node_id = label(f[1], "node_id");
  r.seq = to_int(f[2], "seq");
  r.temp_c = to_double(f[3], "temp_c");
  r.moisture_adc = static_cast<int>(to_int(f[4], "moisture_adc"));
  r.lux = static_cast<int>(to_int(f[5], "lux"));
  if (r.temp_c < 0.0 || r.temp_c > 50.0) throw std::invalid_argument("temp_c out of range");
  if (r.moisture_adc < 0 || r.moisture_adc > 1023) throw std::invalid_argument("moisture_adc out of range");
  if (r.lux < 1 || r.lux > 65535) throw std::invalid_argument("lux out of range");
  return r;
}

ActuationEvent parse_event_row(std::string_view row) {
  auto f = split(row);
  expect_fields(f, 6);
  ActuationEvent e;
  e.ts_ms = to_int(f[0], "ts_ms");
  auto a = parse_actuator(f[1]);
  auto act = parse_action(f[2]);
  auto src = parse_source(f[3]);
  if (!a) throw std::invalid_argument("bad actuator '" + std::string(f[1]) + "'");
  if (!act) throw std::invalid_argument("bad action '" + std::string(f[2]) + "'");
  if (!src) throw std::invalid_argument("bad source '" + std::string(f[3]) + "'");
  e.actuator = *a;
  e.action = *act;
  e.source = *src;
  if (!f[4].empty()) e.cause_reading_seq = to_int(f[4], "cause_seq");
  if (!f[5].empty()) e.cause_param_value = to_double(f[5], "cause_value");
  return e;
}

ControlMode parse_mode_row(std::string_view row) {
  auto f = split(row);
  expect_fields(f, 3);
  ControlMode m;
  m.changed_at_ms = to_int(f[0], "ts_ms");
  auto mode = parse_mode(f[1]);
  if (!mode) throw std::invalid_argument("bad mode '" + std::string(f[1]) + "'");
  m.mode = *mode;
  m.changed_by = label(f[2], "changed_by");
  return m;
}

VisitRecord parse_visit_row(std::string_view row) {
  auto f = split(row);
  expect_fields(f, 5);
  VisitRecord v;
  v.user = label(f[0], "user");
  v.ts_ms = to_int(f[1], "ts_ms");
  v.snapshot.temp_c = to_double(f[2], "temp_c");
  v.snapshot.moisture_adc = static_cast<int>(to_int(f[3], "moisture_adc"));
  v.snapshot.lux = static_cast<int>(to_int(f[4], "lux"));
  return v;
}

std::vector<SensorReading> read_readings_csv(const fs::path& path) {
  return read_csv<SensorReading>(path, kReadingsHeader, parse_reading_row);
}

std::vector<ActuationEvent> read_events_csv(const fs::path& path) {
  return read_csv<ActuationEvent>(path, kEventsHeader, parse_event_row);
}

std::vector<ControlMode> read_modes_csv(const fs::path& path) {
  return read_csv<ControlMode>(path, kModesHeader, parse_mode_row);
}

Datastore::Datastore(StoreConfig config) : config_(std::move(config)) {
  if (config_.mem_window_h <= 0) throw std::invalid_argument("store.mem_window_h must be > 0");
  fs::create_directories(config_.dir);
  open_file(readings_file_, "readings.csv", kReadingsHeader);
  open_file(events_file_, "events.csv", kEventsHeader);
  open_file(modes_file_, "modes.csv", kModesHeader);
  open_file(visits_file_, "visits.csv", kVisitsHeader);
  load();
}

Datastore::~Datastore() {
  for (File* f : {&readings_file_, &events_file_, &modes_file_, &visits_file_}) {
    if (f->fd >= 0) ::close(f->fd);
  }
}

void Datastore::open_file(File& f, const char* name, const char* header) {
  f.path = config_.dir / name;
  f.fd = ::open(f.path.c_str(), O_RDWR | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (f.fd < 0) {
    throw std::runtime_error("cannot open " + f.path.string() + ": " + std::strerror(errno));
  }
  struct stat st {};
  fstat(f.fd, &st);
  if (st.st_size == 0) {
    append_line(f, header);
    return;
  }
  // Drop a torn final line left by an interrupted write.
  std::ifstream in(f.path, std::ios::binary);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (content.back() != '\n') {
    auto last_nl = content.rfind('\n');
    off_t keep = last_nl == std::string::npos ? 0 : static_cast<off_t>(last_nl + 1);
    if (ftruncate(f.fd, keep) != 0) {
      throw std::runtime_error("cannot truncate " + f.path.string());
    }
    if (keep == 0) append_line(f, header);
  }
}

void Datastore::append_line(File& f, const std::string& line) {
  std::string buf = line + "\n";
  std::size_t off = 0;
  while (off < buf.size()) {
    ssize_t n = ::write(f.fd, buf.data() + off, buf.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw std::runtime_error("write " + f.path.string() + ": " + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
}

void Datastore::load() {
  for (auto& r : read_readings_csv(readings_file_.path)) {
    seen_[r.node_id].insert(r.seq);
    ++total_readings_;
    if (!readings_.empty() && r.timestamp_ms < readings_.back().timestamp_ms) readings_sorted_ = false;
    readings_.push_back(std::move(r));
  }
  evict_locked();
  events_ = read_events_csv(events_file_.path);
  modes_ = read_modes_csv(modes_file_.path);
  for (auto& v : read_csv<VisitRecord>(visits_file_.path, kVisitsHeader, parse_visit_row)) {
    visits_[v.user] = v;
    visit_log_.push_back(std::move(v));
  }
}

void Datastore::evict_locked() {
  if (readings_.empty()) return;
  TimeMs newest = readings_.back().timestamp_ms;
  if (!readings_sorted_) {
    for (const auto& r : readings_) newest = std::max(newest, r.timestamp_ms);
  }
  const TimeMs horizon = newest - static_cast<TimeMs>(config_.mem_window_h) * 3'600'000;
  while (!readings_.empty() && readings_.front().timestamp_ms < horizon) readings_.pop_front();
}

std::optional<std::int64_t> Datastore::append_reading(const SensorReading& r) {
  if (!valid_label(r.node_id)) throw std::invalid_argument("bad node_id");
  std::lock_guard lk(mu_);
  auto& seqs = seen_[r.node_id];
  if (seqs.count(r.seq) != 0) return std::nullopt;
  append_line(readings_file_, format_reading_row(r));
  seqs.insert(r.seq);
  if (!readings_.empty() && r.timestamp_ms < readings_.back().timestamp_ms) readings_sorted_ = false;
  readings_.push_back(r);
  // Stored values are what a reparse would yield.
  readings_.back().temp_c = round_to_tenth(r.temp_c);
  evict_locked();
  return ++total_readings_;
}

void Datastore::append_event(const ActuationEvent& e) {
  std::lock_guard lk(mu_);
  append_line(events_file_, format_event_row(e));
  events_.push_back(e);
  if (events_.back().cause_param_value && e.actuator == Actuator::Cooler) {
    events_.back().cause_param_value = round_to_tenth(*e.cause_param_value);
  } else if (events_.back().cause_param_value) {
    events_.back().cause_param_value = static_cast<double>(std::llround(*e.cause_param_value));
  }
}

void Datastore::append_mode(const ControlMode& m) {
  if (!valid_label(m.changed_by)) throw std::invalid_argument("bad changed_by");
  std::lock_guard lk(mu_);
  append_line(modes_file_, format_mode_row(m));
  modes_.push_back(m);
}

void Datastore::record_visit(const VisitRecord& v) {
  if (!valid_label(v.user)) throw std::invalid_argument("bad user name");
  std::lock_guard lk(mu_);
  append_line(visits_file_, format_visit_row(v));
  VisitRecord stored = v;
  stored.snapshot.temp_c = round_to_tenth(v.snapshot.temp_c);
  visits_[v.user] = stored;
  visit_log_.push_back(stored);
}

std::optional<VisitRecord> Datastore::last_visit(const std::string& user) const {
  std::lock_guard lk(mu_);
  auto it = visits_.find(user);
  if (it == visits_.end()) return std::nullopt;
  return it->second;
}

std::vector<SeriesPoint> Datastore::query_window(Param param, TimeMs now_ms,
                                                 std::int64_t window_s) const {
  if (window_s <= 0) throw std::invalid_argument("window_s must be > 0");
  const TimeMs lo = now_ms - window_s * 1000;
  std::lock_guard lk(mu_);
  std::vector<SeriesPoint> out;
  auto begin = readings_.begin();
  if (readings_sorted_) {
    begin = std::lower_bound(readings_.begin(), readings_.end(), lo,
                             [](const SensorReading& r, TimeMs t) { return r.timestamp_ms < t; });
  }
  for (auto it = begin; it != readings_.end(); ++it) {
    if (it->timestamp_ms > now_ms) {
      if (readings_sorted_) break;
      continue;
    }
    if (it->timestamp_ms >= lo) out.push_back(SeriesPoint{it->timestamp_ms, it->value(param)});
  }
  if (!readings_sorted_) {
    std::stable_sort(out.begin(), out.end(),
                     [](const SeriesPoint& a, const SeriesPoint& b) { return a.ts_ms < b.ts_ms; });
  }
  return out;
}

std::vector<SensorReading> Datastore::readings() const {
  std::lock_guard lk(mu_);
  return {readings_.begin(), readings_.end()};
}

std::vector<ActuationEvent> Datastore::events() const {
  std::lock_guard lk(mu_);
  return events_;
}

std::vector<ControlMode> Datastore::modes() const {
  std::lock_guard lk(mu_);
  return modes_;
}

std::vector<VisitRecord> Datastore::visits() const {
  std::lock_guard lk(mu_);
  return visit_log_;
}

std::size_t Datastore::reading_count() const {
  std::lock_guard lk(mu_);
  return readings_.size();
}

std::optional<SensorReading> Datastore::latest_reading() const {
  std::lock_guard lk(mu_);
  if (readings_.empty()) return std::nullopt;
  return readings_.back();
}

std::optional<std::int64_t> Datastore::max_seq(const std::string& node_id) const {
  std::lock_guard lk(mu_);
  auto it = seen_.find(node_id);
  if (it == seen_.end() || it->second.empty()) return std::nullopt;
  return *it->second.rbegin();
}

std::optional<TimeMs> Datastore::max_timestamp() const {
  std::lock_guard lk(mu_);
  std::optional<TimeMs> best;
  auto bump = [&](TimeMs t) { best = std::max(best.value_or(t), t); };
  for (const auto& r : readings_) bump(r.timestamp_ms);
  for (const auto& e : events_) bump(e.ts_ms);
  for (const auto& m : modes_) bump(m.changed_at_ms);
  return best;
}

}  // namespace microfarm::store
