#include "microfarm/heights.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace microfarm::stats {

HeightParseError::HeightParseError(std::size_t row, std::size_t column, const std::string& what)
    : std::runtime_error("row " + std::to_string(row) +
                         (column ? ", column " + std::to_string(column) : std::string()) + ": " + what),
      row_(row),
      column_(column) {}

namespace {

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    auto c = line.find(',', start);
    if (c == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, c - start));
    start = c + 1;
  }
}

}  // namespace

std::optional<std::size_t> HeightTable::find_day(std::string_view query) const {
  for (std::size_t i = 0; i < day_labels.size(); ++i) {
    if (day_labels[i] == query) return i;
  }
  std::optional<std::size_t> hit;
  for (std::size_t i = 0; i < day_labels.size(); ++i) {
    const auto& l = day_labels[i];
    if (l.size() > query.size() && l.compare(0, query.size(), query) == 0 && l[query.size()] == ' ') {
      if (hit) return std::nullopt;  // ambiguous
      hit = i;
    }
  }
  return hit;
}

std::vector<double> HeightTable::column(std::size_t day) const {
  std::vector<double> out;
  out.reserve(heights.size());
  for (const auto& row : heights) out.push_back(row.at(day));
  return out;
}

std::vector<HeightRecord> HeightTable::records() const {
  std::vector<HeightRecord> out;
  for (std::size_t d = 0; d < day_labels.size(); ++d) {
    for (std::size_t s = 0; s < sample_ids.size(); ++s) {
      out.push_back(HeightRecord{sample_ids[s], day_labels[d], heights[s][d]});
    }
  }
  return out;
}

HeightTable parse_height_csv(std::string_view text) {
  HeightTable table;
  std::size_t pos = 0, row = 0;
  bool header = true;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++row;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) {
      if (pos >= text.size()) break;  // trailing newline
      throw HeightParseError(row, 0, "empty line");
    }
    auto cells = split_cells(line);
    if (header) {
      if (cells.size() < 2 || cells[0] != "sample") {
        throw HeightParseError(row, 1, "header must be 'sample,<day labels...>'");
      }
      for (std::size_t c = 1; c < cells.size(); ++c) {
        if (cells[c].empty()) throw HeightParseError(row, c + 1, "empty day label");
        table.day_labels.emplace_back(cells[c]);
      }
      header = false;
      continue;
    }
    if (cells.size() != table.day_labels.size() + 1) {
      throw HeightParseError(row, 0,
                             "expected " + std::to_string(table.day_labels.size() + 1) + " cells, got " +
                                 std::to_string(cells.size()));
    }
    int id = 0;
    auto [ip, iec] = std::from_chars(cells[0].data(), cells[0].data() + cells[0].size(), id);
    if (cells[0].empty() || iec != std::errc{} || ip != cells[0].data() + cells[0].size()) {
      throw HeightParseError(row, 1, "sample id '" + std::string(cells[0]) + "' is not an integer");
    }
    std::vector<double> values;
    for (std::size_t c = 1; c < cells.size(); ++c) {
      double v = 0;
      auto [p, ec] = std::from_chars(cells[c].data(), cells[c].data() + cells[c].size(), v);
      if (cells[c].empty() || ec != std::errc{} || p != cells[c].data() + cells[c].size() || !std::isfinite(v)) {
        throw HeightParseError(row, c + 1, "'" + std::string(cells[c]) + "' is not a number");
      }
      if (!(v > 0.0)) throw HeightParseError(row, c + 1, "height must be > 0");
      values.push_back(v);
    }
    table.sample_ids.push_back(id);
    table.heights.push_back(std::move(values));
  }
  if (header) throw HeightParseError(1, 0, "empty file");
  return table;
}

HeightTable load_height_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_height_csv(ss.str());
}

std::string format_height_csv(const HeightTable& table) {
  std::string out = "sample";
  for (const auto& l : table.day_labels) out += "," + l;
  out += "\n";
  for (std::size_t s = 0; s < table.sample_ids.size(); ++s) {
    out += std::to_string(table.sample_ids[s]);
    for (double v : table.heights[s]) {
      char buf[64];
      auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
      (void)ec;
      out += ",";
      out.append(buf, p);
    }
    out += "\n";
  }
  return out;
}

}  // namespace microfarm::stats
