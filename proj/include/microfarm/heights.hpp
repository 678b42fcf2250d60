#ifndef MICROFARM_HEIGHTS_HPP
#define MICROFARM_HEIGHTS_HPP

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace microfarm::stats {

struct HeightRecord {
  int sample_id = 0;
  std::string day_label;
  double height_cm = 0.0;
  friend bool operator==(const HeightRecord&, const HeightRecord&) = default;
};

// Parse failure with a 1-based row (file line) and column; column 0 means
// the whole row.
class HeightParseError : public std::runtime_error {
 public:
  HeightParseError(std::size_t row, std::size_t column, const std::string& what);
  std::size_t row() const { return row_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

// Sample rows x day columns, header `sample,<day label>,...`.
struct HeightTable {
  std::vector<std::string> day_labels;
  std::vector<int> sample_ids;
  std::vector<std::vector<double>> heights;  // [sample][day]

  std::size_t sample_count() const { return sample_ids.size(); }
  std::size_t day_count() const { return day_labels.size(); }

  // Column index for a day: exact label, else the unique label that starts
  // with `query` followed by a space ("Day 29" matches "Day 29 6-Feb").
  std::optional<std::size_t> find_day(std::string_view query) const;
  std::vector<double> column(std::size_t day) const;
  // One record per cell, day-major.
  std::vector<HeightRecord> records() const;
};

HeightTable parse_height_csv(std::string_view text);
HeightTable load_height_csv(const std::filesystem::path& path);
// Inverse of parse for tables it produced: numbers in shortest round-trip form.
std::string format_height_csv(const HeightTable& table);

}  // namespace microfarm::stats

#endif  // MICROFARM_HEIGHTS_HPP
