#ifndef MICROFARM_REPORT_HPP
#define MICROFARM_REPORT_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "microfarm/control.hpp"
#include "microfarm/types.hpp"

namespace microfarm::report {

inline constexpr TimeMs kDayMs = 86'400'000;

// Runs readings (ascending by timestamp) through a fresh engine in AUTO and
// returns the events it would log, as if every command were acknowledged.
// Only readings from `node_id` are used when it is set.
std::vector<ActuationEvent> replay_events(const std::vector<SensorReading>& readings,
                                          const control::Thresholds& th,
                                          const std::optional<std::string>& node_id = std::nullopt);

// Header plus one row per event, in datastore format.
std::string events_csv(const std::vector<ActuationEvent>& events);

// Per parameter for virtual day `day` (1-based, [ (day-1) d, day d ) ):
//   <param>_values.csv     ts_ms,value
//   <param>_regulator.csv  ts_ms,on   (regulator state right after each reading)
// Keyed by file name.
using Files = std::map<std::string, std::string>;
Files build_report(const std::vector<SensorReading>& readings, const std::vector<ActuationEvent>& events,
                   int day);

class ReportError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Reads readings.csv and events.csv from `data_dir`. Throws ReportError when
// either is missing, store::CsvError when malformed.
Files report_from_dir(const std::filesystem::path& data_dir, int day);

void write_files(const Files& files, const std::filesystem::path& out_dir);

}  // namespace microfarm::report

#endif  // MICROFARM_REPORT_HPP
