#ifndef MICROFARM_DATASTORE_HPP
#define MICROFARM_DATASTORE_HPP

#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "microfarm/types.hpp"

namespace microfarm::store {

inline constexpr const char* kReadingsHeader = "ts_ms,node_id,seq,temp_c,moisture_adc,lux";
inline constexpr const char* kEventsHeader = "ts_ms,actuator,action,source,cause_seq,cause_value";
inline constexpr const char* kModesHeader = "ts_ms,mode,changed_by";
inline constexpr const char* kVisitsHeader = "user,ts_ms,temp_c,moisture_adc,lux";

struct SeriesPoint {
  TimeMs ts_ms = 0;
  double value = 0.0;
  friend bool operator==(const SeriesPoint&, const SeriesPoint&) = default;
};

struct VisitRecord {
  std::string user;
  TimeMs ts_ms = 0;
  SnapshotValues snapshot;
  friend bool operator==(const VisitRecord&, const VisitRecord&) = default;
};

// Malformed persisted data. `line` is 1-based within `file`.
class CsvError : public std::runtime_error {
 public:
  CsvError(std::string file, std::size_t line, const std::string& what);
  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

// Row codecs, shared with replay/report tooling.
std::string format_reading_row(const SensorReading& r);
std::string format_event_row(const ActuationEvent& e);
std::string format_mode_row(const ControlMode& m);
std::string format_visit_row(const VisitRecord& v);
// Throws std::invalid_argument describing the first bad field.
SensorReading parse_reading_row(std::string_view row);
ActuationEvent parse_event_row(std::string_view row);
ControlMode parse_mode_row(std::string_view row);
VisitRecord parse_visit_row(std::string_view row);

// Reads a whole CSV in one of the formats above. A final line without a
// terminator (torn write) is ignored. Throws CsvError.
std::vector<SensorReading> read_readings_csv(const std::filesystem::path& path);
std::vector<ActuationEvent> read_events_csv(const std::filesystem::path& path);
std::vector<ControlMode> read_modes_csv(const std::filesystem::path& path);

// Safe for CSV cells: non-empty, no separators, quotes or control bytes.
bool valid_label(std::string_view s);

struct StoreConfig {
  std::filesystem::path dir = "data/run";
  int mem_window_h = 48;
};

// Append-only persistence of readings, actuation events, mode changes and
// visits; one CSV per stream under `dir`.
//
// Every append is written to its file with a single write(2) before the call
// returns, so a killed process loses nothing that was acknowledged. All
// operations take one mutex and are linearizable.
//
// Readings older than mem_window_h behind the newest are evicted from memory
// (they stay on disk); events, modes and visits are kept in full.
class Datastore {
 public:
  struct Duplicate {};

  explicit Datastore(StoreConfig config);
  ~Datastore();
  Datastore(const Datastore&) = delete;
  Datastore& operator=(const Datastore&) = delete;

  // Row id (1-based, counting every reading ever stored) or nullopt when
  // (node_id, seq) is already present.
  std::optional<std::int64_t> append_reading(const SensorReading& r);
  void append_event(const ActuationEvent& e);
  void append_mode(const ControlMode& m);

  void record_visit(const VisitRecord& v);
  std::optional<VisitRecord> last_visit(const std::string& user) const;

  // Readings with now - window_s*1000 <= ts <= now, ascending by ts.
  // Throws std::invalid_argument when window_s <= 0.
  std::vector<SeriesPoint> query_window(Param param, TimeMs now_ms, std::int64_t window_s) const;

  std::vector<SensorReading> readings() const;
  std::vector<ActuationEvent> events() const;
  std::vector<ControlMode> modes() const;
  std::vector<VisitRecord> visits() const;

  std::size_t reading_count() const;
  std::optional<SensorReading> latest_reading() const;
  std::optional<std::int64_t> max_seq(const std::string& node_id) const;
  // Newest timestamp across readings, events and modes.
  std::optional<TimeMs> max_timestamp() const;

  const std::filesystem::path& dir() const { return config_.dir; }

 private:
  struct File {
    int fd = -1;
    std::filesystem::path path;
  };

  void open_file(File& f, const char* name, const char* header);
  void append_line(File& f, const std::string& line);
  void load();
  void evict_locked();

  StoreConfig config_;
  mutable std::mutex mu_;
  File readings_file_, events_file_, modes_file_, visits_file_;

  std::deque<SensorReading> readings_;
  bool readings_sorted_ = true;
  std::map<std::string, std::set<std::int64_t>> seen_;
  std::int64_t total_readings_ = 0;
  std::vector<ActuationEvent> events_;
  std::vector<ControlMode> modes_;
  std::map<std::string, VisitRecord> visits_;
  std::vector<VisitRecord> visit_log_;
};

}  // namespace microfarm::store

#endif  // MICROFARM_DATASTORE_HPP
