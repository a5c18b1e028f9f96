#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ttp/geo.hpp"

namespace ttp::ingest {

enum class ReasonKind { IgnitionOn, IgnitionOff, Turn, Brake, SpeedChange, Periodic, Other };

struct EventReason {
  ReasonKind kind = ReasonKind::Other;
  std::string label;  // only meaningful for Other; preserves the raw text

  // Canonical text ("Ignition On", "Speed Change", ...) or the preserved label.
  std::string to_string() const;
  friend bool operator==(const EventReason&, const EventReason&) = default;
};

// Maps raw reason strings to variants. Matching ignores case, spaces,
// underscores and hyphens. Unknown strings become Other with the label kept.
class ReasonMap {
 public:
  // Built-in vocabulary: ignition on/off, turn, brake(s), speed change /
  // increase / decrease, periodic / timer / interval.
  ReasonMap();

  // Entries as {"raw label": "IgnitionOn" | "IgnitionOff" | "Turn" | "Brake" |
  // "SpeedChange" | "Periodic"}. Added on top of the built-in vocabulary.
  static ReasonMap from_json(const nlohmann::json& j);

  void add(std::string_view raw, ReasonKind kind);
  EventReason map(std::string_view raw) const;

 private:
  std::unordered_map<std::string, ReasonKind> table_;
};

struct GpsRecord {
  std::string vehicle_id;
  std::int64_t timestamp = 0;  // epoch seconds, UTC
  geo::GeoPoint position;
  double speed_kmh = 0.0;
  double altitude_m = 0.0;
  EventReason reason;
};

// Header names for each logical field.
struct ColumnMap {
  std::string vehicle_id = "vehicle_id";
  std::string timestamp = "timestamp";
  std::string lat = "lat";
  std::string lon = "lon";
  std::string speed = "speed";
  std::string altitude = "altitude";
  std::string reason = "reason";
};

struct Rejection {
  std::size_t line = 0;  // 1-based line number in the source
  std::string message;
};

struct ParseResult {
  std::vector<GpsRecord> records;
  std::vector<Rejection> rejections;
  std::size_t rows = 0;  // data rows seen; rows == records + rejections
};

// Reads header + rows of comma-separated text. Malformed rows are reported,
// never fatal. Throws SchemaError when a mandatory column (vehicle_id,
// timestamp, lat, lon, reason) is absent; speed and altitude default to 0.
ParseResult parse_records(std::istream& source, const ColumnMap& columns = {},
                          const ReasonMap& reasons = {});

// Opens and parses a CSV file; throws IoError when it cannot be read.
ParseResult parse_records_file(const std::string& path, const ColumnMap& columns = {},
                               const ReasonMap& reasons = {});

// Per-vehicle lists ordered by (timestamp, original index).
std::map<std::string, std::vector<GpsRecord>> sort_and_group(std::vector<GpsRecord> records);

nlohmann::json to_json(const GpsRecord& r);
GpsRecord record_from_json(const nlohmann::json& j, const ReasonMap& reasons = {});

void write_jsonl(std::ostream& out, const std::vector<GpsRecord>& records);
// Lines that fail to decode or validate are rejected like malformed CSV rows.
ParseResult read_jsonl(std::istream& in, const ReasonMap& reasons = {});

}  // namespace ttp::ingest
