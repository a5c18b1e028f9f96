#include "ttp/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ttp/error.hpp"
#include "ttp/local_time.hpp"

namespace ttp::ingest {

namespace {

std::string normalize_key(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    if (c == ' ' || c == '_' || c == '-' || c == '\t') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Splits one CSV line; double quotes group fields and "" escapes a quote.
std::optional<std::vector<std::string>> split_csv(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) return std::nullopt;
  fields.push_back(std::move(cur));
  return fields;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

ReasonKind kind_from_name(const std::string& name) {
  static const std::pair<const char*, ReasonKind> kNames[] = {
      {"IgnitionOn", ReasonKind::IgnitionOn}, {"IgnitionOff", ReasonKind::IgnitionOff},
      {"Turn", ReasonKind::Turn},             {"Brake", ReasonKind::Brake},
      {"SpeedChange", ReasonKind::SpeedChange}, {"Periodic", ReasonKind::Periodic}};
  for (const auto& [n, k] : kNames) {
    if (name == n) return k;
  }
  throw InvalidInput("unknown reason variant '" + name + "'");
}

// Returns an error message, or nullopt when the record is acceptable.
std::optional<std::string> check_record(const GpsRecord& r) {
  if (r.vehicle_id.empty()) return "empty vehicle_id";
  if (r.timestamp <= 0) return "timestamp must be positive";
  if (!geo::is_valid(r.position)) return "coordinate out of range";
  if (!std::isfinite(r.speed_kmh) || r.speed_kmh < 0) return "speed must be finite and >= 0";
  if (!std::isfinite(r.altitude_m)) return "altitude must be finite";
  return std::nullopt;
}

}  // namespace

std::string EventReason::to_string() const {
  switch (kind) {
    case ReasonKind::IgnitionOn: return "Ignition On";
    case ReasonKind::IgnitionOff: return "Ignition Off";
    case ReasonKind::Turn: return "Turn";
    case ReasonKind::Brake: return "Brake";
    case ReasonKind::SpeedChange: return "Speed Change";
    case ReasonKind::Periodic: return "Periodic";
    case ReasonKind::Other: return label;
  }
  return label;
}

ReasonMap::ReasonMap() {
  add("Ignition On", ReasonKind::IgnitionOn);
  add("Ignition Off", ReasonKind::IgnitionOff);
  add("Turn", ReasonKind::Turn);
  add("Brake", ReasonKind::Brake);
  add("Brakes", ReasonKind::Brake);
  add("Speed Change", ReasonKind::SpeedChange);
  add("Speed Increase", ReasonKind::SpeedChange);
  add("Speed Decrease", ReasonKind::SpeedChange);
  add("Periodic", ReasonKind::Periodic);
  add("Timer", ReasonKind::Periodic);
  add("Interval", ReasonKind::Periodic);
}

ReasonMap ReasonMap::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SchemaError("reason map must be a JSON object");
  ReasonMap m;
  for (const auto& [raw, target] : j.items()) {
    if (!target.is_string()) throw SchemaError("reason map values must be strings");
    m.add(raw, kind_from_name(target.get<std::string>()));
  }
  return m;
}

void ReasonMap::add(std::string_view raw, ReasonKind kind) {
  table_[normalize_key(raw)] = kind;
}

EventReason ReasonMap::map(std::string_view raw) const {
  const auto it = table_.find(normalize_key(raw));
  if (it == table_.end()) return EventReason{ReasonKind::Other, std::string(trim(raw))};
  return EventReason{it->second, {}};
}

ParseResult parse_records(std::istream& source, const ColumnMap& columns,
                          const ReasonMap& reasons) {
  ParseResult result;
  std::string line;
  std::size_t line_no = 0;

  bool have_header = false;
  while (!have_header && std::getline(source, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    // tolerate a UTF-8 byte order mark
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (!trim(line).empty()) have_header = true;
  }
  if (source.bad()) throw IoError("failed reading input");
  if (!have_header) throw SchemaError("input has no header row");

  const auto header = split_csv(line);
  if (!header) throw SchemaError("malformed header row");
  auto find_col = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header->size(); ++i) {
      if (trim((*header)[i]) == name) return i;
    }
    return std::nullopt;
  };
  auto require = [&](const std::string& name) {
    auto idx = find_col(name);
    if (!idx) throw SchemaError("missing mandatory column '" + name + "'");
    return *idx;
  };
  const std::size_t c_vehicle = require(columns.vehicle_id);
  const std::size_t c_ts = require(columns.timestamp);
  const std::size_t c_lat = require(columns.lat);
  const std::size_t c_lon = require(columns.lon);
  const std::size_t c_reason = require(columns.reason);
  const auto c_speed = find_col(columns.speed);
  const auto c_alt = find_col(columns.altitude);

  while (std::getline(source, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    ++result.rows;
    auto reject = [&](std::string msg) {
      result.rejections.push_back({line_no, std::move(msg)});
    };

    const auto fields = split_csv(line);
    if (!fields) {
      reject("unterminated quote");
      continue;
    }
    if (fields->size() != header->size()) {
      reject("expected " + std::to_string(header->size()) + " fields, got " +
             std::to_string(fields->size()));
      continue;
    }
    const auto& f = *fields;
    GpsRecord r;
    r.vehicle_id = std::string(trim(f[c_vehicle]));
    const auto ts = parse_timestamp(f[c_ts]);
    const auto lat = parse_double(f[c_lat]);
    const auto lon = parse_double(f[c_lon]);
    if (!ts) {
      reject("unparseable timestamp '" + f[c_ts] + "'");
      continue;
    }
    if (!lat || !lon) {
      reject("unparseable coordinate");
      continue;
    }
    r.timestamp = *ts;
    r.position = {*lat, *lon};
    if (c_speed) {
      const auto v = parse_double(f[*c_speed]);
      if (!v) {
        reject("unparseable speed");
        continue;
      }
      r.speed_kmh = *v;
    }
    if (c_alt) {
      const auto v = parse_double(f[*c_alt]);
      if (!v) {
        reject("unparseable altitude");
        continue;
      }
      r.altitude_m = *v;
    }
    r.reason = reasons.map(f[c_reason]);
    if (auto err = check_record(r)) {
      reject(*err);
      continue;
    }
    result.records.push_back(std::move(r));
  }
  if (source.bad()) throw IoError("failed reading input");
  return result;
}

ParseResult parse_records_file(const std::string& path, const ColumnMap& columns,
                               const ReasonMap& reasons) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return parse_records(in, columns, reasons);
}

std::map<std::string, std::vector<GpsRecord>> sort_and_group(std::vector<GpsRecord> records) {
  std::map<std::string, std::vector<GpsRecord>> groups;
  for (auto& r : records) groups[r.vehicle_id].push_back(std::move(r));
  for (auto& [id, list] : groups) {
    std::stable_sort(list.begin(), list.end(), [](const GpsRecord& a, const GpsRecord& b) {
      return a.timestamp < b.timestamp;
    });
  }
  return groups;
}

nlohmann::json to_json(const GpsRecord& r) {
  return nlohmann::json{{"vehicle_id", r.vehicle_id},  {"timestamp", r.timestamp},
                        {"lat", r.position.lat},       {"lon", r.position.lon},
                        {"speed", r.speed_kmh},        {"altitude", r.altitude_m},
                        {"reason", r.reason.to_string()}};
}

GpsRecord record_from_json(const nlohmann::json& j, const ReasonMap& reasons) {
  GpsRecord r;
  try {
    r.vehicle_id = j.at("vehicle_id").get<std::string>();
    r.timestamp = j.at("timestamp").get<std::int64_t>();
    r.position = {j.at("lat").get<double>(), j.at("lon").get<double>()};
    r.speed_kmh = j.value("speed", 0.0);
    r.altitude_m = j.value("altitude", 0.0);
    r.reason = reasons.map(j.at("reason").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("bad record: ") + e.what());
  }
  if (auto err = check_record(r)) throw InvalidInput("bad record: " + *err);
  return r;
}

void write_jsonl(std::ostream& out, const std::vector<GpsRecord>& records) {
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

ParseResult read_jsonl(std::istream& in, const ReasonMap& reasons) {
  ParseResult result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++result.rows;
    try {
      result.records.push_back(record_from_json(nlohmann::json::parse(line), reasons));
    } catch (const nlohmann::json::exception& e) {
      result.rejections.push_back({line_no, e.what()});
    } catch (const InvalidInput& e) {
      result.rejections.push_back({line_no, e.what()});
    }
  }
  if (in.bad()) throw IoError("failed reading input");
  return result;
}

}  // namespace ttp::ingest
