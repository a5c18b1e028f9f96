#include "ttp/trips.hpp"

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ttp/error.hpp"
#include "ttp/geo.hpp"
#include "ttp/local_time.hpp"

namespace ttp::trips {

using ingest::ReasonKind;

SegmentReport& SegmentReport::operator+=(const SegmentReport& o) {
  total_records += o.total_records;
  assigned_records += o.assigned_records;
  orphan_records += o.orphan_records;
  incomplete_records += o.incomplete_records;
  degenerate_records += o.degenerate_records;
  trips += o.trips;
  abandoned_trips += o.abandoned_trips;
  degenerate_trips += o.degenerate_trips;
  return *this;
}

TripAttributes compute_attributes(std::span<const GpsRecord> points) {
  if (points.size() < 2) throw InvalidInput("trip needs at least 2 points");
  TripAttributes a;
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].timestamp < points[i - 1].timestamp) {
      throw InvalidInput("trip timestamps must be non-decreasing");
    }
    a.distance_km += geo::haversine_km(points[i - 1].position, points[i].position);
  }
  a.duration_s = static_cast<double>(points.back().timestamp - points.front().timestamp);
  if (a.duration_s <= 0.0) throw DegenerateTrip("trip has zero duration");
  a.avg_speed_kmh = a.distance_km / (a.duration_s / 3600.0);
  return a;
}

SegmentResult segment_trips(std::span<const GpsRecord> records) {
  SegmentResult out;
  auto& rep = out.report;
  rep.total_records = records.size();

  std::vector<GpsRecord> pending;
  bool open = false;
  std::size_t emitted = 0;

  for (const auto& r : records) {
    const auto kind = r.reason.kind;
    if (kind == ReasonKind::IgnitionOn) {
      if (open) {
        rep.incomplete_records += pending.size();
        ++rep.abandoned_trips;
      }
      pending.clear();
      pending.push_back(r);
      open = true;
    } else if (!open) {
      ++rep.orphan_records;
    } else if (kind == ReasonKind::IgnitionOff) {
      pending.push_back(r);
      open = false;
      try {
        const TripAttributes a = compute_attributes(pending);
        Trip t;
        t.vehicle_id = r.vehicle_id;
        t.trip_id = r.vehicle_id + ":" + std::to_string(emitted++);
        t.start_ts = pending.front().timestamp;
        t.end_ts = pending.back().timestamp;
        t.distance_km = a.distance_km;
        t.duration_s = a.duration_s;
        t.avg_speed_kmh = a.avg_speed_kmh;
        t.points = std::move(pending);
        rep.assigned_records += t.points.size();
        ++rep.trips;
        out.trips.push_back(std::move(t));
      } catch (const DegenerateTrip&) {
        rep.degenerate_records += pending.size();
        ++rep.degenerate_trips;
      }
      pending.clear();
    } else {
      pending.push_back(r);
    }
  }
  if (open) {
    rep.incomplete_records += pending.size();
    ++rep.abandoned_trips;
  }
  return out;
}

SegmentResult segment_all(const std::map<std::string, std::vector<GpsRecord>>& by_vehicle) {
  SegmentResult all;
  for (const auto& [id, records] : by_vehicle) {
    SegmentResult one = segment_trips(records);
    all.report += one.report;
    for (auto& t : one.trips) all.trips.push_back(std::move(t));
  }
  return all;
}

const char* to_string(DropReason r) {
  switch (r) {
    case DropReason::OutsideWindow: return "outside_window";
    case DropReason::TooLong: return "too_long";
    case DropReason::TooFewPoints: return "too_few_points";
    case DropReason::TooShort: return "too_short";
  }
  return "unknown";
}

std::optional<DropReason> check_filter(const Trip& trip, const FilterConfig& config) {
  const int start = to_local(trip.start_ts).seconds_of_day();
  if (start < config.window_start_s || start >= config.window_end_s) {
    return DropReason::OutsideWindow;
  }
  if (trip.duration_s > config.max_duration_s) return DropReason::TooLong;
  if (trip.points.size() < config.min_points) return DropReason::TooFewPoints;
  if (trip.distance_km < config.min_distance_km) return DropReason::TooShort;
  return std::nullopt;
}

FilterResult filter_trips(std::vector<Trip> trips, const FilterConfig& config) {
  FilterResult out;
  for (auto& t : trips) {
    if (auto why = check_filter(t, config)) {
      out.dropped.emplace_back(t.trip_id, *why);
    } else {
      out.kept.push_back(std::move(t));
    }
  }
  return out;
}

nlohmann::json to_json(const Trip& t) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : t.points) {
    pts.push_back({{"timestamp", p.timestamp},
                   {"lat", p.position.lat},
                   {"lon", p.position.lon},
                   {"speed", p.speed_kmh},
                   {"altitude", p.altitude_m},
                   {"reason", p.reason.to_string()}});
  }
  return nlohmann::json{{"trip_id", t.trip_id},
                        {"vehicle_id", t.vehicle_id},
                        {"start_ts", t.start_ts},
                        {"end_ts", t.end_ts},
                        {"distance_km", t.distance_km},
                        {"duration_s", t.duration_s},
                        {"avg_speed_kmh", t.avg_speed_kmh},
                        {"points", std::move(pts)}};
}

Trip trip_from_json(const nlohmann::json& j) {
  static const ingest::ReasonMap kReasons;
  Trip t;
  try {
    t.trip_id = j.at("trip_id").get<std::string>();
    t.vehicle_id = j.at("vehicle_id").get<std::string>();
    t.start_ts = j.at("start_ts").get<std::int64_t>();
    t.end_ts = j.at("end_ts").get<std::int64_t>();
    t.distance_km = j.at("distance_km").get<double>();
    t.duration_s = j.at("duration_s").get<double>();
    t.avg_speed_kmh = j.at("avg_speed_kmh").get<double>();
    for (const auto& p : j.at("points")) {
      GpsRecord r;
      r.vehicle_id = t.vehicle_id;
      r.timestamp = p.at("timestamp").get<std::int64_t>();
      r.position = {p.at("lat").get<double>(), p.at("lon").get<double>()};
      r.speed_kmh = p.value("speed", 0.0);
      r.altitude_m = p.value("altitude", 0.0);
      r.reason = kReasons.map(p.at("reason").get<std::string>());
      t.points.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("bad trip record: ") + e.what());
  }
  if (t.points.size() < 2) throw InvalidInput("trip " + t.trip_id + " has fewer than 2 points");
  if (!(t.duration_s > 0.0)) throw InvalidInput("trip " + t.trip_id + " has non-positive duration");
  return t;
}

}  // namespace ttp::trips
