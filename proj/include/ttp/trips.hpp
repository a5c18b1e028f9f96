#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ttp/ingest.hpp"

namespace ttp::trips {

using ingest::GpsRecord;

struct TripAttributes {
  double distance_km = 0.0;
  double duration_s = 0.0;
  double avg_speed_kmh = 0.0;
};

struct Trip {
  std::string trip_id;  // "<vehicle_id>:<n>", n counts emitted trips per vehicle
  std::string vehicle_id;
  std::vector<GpsRecord> points;
  std::int64_t start_ts = 0;
  std::int64_t end_ts = 0;
  double distance_km = 0.0;
  double duration_s = 0.0;
  double avg_speed_kmh = 0.0;
};

// Counters for one segmentation run. Every input record lands in exactly one of
// assigned / orphan / incomplete / degenerate.
struct SegmentReport {
  std::size_t total_records = 0;
  std::size_t assigned_records = 0;
  std::size_t orphan_records = 0;      // outside any On..Off pair
  std::size_t incomplete_records = 0;  // pending trip abandoned by a repeated On or end of stream
  std::size_t degenerate_records = 0;  // On..Off pair with zero duration
  std::size_t trips = 0;
  std::size_t abandoned_trips = 0;
  std::size_t degenerate_trips = 0;

  SegmentReport& operator+=(const SegmentReport& o);
  bool conserves() const {
    return assigned_records + orphan_records + incomplete_records + degenerate_records ==
           total_records;
  }
};

struct SegmentResult {
  std::vector<Trip> trips;
  SegmentReport report;
};

// Distance, duration and average speed of an ordered point list.
// Throws InvalidInput for < 2 points or decreasing timestamps, DegenerateTrip
// when the duration is zero.
TripAttributes compute_attributes(std::span<const GpsRecord> points);

// Splits one vehicle's timestamp-sorted records at IgnitionOn / IgnitionOff.
// A repeated IgnitionOn abandons the pending trip and starts a new one.
SegmentResult segment_trips(std::span<const GpsRecord> records);

// Segments every vehicle and concatenates the trips in vehicle id order.
SegmentResult segment_all(const std::map<std::string, std::vector<GpsRecord>>& by_vehicle);

enum class DropReason { OutsideWindow, TooLong, TooFewPoints, TooShort };
const char* to_string(DropReason r);

struct FilterConfig {
  int window_start_s = 6 * 3600;  // local seconds-of-day, inclusive
  int window_end_s = 23 * 3600;   // exclusive
  double max_duration_s = 3600.0;
  std::size_t min_points = 2;
  double min_distance_km = 0.2;
};

struct FilterResult {
  std::vector<Trip> kept;
  std::vector<std::pair<std::string, DropReason>> dropped;  // trip id and first violated rule
};

// First violated rule, or nullopt when the trip passes. The window keys on the
// local start time only.
std::optional<DropReason> check_filter(const Trip& trip, const FilterConfig& config);
FilterResult filter_trips(std::vector<Trip> trips, const FilterConfig& config = {});

nlohmann::json to_json(const Trip& t);
Trip trip_from_json(const nlohmann::json& j);

}  // namespace ttp::trips
