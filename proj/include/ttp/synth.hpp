#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ttp/geo.hpp"
#include "ttp/ingest.hpp"
#include "ttp/mapmatch.hpp"

namespace ttp::synth {

// Travel-time multiplier per local hour: 1.5 for 08-09 and 17-18, else 1.0.
std::array<double, 24> default_congestion();

struct SynthConfig {
  std::uint64_t seed = 42;
  std::size_t n_vehicles = 25;
  std::size_t n_trips = 5000;
  std::size_t rows = 24;
  std::size_t cols = 24;
  double spacing_m = 500.0;
  std::size_t n_roads = 6;
  // Grid centre. On the equator east-west grid lines are great circles, so
  // edge bearings are exact multiples of 90 degrees.
  geo::GeoPoint center{0.0, 73.05};
  // Inclusive local calendar range of trip start days.
  int first_year = 2019, first_month = 4, first_day = 1;
  int last_year = 2019, last_month = 10, last_day = 31;
  double gps_noise_m = 5.0;
  double duration_noise_s = 30.0;
  double base_speed_kmh = 40.0;
  double sample_interval_s = 20.0;
  std::size_t min_trip_edges = 3;
  std::array<double, 24> congestion = default_congestion();
  // Relative trip share per road; empty means the built-in 6-road profile,
  // evenly spread otherwise. Trip counts are allocated exactly (largest remainder).
  std::vector<double> road_weights;

  // Throws InvalidInput on counts < 1, non-positive spacing or negative noise.
  void validate() const;
};

// "R0", "R1", ...
std::string road_name(std::size_t index);

// rows x cols grid, node id = row * cols + col + 1, two directed edges per
// neighbouring pair. Grid line l (rows first, then columns) carries road l % n_roads.
mapmatch::RoadNetwork gen_network(const SynthConfig& config);

struct TruthTrip {
  std::string trip_id;  // matches the id segmentation assigns
  std::string vehicle_id;
  std::string road_id;
  std::int64_t start_ts = 0;
  double true_duration_s = 0.0;    // noise-free: length / speed x congestion, whole seconds
  double logged_duration_s = 0.0;  // last - first logged timestamp
};

struct SynthLogs {
  std::vector<ingest::GpsRecord> records;  // ordered by timestamp, then vehicle
  std::vector<TruthTrip> truth;            // ordered by trip id
};

// Planted number of trips per road (same order as road index).
std::vector<std::size_t> planted_counts(const SynthConfig& config);

SynthLogs gen_logs(const SynthConfig& config, const mapmatch::RoadNetwork& net);

// vehicle_id,timestamp,lat,lon,speed,altitude,reason with ISO-8601 local times.
void write_logs_csv(std::ostream& out, const std::vector<ingest::GpsRecord>& records);
// trip_id,road_id,true_duration_s
void write_truth_csv(std::ostream& out, const std::vector<TruthTrip>& truth);

}  // namespace ttp::synth
