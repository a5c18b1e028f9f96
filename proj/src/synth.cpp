#include "ttp/synth.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <ostream>

#include "ttp/error.hpp"
#include "ttp/local_time.hpp"
#include "ttp/rng.hpp"
#include "ttp/routes.hpp"

namespace ttp::synth {

namespace {

constexpr double kRadiusM = geo::kEarthRadiusKm * 1000.0;

// Reference frequency profile for six roads, busiest first.
constexpr std::array<double, 6> kSixRoadProfile = {55215, 47810, 44043, 40199, 36943, 34380};

// Two-hour slots starting 06:00 ... 20:00; a trip starts within the first hour
// of its slot, so same-vehicle trips never overlap and all start before 23:00.
constexpr int kFirstSlotHour = 6;
constexpr int kSlotsPerDay = 8;
constexpr int kSlotHours = 2;

struct GridFrame {
  double lat0, lon0;  // node (0, 0)
  double dlat, dlon;  // degrees per grid step
};

GridFrame frame_of(const SynthConfig& c) {
  const double dlat = geo::to_degrees(c.spacing_m / kRadiusM);
  const double dlon = geo::to_degrees(c.spacing_m / (kRadiusM * std::cos(geo::to_radians(c.center.lat))));
  return {c.center.lat - dlat * static_cast<double>(c.rows - 1) / 2.0,
          c.center.lon - dlon * static_cast<double>(c.cols - 1) / 2.0, dlat, dlon};
}

mapmatch::NodeId node_id(const SynthConfig& c, std::size_t r, std::size_t col) {
  return static_cast<mapmatch::NodeId>(r * c.cols + col + 1);
}

std::int64_t day_number(int y, int m, int d) {
  using namespace std::chrono;
  return sys_days{year{y} / month{static_cast<unsigned>(m)} / day{static_cast<unsigned>(d)}}
      .time_since_epoch()
      .count();
}

}  // namespace

std::array<double, 24> default_congestion() {
  std::array<double, 24> c{};
  c.fill(1.0);
  c[8] = c[9] = c[17] = c[18] = 1.5;
  return c;
}

void SynthConfig::validate() const {
  if (n_vehicles < 1 || n_trips < 1 || n_roads < 1) throw InvalidInput("synth counts must be >= 1");
  if (rows < 1 || cols < 1 || rows * cols < 2) throw InvalidInput("grid needs at least 2 nodes");
  if (!(spacing_m > 0.0) || !std::isfinite(spacing_m)) throw InvalidInput("spacing must be > 0");
  if (!(gps_noise_m >= 0.0) || !(duration_noise_s >= 0.0)) throw InvalidInput("noise must be >= 0");
  if (!(base_speed_kmh > 0.0)) throw InvalidInput("base speed must be > 0");
  if (!(sample_interval_s > 0.0)) throw InvalidInput("sample interval must be > 0");
  if (min_trip_edges < 1) throw InvalidInput("trips need at least one edge");
  if (min_trip_edges > std::max(rows, cols) - 1) {
    throw InvalidInput("grid lines are shorter than the minimum trip length");
  }
  if (!road_weights.empty()) {
    if (road_weights.size() != n_roads) throw InvalidInput("need one road weight per road");
    for (double w : road_weights) {
      if (!(w >= 0.0)) throw InvalidInput("road weights must be >= 0");
    }
  }
  for (double m : congestion) {
    if (!(m > 0.0)) throw InvalidInput("congestion multipliers must be > 0");
  }
  geo::validate(center);
  if (day_number(last_year, last_month, last_day) < day_number(first_year, first_month, first_day)) {
    throw InvalidInput("date range is empty");
  }
}

std::string road_name(std::size_t index) { return "R" + std::to_string(index); }

mapmatch::RoadNetwork gen_network(const SynthConfig& c) {
  c.validate();
  const GridFrame f = frame_of(c);
  std::vector<mapmatch::Node> nodes;
  for (std::size_t r = 0; r < c.rows; ++r) {
    for (std::size_t col = 0; col < c.cols; ++col) {
      nodes.push_back({node_id(c, r, col),
                       {f.lat0 + f.dlat * static_cast<double>(r),
                        f.lon0 + f.dlon * static_cast<double>(col)}});
    }
  }
  std::vector<mapmatch::EdgeSpec> edges;
  for (std::size_t r = 0; r < c.rows; ++r) {
    const std::string road = road_name(r % c.n_roads);
    for (std::size_t col = 0; col + 1 < c.cols; ++col) {
      edges.push_back({node_id(c, r, col), node_id(c, r, col + 1), road});
      edges.push_back({node_id(c, r, col + 1), node_id(c, r, col), road});
    }
  }
  for (std::size_t col = 0; col < c.cols; ++col) {
    const std::string road = road_name((c.rows + col) % c.n_roads);
    for (std::size_t r = 0; r + 1 < c.rows; ++r) {
      edges.push_back({node_id(c, r, col), node_id(c, r + 1, col), road});
      edges.push_back({node_id(c, r + 1, col), node_id(c, r, col), road});
    }
  }
  return mapmatch::RoadNetwork(std::move(nodes), edges);
}

std::vector<std::size_t> planted_counts(const SynthConfig& c) {
  std::vector<double> w = c.road_weights;
  if (w.empty()) {
    if (c.n_roads == kSixRoadProfile.size()) {
      w.assign(kSixRoadProfile.begin(), kSixRoadProfile.end());
    } else {
      w.assign(c.n_roads, 1.0);
    }
  }
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (!(total > 0.0)) throw InvalidInput("road weights sum to zero");
  std::vector<std::size_t> counts(w.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double exact = static_cast<double>(c.n_trips) * w[i] / total;
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    assigned += counts[i];
    remainders.emplace_back(exact - std::floor(exact), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < c.n_trips; ++k, ++assigned) ++counts[remainders[k].second];
  return counts;
}

SynthLogs gen_logs(const SynthConfig& c, const mapmatch::RoadNetwork& net) {
  c.validate();
  Rng rng(c.seed ^ 0xD1B54A32D192ED03ULL);
  const GridFrame f = frame_of(c);

  const std::int64_t first_day = day_number(c.first_year, c.first_month, c.first_day);
  const std::int64_t n_days =
      day_number(c.last_year, c.last_month, c.last_day) - first_day + 1;
  const std::size_t slots_per_vehicle = static_cast<std::size_t>(n_days) * kSlotsPerDay;
  const std::size_t trips_per_vehicle = (c.n_trips + c.n_vehicles - 1) / c.n_vehicles;
  if (trips_per_vehicle > slots_per_vehicle) {
    throw InvalidInput("too many trips per vehicle for the date range");
  }

  // road of every trip, exact planted counts in shuffled order
  std::vector<std::size_t> trip_road;
  const auto counts = planted_counts(c);
  for (std::size_t r = 0; r < counts.size(); ++r) trip_road.insert(trip_road.end(), counts[r], r);
  rng.shuffle(trip_road.begin(), trip_road.end());

  std::vector<std::vector<std::size_t>> lines_of_road(c.n_roads);
  for (std::size_t l = 0; l < c.rows + c.cols; ++l) {
    const bool horizontal = l < c.rows;
    const std::size_t len = horizontal ? c.cols : c.rows;
    if (len - 1 >= c.min_trip_edges) lines_of_road[l % c.n_roads].push_back(l);
  }
  for (std::size_t r = 0; r < c.n_roads; ++r) {
    if (lines_of_road[r].empty() && counts[r] > 0) {
      throw InvalidInput(road_name(r) + " has no grid line long enough for a trip");
    }
  }

  std::vector<std::vector<std::size_t>> slot_pool(c.n_vehicles);
  std::vector<std::size_t> slot_next(c.n_vehicles, 0);
  for (auto& pool : slot_pool) {
    pool.resize(slots_per_vehicle);
    std::iota(pool.begin(), pool.end(), 0);
    // partial Fisher-Yates: only the first trips_per_vehicle entries are used
    for (std::size_t i = 0; i < trips_per_vehicle; ++i) {
      std::swap(pool[i], pool[i + rng.index(pool.size() - i)]);
    }
  }

  struct Planned {
    std::size_t vehicle;
    std::int64_t start;
    std::vector<ingest::GpsRecord> points;
    TruthTrip truth;
  };
  std::vector<Planned> planned;
  planned.reserve(c.n_trips);

  const double m_per_deg_lat = kRadiusM * geo::kPi / 180.0;
  const double m_per_deg_lon = m_per_deg_lat * std::cos(geo::to_radians(c.center.lat));

  for (std::size_t k = 0; k < c.n_trips; ++k) {
    const std::size_t v = k % c.n_vehicles;
    const std::size_t road = trip_road[k];
    const std::size_t slot = slot_pool[v][slot_next[v]++];
    const std::int64_t day = static_cast<std::int64_t>(slot / kSlotsPerDay);
    const int hour = kFirstSlotHour + kSlotHours * static_cast<int>(slot % kSlotsPerDay);
    const int minute = static_cast<int>(rng.index(60));
    const int second = static_cast<int>(rng.index(60));
    const std::int64_t start = (first_day + day) * 86400 + hour * 3600 + minute * 60 + second -
                               kLocalUtcOffsetS;

    // walk along one grid line of the road
    const auto& lines = lines_of_road[road];
    const std::size_t line = lines[rng.index(lines.size())];
    const bool horizontal = line < c.rows;
    const std::size_t line_nodes = horizontal ? c.cols : c.rows;
    const std::size_t max_edges = line_nodes - 1;
    const std::size_t n_edges =
        c.min_trip_edges + rng.index(max_edges - c.min_trip_edges + 1);
    const std::size_t offset = rng.index(max_edges - n_edges + 1);
    const bool reverse = rng.index(2) == 1;
    auto grid_point = [&](double along) {
      // along: position in edges from the trip start
      const double idx = reverse ? static_cast<double>(offset + n_edges) - along
                                 : static_cast<double>(offset) + along;
      const double r = horizontal ? static_cast<double>(line) : idx;
      const double col = horizontal ? idx : static_cast<double>(line - c.rows);
      return geo::GeoPoint{f.lat0 + f.dlat * r, f.lon0 + f.dlon * col};
    };

    const double length_km = static_cast<double>(n_edges) * c.spacing_m / 1000.0;
    const double ideal_s = length_km / c.base_speed_kmh * 3600.0 * c.congestion[static_cast<std::size_t>(hour)];
    const double true_s = std::round(ideal_s);
    double logged_s = std::round(ideal_s + rng.normal(0.0, c.duration_noise_s));
    logged_s = std::max(logged_s, 60.0);

    std::vector<ingest::GpsRecord> pts;
    const std::string vehicle_id = [&] {
      char buf[32];
      std::snprintf(buf, sizeof buf, "V%03zu", v + 1);
      return std::string(buf);
    }();
    const double speed_kmh = length_km / (logged_s / 3600.0);
    auto emit = [&](double frac, ingest::ReasonKind kind) {
      geo::GeoPoint p = grid_point(frac * static_cast<double>(n_edges));
      const bool endpoint = kind == ingest::ReasonKind::IgnitionOn ||
                            kind == ingest::ReasonKind::IgnitionOff;
      if (c.gps_noise_m > 0.0) {
        p.lat += rng.normal(0.0, c.gps_noise_m) / m_per_deg_lat;
        p.lon += rng.normal(0.0, c.gps_noise_m) / m_per_deg_lon;
      }
      ingest::GpsRecord rec;
      rec.vehicle_id = vehicle_id;
      rec.timestamp = start + static_cast<std::int64_t>(std::llround(frac * logged_s));
      rec.position = p;
      rec.speed_kmh = endpoint ? 0.0 : speed_kmh;
      rec.altitude_m = 540.0 + rng.normal(0.0, 2.0);
      rec.reason = {kind, {}};
      pts.push_back(std::move(rec));
    };

    // events in time order: node crossings (Turn) and periodic fixes
    std::vector<std::pair<double, ingest::ReasonKind>> events;
    for (std::size_t e = 1; e < n_edges; ++e) {
      events.emplace_back(static_cast<double>(e) / static_cast<double>(n_edges),
                          ingest::ReasonKind::Turn);
    }
    for (double t = c.sample_interval_s; t < logged_s; t += c.sample_interval_s) {
      events.emplace_back(t / logged_s, ingest::ReasonKind::Periodic);
    }
    std::stable_sort(events.begin(), events.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    emit(0.0, ingest::ReasonKind::IgnitionOn);
    for (const auto& [frac, kind] : events) emit(frac, kind);
    emit(1.0, ingest::ReasonKind::IgnitionOff);

    TruthTrip truth;
    truth.vehicle_id = vehicle_id;
    truth.road_id = road_name(road);
    truth.start_ts = start;
    truth.true_duration_s = true_s;
    truth.logged_duration_s = logged_s;
    planned.push_back({v, start, std::move(pts), std::move(truth)});
  }

  // per-vehicle chronological numbering mirrors segmentation trip ids
  std::stable_sort(planned.begin(), planned.end(), [](const Planned& a, const Planned& b) {
    return a.vehicle != b.vehicle ? a.vehicle < b.vehicle : a.start < b.start;
  });
  SynthLogs out;
  std::size_t seq = 0;
  for (std::size_t i = 0; i < planned.size(); ++i) {
    if (i == 0 || planned[i].vehicle != planned[i - 1].vehicle) seq = 0;
    planned[i].truth.trip_id = planned[i].truth.vehicle_id + ":" + std::to_string(seq++);
    out.truth.push_back(planned[i].truth);
    for (auto& p : planned[i].points) out.records.push_back(std::move(p));
  }
  std::stable_sort(out.records.begin(), out.records.end(),
                   [](const ingest::GpsRecord& a, const ingest::GpsRecord& b) {
                     return a.timestamp < b.timestamp;
                   });
  std::sort(out.truth.begin(), out.truth.end(),
            [](const TruthTrip& a, const TruthTrip& b) { return a.trip_id < b.trip_id; });
  (void)net;
  return out;
}

void write_logs_csv(std::ostream& out, const std::vector<ingest::GpsRecord>& records) {
  out << "vehicle_id,timestamp,lat,lon,speed,altitude,reason\n";
  for (const auto& r : records) {
    out << r.vehicle_id << ',' << format_local_iso(r.timestamp) << ','
        << routes::format_number(r.position.lat) << ',' << routes::format_number(r.position.lon)
        << ',' << routes::format_number(r.speed_kmh) << ','
        << routes::format_number(r.altitude_m) << ',' << r.reason.to_string() << '\n';
  }
}

void write_truth_csv(std::ostream& out, const std::vector<TruthTrip>& truth) {
  out << "trip_id,road_id,true_duration_s\n";
  for (const auto& t : truth) {
    out << t.trip_id << ',' << t.road_id << ',' << routes::format_number(t.true_duration_s) << '\n';
  }
}

}  // namespace ttp::synth
