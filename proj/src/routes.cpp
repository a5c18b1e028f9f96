#include "ttp/routes.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ttp/error.hpp"
#include "ttp/local_time.hpp"

namespace ttp::routes {

std::optional<std::string> assign_road(const mapmatch::MatchedTrajectory& matched,
                                       const mapmatch::RoadNetwork& net) {
  if (matched.node_ids.empty()) throw InvalidInput("cannot assign a road to an empty trajectory");
  std::map<std::string, std::size_t> votes;
  for (std::size_t i = 1; i < matched.node_ids.size(); ++i) {
    if (const auto* e = net.find_edge(matched.node_ids[i - 1], matched.node_ids[i])) {
      ++votes[e->road_id];
    }
  }
  if (votes.empty()) return std::nullopt;
  // map iteration is lexicographic, so strict > keeps the smallest id on ties
  const std::string* best = nullptr;
  std::size_t best_count = 0;
  for (const auto& [road, count] : votes) {
    if (count > best_count) {
      best = &road;
      best_count = count;
    }
  }
  return *best;
}

std::map<std::string, std::size_t> count_routes(std::span<const std::string> road_ids) {
  std::map<std::string, std::size_t> counts;
  for (const auto& r : road_ids) ++counts[r];
  return counts;
}

std::vector<RouteStat> mine_frequent(std::span<const std::string> road_ids, std::size_t k) {
  if (k == 0) throw InvalidInput("k must be at least 1");
  std::vector<RouteStat> stats;
  for (const auto& [road, count] : count_routes(road_ids)) stats.push_back({road, count});
  std::stable_sort(stats.begin(), stats.end(), [](const RouteStat& a, const RouteStat& b) {
    return a.trip_count > b.trip_count;
  });
  if (stats.size() > k) stats.resize(k);
  return stats;
}

FeatureRow FeatureVector::row() const {
  return {static_cast<double>(vehicle_key),
          trip_distance_km,
          trip_avg_speed_kmh,
          start_lat,
          start_lon,
          end_lat,
          end_lon,
          static_cast<double>(dep_minute),
          static_cast<double>(dep_second),
          static_cast<double>(day_of_week),
          static_cast<double>(day_of_month),
          static_cast<double>(month_of_year)};
}

FeatureVector FeatureVector::from_row(const FeatureRow& r, double target) {
  FeatureVector v;
  v.vehicle_key = static_cast<int>(r[0]);
  v.trip_distance_km = r[1];
  v.trip_avg_speed_kmh = r[2];
  v.start_lat = r[3];
  v.start_lon = r[4];
  v.end_lat = r[5];
  v.end_lon = r[6];
  v.dep_minute = static_cast<int>(r[7]);
  v.dep_second = static_cast<int>(r[8]);
  v.day_of_week = static_cast<int>(r[9]);
  v.day_of_month = static_cast<int>(r[10]);
  v.month_of_year = static_cast<int>(r[11]);
  v.target_duration_s = target;
  return v;
}

bool is_valid(const FeatureVector& v) {
  for (double x : v.row()) {
    if (!std::isfinite(x)) return false;
  }
  return std::isfinite(v.target_duration_s) && v.target_duration_s > 0 && v.vehicle_key >= 0 &&
         v.dep_minute >= 0 && v.dep_minute <= 59 && v.dep_second >= 0 && v.dep_second <= 59 &&
         v.day_of_week >= 1 && v.day_of_week <= 7 && v.day_of_month >= 1 &&
         v.day_of_month <= 31 && v.month_of_year >= 1 && v.month_of_year <= 12;
}

VehicleDictionary VehicleDictionary::build(std::span<const std::string> vehicle_ids) {
  std::vector<std::string> ids(vehicle_ids.begin(), vehicle_ids.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  VehicleDictionary d;
  int next = 1;
  for (auto& id : ids) d.index_.emplace(std::move(id), next++);
  return d;
}

int VehicleDictionary::lookup(const std::string& vehicle_id) const {
  const auto it = index_.find(vehicle_id);
  return it == index_.end() ? 0 : it->second;
}

nlohmann::json VehicleDictionary::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [id, idx] : index_) j[id] = idx;
  return j;
}

VehicleDictionary VehicleDictionary::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SchemaError("vehicle dictionary must be a JSON object");
  VehicleDictionary d;
  for (const auto& [id, idx] : j.items()) {
    const int v = idx.get<int>();
    if (v < 1) throw SchemaError("vehicle index must be >= 1");
    d.index_.emplace(id, v);
  }
  return d;
}

FeatureVector featurize(const trips::Trip& trip, const VehicleDictionary& vehicles) {
  if (trip.points.empty()) throw InvalidInput("cannot featurize a trip without points");
  const LocalTime t = to_local(trip.start_ts);
  FeatureVector v;
  v.vehicle_key = vehicles.lookup(trip.vehicle_id);
  v.trip_distance_km = trip.distance_km;
  v.trip_avg_speed_kmh = trip.avg_speed_kmh;
  v.start_lat = trip.points.front().position.lat;
  v.start_lon = trip.points.front().position.lon;
  v.end_lat = trip.points.back().position.lat;
  v.end_lon = trip.points.back().position.lon;
  v.dep_minute = t.minute;
  v.dep_second = std::min(t.second, 59);
  v.day_of_week = t.day_of_week;
  v.day_of_month = t.day;
  v.month_of_year = t.month;
  v.target_duration_s = trip.duration_s;
  return v;
}

SplitPart split_of_month(int month) {
  if (month >= 4 && month <= 8) return SplitPart::Train;
  if (month == 9 || month == 10) return SplitPart::Test;
  return SplitPart::Excluded;
}

SplitResult split_by_month(std::span<const FeatureVector> vectors) {
  SplitResult out;
  for (const auto& v : vectors) {
    switch (split_of_month(v.month_of_year)) {
      case SplitPart::Train: out.train.push_back(v); break;
      case SplitPart::Test: out.test.push_back(v); break;
      case SplitPart::Excluded: ++out.excluded; break;
    }
  }
  return out;
}

Scaler Scaler::fit(std::span<const FeatureVector> train) {
  if (train.empty()) throw InvalidInput("cannot fit a scaler on an empty training set");
  Scaler s;
  const double n = static_cast<double>(train.size());
  FeatureRow lo = train.front().row();
  FeatureRow hi = lo;
  FeatureRow sum{};
  for (const auto& v : train) {
    const FeatureRow r = v.row();
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
      sum[c] += r[c];
      lo[c] = std::min(lo[c], r[c]);
      hi[c] = std::max(hi[c], r[c]);
    }
  }
  FeatureRow sq{};
  for (std::size_t c = 0; c < kFeatureCount; ++c) s.mean_[c] = sum[c] / n;
  for (const auto& v : train) {
    const FeatureRow r = v.row();
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
      const double d = r[c] - s.mean_[c];
      sq[c] += d * d;
    }
  }
  for (std::size_t c = 0; c < kFeatureCount; ++c) {
    s.stddev_[c] = std::sqrt(sq[c] / n);
    s.scaled_[c] = c != kVehicleColumn && hi[c] > lo[c] && s.stddev_[c] > 0.0;
    if (!s.scaled_[c]) {
      s.mean_[c] = 0.0;
      s.stddev_[c] = 1.0;
    }
  }
  return s;
}

FeatureRow Scaler::scale(const FeatureRow& raw) const {
  FeatureRow out = raw;
  for (std::size_t c = 0; c < kFeatureCount; ++c) {
    if (scaled_[c]) out[c] = (raw[c] - mean_[c]) / stddev_[c];
  }
  return out;
}

FeatureRow Scaler::unscale(const FeatureRow& scaled) const {
  FeatureRow out = scaled;
  for (std::size_t c = 0; c < kFeatureCount; ++c) {
    if (scaled_[c]) out[c] = scaled[c] * stddev_[c] + mean_[c];
  }
  return out;
}

std::vector<ScaledSample> Scaler::apply(std::span<const FeatureVector> vectors) const {
  std::vector<ScaledSample> out;
  out.reserve(vectors.size());
  for (const auto& v : vectors) out.push_back({scale(v.row()), v.target_duration_s});
  return out;
}

nlohmann::json Scaler::to_json() const {
  nlohmann::json features = nlohmann::json::array();
  for (std::size_t c = 0; c < kFeatureCount; ++c) {
    features.push_back({{"name", std::string(kFeatureNames[c])},
                        {"mean", mean_[c]},
                        {"stddev", stddev_[c]},
                        {"scaled", scaled_[c]}});
  }
  return {{"features", std::move(features)}};
}

Scaler Scaler::from_json(const nlohmann::json& j) {
  Scaler s;
  try {
    const auto& f = j.at("features");
    if (f.size() != kFeatureCount) throw SchemaError("scaler must describe 12 features");
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
      if (f[c].at("name").get<std::string>() != kFeatureNames[c]) {
        throw SchemaError("scaler feature " + std::to_string(c) + " is out of order");
      }
      s.mean_[c] = f[c].at("mean").get<double>();
      s.stddev_[c] = f[c].at("stddev").get<double>();
      s.scaled_[c] = f[c].at("scaled").get<bool>();
      if (s.scaled_[c] && !(s.stddev_[c] > 0.0)) throw SchemaError("scaled feature needs stddev > 0");
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("bad scaler: ") + e.what());
  }
  return s;
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_dataset_csv(std::ostream& out, std::span<const FeatureVector> vectors) {
  for (const auto& name : kFeatureNames) out << name << ',';
  out << kTargetName << '\n';
  for (const auto& v : vectors) {
    const FeatureRow r = v.row();
    for (double x : r) out << format_number(x) << ',';
    out << format_number(v.target_duration_s) << '\n';
  }
}

std::vector<FeatureVector> read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("dataset has no header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  {
    std::string expected;
    for (const auto& name : kFeatureNames) expected += std::string(name) + ",";
    expected += std::string(kTargetName);
    if (line != expected) throw SchemaError("dataset header does not match the feature layout");
  }
  std::vector<FeatureVector> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::array<double, kFeatureCount + 1> vals{};
    std::size_t col = 0;
    std::size_t pos = 0;
    bool ok = true;
    while (ok) {
      const std::size_t comma = line.find(',', pos);
      const std::size_t end = comma == std::string::npos ? line.size() : comma;
      if (col == vals.size()) {
        ok = false;
        break;
      }
      const auto res = std::from_chars(line.data() + pos, line.data() + end, vals[col]);
      ok = res.ec == std::errc{} && res.ptr == line.data() + end;
      ++col;
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (!ok || col != vals.size()) {
      throw InvalidInput("dataset line " + std::to_string(line_no) +
                         ": expected 13 numeric columns");
    }
    FeatureRow r;
    std::copy_n(vals.begin(), kFeatureCount, r.begin());
    FeatureVector v = FeatureVector::from_row(r, vals[kFeatureCount]);
    if (!is_valid(v)) throw InvalidInput("dataset line " + std::to_string(line_no) + ": invalid values");
    out.push_back(v);
  }
  return out;
}

std::vector<FeatureVector> read_dataset_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset '" + path + "'");
  return read_dataset_csv(in);
}

}  // namespace ttp::routes
