#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ttp/mapmatch.hpp"
#include "ttp/trips.hpp"

namespace ttp::routes {

// Road carried by the most traversed edges (consecutive node pairs that exist
// in the network); ties go to the lexicographically smallest road id.
// nullopt when no consecutive pair is an edge. Throws InvalidInput when empty.
std::optional<std::string> assign_road(const mapmatch::MatchedTrajectory& matched,
                                       const mapmatch::RoadNetwork& net);

struct RouteStat {
  std::string road_id;
  std::size_t trip_count = 0;
  friend bool operator==(const RouteStat&, const RouteStat&) = default;
};

std::map<std::string, std::size_t> count_routes(std::span<const std::string> road_ids);

// Top-k roads by trip count, descending, ties by road id. Throws for k == 0.
std::vector<RouteStat> mine_frequent(std::span<const std::string> road_ids, std::size_t k);

inline constexpr std::size_t kFeatureCount = 12;

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "vehicle_key", "trip_distance_km", "trip_avg_speed_kmh", "start_lat",
    "start_lon",   "end_lat",          "end_lon",            "dep_minute",
    "dep_second",  "day_of_week",      "day_of_month",       "month_of_year"};
inline constexpr std::string_view kTargetName = "target_duration_s";

// Feature column holding the categorical vehicle index; never scaled.
inline constexpr std::size_t kVehicleColumn = 0;

using FeatureRow = std::array<double, kFeatureCount>;

struct FeatureVector {
  int vehicle_key = 0;  // dictionary index, 0 = unseen vehicle
  double trip_distance_km = 0.0;
  double trip_avg_speed_kmh = 0.0;
  double start_lat = 0.0;
  double start_lon = 0.0;
  double end_lat = 0.0;
  double end_lon = 0.0;
  int dep_minute = 0;     // 0-59, local departure time
  int dep_second = 0;     // 0-59
  int day_of_week = 1;    // Monday = 1 ... Sunday = 7
  int day_of_month = 1;   // 1-31
  int month_of_year = 1;  // 1-12
  double target_duration_s = 0.0;

  FeatureRow row() const;
  static FeatureVector from_row(const FeatureRow& row, double target);
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

// Finite fields and calendar values within their ranges.
bool is_valid(const FeatureVector& v);

// Vehicle id -> index in [1, n], assigned in sorted id order. Unknown ids map
// to the reserved index 0.
class VehicleDictionary {
 public:
  VehicleDictionary() = default;
  static VehicleDictionary build(std::span<const std::string> vehicle_ids);

  int lookup(const std::string& vehicle_id) const;
  std::size_t size() const { return index_.size(); }

  nlohmann::json to_json() const;
  static VehicleDictionary from_json(const nlohmann::json& j);

 private:
  std::map<std::string, int> index_;
};

FeatureVector featurize(const trips::Trip& trip, const VehicleDictionary& vehicles);

enum class SplitPart { Train, Test, Excluded };

// April-August train, September-October test, anything else excluded.
SplitPart split_of_month(int month_of_year);

struct SplitResult {
  std::vector<FeatureVector> train;
  std::vector<FeatureVector> test;
  std::size_t excluded = 0;
};

SplitResult split_by_month(std::span<const FeatureVector> vectors);

// Rows whose numeric features are z-scored; the target stays in seconds.
struct ScaledSample {
  FeatureRow x{};
  double target_s = 0.0;
};

// Per-feature z-score fitted on the training split (population stddev).
// Constant columns and the vehicle index pass through untouched.
class Scaler {
 public:
  // Throws InvalidInput for an empty training set.
  static Scaler fit(std::span<const FeatureVector> train);

  FeatureRow scale(const FeatureRow& raw) const;
  FeatureRow unscale(const FeatureRow& scaled) const;
  std::vector<ScaledSample> apply(std::span<const FeatureVector> vectors) const;

  const FeatureRow& mean() const { return mean_; }
  const FeatureRow& stddev() const { return stddev_; }
  bool is_scaled(std::size_t column) const { return scaled_[column]; }

  nlohmann::json to_json() const;
  static Scaler from_json(const nlohmann::json& j);

 private:
  FeatureRow mean_{};
  FeatureRow stddev_{};
  std::array<bool, kFeatureCount> scaled_{};
};

// Dataset CSV: header row then one line per vector, 12 features and the target
// in FeatureVector order.
void write_dataset_csv(std::ostream& out, std::span<const FeatureVector> vectors);
std::vector<FeatureVector> read_dataset_csv(std::istream& in);
std::vector<FeatureVector> read_dataset_csv_file(const std::string& path);

// Shortest round-trip decimal text for a double.
std::string format_number(double v);

}  // namespace ttp::routes
