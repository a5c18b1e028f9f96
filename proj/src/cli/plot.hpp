#pragma once

#include <array>
#include <string>
#include <vector>

#include "ttp/trips.hpp"

namespace ttp::cli {

struct Prediction {
  double actual_s = 0.0;
  double predicted_s = 0.0;
};

struct WeekdayStats {
  std::size_t trips = 0;
  double distance_km = 0.0;  // sums; averaged at render time
  double duration_s = 0.0;
  double speed_kmh = 0.0;
};

// Index 0 = Monday.
std::array<WeekdayStats, 7> weekday_stats(const std::vector<trips::Trip>& trips);

std::string scatter_svg(const std::vector<Prediction>& preds, const std::string& title);
std::string scatter_csv(const std::vector<Prediction>& preds);
std::string weekday_svg(const std::array<WeekdayStats, 7>& stats);
std::string weekday_csv(const std::array<WeekdayStats, 7>& stats);

}  // namespace ttp::cli
