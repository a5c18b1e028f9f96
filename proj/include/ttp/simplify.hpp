#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ttp/geo.hpp"
#include "ttp/trips.hpp"

namespace ttp::simplify {

// Positive, finite simplification tolerance in meters.
class Epsilon {
 public:
  explicit Epsilon(double meters);
  double meters() const { return meters_; }

 private:
  double meters_;
};

inline constexpr double kDefaultEpsilonM = 10.0;

// Distance from p to the chord [a, b]. A zero-length chord (closed loops,
// stationary vehicles) falls back to the great-circle distance from p to a.
double chord_deviation_m(const geo::GeoPoint& p, const geo::GeoPoint& a,
                         const geo::GeoPoint& b);

// Ramer-Douglas-Peucker. Returns the ascending indices of retained points;
// first and last are always kept. A range is split at its point of maximum
// deviation (earliest index on ties) while that deviation exceeds eps.
// Uses an explicit stack, so input length is not bounded by recursion depth.
// Throws InvalidInput for fewer than 2 points.
std::vector<std::size_t> rdp_indices(std::span<const geo::GeoPoint> points, Epsilon eps);

std::vector<geo::GeoPoint> rdp(std::span<const geo::GeoPoint> points, Epsilon eps);

// Keeps the trip's records at the retained indices. Trip attributes
// (distance, duration, speed) are those of the raw trip and are not recomputed.
trips::Trip simplify_trip(const trips::Trip& trip, Epsilon eps);

}  // namespace ttp::simplify
