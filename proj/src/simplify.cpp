#include "ttp/simplify.hpp"

#include <cmath>
#include <utility>

#include "ttp/error.hpp"

namespace ttp::simplify {

Epsilon::Epsilon(double meters) : meters_(meters) {
  if (!std::isfinite(meters) || meters <= 0.0) {
    throw InvalidInput("epsilon must be a positive finite number of meters");
  }
}

double chord_deviation_m(const geo::GeoPoint& p, const geo::GeoPoint& a,
                         const geo::GeoPoint& b) {
  if (a == b) return geo::haversine_km(p, a) * 1000.0;
  return geo::perp_deviation_m(p, a, b);
}

std::vector<std::size_t> rdp_indices(std::span<const geo::GeoPoint> points, Epsilon eps) {
  const std::size_t n = points.size();
  if (n < 2) throw InvalidInput("simplification needs at least 2 points");

  std::vector<bool> keep(n, false);
  keep.front() = true;
  keep.back() = true;

  std::vector<std::pair<std::size_t, std::size_t>> stack;
  stack.emplace_back(0, n - 1);
  while (!stack.empty()) {
    const auto [first, last] = stack.back();
    stack.pop_back();
    if (last - first < 2) continue;

    double max_dev = -1.0;
    std::size_t split = first;
    for (std::size_t i = first + 1; i < last; ++i) {
      const double d = chord_deviation_m(points[i], points[first], points[last]);
      if (d > max_dev) {
        max_dev = d;
        split = i;
      }
    }
    if (max_dev > eps.meters()) {
      keep[split] = true;
      stack.emplace_back(split, last);
      stack.emplace_back(first, split);
    }
  }

  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (keep[i]) out.push_back(i);
  }
  return out;
}

std::vector<geo::GeoPoint> rdp(std::span<const geo::GeoPoint> points, Epsilon eps) {
  std::vector<geo::GeoPoint> out;
  for (std::size_t i : rdp_indices(points, eps)) out.push_back(points[i]);
  return out;
}

trips::Trip simplify_trip(const trips::Trip& trip, Epsilon eps) {
  std::vector<geo::GeoPoint> positions;
  positions.reserve(trip.points.size());
  for (const auto& p : trip.points) positions.push_back(p.position);

  trips::Trip out = trip;
  out.points.clear();
  for (std::size_t i : rdp_indices(positions, eps)) out.points.push_back(trip.points[i]);
  return out;
}

}  // namespace ttp::simplify
