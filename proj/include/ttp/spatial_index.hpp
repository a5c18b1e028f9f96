#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ttp/geo.hpp"

namespace ttp::mapmatch {

struct IndexEntry {
  std::int64_t id = 0;
  geo::GeoPoint position;
};

struct Neighbor {
  std::int64_t id = 0;
  double distance_m = 0.0;  // great-circle, same formula as geo::haversine_km
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// Static k-d tree over points mapped onto the unit sphere. Chord distance is
// monotone in great-circle distance, so subtree pruning is exact; surviving
// candidates are ranked by haversine distance with the lower id winning ties.
// Results are therefore identical to a haversine linear scan.
class SpatialIndex {
 public:
  // Throws InvalidInput for an empty entry set or invalid positions.
  explicit SpatialIndex(std::vector<IndexEntry> entries);

  std::size_t size() const { return entries_.size(); }

  // Up to k nearest entries, ascending by (distance, id).
  std::vector<Neighbor> nearest(const geo::GeoPoint& q, std::size_t k) const;

  // Every entry within radius_m (inclusive), ascending by (distance, id).
  std::vector<Neighbor> within_radius(const geo::GeoPoint& q, double radius_m) const;

 private:
  struct Xyz {
    double v[3];
  };

  void build(std::size_t lo, std::size_t hi, int depth);
  template <typename Visit, typename Bound>
  void descend(std::size_t lo, std::size_t hi, int depth, const Xyz& q, Visit& visit,
               Bound& bound) const;

  std::vector<IndexEntry> entries_;
  std::vector<Xyz> xyz_;
};

}  // namespace ttp::mapmatch
