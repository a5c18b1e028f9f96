#include "ttp/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include "ttp/error.hpp"

namespace ttp::mapmatch {

namespace {

constexpr double kRadiusM = geo::kEarthRadiusKm * 1000.0;

// Lower bound on the great-circle distance (m) of any point whose coordinate on
// the split axis lies on the far side of the plane, given the axis gap.
double gap_to_meters(double gap) {
  return 2.0 * kRadiusM * std::asin(std::min(1.0, std::fabs(gap) / 2.0));
}

// Float slack so rounding never prunes a subtree holding a true candidate.
bool beyond(double lower_bound_m, double limit_m) {
  return lower_bound_m > limit_m * (1.0 + 1e-9) + 1e-6;
}

bool closer(const Neighbor& a, const Neighbor& b) {
  return a.distance_m < b.distance_m || (a.distance_m == b.distance_m && a.id < b.id);
}

}  // namespace

SpatialIndex::SpatialIndex(std::vector<IndexEntry> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw InvalidInput("spatial index needs at least one node");
  for (const auto& e : entries_) geo::validate(e.position);
  xyz_.resize(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const double lat = geo::to_radians(entries_[i].position.lat);
    const double lon = geo::to_radians(entries_[i].position.lon);
    xyz_[i] = {{std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat)}};
  }
  build(0, entries_.size(), 0);
}

void SpatialIndex::build(std::size_t lo, std::size_t hi, int depth) {
  if (hi - lo <= 1) return;
  const int axis = depth % 3;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::vector<std::size_t> order(hi - lo);
  std::iota(order.begin(), order.end(), lo);
  std::nth_element(order.begin(), order.begin() + (mid - lo), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return xyz_[a].v[axis] < xyz_[b].v[axis] ||
                            (xyz_[a].v[axis] == xyz_[b].v[axis] && a < b);
                   });
  std::vector<IndexEntry> e(hi - lo);
  std::vector<Xyz> x(hi - lo);
  for (std::size_t i = 0; i < order.size(); ++i) {
    e[i] = entries_[order[i]];
    x[i] = xyz_[order[i]];
  }
  std::copy(e.begin(), e.end(), entries_.begin() + lo);
  std::copy(x.begin(), x.end(), xyz_.begin() + lo);
  build(lo, mid, depth + 1);
  build(mid + 1, hi, depth + 1);
}

template <typename Visit, typename Bound>
void SpatialIndex::descend(std::size_t lo, std::size_t hi, int depth, const Xyz& q,
                           Visit& visit, Bound& bound) const {
  if (lo >= hi) return;
  const std::size_t mid = lo + (hi - lo) / 2;
  visit(mid);
  if (hi - lo == 1) return;
  const int axis = depth % 3;
  const double gap = q.v[axis] - xyz_[mid].v[axis];
  const bool left_first = gap < 0.0;
  const std::size_t near_lo = left_first ? lo : mid + 1;
  const std::size_t near_hi = left_first ? mid : hi;
  const std::size_t far_lo = left_first ? mid + 1 : lo;
  const std::size_t far_hi = left_first ? hi : mid;
  descend(near_lo, near_hi, depth + 1, q, visit, bound);
  if (!beyond(gap_to_meters(gap), bound())) descend(far_lo, far_hi, depth + 1, q, visit, bound);
}

std::vector<Neighbor> SpatialIndex::nearest(const geo::GeoPoint& q, std::size_t k) const {
  geo::validate(q);
  if (k == 0) return {};
  const double lat = geo::to_radians(q.lat);
  const double lon = geo::to_radians(q.lon);
  const Xyz qx{{std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat)}};

  // max-heap on (distance, id): top is the current worst of the best k
  std::priority_queue<Neighbor, std::vector<Neighbor>, decltype(&closer)> heap(&closer);
  auto visit = [&](std::size_t i) {
    const Neighbor n{entries_[i].id, geo::haversine_km(q, entries_[i].position) * 1000.0};
    if (heap.size() < k) {
      heap.push(n);
    } else if (closer(n, heap.top())) {
      heap.pop();
      heap.push(n);
    }
  };
  auto bound = [&]() {
    return heap.size() < k ? std::numeric_limits<double>::infinity() : heap.top().distance_m;
  };
  descend(0, entries_.size(), 0, qx, visit, bound);

  std::vector<Neighbor> out;
  out.reserve(heap.size());
  while (!heap.empty()) {
    out.push_back(heap.top());
    heap.pop();
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<Neighbor> SpatialIndex::within_radius(const geo::GeoPoint& q, double radius_m) const {
  geo::validate(q);
  if (!(radius_m >= 0.0)) throw InvalidInput("radius must be non-negative");
  const double lat = geo::to_radians(q.lat);
  const double lon = geo::to_radians(q.lon);
  const Xyz qx{{std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat)}};

  std::vector<Neighbor> out;
  auto visit = [&](std::size_t i) {
    const double d = geo::haversine_km(q, entries_[i].position) * 1000.0;
    if (d <= radius_m) out.push_back({entries_[i].id, d});
  };
  auto bound = [&]() { return radius_m; };
  descend(0, entries_.size(), 0, qx, visit, bound);
  std::sort(out.begin(), out.end(), closer);
  return out;
}

}  // namespace ttp::mapmatch
