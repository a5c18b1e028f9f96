#include "ttp/geo.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ttp/error.hpp"

namespace ttp::geo {

namespace {

// Signed longitude difference b - a wrapped into [-180, 180).
double lon_delta(double a, double b) {
  double d = std::fmod(b - a + 180.0, 360.0);
  if (d < 0) d += 360.0;
  return d - 180.0;
}

struct Planar {
  double x;
  double y;
};

}  // namespace

bool is_valid(const GeoPoint& p) {
  return std::isfinite(p.lat) && std::isfinite(p.lon) && p.lat >= -90.0 &&
         p.lat <= 90.0 && p.lon >= -180.0 && p.lon <= 180.0;
}

void validate(const GeoPoint& p) {
  if (!is_valid(p)) {
    std::ostringstream os;
    os << "invalid coordinate (" << p.lat << ", " << p.lon << ")";
    throw InvalidInput(os.str());
  }
}

double haversine_km(const GeoPoint& a, const GeoPoint& b) {
  validate(a);
  validate(b);
  const double phi1 = to_radians(a.lat);
  const double phi2 = to_radians(b.lat);
  const double dphi = phi2 - phi1;
  const double dlambda = to_radians(b.lon - a.lon);
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

double bearing_deg(const GeoPoint& a, const GeoPoint& b) {
  validate(a);
  validate(b);
  if (a == b) throw UndefinedBearing("bearing undefined between identical points");
  const double phi1 = to_radians(a.lat);
  const double phi2 = to_radians(b.lat);
  const double dlambda = to_radians(b.lon - a.lon);
  const double y = std::sin(dlambda) * std::cos(phi2);
  const double x = std::cos(phi1) * std::sin(phi2) -
                   std::sin(phi1) * std::cos(phi2) * std::cos(dlambda);
  return normalize_deg(to_degrees(std::atan2(y, x)));
}

double normalize_deg(double deg) {
  double d = std::fmod(deg, 360.0);
  if (d < 0) d += 360.0;
  // fmod of a tiny negative value can round up to exactly 360
  if (d >= 360.0) d = 0.0;
  return d;
}

double angle_diff_deg(double a, double b) {
  const double d = std::fabs(normalize_deg(a) - normalize_deg(b));
  return std::min(d, 360.0 - d);
}

double perp_deviation_m(const GeoPoint& p, const GeoPoint& seg_start,
                        const GeoPoint& seg_end) {
  validate(p);
  validate(seg_start);
  validate(seg_end);
  if (seg_start == seg_end) {
    throw InvalidInput("perpendicular deviation needs a non-degenerate segment");
  }
  const double lat0 = (seg_start.lat + seg_end.lat) / 2.0;
  const double lon0 = seg_start.lon + lon_delta(seg_start.lon, seg_end.lon) / 2.0;
  const double radius_m = kEarthRadiusKm * 1000.0;
  const double kx = radius_m * std::cos(to_radians(lat0));
  auto project = [&](const GeoPoint& q) {
    return Planar{kx * to_radians(lon_delta(lon0, q.lon)),
                  radius_m * to_radians(q.lat - lat0)};
  };
  const Planar a = project(seg_start);
  const Planar b = project(seg_end);
  const Planar q = project(p);
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((q.x - a.x) * dx + (q.y - a.y) * dy) / len2, 0.0, 1.0);
  const double ex = q.x - (a.x + t * dx);
  const double ey = q.y - (a.y + t * dy);
  return std::hypot(ex, ey);
}

}  // namespace ttp::geo
