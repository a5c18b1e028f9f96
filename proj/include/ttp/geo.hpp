#pragma once

namespace ttp::geo {

inline constexpr double kEarthRadiusKm = 6371.0088;
inline constexpr double kPi = 3.14159265358979323846;

constexpr double to_radians(double deg) { return deg * kPi / 180.0; }
constexpr double to_degrees(double rad) { return rad * 180.0 / kPi; }

struct GeoPoint {
  double lat = 0.0;  // degrees, [-90, 90]
  double lon = 0.0;  // degrees, [-180, 180]

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

bool is_valid(const GeoPoint& p);

// Throws InvalidInput unless p is finite and within coordinate bounds.
void validate(const GeoPoint& p);

// Great-circle distance on the mean-radius sphere.
double haversine_km(const GeoPoint& a, const GeoPoint& b);

// Initial great-circle bearing from a toward b, clockwise from true north, in [0, 360).
// Throws UndefinedBearing when a == b.
double bearing_deg(const GeoPoint& a, const GeoPoint& b);

// Wraps any finite angle into [0, 360).
double normalize_deg(double deg);

// Smallest absolute difference between two headings, in [0, 180].
double angle_diff_deg(double a, double b);

// Distance in meters from p to the segment [seg_start, seg_end], measured in a
// local equirectangular projection centred on the segment midpoint.
// Throws InvalidInput for a zero-length segment.
double perp_deviation_m(const GeoPoint& p, const GeoPoint& seg_start,
                        const GeoPoint& seg_end);

}  // namespace ttp::geo
