#include <nlohmann/json.hpp>
#include <gtest/gtest.h>

#include <algorithm>
#include <limits>

#include "oracles.hpp"
#include "ttp/error.hpp"
#include "ttp/simplify.hpp"

using namespace ttp;
using namespace ttp::simplify;
using geo::GeoPoint;

TEST(Epsilon, Validation) {
  EXPECT_THROW(Epsilon(0.0), InvalidInput);
  EXPECT_THROW(Epsilon(-1.0), InvalidInput);
  EXPECT_THROW(Epsilon(std::numeric_limits<double>::infinity()), InvalidInput);
  EXPECT_THROW(Epsilon(std::numeric_limits<double>::quiet_NaN()), InvalidInput);
  EXPECT_EQ(Epsilon(2.5).meters(), 2.5);
}

TEST(Rdp, TwoPointsUnchanged) {
  const std::vector<GeoPoint> p = {{33.7, 73.0}, {33.8, 73.1}};
  EXPECT_EQ(rdp(p, Epsilon(10)), p);
}

TEST(Rdp, CollinearKeepsEndpoints) {
  const std::vector<GeoPoint> p = {{0, 0}, {0, 0.001}, {0, 0.002}};
  const auto out = rdp(p, Epsilon(10));
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out.front(), p.front());
  EXPECT_EQ(out.back(), p.back());
}

TEST(Rdp, TooFewPointsThrows) {
  const std::vector<GeoPoint> one = {{0, 0}};
  EXPECT_THROW(rdp(one, Epsilon(10)), InvalidInput);
  EXPECT_THROW(rdp({}, Epsilon(10)), InvalidInput);
}

TEST(Rdp, SinePathReduction) {
  const auto p = oracle::sine_path(800, 300.0, 2000.0, 4000.0);
  const auto idx = rdp_indices(p, Epsilon(10));
  EXPECT_LE(idx.size(), 80u);
  EXPECT_LE(oracle::max_dropped_deviation(p, idx), 10.0);
}

TEST(Rdp, EarliestIndexWinsTies) {
  // symmetric bump: points 1 and 3 deviate equally
  const std::vector<GeoPoint> p = {{0, 0}, {0.001, 0.001}, {0, 0.002}, {0.001, 0.003}, {0, 0.004}};
  const auto idx = rdp_indices(p, Epsilon(1000));
  EXPECT_EQ(idx, (std::vector<std::size_t>{0, 4}));
  const auto fine = rdp_indices(p, Epsilon(1));
  EXPECT_EQ(fine, (std::vector<std::size_t>{0, 1, 2, 3, 4}));
}

TEST(Rdp, ClosedLoopUsesDistanceToEndpoint) {
  const std::vector<GeoPoint> p = {{0, 0}, {0.001, 0}, {0.001, 0.001}, {0, 0}};
  const auto idx = rdp_indices(p, Epsilon(10));
  EXPECT_GT(idx.size(), 2u);
  EXPECT_LE(oracle::max_dropped_deviation(p, idx), 10.0);
}

TEST(Rdp, HandlesLongInputsWithoutRecursion) {
  Rng rng(1);
  const auto p = oracle::random_trajectory(rng, 200000);
  const auto idx = rdp_indices(p, Epsilon(0.01));
  EXPECT_EQ(idx.front(), 0u);
  EXPECT_EQ(idx.back(), p.size() - 1);
}

TEST(Rdp, PropertiesOnRandomTrajectories) {
  Rng rng(17);
  for (int k = 0; k < 40; ++k) {
    const auto p = oracle::random_trajectory(rng, 300);
    const double e1 = rng.uniform(1, 20), e2 = e1 + rng.uniform(0, 30);
    const auto i1 = rdp_indices(p, Epsilon(e1));
    const auto i2 = rdp_indices(p, Epsilon(e2));
    EXPECT_EQ(i1.front(), 0u);
    EXPECT_EQ(i1.back(), p.size() - 1);
    EXPECT_TRUE(std::is_sorted(i1.begin(), i1.end()));
    EXPECT_EQ(std::adjacent_find(i1.begin(), i1.end()), i1.end());
    EXPECT_GE(i1.size(), i2.size());
    EXPECT_LE(oracle::max_dropped_deviation(p, i1), e1 + 1e-9);
    const auto once = rdp(p, Epsilon(e1));
    EXPECT_EQ(rdp(once, Epsilon(e1)), once);
  }
}

TEST(SimplifyTrip, KeepsAttributesAndEvents) {
  trips::Trip t;
  t.trip_id = "V1:0";
  t.vehicle_id = "V1";
  const auto pts = oracle::sine_path(50, 0.0, 1000.0, 1000.0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    ingest::GpsRecord r;
    r.vehicle_id = "V1";
    r.timestamp = 1000 + static_cast<std::int64_t>(i);
    r.position = pts[i];
    r.reason.kind = i == 0 ? ingest::ReasonKind::IgnitionOn
                    : i + 1 == pts.size() ? ingest::ReasonKind::IgnitionOff
                                          : ingest::ReasonKind::Periodic;
    t.points.push_back(r);
  }
  t.start_ts = 1000;
  t.end_ts = 1049;
  t.duration_s = 49;
  t.distance_km = 1.0;
  const auto s = simplify_trip(t, Epsilon(10));
  ASSERT_EQ(s.points.size(), 2u);
  EXPECT_EQ(s.points.front().reason.kind, ingest::ReasonKind::IgnitionOn);
  EXPECT_EQ(s.points.back().reason.kind, ingest::ReasonKind::IgnitionOff);
  EXPECT_EQ(s.distance_km, 1.0);
  EXPECT_EQ(s.duration_s, 49.0);
  EXPECT_EQ(s.trip_id, t.trip_id);
}
