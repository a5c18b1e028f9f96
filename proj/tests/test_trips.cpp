#include <nlohmann/json.hpp>
#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "ttp/error.hpp"
#include "ttp/trips.hpp"

using namespace ttp;
using namespace ttp::trips;
using ingest::GpsRecord;
using ingest::ReasonKind;

namespace {

const std::int64_t kT0 = oracle::local_epoch(2019, 6, 3, 8, 0, 0);

GpsRecord rec(ReasonKind k, std::int64_t t, double lat = 33.70, double lon = 73.05) {
  GpsRecord r;
  r.vehicle_id = "V1";
  r.timestamp = t;
  r.position = {lat, lon};
  r.reason = {k, {}};
  return r;
}

Trip make_trip(std::int64_t start, double duration_s, double km, std::size_t points = 2) {
  // Points on the equator spaced so the total length is km.
  std::vector<GpsRecord> pts;
  const double deg = km / (oracle::kR * oracle::kPiO / 180.0);
  for (std::size_t i = 0; i < points; ++i) {
    const double f = points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(points - 1);
    const auto kind = i == 0 ? ReasonKind::IgnitionOn
                      : i + 1 == points ? ReasonKind::IgnitionOff
                                        : ReasonKind::Periodic;
    pts.push_back(rec(kind, start + static_cast<std::int64_t>(std::llround(f * duration_s)), 0.0, f * deg));
  }
  auto res = segment_trips(pts);
  EXPECT_EQ(res.trips.size(), 1u);
  return res.trips.at(0);
}

}  // namespace

TEST(Segment, CanonicalTrip) {
  const std::vector<GpsRecord> r = {rec(ReasonKind::IgnitionOn, kT0), rec(ReasonKind::Periodic, kT0 + 60),
                                    rec(ReasonKind::Turn, kT0 + 120), rec(ReasonKind::IgnitionOff, kT0 + 180)};
  const auto s = segment_trips(r);
  ASSERT_EQ(s.trips.size(), 1u);
  EXPECT_EQ(s.trips[0].points.size(), 4u);
  EXPECT_EQ(s.trips[0].trip_id, "V1:0");
  EXPECT_EQ(s.trips[0].start_ts, kT0);
  EXPECT_EQ(s.trips[0].duration_s, 180.0);
  EXPECT_EQ(s.report.assigned_records, 4u);
  EXPECT_TRUE(s.report.conserves());
}

TEST(Segment, OrphanEvents) {
  const std::vector<GpsRecord> r = {rec(ReasonKind::Periodic, kT0), rec(ReasonKind::IgnitionOff, kT0 + 1),
                                    rec(ReasonKind::IgnitionOn, kT0 + 2), rec(ReasonKind::Periodic, kT0 + 3)};
  const auto s = segment_trips(r);
  EXPECT_TRUE(s.trips.empty());
  EXPECT_EQ(s.report.orphan_records, 2u);
  EXPECT_EQ(s.report.incomplete_records, 2u);
  EXPECT_EQ(s.report.assigned_records, 0u);
  EXPECT_TRUE(s.report.conserves());
}

TEST(Segment, RepeatedOnAbandonsPendingTrip) {
  const std::vector<GpsRecord> r = {rec(ReasonKind::IgnitionOn, kT0), rec(ReasonKind::Periodic, kT0 + 1),
                                    rec(ReasonKind::IgnitionOn, kT0 + 2), rec(ReasonKind::Periodic, kT0 + 3),
                                    rec(ReasonKind::IgnitionOff, kT0 + 4)};
  const auto s = segment_trips(r);
  ASSERT_EQ(s.trips.size(), 1u);
  const auto& t = s.trips[0];
  ASSERT_EQ(t.points.size(), 3u);
  EXPECT_EQ(t.points[0].timestamp, kT0 + 2);
  EXPECT_EQ(t.points[2].reason.kind, ReasonKind::IgnitionOff);
  EXPECT_EQ(s.report.incomplete_records, 2u);
  EXPECT_EQ(s.report.abandoned_trips, 1u);
  EXPECT_TRUE(s.report.conserves());
}

TEST(Segment, ZeroDurationPairIsDegenerate) {
  const std::vector<GpsRecord> r = {rec(ReasonKind::IgnitionOn, kT0), rec(ReasonKind::IgnitionOff, kT0)};
  const auto s = segment_trips(r);
  EXPECT_TRUE(s.trips.empty());
  EXPECT_EQ(s.report.degenerate_trips, 1u);
  EXPECT_EQ(s.report.degenerate_records, 2u);
  EXPECT_TRUE(s.report.conserves());
}

TEST(Segment, RandomStreamsConserveAndMatchOracle) {
  Rng rng(21);
  for (int k = 0; k < 200; ++k) {
    const auto recs = oracle::random_events(rng, 1 + rng.index(80));
    const auto s = segment_trips(recs);
    const auto o = oracle::segment(recs);
    EXPECT_TRUE(s.report.conserves());
    EXPECT_EQ(s.report.total_records, recs.size());
    EXPECT_EQ(s.trips.size(), o.trips);
    EXPECT_EQ(s.report.assigned_records, o.assigned);
    for (const auto& t : s.trips) {
      EXPECT_EQ(t.points.front().reason.kind, ReasonKind::IgnitionOn);
      EXPECT_EQ(t.points.back().reason.kind, ReasonKind::IgnitionOff);
      EXPECT_GT(t.duration_s, 0.0);
      EXPECT_EQ(t.duration_s, static_cast<double>(t.end_ts - t.start_ts));
    }
  }
}

TEST(Segment, IsDeterministic) {
  Rng rng(4);
  const auto recs = oracle::random_events(rng, 300);
  const auto a = segment_trips(recs), b = segment_trips(recs);
  ASSERT_EQ(a.trips.size(), b.trips.size());
  for (std::size_t i = 0; i < a.trips.size(); ++i) EXPECT_EQ(to_json(a.trips[i]), to_json(b.trips[i]));
}

TEST(Attributes, StationaryMinute) {
  const std::vector<GpsRecord> r = {rec(ReasonKind::IgnitionOn, kT0), rec(ReasonKind::IgnitionOff, kT0 + 60)};
  const auto a = compute_attributes(r);
  EXPECT_EQ(a.distance_km, 0.0);
  EXPECT_EQ(a.duration_s, 60.0);
  EXPECT_EQ(a.avg_speed_kmh, 0.0);
}

TEST(Attributes, OneDegreeInAnHour) {
  const std::vector<GpsRecord> r = {rec(ReasonKind::IgnitionOn, kT0, 0, 0),
                                    rec(ReasonKind::IgnitionOff, kT0 + 3600, 0, 1)};
  const auto a = compute_attributes(r);
  EXPECT_NEAR(a.distance_km, 111.195, 1e-3);
  EXPECT_EQ(a.duration_s, 3600.0);
  EXPECT_NEAR(a.avg_speed_kmh, a.distance_km, 1e-12);
}

TEST(Attributes, DistanceIsSumOfLegs) {
  const std::vector<GpsRecord> r = {rec(ReasonKind::IgnitionOn, kT0, 33.70, 73.05),
                                    rec(ReasonKind::Turn, kT0 + 30, 33.71, 73.06),
                                    rec(ReasonKind::IgnitionOff, kT0 + 90, 33.715, 73.04)};
  double sum = 0.0;
  for (std::size_t i = 1; i < r.size(); ++i) sum += oracle::haversine_m(r[i - 1].position, r[i].position) / 1000.0;
  const auto a = compute_attributes(r);
  EXPECT_NEAR(a.distance_km, sum, 1e-9);
  EXPECT_NEAR(a.avg_speed_kmh, sum / (90.0 / 3600.0), 1e-9);
}

TEST(Attributes, Errors) {
  const std::vector<GpsRecord> one = {rec(ReasonKind::IgnitionOn, kT0)};
  EXPECT_THROW(compute_attributes(one), InvalidInput);
  const std::vector<GpsRecord> same = {rec(ReasonKind::IgnitionOn, kT0), rec(ReasonKind::IgnitionOff, kT0)};
  EXPECT_THROW(compute_attributes(same), DegenerateTrip);
  const std::vector<GpsRecord> back = {rec(ReasonKind::IgnitionOn, kT0), rec(ReasonKind::IgnitionOff, kT0 - 5)};
  EXPECT_THROW(compute_attributes(back), InvalidInput);
}

TEST(Filter, Boundaries) {
  const FilterConfig cfg;
  EXPECT_EQ(check_filter(make_trip(oracle::local_epoch(2019, 6, 3, 5, 59, 0), 600, 5), cfg),
            DropReason::OutsideWindow);
  EXPECT_FALSE(check_filter(make_trip(oracle::local_epoch(2019, 6, 3, 6, 0, 0), 600, 5), cfg));
  EXPECT_FALSE(check_filter(make_trip(oracle::local_epoch(2019, 6, 3, 22, 59, 59), 3600, 5), cfg));
  EXPECT_EQ(check_filter(make_trip(oracle::local_epoch(2019, 6, 3, 23, 0, 0), 600, 5), cfg),
            DropReason::OutsideWindow);
  EXPECT_EQ(check_filter(make_trip(oracle::local_epoch(2019, 6, 3, 12, 0, 0), 3601, 5), cfg),
            DropReason::TooLong);
  EXPECT_EQ(check_filter(make_trip(oracle::local_epoch(2019, 6, 3, 12, 0, 0), 600, 0.1), cfg),
            DropReason::TooShort);
  FilterConfig three = cfg;
  three.min_points = 3;
  EXPECT_EQ(check_filter(make_trip(oracle::local_epoch(2019, 6, 3, 12, 0, 0), 600, 5), three),
            DropReason::TooFewPoints);
}

TEST(Filter, TenTripFixture) {
  std::vector<Trip> trips;
  for (int i = 0; i < 10; ++i) {
    trips.push_back(make_trip(oracle::local_epoch(2019, 6, 3, 7 + i, 10, 0), 900, 4, 3));
    trips.back().trip_id = "T" + std::to_string(i);
  }
  trips[1] = make_trip(oracle::local_epoch(2019, 6, 3, 4, 30, 0), 900, 4, 3);
  trips[1].trip_id = "T1";
  trips[4] = make_trip(oracle::local_epoch(2019, 6, 3, 12, 0, 0), 4000, 4, 3);
  trips[4].trip_id = "T4";
  trips[8] = make_trip(oracle::local_epoch(2019, 6, 3, 15, 0, 0), 900, 0.05, 3);
  trips[8].trip_id = "T8";
  const auto res = filter_trips(trips);
  EXPECT_EQ(res.kept.size(), 7u);
  ASSERT_EQ(res.dropped.size(), 3u);
  EXPECT_EQ(res.dropped[0], std::make_pair(std::string("T1"), DropReason::OutsideWindow));
  EXPECT_EQ(res.dropped[1], std::make_pair(std::string("T4"), DropReason::TooLong));
  EXPECT_EQ(res.dropped[2], std::make_pair(std::string("T8"), DropReason::TooShort));
  for (const auto& t : res.kept) EXPECT_FALSE(check_filter(t, {}));
}

TEST(TripJson, RoundTrip) {
  const auto t = make_trip(kT0, 600, 3, 5);
  const auto back = trip_from_json(to_json(t));
  EXPECT_EQ(to_json(back), to_json(t));
  EXPECT_EQ(back.points.size(), 5u);
  EXPECT_EQ(back.vehicle_id, "V1");
}
