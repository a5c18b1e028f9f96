#include <nlohmann/json.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "ttp/error.hpp"
#include "ttp/local_time.hpp"
#include "ttp/mapmatch.hpp"
#include "ttp/routes.hpp"
#include "ttp/synth.hpp"
#include "ttp/trips.hpp"

using namespace ttp;
using namespace ttp::synth;

namespace {

SynthConfig small(std::size_t trips = 100) {
  SynthConfig c;
  c.n_trips = trips;
  c.n_vehicles = 5;
  c.rows = 8;
  c.cols = 8;
  c.n_roads = 3;
  return c;
}

struct Recovered {
  std::map<std::string, trips::Trip> trips;
  std::map<std::string, std::string> road;
};

// ingest-free pipeline: segment, match, assign
Recovered recover(const SynthConfig& cfg) {
  const auto net = gen_network(cfg);
  const auto logs = gen_logs(cfg, net);
  const auto seg = trips::segment_all(ingest::sort_and_group(logs.records));
  Recovered r;
  for (const auto& t : seg.trips) {
    std::vector<geo::GeoPoint> pts;
    for (const auto& p : t.points) pts.push_back(p.position);
    const auto m = mapmatch::match_trip(net, pts);
    if (auto road = routes::assign_road(m, net)) r.road[t.trip_id] = *road;
    r.trips[t.trip_id] = t;
  }
  return r;
}

}  // namespace

TEST(SynthConfig, Validation) {
  SynthConfig c;
  EXPECT_NO_THROW(c.validate());
  c.n_trips = 0;
  EXPECT_THROW(c.validate(), InvalidInput);
  c = SynthConfig{};
  c.spacing_m = 0;
  EXPECT_THROW(c.validate(), InvalidInput);
  c = SynthConfig{};
  c.gps_noise_m = -1;
  EXPECT_THROW(c.validate(), InvalidInput);
  c = SynthConfig{};
  c.n_vehicles = 0;
  EXPECT_THROW(c.validate(), InvalidInput);
}

TEST(GenNetwork, TwoByTwo) {
  SynthConfig c;
  c.rows = c.cols = 2;
  c.min_trip_edges = 1;
  const auto net = gen_network(c);
  EXPECT_EQ(net.nodes().size(), 4u);
  EXPECT_EQ(net.edges().size(), 8u);
}

TEST(GenNetwork, SameSeedSameNetwork) {
  EXPECT_EQ(mapmatch::to_json(gen_network(SynthConfig{})), mapmatch::to_json(gen_network(SynthConfig{})));
}

TEST(GenNetwork, AxisAlignedBearings) {
  SynthConfig c;
  c.rows = c.cols = 10;
  const auto net = gen_network(c);
  for (const auto& e : net.edges()) {
    double best = 360.0;
    for (double axis : {0.0, 90.0, 180.0, 270.0}) best = std::min(best, geo::angle_diff_deg(e.bearing_deg, axis));
    EXPECT_LE(best, 1e-6);
  }
}

TEST(GenNetwork, RoadsCoverAllEdges) {
  const auto net = gen_network(small());
  std::map<std::string, std::size_t> per_road;
  for (const auto& e : net.edges()) ++per_road[e.road_id];
  EXPECT_EQ(per_road.size(), 3u);
}

TEST(GenLogs, ExactOnOffPairs) {
  const auto cfg = small(100);
  const auto logs = gen_logs(cfg, gen_network(cfg));
  std::size_t on = 0, off = 0;
  for (const auto& r : logs.records) {
    on += r.reason.kind == ingest::ReasonKind::IgnitionOn;
    off += r.reason.kind == ingest::ReasonKind::IgnitionOff;
  }
  EXPECT_EQ(on, 100u);
  EXPECT_EQ(off, 100u);
  EXPECT_EQ(logs.truth.size(), 100u);
}

TEST(GenLogs, DeterministicPerSeed) {
  const auto cfg = small(60);
  const auto net = gen_network(cfg);
  std::ostringstream a, b, c;
  write_logs_csv(a, gen_logs(cfg, net).records);
  write_logs_csv(b, gen_logs(cfg, net).records);
  EXPECT_EQ(a.str(), b.str());
  auto other = cfg;
  other.seed = 43;
  write_logs_csv(c, gen_logs(other, net).records);
  EXPECT_NE(a.str(), c.str());
}

TEST(GenLogs, PlantedCountsAreExact) {
  auto cfg = small(100);
  cfg.road_weights = {50, 30, 20};
  const auto counts = planted_counts(cfg);
  EXPECT_EQ(counts, (std::vector<std::size_t>{50, 30, 20}));
  const auto logs = gen_logs(cfg, gen_network(cfg));
  std::map<std::string, std::size_t> seen;
  for (const auto& t : logs.truth) ++seen[t.road_id];
  EXPECT_EQ(seen["R0"], 50u);
  EXPECT_EQ(seen["R1"], 30u);
  EXPECT_EQ(seen["R2"], 20u);
}

TEST(GenLogs, SixRoadDefaultProfile) {
  SynthConfig c;
  const auto counts = planted_counts(c);
  ASSERT_EQ(counts.size(), 6u);
  std::size_t total = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    total += counts[i];
    if (i > 0) EXPECT_GT(counts[i - 1], counts[i]);
  }
  EXPECT_EQ(total, c.n_trips);
}

TEST(GenLogs, TripsRespectScheduleAndLaw) {
  const auto cfg = small(200);
  const auto logs = gen_logs(cfg, gen_network(cfg));
  for (const auto& t : logs.truth) {
    const auto lt = to_local(t.start_ts);
    EXPECT_GE(lt.hour, 6);
    EXPECT_LT(lt.hour, 22);
    EXPECT_GE(lt.month, 4);
    EXPECT_LE(lt.month, 10);
    EXPECT_EQ(lt.year, 2019);
    EXPECT_GT(t.true_duration_s, 0.0);
    EXPECT_LE(t.logged_duration_s, 3600.0);
  }
}

TEST(GenLogs, ZeroNoiseRecoversTruthAndRoads) {
  auto cfg = small(150);
  cfg.gps_noise_m = 0.0;
  cfg.duration_noise_s = 0.0;
  const auto logs = gen_logs(cfg, gen_network(cfg));
  const auto rec = recover(cfg);
  ASSERT_EQ(rec.trips.size(), logs.truth.size());
  for (const auto& t : logs.truth) {
    const auto& trip = rec.trips.at(t.trip_id);
    EXPECT_EQ(trip.duration_s, t.true_duration_s);
    EXPECT_EQ(t.logged_duration_s, t.true_duration_s);
    EXPECT_EQ(trip.start_ts, t.start_ts);
    ASSERT_TRUE(rec.road.count(t.trip_id));
    EXPECT_EQ(rec.road.at(t.trip_id), t.road_id);
  }
}

TEST(GenLogs, LoggedDurationMatchesTimestamps) {
  const auto cfg = small(120);
  const auto logs = gen_logs(cfg, gen_network(cfg));
  const auto rec = recover(cfg);
  for (const auto& t : logs.truth) EXPECT_EQ(rec.trips.at(t.trip_id).duration_s, t.logged_duration_s);
}

TEST(GenLogs, PlantedRankingRecovered) {
  auto cfg = small(100);
  cfg.road_weights = {50, 30, 20};
  const auto rec = recover(cfg);
  std::vector<std::string> roads;
  for (const auto& [id, r] : rec.road) roads.push_back(r);
  const auto top = routes::mine_frequent(roads, 3);
  EXPECT_EQ(top, (std::vector<routes::RouteStat>{{"R0", 50}, {"R1", 30}, {"R2", 20}}));
}

TEST(GenLogs, TooManyTripsPerVehicle) {
  auto cfg = small(100);
  cfg.n_vehicles = 1;
  cfg.first_month = 10;
  cfg.first_day = 30;
  EXPECT_THROW(gen_logs(cfg, gen_network(cfg)), InvalidInput);
}

TEST(Csv, TruthHeader) {
  std::ostringstream out;
  write_truth_csv(out, {TruthTrip{"V001:0", "V001", "R2", 0, 512, 530}});
  EXPECT_EQ(out.str(), "trip_id,road_id,true_duration_s\nV001:0,R2,512\n");
}
