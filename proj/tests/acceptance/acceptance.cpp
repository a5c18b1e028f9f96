// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cli_harness.hpp"
#include "oracles.hpp"
#include "ttp/ingest.hpp"
#include "ttp/neural.hpp"
#include "ttp/routes.hpp"
#include "ttp/simplify.hpp"
#include "ttp/spatial_index.hpp"
#include "ttp/synth.hpp"
#include "ttp/trips.hpp"

namespace fs = std::filesystem;
using namespace ttp;
using Clock = std::chrono::steady_clock;

namespace {

const std::string kFixtures = TTP_FIXTURE_DIR;

// Collects the first few failed expectations of one criterion.
struct Check {
  std::size_t failures = 0;
  std::vector<std::string> notes;
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    ++failures;
    if (notes.size() < 5) notes.push_back(what);
  }
  void info(const std::string& s) { notes.push_back(s); }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

std::vector<double> random_vec(Rng& rng, std::size_t n, double scale = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-scale, scale);
  return v;
}

neural::Model randomise(neural::Model m, Rng& rng) {
  auto theta = neural::flatten(m);
  for (auto& t : theta) t = rng.uniform(-0.8, 0.8);
  neural::unflatten(m, theta);
  return m;
}

void gradient_check(Check& c, const neural::Model& m, const std::vector<neural::Sequence>& xs,
                    const std::vector<double>& ys, const std::string& label) {
  const auto analytic = neural::flatten(neural::backward(m, xs, ys).grad);
  const auto numeric = oracle::numeric_gradient(m, xs, ys, 1e-5);
  c.expect(analytic.size() == numeric.size(), label + ": parameter count mismatch");
  double worst = 0.0;
  for (std::size_t k = 0; k < std::min(analytic.size(), numeric.size()); ++k) {
    const double e = oracle::rel_err(analytic[k], numeric[k]);
    worst = std::max(worst, e);
    c.expect(e <= 1e-4, label + ": parameter " + std::to_string(k) + " rel err " + fmt(e));
  }
  c.info(label + " " + std::to_string(analytic.size()) + " params, worst rel err " + fmt(worst));
}

void criterion_1(Check& c) {
  const auto t0 = Clock::now();
  Rng rng(101);
  {
    const auto m = randomise(neural::init_model({neural::ModelKind::Mlp, 12, {}, {8}}, 1), rng);
    std::vector<neural::Sequence> xs;
    std::vector<double> ys;
    for (int i = 0; i < 8; ++i) {
      xs.push_back({random_vec(rng, 12)});
      ys.push_back(rng.uniform(-1, 1));
    }
    gradient_check(c, m, xs, ys, "mlp 12-8-1");
  }
  {
    const auto m = randomise(neural::init_model({neural::ModelKind::Lstm, 12, {4}, {}}, 2), rng);
    std::vector<neural::Sequence> xs;
    std::vector<double> ys;
    for (int i = 0; i < 8; ++i) {
      xs.push_back({random_vec(rng, 12), random_vec(rng, 12), random_vec(rng, 12)});
      ys.push_back(rng.uniform(-1, 1));
    }
    gradient_check(c, m, xs, ys, "lstm 4 units, 3 steps");
  }
  const double dt = seconds_since(t0);
  c.expect(dt < 10.0, "runtime " + fmt(dt) + " s");
  c.info("runtime " + fmt(dt) + " s");
}

void criterion_2(Check& c) {
  Rng rng(202);
  double worst = 0.0;
  auto near = [&](double a, double b, const std::string& what) {
    worst = std::max(worst, std::abs(a - b));
    c.expect(std::abs(a - b) <= 1e-12, what + " differs by " + fmt(std::abs(a - b)));
  };
  for (int k = 0; k < 100; ++k) {
    const auto act = static_cast<neural::Activation>(rng.index(4));
    neural::DenseLayer l{neural::Matrix(1 + rng.index(9), 1 + rng.index(9)), {}, act};
    l.weights.data = random_vec(rng, l.weights.data.size());
    l.bias = random_vec(rng, l.outputs());
    const auto x = random_vec(rng, l.inputs(), 3.0);
    const auto got = neural::dense_forward(l, x);
    const auto want = oracle::dense(l, x);
    for (std::size_t i = 0; i < got.size(); ++i) near(got[i], want[i], "dense");
  }
  for (int k = 0; k < 100; ++k) {
    std::vector<neural::DenseLayer> layers;
    std::size_t width = 1 + rng.index(12);
    const auto x = random_vec(rng, width, 2.0);
    const std::size_t depth = 1 + rng.index(3);
    for (std::size_t d = 0; d <= depth; ++d) {
      const bool last = d == depth;
      const std::size_t out = last ? 1 : 1 + rng.index(10);
      neural::DenseLayer l{neural::Matrix(out, width), random_vec(rng, out),
                           last ? neural::Activation::Identity : neural::Activation::ReLU};
      l.weights.data = random_vec(rng, out * width);
      layers.push_back(l);
      width = out;
    }
    near(neural::mlp_forward(layers, x), oracle::mlp(layers, x), "mlp");
  }
  for (int k = 0; k < 100; ++k) {
    const std::size_t in = 1 + rng.index(8), hid = 1 + rng.index(8);
    const auto m = randomise(neural::init_model({neural::ModelKind::Lstm, in, {hid}, {}}, rng.bits()), rng);
    const auto x = random_vec(rng, in, 2.0);
    const neural::LstmState prev{random_vec(rng, hid), random_vec(rng, hid)};
    const auto got = neural::lstm_step(m.lstm[0], x, prev);
    const auto want = oracle::lstm_step(m.lstm[0], x, prev.h, prev.c);
    for (std::size_t j = 0; j < hid; ++j) {
      near(got.h[j], want.h[j], "lstm h");
      near(got.c[j], want.c[j], "lstm c");
    }
  }
  c.info("300 instances, worst abs diff " + fmt(worst));
}

void criterion_3(Check& c) {
  Rng rng(303);
  for (int k = 0; k < 100; ++k) {
    const auto p = oracle::random_trajectory(rng, 500);
    const double e1 = rng.uniform(1, 20), e2 = e1 + rng.uniform(0, 30);
    const auto i1 = simplify::rdp_indices(p, simplify::Epsilon(e1));
    const auto i2 = simplify::rdp_indices(p, simplify::Epsilon(e2));
    const std::string tag = "trajectory " + std::to_string(k) + ": ";
    c.expect(!i1.empty() && i1.front() == 0 && i1.back() == p.size() - 1, tag + "endpoints");
    c.expect(std::is_sorted(i1.begin(), i1.end()) && std::adjacent_find(i1.begin(), i1.end()) == i1.end(),
             tag + "not a subsequence");
    const auto once = simplify::rdp(p, simplify::Epsilon(e1));
    bool members = once.size() == i1.size();
    for (std::size_t j = 0; members && j < i1.size(); ++j) members = once[j] == p[i1[j]];
    c.expect(members, tag + "points are not the kept input points");
    c.expect(simplify::rdp(once, simplify::Epsilon(e1)) == once, tag + "not idempotent");
    c.expect(i2.size() <= i1.size(), tag + "not monotone in epsilon");
    const double dev = oracle::max_dropped_deviation(p, i1);
    c.expect(dev <= e1 + 1e-9, tag + "deviation " + fmt(dev) + " > eps " + fmt(e1));
  }
  const auto sine = oracle::sine_path(800, 300.0, 2000.0, 4000.0);
  const auto kept = simplify::rdp_indices(sine, simplify::Epsilon(10));
  const double reduction = 1.0 - static_cast<double>(kept.size()) / static_cast<double>(sine.size());
  c.expect(reduction >= 0.9, "sine reduction " + fmt(reduction * 100) + "%");
  c.info("sine fixture 800 -> " + std::to_string(kept.size()) + " points");
}

void criterion_4(Check& c) {
  Rng rng(404);
  std::vector<mapmatch::IndexEntry> nodes;
  for (std::size_t i = 0; i < 10000; ++i) {
    nodes.push_back({static_cast<std::int64_t>(i + 1), {33.7 + rng.uniform(-0.3, 0.3), 73.0 + rng.uniform(-0.3, 0.3)}});
  }
  std::vector<geo::GeoPoint> queries;
  for (int i = 0; i < 1000; ++i) queries.push_back({33.7 + rng.uniform(-0.35, 0.35), 73.0 + rng.uniform(-0.35, 0.35)});
  const auto t0 = Clock::now();
  const mapmatch::SpatialIndex idx(nodes);
  std::size_t mismatches = 0;
  for (const auto& q : queries) {
    std::int64_t best = 0;
    double best_d = 0.0;
    for (const auto& n : nodes) {
      const double d = oracle::haversine_m(q, n.position);
      if (best == 0 || d < best_d || (d == best_d && n.id < best)) {
        best = n.id;
        best_d = d;
      }
    }
    const auto got = idx.nearest(q, 1);
    if (got.size() != 1 || got[0].id != best) ++mismatches;
  }
  const double dt = seconds_since(t0);
  c.expect(mismatches == 0, std::to_string(mismatches) + " of 1000 queries differ from the scan");
  c.expect(dt < 5.0, "runtime " + fmt(dt) + " s");
  c.info("runtime " + fmt(dt) + " s including the scan");
}

ingest::GpsRecord event(ingest::ReasonKind k, std::int64_t t) {
  ingest::GpsRecord r;
  r.vehicle_id = "V1";
  r.timestamp = t;
  r.position = {33.70, 73.05};
  r.reason = {k, {}};
  return r;
}

void criterion_5(Check& c) {
  Rng rng(505);
  for (int k = 0; k < 50; ++k) {
    const auto recs = oracle::random_events(rng, 1 + rng.index(200));
    const auto s = trips::segment_trips(recs);
    const auto o = oracle::segment(recs);
    const auto& r = s.report;
    const std::size_t discarded = r.total_records - r.assigned_records;
    c.expect(r.total_records == recs.size(), "total differs from input size");
    c.expect(r.assigned_records + discarded == recs.size() && r.conserves(), "conservation broken");
    c.expect(r.assigned_records == o.assigned && s.trips.size() == o.trips, "differs from the oracle");
    std::size_t in_trips = 0;
    for (const auto& t : s.trips) in_trips += t.points.size();
    c.expect(in_trips == r.assigned_records, "assigned count differs from trip points");
  }
  using K = ingest::ReasonKind;
  const std::int64_t t0 = oracle::local_epoch(2019, 6, 3, 8, 0, 0);
  {
    const auto s = trips::segment_trips(std::vector<ingest::GpsRecord>{event(K::IgnitionOn, t0), event(K::Periodic, t0 + 60),
                                         event(K::Turn, t0 + 120), event(K::IgnitionOff, t0 + 180)});
    c.expect(s.trips.size() == 1 && s.trips[0].points.size() == 4 && s.trips[0].duration_s == 180.0,
             "canonical single trip");
  }
  {
    const auto s = trips::segment_trips(std::vector<ingest::GpsRecord>{event(K::Periodic, t0), event(K::IgnitionOff, t0 + 1),
                                         event(K::IgnitionOn, t0 + 2), event(K::Periodic, t0 + 3)});
    c.expect(s.trips.empty() && s.report.orphan_records == 2 && s.report.incomplete_records == 2,
             "orphan and unterminated events");
  }
  {
    const auto s = trips::segment_trips(std::vector<ingest::GpsRecord>{event(K::IgnitionOn, t0), event(K::Periodic, t0 + 1),
                                         event(K::IgnitionOn, t0 + 2), event(K::Periodic, t0 + 3),
                                         event(K::IgnitionOff, t0 + 4)});
    c.expect(s.trips.size() == 1 && s.trips[0].points.size() == 3 && s.trips[0].start_ts == t0 + 2,
             "repeated ignition on");
  }
  {
    const auto s = trips::segment_trips(std::vector<ingest::GpsRecord>{event(K::IgnitionOn, t0), event(K::IgnitionOff, t0)});
    c.expect(s.trips.empty() && s.report.degenerate_records == 2, "zero-duration pair");
  }
  {
    const auto parsed = ingest::parse_records_file(kFixtures + "/canonical_4.csv");
    const auto s = trips::segment_trips(parsed.records);
    c.expect(s.trips.size() == 1 && s.trips[0].points.size() == 4 && s.trips[0].duration_s == 210.0 &&
                 s.trips[0].trip_id == "V1:0",
             "canonical CSV fixture");
  }
}

// Full CLI chain with defaults at seed 42.
struct Chain {
  fs::path dir;
  double seconds = 0.0;
  bool ok = true;
  std::string error;
};

Chain run_chain(const fs::path& dir) {
  Chain ch;
  ch.dir = dir;
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto p = [&](const std::string& f) { return (dir / f).string(); };
  std::vector<std::vector<std::string>> steps = {
      {"synth", "--seed", "42", "--logs", p("logs.csv"), "--network", p("network.json"), "--truth", p("truth.csv")},
      {"ingest", "--in", p("logs.csv"), "--out", p("records.jsonl")},
      {"segment", "--in", p("records.jsonl"), "--out", p("trips.jsonl")},
      {"match", "--trips", p("trips.jsonl"), "--network", p("network.json"), "--out", p("matched.jsonl")},
      {"mine-routes", "--trips", p("trips.jsonl"), "--matched", p("matched.jsonl"), "--network", p("network.json"),
       "--out", p("routed.jsonl"), "--ranking", p("ranking.csv")},
      {"featurize", "--in", p("routed.jsonl"), "--train", p("train.csv"), "--test", p("test.csv"), "--scaler",
       p("scaler.json"), "--vehicles", p("vehicles.json")},
  };
  for (const std::string model : {"mlp", "ann", "lstm"}) {
    steps.push_back({"train", "--train", p("train.csv"), "--scaler", p("scaler.json"), "--model", model, "--seed",
                     "42", "--out", p(model + ".json"), "--loss-log", p(model + "_loss.csv")});
    steps.push_back({"evaluate", "--model", p(model + ".json"), "--test", p("test.csv"), "--out",
                     p(model + "_metrics.json"), "--predictions", p(model + "_pred.csv")});
  }
  const auto t0 = Clock::now();
  for (auto& s : steps) {
    s.push_back("--run-log");
    s.push_back(p("run_log.jsonl"));
    const auto r = harness::run(s);
    if (r.code != 0) {
      ch.ok = false;
      ch.error = s[0] + " exited " + std::to_string(r.code) + ": " + r.err;
      break;
    }
  }
  ch.seconds = seconds_since(t0);
  return ch;
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(harness::slurp(p)); }

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(harness::slurp(p));
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

void criterion_6(Check& c, const Chain& ch) {
  c.expect(ch.ok, ch.error);
  if (!ch.ok) return;
  synth::SynthConfig cfg;
  cfg.seed = 42;
  const auto planted = synth::planted_counts(cfg);
  const auto ranking = read_csv(ch.dir / "ranking.csv");
  c.expect(ranking.size() == planted.size(), "ranking has " + std::to_string(ranking.size()) + " roads");
  // planted order: descending count, ties by road index
  std::vector<std::size_t> order(planted.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return planted[a] > planted[b]; });
  std::string mined;
  for (std::size_t i = 0; i < std::min(ranking.size(), order.size()); ++i) {
    c.expect(ranking[i][1] == synth::road_name(order[i]) && std::stoul(ranking[i][2]) == planted[order[i]],
             "rank " + std::to_string(i + 1) + " is " + ranking[i][1] + " x" + ranking[i][2]);
    mined += (mined.empty() ? "" : " ") + ranking[i][1] + ":" + ranking[i][2];
  }
  c.info("ranking " + mined);
  const double mlp = read_json(ch.dir / "mlp_metrics.json")["rmse_s"].get<double>();
  const double ann = read_json(ch.dir / "ann_metrics.json")["rmse_s"].get<double>();
  const double lstm = read_json(ch.dir / "lstm_metrics.json")["rmse_s"].get<double>();
  c.expect(mlp <= 45.0, "MLP RMSE " + fmt(mlp) + " s > 45 s");
  c.expect(lstm <= 1.2 * mlp, "LSTM RMSE " + fmt(lstm) + " s > 1.2 x MLP " + fmt(mlp) + " s");
  c.expect(std::isfinite(ann), "ANN RMSE not finite");
  const auto ann_ckpt = read_json(ch.dir / "ann.json");
  c.expect(std::isfinite(ann_ckpt["final_loss"].get<double>()), "ANN final loss not finite");
  c.expect(ch.seconds < 300.0, "chain took " + fmt(ch.seconds) + " s");
  c.info("RMSE mlp " + fmt(mlp) + " s, ann " + fmt(ann) + " s, lstm " + fmt(lstm) + " s; chain " + fmt(ch.seconds) + " s");
}

void criterion_7(Check& c, const Chain& ch) {
  const std::vector<double> a = {1, 2, 3}, z = {0, 0}, p = {3, 4}, y0 = {0}, y2 = {2};
  c.expect(neural::rmse(a, a) == 0.0 && neural::mae(a, a) == 0.0, "identical arrays");
  c.expect(neural::rmse(y0, y2) == 2.0 && neural::mae(y0, y2) == 2.0, "single pair");
  c.expect(neural::rmse(z, p) == std::sqrt(12.5) && neural::mae(z, p) == 3.5, "3-4 pair");
  if (!ch.ok) {
    c.expect(false, "no evaluation runs: " + ch.error);
    return;
  }
  for (const std::string model : {"mlp", "ann", "lstm"}) {
    const auto m = read_json(ch.dir / (model + "_metrics.json"));
    const double rmse = m["rmse_s"].get<double>(), mae = m["mae_s"].get<double>();
    c.expect(rmse >= mae, model + ": RMSE < MAE");
    // recompute from the written predictions
    double se = 0.0, ae = 0.0;
    const auto rows = read_csv(ch.dir / (model + "_pred.csv"));
    for (const auto& r : rows) {
      const double d = std::stod(r[0]) - std::stod(r[1]);
      se += d * d;
      ae += std::abs(d);
    }
    const double n = static_cast<double>(rows.size());
    c.expect(rows.size() == m["n_test"].get<std::size_t>(), model + ": prediction count");
    c.expect(std::abs(std::sqrt(se / n) - rmse) <= 1e-9 * rmse, model + ": RMSE disagrees with predictions");
    c.expect(std::abs(ae / n - mae) <= 1e-9 * mae, model + ": MAE disagrees with predictions");
  }
}

void criterion_8(Check& c, const Chain& a, const Chain& b) {
  c.expect(a.ok && b.ok, "chain failed: " + a.error + b.error);
  if (!a.ok || !b.ok) return;
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(a.dir)) {
    const auto name = entry.path().filename().string();
    if (name == "run_log.jsonl") continue;  // wall times differ
    c.expect(fs::exists(b.dir / name), name + " missing in second run");
    c.expect(harness::slurp(entry.path()) == harness::slurp(b.dir / name), name + " differs");
    ++compared;
  }
  for (const char* required : {"trips.jsonl", "mlp.json", "ann.json", "lstm.json", "mlp_metrics.json",
                               "ann_metrics.json", "lstm_metrics.json"}) {
    c.expect(fs::exists(a.dir / required), std::string(required) + " not produced");
  }
  c.info(std::to_string(compared) + " files compared");
}

void audit_index(Check& c, const fs::path& index, const fs::path& dataset, std::size_t& audited) {
  const auto rows = read_csv(index);
  const auto data = read_csv(dataset);
  c.expect(rows.size() == data.size(), index.filename().string() + ": row count differs from dataset");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const std::int64_t start = std::stoll(r[3]), end = std::stoll(r[4]);
    const double dur = std::stod(r[5]);
    // local clock is UTC+5
    const std::int64_t sod = ((start + 5 * 3600) % 86400 + 86400) % 86400;
    c.expect(sod >= 6 * 3600 && sod < 23 * 3600, r[0] + ": starts at local second " + std::to_string(sod));
    c.expect(dur <= 3600.0 && dur > 0.0, r[0] + ": duration " + fmt(dur));
    c.expect(static_cast<double>(end - start) == dur, r[0] + ": duration differs from timestamps");
    if (i < data.size()) {
      const auto& d = data[i];
      c.expect(std::stoll(d[7]) == (sod / 60) % 60 && std::stoll(d[8]) == sod % 60,
               r[0] + ": departure minute/second differ");
      c.expect(std::stod(d[12]) == dur, r[0] + ": target differs from duration");
    }
    ++audited;
  }
}

void criterion_9(Check& c, const Chain& ch, const fs::path& work) {
  std::size_t audited = 0;
  if (ch.ok) {
    audit_index(c, ch.dir / "train_trips.csv", ch.dir / "train.csv", audited);
    audit_index(c, ch.dir / "test_trips.csv", ch.dir / "test.csv", audited);
  } else {
    c.expect(false, ch.error);
  }
  // a dataset built from trips that need filtering
  const auto dir = work / "filter";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto p = [&](const std::string& f) { return (dir / f).string(); };
  const auto in = kFixtures + "/filter_mix.csv";
  auto step = [&](std::vector<std::string> s) {
    s.push_back("--run-log");
    s.push_back(p("run_log.jsonl"));
    const auto r = harness::run(s);
    c.expect(r.code == 0, s[0] + " on filter fixture exited " + std::to_string(r.code) + ": " + r.err);
    return r.code == 0;
  };
  bool ok = step({"ingest", "--in", in, "--out", p("records.jsonl")}) &&
            step({"segment", "--in", p("records.jsonl"), "--out", p("trips.jsonl"), "--no-filter"});
  if (ok) {
    // every unfiltered trip tagged with one road, as mine-routes would
    std::istringstream trips_in(harness::slurp(dir / "trips.jsonl"));
    std::ofstream routed(dir / "routed.jsonl");
    std::string line;
    std::size_t n = 0;
    while (std::getline(trips_in, line)) {
      auto j = nlohmann::ordered_json::parse(line);
      j["road_id"] = "R0";
      routed << j.dump() << '\n';
      ++n;
    }
    c.expect(n == 7, "filter fixture segmented into " + std::to_string(n) + " trips, want 7");
  }
  ok = ok && step({"featurize", "--in", p("routed.jsonl"), "--train", p("train.csv"), "--test", p("test.csv"),
                   "--scaler", p("scaler.json"), "--vehicles", p("vehicles.json")});
  if (ok) {
    const std::size_t before = audited;
    audit_index(c, dir / "train_trips.csv", dir / "train.csv", audited);
    audit_index(c, dir / "test_trips.csv", dir / "test.csv", audited);
    c.expect(audited - before == 3, "filter fixture kept " + std::to_string(audited - before) + " trips, want 3");
  }
  c.info(std::to_string(audited) + " featurized trips audited");
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "ttp_acceptance";
  fs::create_directories(work);
  int failed = 0;
  auto report = [&](int n, const std::string& title, const std::function<void(Check&)>& body) {
    Check c;
    try {
      body(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    std::cout << (c.failures == 0 ? "PASS" : "FAIL") << " criterion " << n << ": " << title;
    for (const auto& s : c.notes) std::cout << " | " << s;
    std::cout << std::endl;
    failed += c.failures != 0;
  };

  report(1, "gradient check", criterion_1);
  report(2, "forward-pass oracles", criterion_2);
  report(3, "RDP properties", criterion_3);
  report(4, "spatial index vs linear scan", criterion_4);
  report(5, "segmentation conservation", criterion_5);
  const Chain first = run_chain(work / "run1");
  const Chain second = run_chain(work / "run2");
  report(6, "synthetic end-to-end experiment", [&](Check& c) { criterion_6(c, first); });
  report(7, "metric identities", [&](Check& c) { criterion_7(c, first); });
  report(8, "determinism", [&](Check& c) { criterion_8(c, first, second); });
  report(9, "filter compliance audit", [&](Check& c) { criterion_9(c, first, work); });
  return failed == 0 ? 0 : 1;
}
