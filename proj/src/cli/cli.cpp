#include "ttp/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>

#include "io.hpp"
#include "plot.hpp"
#include "ttp/error.hpp"
#include "ttp/ingest.hpp"
#include "ttp/local_time.hpp"
#include "ttp/mapmatch.hpp"
#include "ttp/neural.hpp"
#include "ttp/routes.hpp"
#include "ttp/simplify.hpp"
#include "ttp/synth.hpp"
#include "ttp/trips.hpp"

namespace ttp::cli {

namespace {

using ojson = nlohmann::ordered_json;

struct Common {
  std::string run_log = "ttp_run_log.jsonl";
  std::string format = "json";
  std::string config;
};

struct Context {
  std::ostream& out;
  std::ostream& err;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "TOML/INI file with option values; flags on the command line win");
  sub->add_option("--run-log", c.run_log, "JSON Lines file the stage manifest is appended to")
      ->capture_default_str();
  sub->add_option("--format", c.format, "report format on stdout")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
}

// Options actually used (command line or config file) by name.
ojson used_flags(const CLI::App* sub) {
  ojson flags = ojson::object();
  for (const CLI::Option* opt : sub->get_options()) {
    if (opt->count() == 0) continue;
    const std::string name = opt->get_name(false, true);
    if (name == "--help" || name == "--config" || name == "--run-log" || name == "--format") continue;
    const auto& res = opt->results();
    if (res.size() == 1) {
      flags[name.substr(2)] = res.front();
    } else {
      flags[name.substr(2)] = res;
    }
  }
  return flags;
}

void print_report(const Context& ctx, const Common& c, const Manifest& m, const ojson& extra) {
  if (c.format == "json") {
    ojson j = m.to_json();
    for (const auto& [k, v] : extra.items()) j[k] = v;
    ctx.out << j.dump(2) << '\n';
    return;
  }
  ctx.out << "key,value\n";
  ctx.out << "stage," << m.stage << '\n';
  for (const auto& [k, v] : m.counts.items()) ctx.out << k << ',' << v.dump() << '\n';
  for (const auto& b : m.balance) {
    const std::string unit = b["unit"].get<std::string>();
    ctx.out << unit << "_in," << b["in"].dump() << '\n';
    ctx.out << unit << "_out," << b["out"].dump() << '\n';
    ctx.out << unit << "_discarded," << b["discarded"].dump() << '\n';
  }
  for (const auto& [k, v] : extra.items()) {
    if (v.is_primitive()) ctx.out << k << ',' << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
  }
  ctx.out << "wall_time_s," << m.wall_time_s << '\n';
}

// Runs a stage body, times it, logs the manifest and prints the report.
using StageBody = std::function<ojson(Manifest&)>;

std::function<void()> stage(const Context& ctx, const Common& c, CLI::App* sub, std::string name,
                            StageBody body) {
  return [&ctx, &c, sub, name = std::move(name), body = std::move(body)] {
    Manifest m;
    m.stage = name;
    m.flags = used_flags(sub);
    const auto t0 = std::chrono::steady_clock::now();
    ojson extra = body(m);
    m.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    append_run_log(c.run_log, m);
    print_report(ctx, c, m, extra);
  };
}

std::string sibling(const std::string& path, const std::string& suffix) {
  std::filesystem::path p(path);
  const std::string stem = p.stem().string();
  p.replace_filename(stem + suffix);
  return p.string();
}

std::vector<geo::GeoPoint> positions(const trips::Trip& t) {
  std::vector<geo::GeoPoint> pts;
  pts.reserve(t.points.size());
  for (const auto& p : t.points) pts.push_back(p.position);
  return pts;
}

// ---------------------------------------------------------------- synth

struct SynthOpts {
  std::uint64_t seed = 0;
  std::string logs = "logs.csv", network = "network.json", truth = "truth.csv";
  synth::SynthConfig config;
};

void add_synth(CLI::App& app, const Context& ctx, Common& c, std::function<void()>& action) {
  auto o = std::make_shared<SynthOpts>();
  auto* sub = app.add_subcommand("synth", "generate a grid network, GPS logs and ground truth");
  add_common(sub, c);
  auto& cfg = o->config;
  sub->add_option("--seed", o->seed, "random seed")->required();
  sub->add_option("--logs", o->logs, "output GPS log CSV")->capture_default_str();
  sub->add_option("--network", o->network, "output network JSON")->capture_default_str();
  sub->add_option("--truth", o->truth, "output ground-truth CSV")->capture_default_str();
  sub->add_option("--trips", cfg.n_trips, "number of trips")->capture_default_str();
  sub->add_option("--vehicles", cfg.n_vehicles, "number of vehicles")->capture_default_str();
  sub->add_option("--roads", cfg.n_roads, "number of named roads")->capture_default_str();
  sub->add_option("--rows", cfg.rows, "grid rows")->capture_default_str();
  sub->add_option("--cols", cfg.cols, "grid columns")->capture_default_str();
  sub->add_option("--spacing", cfg.spacing_m, "grid spacing in metres")->capture_default_str();
  sub->add_option("--gps-noise", cfg.gps_noise_m, "GPS jitter stddev in metres")->capture_default_str();
  sub->add_option("--duration-noise", cfg.duration_noise_s, "duration noise stddev in seconds")
      ->capture_default_str();
  sub->add_option("--speed", cfg.base_speed_kmh, "free-flow speed in km/h")->capture_default_str();
  sub->add_option("--road-weights", cfg.road_weights, "relative trip share per road");
  sub->callback([&action, &ctx, &c, sub, o] {
    action = stage(ctx, c, sub, "synth", [o](Manifest& m) {
      o->config.seed = o->seed;
      const auto net = synth::gen_network(o->config);
      const auto logs = synth::gen_logs(o->config, net);
      {
        auto out = open_output(o->logs);
        synth::write_logs_csv(out, logs.records);
      }
      write_text(o->network, mapmatch::to_json(net).dump(1) + "\n");
      {
        auto out = open_output(o->truth);
        synth::write_truth_csv(out, logs.truth);
      }
      m.outputs["logs"] = o->logs;
      m.outputs["network"] = o->network;
      m.outputs["truth"] = o->truth;
      m.counts["records"] = logs.records.size();
      m.counts["trips"] = logs.truth.size();
      m.counts["nodes"] = net.nodes().size();
      m.counts["edges"] = net.edges().size();
      ojson planted = ojson::object();
      const auto counts = synth::planted_counts(o->config);
      for (std::size_t r = 0; r < counts.size(); ++r) planted[synth::road_name(r)] = counts[r];
      return ojson{{"planted", planted}};
    });
  });
}

// ---------------------------------------------------------------- ingest

struct IngestOpts {
  std::string in, out = "records.jsonl", reasons, rejects;
  std::vector<std::string> columns;
};

ingest::ColumnMap column_map(const std::vector<std::string>& specs) {
  ingest::ColumnMap map;
  const std::map<std::string, std::string*> fields = {
      {"vehicle_id", &map.vehicle_id}, {"timestamp", &map.timestamp}, {"lat", &map.lat},
      {"lon", &map.lon},               {"speed", &map.speed},         {"altitude", &map.altitude},
      {"reason", &map.reason}};
  for (const auto& s : specs) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw InvalidInput("column mapping '" + s + "' is not field=header");
    const auto it = fields.find(s.substr(0, eq));
    if (it == fields.end()) throw InvalidInput("unknown column field '" + s.substr(0, eq) + "'");
    *it->second = s.substr(eq + 1);
  }
  return map;
}

void add_ingest(CLI::App& app, const Context& ctx, Common& c, std::function<void()>& action) {
  auto o = std::make_shared<IngestOpts>();
  auto* sub = app.add_subcommand("ingest", "parse a raw GPS CSV into JSON Lines records");
  add_common(sub, c);
  sub->add_option("--in", o->in, "raw GPS CSV")->required();
  sub->add_option("--out", o->out, "output records JSONL")->capture_default_str();
  sub->add_option("--reasons", o->reasons, "JSON object mapping raw reason text to a reason kind");
  sub->add_option("--column", o->columns, "field=header override, e.g. lat=Latitude");
  sub->add_option("--rejects", o->rejects, "CSV listing rejected rows");
  sub->callback([&action, &ctx, &c, sub, o] {
    action = stage(ctx, c, sub, "ingest", [o](Manifest& m) {
      ingest::ReasonMap reasons;
      if (!o->reasons.empty()) reasons = ingest::ReasonMap::from_json(read_json_file(o->reasons));
      const auto columns = column_map(o->columns);
      auto in = open_input(o->in);
      const auto res = ingest::parse_records(in, columns, reasons);
      {
        auto out = open_output(o->out);
        ingest::write_jsonl(out, res.records);
      }
      if (!o->rejects.empty()) {
        auto out = open_output(o->rejects);
        out << "line,message\n";
        for (const auto& r : res.rejections) out << r.line << ",\"" << r.message << "\"\n";
        m.outputs["rejects"] = o->rejects;
      }
      m.inputs["logs"] = o->in;
      m.outputs["records"] = o->out;
      m.counts["rows"] = res.rows;
      m.counts["records"] = res.records.size();
      m.counts["rejected"] = res.rejections.size();
      m.add_balance("rows", res.rows, res.records.size(), res.rejections.size());
      return ojson::object();
    });
  });
}

// ---------------------------------------------------------------- segment

struct SegmentOpts {
  std::string in, out = "trips.jsonl", dropped;
  bool no_filter = false;
  double window_start_h = 6.0, window_end_h = 23.0;
  trips::FilterConfig filter;
};

void add_segment(CLI::App& app, const Context& ctx, Common& c, std::function<void()>& action) {
  auto o = std::make_shared<SegmentOpts>();
  auto* sub = app.add_subcommand("segment", "split records into ignition trips and filter them");
  add_common(sub, c);
  sub->add_option("--in", o->in, "records JSONL")->required();
  sub->add_option("--out", o->out, "output trips JSONL")->capture_default_str();
  sub->add_option("--dropped", o->dropped, "CSV of filtered trips and the rule they failed");
  sub->add_flag("--no-filter", o->no_filter, "keep every segmented trip");
  sub->add_option("--window-start", o->window_start_h, "earliest local start hour")->capture_default_str();
  sub->add_option("--window-end", o->window_end_h, "local start hour bound (exclusive)")
      ->capture_default_str();
  sub->add_option("--max-duration", o->filter.max_duration_s, "longest kept trip in seconds")
      ->capture_default_str();
  sub->add_option("--min-points", o->filter.min_points, "fewest points per trip")->capture_default_str();
  sub->add_option("--min-distance", o->filter.min_distance_km, "shortest kept trip in km")
      ->capture_default_str();
  sub->callback([&action, &ctx, &c, sub, o] {
    action = stage(ctx, c, sub, "segment", [o](Manifest& m) {
      o->filter.window_start_s = static_cast<int>(std::lround(o->window_start_h * 3600.0));
      o->filter.window_end_s = static_cast<int>(std::lround(o->window_end_h * 3600.0));
      auto in = open_input(o->in);
      const auto parsed = ingest::read_jsonl(in);
      if (!parsed.rejections.empty()) {
        const auto& r = parsed.rejections.front();
        throw SchemaError(o->in + ":" + std::to_string(r.line) + ": " + r.message);
      }
      const auto seg = trips::segment_all(ingest::sort_and_group(parsed.records));
      const auto& rep = seg.report;
      trips::FilterResult filtered;
      if (o->no_filter) {
        filtered.kept = seg.trips;
      } else {
        filtered = trips::filter_trips(seg.trips, o->filter);
      }
      {
        auto out = open_output(o->out);
        for (const auto& t : filtered.kept) out << trips::to_json(t).dump() << '\n';
      }
      ojson reasons = ojson::object();
      for (const auto& [id, why] : filtered.dropped) {
        const std::string key = trips::to_string(why);
        reasons[key] = reasons.value(key, 0) + 1;
      }
      if (!o->dropped.empty()) {
        auto out = open_output(o->dropped);
        out << "trip_id,reason\n";
        for (const auto& [id, why] : filtered.dropped) out << id << ',' << trips::to_string(why) << '\n';
        m.outputs["dropped"] = o->dropped;
      }
      m.inputs["records"] = o->in;
      m.outputs["trips"] = o->out;
      m.counts["records"] = rep.total_records;
      m.counts["orphan_records"] = rep.orphan_records;
      m.counts["incomplete_records"] = rep.incomplete_records;
      m.counts["degenerate_records"] = rep.degenerate_records;
      m.counts["abandoned_trips"] = rep.abandoned_trips;
      m.counts["degenerate_trips"] = rep.degenerate_trips;
      m.counts["segmented_trips"] = seg.trips.size();
      m.counts["kept_trips"] = filtered.kept.size();
      m.counts["drop_reasons"] = reasons;
      m.add_balance("records", rep.total_records, rep.assigned_records,
                    rep.orphan_records + rep.incomplete_records + rep.degenerate_records);
      m.add_balance("trips", seg.trips.size(), filtered.kept.size(), filtered.dropped.size());
      return ojson::object();
    });
  });
}

// ---------------------------------------------------------------- simplify

struct SimplifyOpts {
  std::string in, out = "simplified.jsonl";
  double epsilon_m = simplify::kDefaultEpsilonM;
};

void add_simplify(CLI::App& app, const Context& ctx, Common& c, std::function<void()>& action) {
  auto o = std::make_shared<SimplifyOpts>();
  auto* sub = app.add_subcommand("simplify", "reduce trip polylines with Ramer-Douglas-Peucker");
  add_common(sub, c);
  sub->add_option("--in", o->in, "trips JSONL")->required();
  sub->add_option("--out", o->out, "output trips JSONL")->capture_default_str();
  sub->add_option("--epsilon", o->epsilon_m, "tolerance in metres")->capture_default_str();
  sub->callback([&action, &ctx, &c, sub, o] {
    action = stage(ctx, c, sub, "simplify", [o](Manifest& m) {
      const simplify::Epsilon eps(o->epsilon_m);
      const auto trips = read_trips(o->in);
      std::size_t points_in = 0, points_out = 0;
      {
        auto out = open_output(o->out);
        for (const auto& t : trips) {
          const auto s = simplify::simplify_trip(t, eps);
          points_in += t.points.size();
          points_out += s.points.size();
          out << trips::to_json(s).dump() << '\n';
        }
      }
      m.inputs["trips"] = o->in;
      m.outputs["trips"] = o->out;
      m.counts["trips"] = trips.size();
      m.counts["points_in"] = points_in;
      m.counts["points_out"] = points_out;
      m.add_balance("trips", trips.size(), trips.size(), 0);
      m.add_balance("points", points_in, points_out, points_in - points_out);
      return ojson::object();
    });
  });
}

// ---------------------------------------------------------------- match

struct MatchOpts {
  std::string trips, network, out = "matched.jsonl", osrm;
  mapmatch::OsrmConfig remote;
  int timeout_ms = 5000;
};

void add_match(CLI::App& app, const Context& ctx, Common& c, std::function<void()>& action) {
  auto o = std::make_shared<MatchOpts>();
  auto* sub = app.add_subcommand("match", "snap trips to road network nodes");
  add_common(sub, c);
  auto& p = o->remote.params;
  sub->add_option("--trips", o->trips, "trips JSONL")->required();
  sub->add_option("--network", o->network, "network JSON (local matching)");
  sub->add_option("--osrm", o->osrm, "base URL of an OSRM-compatible server, e.g. http://host:5000");
  sub->add_option("--profile", o->remote.profile, "OSRM profile")->capture_default_str();
  sub->add_option("--retries", o->remote.max_retries, "extra attempts after a transport failure")
      ->capture_default_str();
  sub->add_option("--timeout-ms", o->timeout_ms, "per-request timeout")->capture_default_str();
  sub->add_option("--max-in-flight", o->remote.max_in_flight, "concurrent remote requests")
      ->capture_default_str();
  sub->add_option("--out", o->out, "output matched JSONL")->capture_default_str();
  sub->add_option("--radius", p.radius_m, "search radius in metres")->capture_default_str();
  sub->add_option("--bearing-tol", p.bearing_tol_deg, "bearing tolerance in degrees")
      ->capture_default_str();
  sub->callback([&action, &ctx, &c, sub, o] {
    action = stage(ctx, c, sub, "match", [o](Manifest& m) {
      if (o->network.empty() == o->osrm.empty()) {
        throw InvalidInput("give exactly one of --network or --osrm");
      }
      o->remote.base_url = o->osrm;
      o->remote.timeout = std::chrono::milliseconds(o->timeout_ms);
      std::optional<mapmatch::RoadNetwork> net;
      if (!o->network.empty()) net.emplace(mapmatch::load_network(o->network));
      const auto trips = read_trips(o->trips);
      std::size_t matched = 0, unmatchable = 0, points_in = 0, points_matched = 0, points_dropped = 0;
      {
        auto out = open_output(o->out);
        for (const auto& t : trips) {
          const auto pts = positions(t);
          points_in += pts.size();
          mapmatch::MatchedTrajectory mt;
          try {
            mt = net ? mapmatch::match_trip(*net, pts, o->remote.params)
                     : mapmatch::remote_match(o->remote, pts);
          } catch (const UnmatchableTrip&) {
            ++unmatchable;
            points_dropped += pts.size();
            continue;
          }
          ++matched;
          points_matched += mt.matched_count;
          points_dropped += mt.dropped_count;
          nlohmann::json j = mapmatch::to_json(mt);
          j["trip_id"] = t.trip_id;
          out << j.dump() << '\n';
        }
      }
      m.inputs["trips"] = o->trips;
      if (net) m.inputs["network"] = o->network;
      else m.inputs["osrm"] = o->osrm;
      m.outputs["matched"] = o->out;
      m.counts["trips"] = trips.size();
      m.counts["matched_trips"] = matched;
      m.counts["unmatchable_trips"] = unmatchable;
      m.counts["points_matched"] = points_matched;
      m.counts["points_dropped"] = points_dropped;
      m.add_balance("trips", trips.size(), matched, unmatchable);
      m.add_balance("points", points_in, points_matched, points_dropped);
      return ojson::object();
    });
  });
}

// ---------------------------------------------------------------- mine-routes

struct MineOpts {
  std::string trips, matched, network, out = "routed.jsonl", ranking;
  std::size_t top = 6;
};

void add_mine(CLI::App& app, const Context& ctx, Common& c, std::function<void()>& action) {
  auto o = std::make_shared<MineOpts>();
  auto* sub = app.add_subcommand("mine-routes", "assign trips to roads and rank roads by trip count");
  add_common(sub, c);
  sub->add_option("--trips", o->trips, "trips JSONL")->required();
  sub->add_option("--matched", o->matched, "matched JSONL from the match command")->required();
  sub->add_option("--network", o->network, "network JSON")->required();
  sub->add_option("--out", o->out, "trips on the top roads, with road_id")->capture_default_str();
  sub->add_option("--ranking", o->ranking, "ranking file (.csv or .json)");
  sub->add_option("--top", o->top, "number of roads kept")->capture_default_str();
  sub->callback([&action, &ctx, &c, sub, o] {
    action = stage(ctx, c, sub, "mine-routes", [o](Manifest& m) {
      if (o->top == 0) throw InvalidInput("--top must be >= 1");
      const auto net = mapmatch::load_network(o->network);
      std::map<std::string, mapmatch::MatchedTrajectory> by_trip;
      for (const auto& j : read_jsonl_objects(o->matched)) {
        if (!j.contains("trip_id") || !j["trip_id"].is_string()) {
          throw SchemaError(o->matched + ": matched entry without trip_id");
        }
        by_trip.emplace(j["trip_id"].get<std::string>(), mapmatch::matched_from_json(j));
      }
      const auto trips = read_trips(o->trips);
      std::vector<std::pair<std::size_t, std::string>> assigned;  // trip index, road
      std::size_t unmatched = 0, unassigned = 0;
      for (std::size_t i = 0; i < trips.size(); ++i) {
        const auto it = by_trip.find(trips[i].trip_id);
        if (it == by_trip.end()) {
          ++unmatched;
          continue;
        }
        const auto road = routes::assign_road(it->second, net);
        if (!road) {
          ++unassigned;
          continue;
        }
        assigned.emplace_back(i, *road);
      }
      std::vector<std::string> roads;
      for (const auto& a : assigned) roads.push_back(a.second);
      const auto ranking = roads.empty() ? std::vector<routes::RouteStat>{}
                                         : routes::mine_frequent(roads, o->top);
      std::set<std::string> top;
      for (const auto& r : ranking) top.insert(r.road_id);
      std::size_t kept = 0;
      {
        auto out = open_output(o->out);
        for (const auto& [i, road] : assigned) {
          if (!top.count(road)) continue;
          nlohmann::json j = trips::to_json(trips[i]);
          j["road_id"] = road;
          out << j.dump() << '\n';
          ++kept;
        }
      }
      ojson rank = ojson::array();
      for (const auto& r : ranking) rank.push_back({{"road_id", r.road_id}, {"trip_count", r.trip_count}});
      if (!o->ranking.empty()) {
        std::ostringstream s;
        if (std::filesystem::path(o->ranking).extension() == ".csv") {
          s << "rank,road_id,trip_count\n";
          for (std::size_t k = 0; k < ranking.size(); ++k) {
            s << k + 1 << ',' << ranking[k].road_id << ',' << ranking[k].trip_count << '\n';
          }
        } else {
          s << rank.dump(2) << '\n';
        }
        write_text(o->ranking, s.str());
        m.outputs["ranking"] = o->ranking;
      }
      m.inputs["trips"] = o->trips;
      m.inputs["matched"] = o->matched;
      m.inputs["network"] = o->network;
      m.outputs["routed"] = o->out;
      m.counts["trips"] = trips.size();
      m.counts["unmatched_trips"] = unmatched;
      m.counts["unassigned_trips"] = unassigned;
      m.counts["assigned_trips"] = assigned.size();
      m.counts["routed_trips"] = kept;
      m.add_balance("trips", trips.size(), kept, trips.size() - kept);
      return ojson{{"ranking", rank}};
    });
  });
}

// ---------------------------------------------------------------- featurize

struct FeaturizeOpts {
  std::string in, road, train = "train.csv", test = "test.csv", scaler = "scaler.json",
                         vehicles = "vehicles.json", train_index, test_index;
};

void write_index(const std::string& path, const std::vector<const nlohmann::json*>& rows) {
  auto out = open_output(path);
  out << "trip_id,vehicle_id,road_id,start_ts,end_ts,duration_s\n";
  for (const auto* j : rows) {
    const auto t = trips::trip_from_json(*j);
    out << t.trip_id << ',' << t.vehicle_id << ',' << road_of(*j) << ',' << t.start_ts << ','
        << t.end_ts << ',' << routes::format_number(t.duration_s) << '\n';
  }
}

void add_featurize(CLI::App& app, const Context& ctx, Common& c, std::function<void()>& action) {
  auto o = std::make_shared<FeaturizeOpts>();
  auto* sub = app.add_subcommand("featurize", "build the 12-feature train/test datasets by month");
  add_common(sub, c);
  sub->add_option("--in", o->in, "routed trips JSONL")->required();
  sub->add_option("--road", o->road, "only trips on this road");
  sub->add_option("--train", o->train, "training CSV")->capture_default_str();
  sub->add_option("--test", o->test, "test CSV")->capture_default_str();
  sub->add_option("--scaler", o->scaler, "scaler parameters JSON")->capture_default_str();
  sub->add_option("--vehicles", o->vehicles, "vehicle dictionary JSON")->capture_default_str();
  sub->add_option("--train-index", o->train_index, "trip list for the training rows (default <train>_trips.csv)");
  sub->add_option("--test-index", o->test_index, "trip list for the test rows (default <test>_trips.csv)");
  sub->callback([&action, &ctx, &c, sub, o] {
    action = stage(ctx, c, sub, "featurize", [o](Manifest& m) {
      if (o->train_index.empty()) o->train_index = sibling(o->train, "_trips.csv");
      if (o->test_index.empty()) o->test_index = sibling(o->test, "_trips.csv");
      const auto rows = read_jsonl_objects(o->in);
      std::vector<const nlohmann::json*> train_rows, test_rows;
      std::vector<trips::Trip> train_trips, test_trips;
      std::size_t other_road = 0, filtered = 0, excluded = 0;
      const trips::FilterConfig filter;
      for (const auto& j : rows) {
        if (!o->road.empty() && road_of(j) != o->road) {
          ++other_road;
          continue;
        }
        road_of(j);
        auto t = trips::trip_from_json(j);
        if (trips::check_filter(t, filter)) {
          ++filtered;
          continue;
        }
        switch (routes::split_of_month(to_local(t.start_ts).month)) {
          case routes::SplitPart::Train:
            train_rows.push_back(&j);
            train_trips.push_back(std::move(t));
            break;
          case routes::SplitPart::Test:
            test_rows.push_back(&j);
            test_trips.push_back(std::move(t));
            break;
          case routes::SplitPart::Excluded:
            ++excluded;
            break;
        }
      }
      std::vector<std::string> ids;
      for (const auto& t : train_trips) ids.push_back(t.vehicle_id);
      const auto dict = routes::VehicleDictionary::build(ids);
      std::vector<routes::FeatureVector> train, test;
      for (const auto& t : train_trips) train.push_back(routes::featurize(t, dict));
      for (const auto& t : test_trips) test.push_back(routes::featurize(t, dict));
      const auto scaler = routes::Scaler::fit(train);
      {
        auto out = open_output(o->train);
        routes::write_dataset_csv(out, train);
      }
      {
        auto out = open_output(o->test);
        routes::write_dataset_csv(out, test);
      }
      write_text(o->scaler, scaler.to_json().dump(2) + "\n");
      write_text(o->vehicles, dict.to_json().dump(2) + "\n");
      write_index(o->train_index, train_rows);
      write_index(o->test_index, test_rows);
      m.inputs["routed"] = o->in;
      m.outputs["train"] = o->train;
      m.outputs["test"] = o->test;
      m.outputs["scaler"] = o->scaler;
      m.outputs["vehicles"] = o->vehicles;
      m.outputs["train_index"] = o->train_index;
      m.outputs["test_index"] = o->test_index;
      m.counts["trips"] = rows.size();
      m.counts["other_road"] = other_road;
      m.counts["filter_violations"] = filtered;
      m.counts["excluded_months"] = excluded;
      m.counts["train"] = train.size();
      m.counts["test"] = test.size();
      m.counts["vehicles"] = dict.size();
      m.add_balance("trips", rows.size(), train.size() + test.size(), other_road + filtered + excluded);
      return ojson::object();
    });
  });
}

// ---------------------------------------------------------------- train

struct TrainOpts {
  std::string train, scaler, model = "mlp", out = "model.json", loss_log, road = "all", optimizer = "adam";
  std::uint64_t seed = 0;
  int epochs = 0;
  std::size_t batch_size = 0;
  double learning_rate = 0.0;
};

std::vector<neural::Sequence> to_sequences(const std::vector<routes::ScaledSample>& samples,
                                           std::vector<double>& targets) {
  std::vector<neural::Sequence> xs;
  xs.reserve(samples.size());
  targets.clear();
  for (const auto& s : samples) {
    xs.push_back({std::vector<double>(s.x.begin(), s.x.end())});
    targets.push_back(s.target_s);
  }
  return xs;
}

void add_train(CLI::App& app, const Context& ctx, Common& c, std::function<void()>& action) {
  auto o = std::make_shared<TrainOpts>();
  auto* sub = app.add_subcommand("train", "train an ANN, MLP or LSTM travel-time regressor");
  add_common(sub, c);
  sub->add_option("--train", o->train, "training CSV")->required();
  sub->add_option("--scaler", o->scaler, "scaler parameters JSON")->required();
  sub->add_option("--model", o->model, "architecture")
      ->check(CLI::IsMember({"ann", "mlp", "lstm"}))
      ->capture_default_str();
  sub->add_option("--seed", o->seed, "seed for initialisation and shuffling")->required();
  sub->add_option("--epochs", o->epochs, "epochs (default 200, LSTM 50)");
  sub->add_option("--batch-size", o->batch_size, "mini-batch size (default 128)");
  sub->add_option("--lr", o->learning_rate, "learning rate (default 1e-3)");
  sub->add_option("--optimizer", o->optimizer, "optimizer")
      ->check(CLI::IsMember({"adam", "sgd"}))
      ->capture_default_str();
  sub->add_option("--road", o->road, "road label stored with the checkpoint")->capture_default_str();
  sub->add_option("--out", o->out, "checkpoint JSON")->capture_default_str();
  sub->add_option("--loss-log", o->loss_log, "CSV of mean training loss per epoch");
  sub->callback([&action, &ctx, &c, sub, o] {
    action = stage(ctx, c, sub, "train", [o](Manifest& m) {
      const auto kind = neural::model_kind_from_string(o->model);
      auto cfg = neural::TrainConfig::defaults_for(kind);
      cfg.seed = o->seed;
      if (o->epochs != 0) cfg.epochs = o->epochs;
      if (o->batch_size != 0) cfg.batch_size = o->batch_size;
      if (o->learning_rate != 0.0) cfg.learning_rate = o->learning_rate;
      cfg.optimizer = o->optimizer == "sgd" ? neural::OptimizerKind::Sgd : neural::OptimizerKind::Adam;
      cfg.validate();
      const auto data = routes::read_dataset_csv_file(o->train);
      if (data.empty()) throw InvalidInput("training set '" + o->train + "' is empty");
      const auto scaler = routes::Scaler::from_json(read_json_file(o->scaler));
      std::vector<double> targets;
      const auto xs = to_sequences(scaler.apply(data), targets);
      const auto res = neural::train(neural::Architecture::builtin(kind), xs, targets, cfg);
      ojson ckpt;
      ckpt["model_kind"] = o->model;
      ckpt["road_id"] = o->road;
      ckpt["n_train"] = data.size();
      ckpt["final_loss"] = res.loss_history.empty() ? 0.0 : res.loss_history.back();
      ckpt["train_config"] = neural::to_json(cfg);
      ckpt["scaler"] = scaler.to_json();
      ckpt["model"] = neural::to_json(res.model);
      write_text(o->out, ckpt.dump() + "\n");
      if (!o->loss_log.empty()) {
        std::ostringstream s;
        s << "epoch,loss\n";
        for (std::size_t e = 0; e < res.loss_history.size(); ++e) {
          s << e + 1 << ',' << routes::format_number(res.loss_history[e]) << '\n';
        }
        write_text(o->loss_log, s.str());
        m.outputs["loss_log"] = o->loss_log;
      }
      m.inputs["train"] = o->train;
      m.inputs["scaler"] = o->scaler;
      m.outputs["model"] = o->out;
      m.counts["samples"] = data.size();
      m.counts["parameters"] = neural::parameter_count(res.model);
      m.counts["epochs"] = cfg.epochs;
      m.add_balance("samples", data.size(), data.size(), 0);
      return ojson{{"final_loss", ckpt["final_loss"]}};
    });
  });
}

// ---------------------------------------------------------------- evaluate

struct EvaluateOpts {
  std::string model, test, out = "metrics.json", predictions;
};

void add_evaluate(CLI::App& app, const Context& ctx, Common& c, std::function<void()>& action) {
  auto o = std::make_shared<EvaluateOpts>();
  auto* sub = app.add_subcommand("evaluate", "score a checkpoint on a test CSV");
  add_common(sub, c);
  sub->add_option("--model", o->model, "checkpoint JSON")->required();
  sub->add_option("--test", o->test, "test CSV")->required();
  sub->add_option("--out", o->out, "metrics JSON")->capture_default_str();
  sub->add_option("--predictions", o->predictions, "CSV of actual and predicted durations");
  sub->callback([&action, &ctx, &c, sub, o] {
    action = stage(ctx, c, sub, "evaluate", [o](Manifest& m) {
      const auto ckpt = read_json_file(o->model);
      neural::Model model;
      routes::Scaler scaler;
      std::string kind, road;
      try {
        model = neural::model_from_json(ckpt.at("model"));
        scaler = routes::Scaler::from_json(ckpt.at("scaler"));
        kind = ckpt.at("model_kind").get<std::string>();
        road = ckpt.value("road_id", std::string("all"));
      } catch (const nlohmann::json::exception& e) {
        throw SchemaError("bad checkpoint '" + o->model + "': " + e.what());
      }
      const auto data = routes::read_dataset_csv_file(o->test);
      std::vector<double> y;
      const auto xs = to_sequences(scaler.apply(data), y);
      std::vector<double> yhat(xs.size());
      for (std::size_t i = 0; i < xs.size(); ++i) yhat[i] = neural::predict(model, xs[i]);
      const double rmse = neural::rmse(y, yhat);
      const double mae = neural::mae(y, yhat);
      ojson metrics;
      metrics["model"] = kind;
      metrics["road_id"] = road;
      metrics["rmse_s"] = rmse;
      metrics["mae_s"] = mae;
      metrics["n_test"] = y.size();
      write_text(o->out, metrics.dump(2) + "\n");
      if (!o->predictions.empty()) {
        std::vector<Prediction> preds;
        for (std::size_t i = 0; i < y.size(); ++i) preds.push_back({y[i], yhat[i]});
        write_text(o->predictions, scatter_csv(preds));
        m.outputs["predictions"] = o->predictions;
      }
      m.inputs["model"] = o->model;
      m.inputs["test"] = o->test;
      m.outputs["metrics"] = o->out;
      m.counts["n_test"] = y.size();
      m.add_balance("samples", data.size(), y.size(), 0);
      return ojson{{"metrics", metrics}};
    });
  });
}

// ---------------------------------------------------------------- plot

struct PlotOpts {
  std::string predictions, trips, out_dir = "plots", title = "Actual vs predicted travel time";
};

std::vector<Prediction> read_predictions(const std::string& path) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("actual_s,predicted_s", 0) != 0) {
    throw SchemaError(path + ": expected header actual_s,predicted_s");
  }
  std::vector<Prediction> out;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty() || line == "\r") continue;
    const auto comma = line.find(',');
    try {
      if (comma == std::string::npos) throw std::invalid_argument("missing column");
      std::size_t used = 0;
      Prediction p;
      p.actual_s = std::stod(line.substr(0, comma));
      p.predicted_s = std::stod(line.substr(comma + 1), &used);
      out.push_back(p);
    } catch (const std::exception&) {
      throw SchemaError(path + ":" + std::to_string(n) + ": malformed prediction row");
    }
  }
  return out;
}

void add_plot(CLI::App& app, const Context& ctx, Common& c, std::function<void()>& action) {
  auto o = std::make_shared<PlotOpts>();
  auto* sub = app.add_subcommand("plot", "render SVG charts and their CSV data");
  add_common(sub, c);
  sub->add_option("--predictions", o->predictions, "predictions CSV from evaluate");
  sub->add_option("--trips", o->trips, "trips JSONL for the weekday aggregates");
  sub->add_option("--out-dir", o->out_dir, "output directory")->capture_default_str();
  sub->add_option("--title", o->title, "scatter plot title")->capture_default_str();
  sub->callback([&action, &ctx, &c, sub, o] {
    action = stage(ctx, c, sub, "plot", [o](Manifest& m) {
      if (o->predictions.empty() && o->trips.empty()) {
        throw InvalidInput("nothing to plot: give --predictions and/or --trips");
      }
      const std::filesystem::path dir(o->out_dir);
      if (!o->predictions.empty()) {
        const auto preds = read_predictions(o->predictions);
        write_text((dir / "scatter.svg").string(), scatter_svg(preds, o->title));
        write_text((dir / "scatter.csv").string(), scatter_csv(preds));
        m.inputs["predictions"] = o->predictions;
        m.outputs["scatter_svg"] = (dir / "scatter.svg").string();
        m.outputs["scatter_csv"] = (dir / "scatter.csv").string();
        m.counts["points"] = preds.size();
      }
      if (!o->trips.empty()) {
        const auto trips = read_trips(o->trips);
        const auto stats = weekday_stats(trips);
        write_text((dir / "weekday.svg").string(), weekday_svg(stats));
        write_text((dir / "weekday.csv").string(), weekday_csv(stats));
        m.inputs["trips"] = o->trips;
        m.outputs["weekday_svg"] = (dir / "weekday.svg").string();
        m.outputs["weekday_csv"] = (dir / "weekday.csv").string();
        m.counts["trips"] = trips.size();
      }
      return ojson::object();
    });
  });
}

// Splices the entries of a subcommand's --config file into the argument list,
// skipping any option that is already given on the command line.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  if (args.size() < 2 || args[1].rfind('-', 0) == 0) return args;
  std::string path;
  for (std::size_t i = 2; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    }
  }
  if (path.empty()) return args;
  if (!std::filesystem::is_regular_file(path)) throw IoError("config file not found: " + path);
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file: " + path);
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_config(in);
  } catch (const CLI::ParseError& e) {
    throw SchemaError(std::string("malformed config file: ") + e.what());
  }
  const std::string sub = args[1];
  auto given = [&](const std::string& opt) {
    return std::any_of(args.begin() + 2, args.end(), [&](const std::string& a) {
      return a == opt || a.rfind(opt + "=", 0) == 0;
    });
  };
  std::vector<std::string> extra;
  for (const auto& item : items) {
    if (item.name.empty() || item.name == "++" || item.name == "--") continue;
    if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents.front() == sub)) continue;
    std::string name = item.name;
    std::replace(name.begin(), name.end(), '_', '-');
    const std::string opt = "--" + name;
    if (opt == "--config" || given(opt)) continue;
    if (item.inputs.size() == 1) {
      extra.push_back(opt + "=" + item.inputs.front());
    } else {
      extra.push_back(opt);
      extra.insert(extra.end(), item.inputs.begin(), item.inputs.end());
    }
  }
  args.insert(args.begin() + 2, extra.begin(), extra.end());
  return args;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Trip mining and travel-time prediction from GPS tracker logs", "ttp"};
  app.require_subcommand(1, 1);
  app.fallthrough(false);
  Context ctx{out, err};
  Common common;
  std::function<void()> action;
  add_synth(app, ctx, common, action);
  add_ingest(app, ctx, common, action);
  add_segment(app, ctx, common, action);
  add_simplify(app, ctx, common, action);
  add_match(app, ctx, common, action);
  add_mine(app, ctx, common, action);
  add_featurize(app, ctx, common, action);
  add_train(app, ctx, common, action);
  add_evaluate(app, ctx, common, action);
  add_plot(app, ctx, common, action);

  std::vector<std::string> args(argv, argv + argc);
  try {
    args = expand_config(std::move(args));
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitMissingInput;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  // CLI11 consumes arguments in reverse order
  std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);

  try {
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitInvalid;
  }

  try {
    if (action) action();
    return kExitOk;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitMissingInput;
  } catch (const TrainingDiverged& e) {
    err << "error: " << e.what() << '\n';
    return kExitDiverged;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace ttp::cli
