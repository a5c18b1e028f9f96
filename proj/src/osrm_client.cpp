#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "ttp/error.hpp"
#include "ttp/mapmatch.hpp"

namespace ttp::mapmatch {

std::string nearest_path(const std::string& profile, const geo::GeoPoint& p,
                         std::optional<double> heading, double bearing_tol_deg) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "/nearest/v1/%s/%.7f,%.7f", profile.c_str(), p.lon, p.lat);
  std::string path = buf;
  if (heading) {
    // the service accepts integral degrees only: heading in [0, 359], tolerance in [0, 180]
    const long h = std::lround(geo::normalize_deg(*heading)) % 360;
    const long tol = std::min(180L, std::lround(bearing_tol_deg));
    path += "?bearings=" + std::to_string(h) + "," + std::to_string(tol);
  }
  return path;
}

std::optional<std::pair<NodeId, geo::GeoPoint>> parse_nearest_response(const std::string& body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw RemoteRejection(200, std::string("nearest response is not JSON: ") + e.what());
  }
  const std::string code = j.value("code", "");
  if (code != "Ok") throw RemoteRejection(200, "nearest response code '" + code + "'");
  const auto wps = j.find("waypoints");
  if (wps == j.end() || !wps->is_array() || wps->empty()) return std::nullopt;
  try {
    const auto& wp = wps->at(0);
    const auto& loc = wp.at("location");
    const geo::GeoPoint pos{loc.at(1).get<double>(), loc.at(0).get<double>()};
    NodeId id = 0;
    for (const auto& n : wp.at("nodes")) {
      id = n.get<NodeId>();
      if (id != 0) break;
    }
    if (id == 0) throw RemoteRejection(200, "nearest waypoint carries no node id");
    return std::make_pair(id, pos);
  } catch (const nlohmann::json::exception& e) {
    throw RemoteRejection(200, std::string("malformed nearest waypoint: ") + e.what());
  }
}

namespace {

std::optional<std::pair<NodeId, geo::GeoPoint>> query_once(httplib::Client& client,
                                                           const OsrmConfig& cfg,
                                                           const std::string& path) {
  int attempts = 0;
  while (true) {
    ++attempts;
    auto res = client.Get(path);
    if (!res) {
      if (attempts > cfg.max_retries) {
        throw TransportError(attempts, "GET " + path + " failed after " +
                                           std::to_string(attempts) + " attempt(s): " +
                                           httplib::to_string(res.error()));
      }
      continue;
    }
    if (res->status != 200) {
      throw RemoteRejection(res->status, "GET " + path + " returned HTTP " +
                                             std::to_string(res->status) + ": " + res->body);
    }
    try {
      return parse_nearest_response(res->body);
    } catch (const RemoteRejection& e) {
      throw RemoteRejection(e.status(), "GET " + path + ": " + e.what());
    }
  }
}

}  // namespace

MatchedTrajectory remote_match(const OsrmConfig& config, std::span<const geo::GeoPoint> points) {
  if (points.size() < 2) throw InvalidInput("map matching needs at least 2 points");
  for (const auto& p : points) geo::validate(p);
  const auto headings = trip_headings(points);

  const std::size_t n = points.size();
  std::vector<std::optional<std::pair<NodeId, geo::GeoPoint>>> hits(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    httplib::Client client(config.base_url);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config.timeout);
    const auto usecs =
        std::chrono::duration_cast<std::chrono::microseconds>(config.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_url_encode(false);
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        const auto path =
            nearest_path(config.profile, points[i], headings[i], config.params.bearing_tol_deg);
        hits[i] = query_once(client, config, path);
        if (hits[i] &&
            geo::haversine_km(points[i], hits[i]->second) * 1000.0 > config.params.radius_m) {
          hits[i].reset();
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(config.max_in_flight, n));
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  // report the failure of the earliest point so errors are reproducible
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  MatchedTrajectory out;
  for (auto& h : hits) append_match(out, h);
  if (out.node_ids.empty()) throw UnmatchableTrip("no point of the trip matched the remote service");
  return out;
}

}  // namespace ttp::mapmatch
