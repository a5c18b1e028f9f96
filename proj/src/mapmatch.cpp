#include "ttp/mapmatch.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "ttp/error.hpp"

namespace ttp::mapmatch {

namespace {

std::vector<IndexEntry> entries_of(const std::vector<Node>& nodes) {
  std::vector<IndexEntry> out;
  out.reserve(nodes.size());
  for (const auto& n : nodes) out.push_back({n.id, n.position});
  return out;
}

}  // namespace

RoadNetwork::RoadNetwork(std::vector<Node> nodes, const std::vector<EdgeSpec>& edges)
    : nodes_(std::move(nodes)), index_(entries_of(nodes_)) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!by_id_.emplace(nodes_[i].id, i).second) {
      throw InvalidInput("duplicate node id " + std::to_string(nodes_[i].id));
    }
  }
  incident_.resize(nodes_.size());
  edges_.reserve(edges.size());
  for (const auto& spec : edges) {
    const auto a = by_id_.find(spec.from);
    const auto b = by_id_.find(spec.to);
    if (a == by_id_.end() || b == by_id_.end()) {
      throw InvalidInput("edge " + std::to_string(spec.from) + "->" + std::to_string(spec.to) +
                         " references a missing node");
    }
    const auto& pa = nodes_[a->second].position;
    const auto& pb = nodes_[b->second].position;
    if (pa == pb) {
      throw InvalidInput("edge " + std::to_string(spec.from) + "->" + std::to_string(spec.to) +
                         " has zero length");
    }
    const std::size_t idx = edges_.size();
    edges_.push_back({spec.from, spec.to, spec.road_id, geo::bearing_deg(pa, pb)});
    incident_[a->second].push_back(idx);
    if (b->second != a->second) incident_[b->second].push_back(idx);
    edge_lookup_.emplace(std::make_pair(spec.from, spec.to), idx);
  }
}

const Node& RoadNetwork::node(NodeId id) const {
  const auto it = by_id_.find(id);
  if (it == by_id_.end()) throw InvalidInput("unknown node id " + std::to_string(id));
  return nodes_[it->second];
}

std::span<const std::size_t> RoadNetwork::incident_edges(NodeId id) const {
  const auto it = by_id_.find(id);
  if (it == by_id_.end()) return {};
  return incident_[it->second];
}

const Edge* RoadNetwork::find_edge(NodeId from, NodeId to) const {
  const auto it = edge_lookup_.find({from, to});
  return it == edge_lookup_.end() ? nullptr : &edges_[it->second];
}

RoadNetwork network_from_json(const nlohmann::json& j) {
  std::vector<Node> nodes;
  std::vector<EdgeSpec> edges;
  try {
    for (const auto& n : j.at("nodes")) {
      nodes.push_back({n.at("id").get<NodeId>(), {n.at("lat").get<double>(), n.at("lon").get<double>()}});
    }
    for (const auto& e : j.at("edges")) {
      edges.push_back({e.at("from").get<NodeId>(), e.at("to").get<NodeId>(),
                       e.at("road_id").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("bad network file: ") + e.what());
  }
  return RoadNetwork(std::move(nodes), edges);
}

RoadNetwork load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open network '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("network '" + path + "' is not valid JSON: " + e.what());
  }
  return network_from_json(j);
}

nlohmann::json to_json(const RoadNetwork& net) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : net.nodes()) {
    nodes.push_back({{"id", n.id}, {"lat", n.position.lat}, {"lon", n.position.lon}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : net.edges()) {
    edges.push_back({{"from", e.from}, {"to", e.to}, {"road_id", e.road_id}});
  }
  return {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

std::optional<NodeId> match_point(const RoadNetwork& net, const geo::GeoPoint& p,
                                  std::optional<double> heading, const MatchParams& params) {
  if (!(params.radius_m > 0.0)) throw InvalidInput("match radius must be positive");
  if (!(params.bearing_tol_deg > 0.0)) throw InvalidInput("bearing tolerance must be positive");
  for (const auto& cand : net.index().within_radius(p, params.radius_m)) {
    if (!heading) return cand.id;
    for (std::size_t e : net.incident_edges(cand.id)) {
      if (geo::angle_diff_deg(net.edges()[e].bearing_deg, *heading) <= params.bearing_tol_deg) {
        return cand.id;
      }
    }
  }
  return std::nullopt;
}

std::vector<std::optional<double>> trip_headings(std::span<const geo::GeoPoint> points) {
  const std::size_t n = points.size();
  std::vector<std::optional<double>> h(n);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (!(points[i] == points[i + 1])) h[i] = geo::bearing_deg(points[i], points[i + 1]);
  }
  std::optional<double> last;
  for (auto& v : h) {
    if (v) {
      last = v;
    } else {
      v = last;
    }
  }
  std::optional<double> next;
  for (std::size_t i = n; i-- > 0;) {
    if (h[i]) {
      next = h[i];
    } else {
      h[i] = next;
    }
  }
  return h;
}

void append_match(MatchedTrajectory& out, std::optional<std::pair<NodeId, geo::GeoPoint>> hit) {
  if (!hit) {
    ++out.dropped_count;
    return;
  }
  ++out.matched_count;
  if (!out.node_ids.empty() && out.node_ids.back() == hit->first) return;
  out.node_ids.push_back(hit->first);
  out.snapped_points.push_back(hit->second);
}

MatchedTrajectory match_trip(const RoadNetwork& net, std::span<const geo::GeoPoint> points,
                             const MatchParams& params) {
  if (points.size() < 2) throw InvalidInput("map matching needs at least 2 points");
  const auto headings = trip_headings(points);
  MatchedTrajectory out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto id = match_point(net, points[i], headings[i], params);
    if (id) {
      append_match(out, std::make_pair(*id, net.node(*id).position));
    } else {
      append_match(out, std::nullopt);
    }
  }
  if (out.node_ids.empty()) throw UnmatchableTrip("no point of the trip matched the network");
  return out;
}

nlohmann::json to_json(const MatchedTrajectory& m) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : m.snapped_points) pts.push_back({p.lat, p.lon});
  return {{"node_ids", m.node_ids},
          {"snapped_points", std::move(pts)},
          {"dropped_count", m.dropped_count},
          {"matched_count", m.matched_count}};
}

MatchedTrajectory matched_from_json(const nlohmann::json& j) {
  MatchedTrajectory m;
  try {
    m.node_ids = j.at("node_ids").get<std::vector<NodeId>>();
    for (const auto& p : j.at("snapped_points")) {
      m.snapped_points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    }
    m.dropped_count = j.at("dropped_count").get<std::size_t>();
    m.matched_count = j.value("matched_count", m.node_ids.size());
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("bad matched trajectory: ") + e.what());
  }
  if (m.node_ids.size() != m.snapped_points.size()) {
    throw InvalidInput("matched trajectory has mismatched node/point counts");
  }
  return m;
}

}  // namespace ttp::mapmatch
