#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ttp/geo.hpp"
#include "ttp/spatial_index.hpp"

namespace ttp::mapmatch {

using NodeId = std::int64_t;

struct Node {
  NodeId id = 0;
  geo::GeoPoint position;
};

// Directed edge. Two-way roads are listed once per direction.
struct Edge {
  NodeId from = 0;
  NodeId to = 0;
  std::string road_id;
  double bearing_deg = 0.0;  // bearing_deg(from, to), computed at build time
};

struct EdgeSpec {
  NodeId from = 0;
  NodeId to = 0;
  std::string road_id;
};

// Immutable road graph with a spatial index over its nodes.
class RoadNetwork {
 public:
  // Validates unique node ids and edge endpoints; computes edge bearings.
  // Throws InvalidInput on violations (including zero-length edges).
  RoadNetwork(std::vector<Node> nodes, const std::vector<EdgeSpec>& edges);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const SpatialIndex& index() const { return index_; }

  const Node& node(NodeId id) const;
  bool has_node(NodeId id) const { return by_id_.count(id) != 0; }
  // Edges leaving or entering the node.
  std::span<const std::size_t> incident_edges(NodeId id) const;
  // First edge from -> to in file order, or nullptr.
  const Edge* find_edge(NodeId from, NodeId to) const;

 private:
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::unordered_map<NodeId, std::size_t> by_id_;
  std::vector<std::vector<std::size_t>> incident_;
  std::map<std::pair<NodeId, NodeId>, std::size_t> edge_lookup_;
  SpatialIndex index_;
};

// {"nodes":[{"id":int,"lat":f,"lon":f}],"edges":[{"from":int,"to":int,"road_id":str}]}
RoadNetwork network_from_json(const nlohmann::json& j);
RoadNetwork load_network(const std::string& path);
nlohmann::json to_json(const RoadNetwork& net);

inline constexpr double kDefaultRadiusM = 50.0;
inline constexpr double kDefaultBearingTolDeg = 30.0;

struct MatchParams {
  double radius_m = kDefaultRadiusM;
  double bearing_tol_deg = kDefaultBearingTolDeg;
};

struct MatchedTrajectory {
  std::vector<NodeId> node_ids;
  std::vector<geo::GeoPoint> snapped_points;  // position of node_ids[i]
  std::size_t dropped_count = 0;              // input points with no match
  std::size_t matched_count = 0;              // matches before collapsing repeats
};

// Nearest node within radius_m whose incident edges include one with bearing
// within bearing_tol_deg of heading. Without a heading any node in range is
// admissible. Ties go to the lowest node id.
std::optional<NodeId> match_point(const RoadNetwork& net, const geo::GeoPoint& p,
                                  std::optional<double> heading, const MatchParams& params = {});

// Per-point travel heading: bearing to the next point; the last point reuses the
// previous heading. Where consecutive points coincide the previous heading is
// carried forward (or the next defined one for a leading run). All-identical
// input yields no headings at all.
std::vector<std::optional<double>> trip_headings(std::span<const geo::GeoPoint> points);

// Runs match_point over the trip, drops unmatched points, collapses repeats.
// Throws InvalidInput for < 2 points and UnmatchableTrip when nothing matches.
MatchedTrajectory match_trip(const RoadNetwork& net, std::span<const geo::GeoPoint> points,
                             const MatchParams& params = {});

// Appends one match result; shared by local and remote matching.
void append_match(MatchedTrajectory& out, std::optional<std::pair<NodeId, geo::GeoPoint>> hit);

nlohmann::json to_json(const MatchedTrajectory& m);
MatchedTrajectory matched_from_json(const nlohmann::json& j);

// Client for an OSRM-compatible nearest service.
struct OsrmConfig {
  std::string base_url = "http://127.0.0.1:5000";  // scheme://host:port
  std::string profile = "driving";
  MatchParams params;
  int max_retries = 2;  // extra attempts after a transport failure
  std::chrono::milliseconds timeout{5000};
  std::size_t max_in_flight = 4;
};

// "/nearest/v1/driving/{lon},{lat}?bearings={heading},{tol}"; the bearings
// parameter is omitted when heading is absent.
std::string nearest_path(const std::string& profile, const geo::GeoPoint& p,
                         std::optional<double> heading, double bearing_tol_deg);

// Decodes a nearest response body. Returns nullopt when no waypoint came back.
// Throws RemoteRejection when the body is not a well-formed "Ok" answer.
std::optional<std::pair<NodeId, geo::GeoPoint>> parse_nearest_response(const std::string& body);

// Mirrors match_trip through the remote service. Hits farther than radius_m
// from the query point count as dropped. Throws TransportError after retries
// are exhausted and RemoteRejection on any non-200 reply.
MatchedTrajectory remote_match(const OsrmConfig& config, std::span<const geo::GeoPoint> points);

}  // namespace ttp::mapmatch
