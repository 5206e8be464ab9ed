#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace railguard {

using VertexIndex = std::size_t;
using TrackIndex = std::size_t;

enum class VertexKind : std::uint8_t { Station, Junction };

/// Scenario-level description of a station platform: platform number plus the
/// id of the track that terminates at it.
struct PlatformSpec {
  int number = 0;
  std::string track;
};

struct VertexSpec {
  std::string id;
  VertexKind kind = VertexKind::Station;
  double comm_range = 200.0;
  std::vector<PlatformSpec> platforms;  // stations only
};

struct TrackSpec {
  std::string id;
  std::string from;  // origin endpoint; positions are measured from here
  std::string to;
  double length = 0.0;
};

struct Platform {
  int number = 0;
  TrackIndex track = 0;
};

struct Vertex {
  std::string id;
  VertexKind kind = VertexKind::Station;
  std::size_t kind_index = 0;  // station index i or junction index b
  double comm_range = 0.0;
  std::vector<Platform> platforms;
  std::vector<TrackIndex> incident;
};

struct Track {
  std::string id;
  std::array<VertexIndex, 2> endpoints{};  // [0] is the origin
  double length = 0.0;
};

/// A point on a track, `offset` meters from the track origin.
struct TrackPoint {
  TrackIndex track = 0;
  double offset = 0.0;
};

/// Closed interval [lo, hi] of a single track.
struct Segment {
  TrackIndex track = 0;
  double lo = 0.0;
  double hi = 0.0;
};

/// Railway multigraph: stations and junctions joined by tracks. Parallel
/// tracks between the same pair of vertices are allowed; loops are not.
/// Immutable once built.
class RailNetwork {
 public:
  RailNetwork() = default;

  static RailNetwork build(std::vector<VertexSpec> vertices, std::vector<TrackSpec> tracks);

  const std::vector<Vertex>& vertices() const noexcept { return vertices_; }
  const std::vector<Track>& tracks() const noexcept { return tracks_; }
  const Vertex& vertex(VertexIndex v) const { return vertices_.at(v); }
  const Track& track(TrackIndex t) const { return tracks_.at(t); }

  std::size_t vertex_count() const noexcept { return vertices_.size(); }  // n
  std::size_t station_count() const noexcept { return stations_.size(); }  // x
  std::size_t junction_count() const noexcept { return junctions_.size(); }  // c
  const std::vector<VertexIndex>& stations() const noexcept { return stations_; }
  const std::vector<VertexIndex>& junctions() const noexcept { return junctions_; }

  std::optional<VertexIndex> find_vertex(std::string_view id) const;
  std::optional<TrackIndex> find_track(std::string_view id) const;

  VertexIndex other_end(TrackIndex t, VertexIndex v) const;

  /// Shortest along-track distance between two vertices; +inf when disconnected.
  double vertex_distance(VertexIndex a, VertexIndex b) const;
  double point_to_vertex(TrackPoint p, VertexIndex v) const;
  /// Along-track distance; points on the same track are measured along it.
  double point_distance(TrackPoint a, TrackPoint b) const;
  double segment_to_vertex(const Segment& s, VertexIndex v) const;
  double segment_distance(const Segment& a, const Segment& b) const;

 private:
  std::vector<Vertex> vertices_;
  std::vector<Track> tracks_;
  std::vector<VertexIndex> stations_;
  std::vector<VertexIndex> junctions_;
  std::unordered_map<std::string, VertexIndex> vertex_ids_;
  std::unordered_map<std::string, TrackIndex> track_ids_;
  std::vector<double> distances_;  // row-major n x n
};

RailNetwork build_network(std::vector<VertexSpec> vertices, std::vector<TrackSpec> tracks);

enum class Direction : std::uint8_t { Down = 0, Up = 1 };

/// Train categories, lowest priority first.
enum class PriorityClass : std::uint8_t {
  Freight = 0,
  Passenger,
  ExpressMail,
  SuperfastExpress,
  Premium,
};

std::string_view to_string(PriorityClass c) noexcept;
std::optional<PriorityClass> parse_priority_class(std::string_view text) noexcept;

struct PlatformSlot {
  VertexIndex station = 0;
  int platform = 0;
  friend bool operator==(const PlatformSlot&, const PlatformSlot&) = default;
};

/// A track the train already ran over and may still partly occupy with its tail.
struct TrailEntry {
  TrackIndex track = 0;
  Direction direction = Direction::Up;
};

/// Kinematic and occupancy snapshot of one train. `position` is the offset of
/// the train's tip (its leading end) from the origin of `track`; the body
/// extends `length` meters behind the tip, against the direction of travel.
struct TrainState {
  std::string id;
  std::size_t index = 0;
  PriorityClass category = PriorityClass::Passenger;
  TrackIndex track = 0;
  double position = 0.0;
  double speed = 0.0;  // m/s
  Direction direction = Direction::Up;
  double length = 200.0;
  double comm_range = 200.0;
  std::optional<PlatformSlot> platform;
  std::vector<TrackIndex> route;   // tracks still to run, in order
  std::vector<TrailEntry> trail;   // most recent first
  std::int64_t activation_tick = 0;
  bool in_service = true;
  bool braking = false;
  std::optional<std::array<double, 2>> beta;  // {stop, move} preference override
};

/// Track segments covered by the train body, tip segment first.
std::vector<Segment> train_body(const TrainState& train, const RailNetwork& network);
/// Vertex the train reaches next when running along its direction.
VertexIndex forward_vertex(const TrainState& train, const RailNetwork& network);
/// Shortest along-track distance between two train bodies (0 when touching).
double train_separation(const TrainState& a, const TrainState& b, const RailNetwork& network);
double body_separation(std::span<const Segment> a, std::span<const Segment> b,
                       const RailNetwork& network);
double train_to_vertex(const TrainState& train, VertexIndex v, const RailNetwork& network);
double body_to_vertex(std::span<const Segment> body, VertexIndex v, const RailNetwork& network);

/// Throws PlatformConflict / OverlapConflict / UnknownTrack on violation.
void validate_occupancy(const RailNetwork& network, std::span<const TrainState> trains);

enum class AgentKind : std::uint8_t { Train, Station, Junction };

struct AgentId {
  AgentKind kind = AgentKind::Train;
  std::size_t index = 0;  // trains: position in the train list; others: vertex index
  friend auto operator<=>(const AgentId&, const AgentId&) = default;
};

std::string agent_label(const AgentId& agent, const RailNetwork& network,
                        std::span<const TrainState> trains);

/// Along-track separation between any two agents.
double agent_separation(const AgentId& a, const AgentId& b, const RailNetwork& network,
                        std::span<const TrainState> trains);

/// All in-service agents within `radius_sum` of `agent`, sorted by (kind, index).
std::vector<AgentId> neighbors_in_range(const RailNetwork& network,
                                        std::span<const TrainState> trains,
                                        const AgentId& agent, double radius_sum);

}  // namespace railguard
