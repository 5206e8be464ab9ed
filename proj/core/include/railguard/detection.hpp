#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "railguard/world.hpp"

namespace railguard {

enum class IncidentKind : std::uint8_t { HeadOnTrack, HeadOnJunction, RearEndTrack, RearEndPlatform };

std::string_view to_string(IncidentKind kind) noexcept;
constexpr bool is_head_on(IncidentKind kind) noexcept {
  return kind == IncidentKind::HeadOnTrack || kind == IncidentKind::HeadOnJunction;
}

/// A detected collision threat between two trains (identified by TrainState::index).
struct CollisionIncident {
  IncidentKind kind = IncidentKind::HeadOnTrack;
  /// Head-on: the lower-indexed train. Rear-end: the leader or standing train.
  std::size_t first = 0;
  /// Head-on: the other train. Rear-end: the follower or incoming train.
  std::size_t second = 0;
  std::optional<VertexIndex> site;  // platform station or junction
  double gap = 0.0;
  double time_to_collision = 0.0;  // +inf when the pair is not closing
  bool immediate = false;          // gap already 0
  std::size_t severity_rank = 0;   // 0 is the most fatal in its scan
};

/// Same track, opposite directions, at least one train moving, gap below headway.
std::optional<CollisionIncident> detect_head_on_track(const TrainState& a, const TrainState& b,
                                                      const RailNetwork& network, double headway);

struct JunctionApproach {
  const TrainState* train = nullptr;
  double distance = 0.0;  // d_j from the train tip to the junction
};

/// One incident per pair of moving trains on distinct tracks that are both
/// within the junction's range, provided more than one train is in range.
std::vector<CollisionIncident> detect_head_on_junction(VertexIndex junction,
                                                       std::span<const JunctionApproach> approaching,
                                                       const RailNetwork& network);

/// Convenience overload measuring every in-service train's forward distance.
std::vector<CollisionIncident> detect_head_on_junction(VertexIndex junction,
                                                       std::span<const TrainState> trains,
                                                       const RailNetwork& network);

/// Same track and direction, follower faster than a moving leader, gap below headway.
std::optional<CollisionIncident> detect_rear_end_track(const TrainState& a, const TrainState& b,
                                                       const RailNetwork& network, double headway);

/// `standing` occupies a platform of `station` at rest while `incoming` moves
/// on that platform's track.
std::optional<CollisionIncident> detect_rear_end_platform(VertexIndex station,
                                                          const TrainState& standing,
                                                          const TrainState& incoming,
                                                          const RailNetwork& network);

struct ScanOptions {
  bool station_agents = true;   // platform watch and relay for train pairs
  bool junction_agents = true;  // junction watch and relay for train pairs
};

/// Strict weak order: more fatal incidents first.
bool more_severe(const CollisionIncident& a, const CollisionIncident& b,
                 std::span<const TrainState> trains);

/// Every predicate over every applicable pair and vertex, keeping only pairs
/// some agent can observe. Sorted by severity, one incident per train pair.
std::vector<CollisionIncident> scan_all(const World& world, const ScanOptions& options = {});

}  // namespace railguard
