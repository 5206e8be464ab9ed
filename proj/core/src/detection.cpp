#include "railguard/detection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <tuple>

namespace railguard {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double time_to_collision(double gap, double closing_speed) {
  if (gap <= 0.0) return 0.0;
  return closing_speed > 0.0 ? gap / closing_speed : kInf;
}

CollisionIncident make_incident(IncidentKind kind, std::size_t first, std::size_t second,
                                double gap, double closing_speed) {
  CollisionIncident inc;
  inc.kind = kind;
  inc.first = first;
  inc.second = second;
  inc.gap = std::max(0.0, gap);
  inc.time_to_collision = time_to_collision(inc.gap, closing_speed);
  inc.immediate = inc.gap <= 0.0;
  return inc;
}

}  // namespace

std::string_view to_string(IncidentKind kind) noexcept {
  switch (kind) {
    case IncidentKind::HeadOnTrack: return "head_on_track";
    case IncidentKind::HeadOnJunction: return "head_on_junction";
    case IncidentKind::RearEndTrack: return "rear_end_track";
    case IncidentKind::RearEndPlatform: return "rear_end_platform";
  }
  return "unknown";
}

std::optional<CollisionIncident> detect_head_on_track(const TrainState& a, const TrainState& b,
                                                      const RailNetwork& network, double headway) {
  if (a.track != b.track) return std::nullopt;
  if (a.direction == b.direction) return std::nullopt;
  if (!(a.speed > 0.0 || b.speed > 0.0)) return std::nullopt;
  const double gap = train_separation(a, b, network);
  if (!(gap < headway)) return std::nullopt;
  const bool a_first = a.index <= b.index;
  return make_incident(IncidentKind::HeadOnTrack, a_first ? a.index : b.index,
                       a_first ? b.index : a.index, gap, a.speed + b.speed);
}

std::vector<CollisionIncident> detect_head_on_junction(VertexIndex junction,
                                                       std::span<const JunctionApproach> approaching,
                                                       const RailNetwork& network) {
  std::vector<CollisionIncident> out;
  const double range = network.vertex(junction).comm_range;
  const auto in_range = static_cast<std::size_t>(
      std::count_if(approaching.begin(), approaching.end(),
                    [&](const JunctionApproach& a) { return a.distance <= range; }));
  if (in_range <= 1) return out;

  for (std::size_t i = 0; i < approaching.size(); ++i) {
    for (std::size_t k = i + 1; k < approaching.size(); ++k) {
      const auto& p = approaching[i];
      const auto& q = approaching[k];
      if (p.train->track == q.train->track) continue;
      if (!(p.train->speed > 0.0 && q.train->speed > 0.0)) continue;
      if (!(p.distance <= range && q.distance <= range)) continue;
      const bool p_first = p.train->index <= q.train->index;
      const auto& lo = p_first ? p : q;
      const auto& hi = p_first ? q : p;
      auto inc = make_incident(IncidentKind::HeadOnJunction, lo.train->index, hi.train->index,
                               lo.distance + hi.distance, lo.train->speed + hi.train->speed);
      inc.site = junction;
      out.push_back(inc);
    }
  }
  return out;
}

std::vector<CollisionIncident> detect_head_on_junction(VertexIndex junction,
                                                       std::span<const TrainState> trains,
                                                       const RailNetwork& network) {
  std::vector<JunctionApproach> approaching;
  for (const auto& t : trains) {
    if (!t.in_service) continue;
    const double d = network.vertex_distance(forward_vertex(t, network), junction);
    if (!std::isfinite(d)) continue;
    const auto& track = network.track(t.track);
    const double remaining = t.direction == Direction::Up ? track.length - t.position : t.position;
    approaching.push_back(JunctionApproach{&t, remaining + d});
  }
  return detect_head_on_junction(junction, approaching, network);
}

std::optional<CollisionIncident> detect_rear_end_track(const TrainState& a, const TrainState& b,
                                                       const RailNetwork& network, double headway) {
  if (a.track != b.track) return std::nullopt;
  if (a.direction != b.direction) return std::nullopt;
  // The leader is ahead along the common direction of travel.
  const bool a_leads = a.direction == Direction::Up ? a.position >= b.position
                                                    : a.position <= b.position;
  const TrainState& leader = a_leads ? a : b;
  const TrainState& follower = a_leads ? b : a;
  if (!(follower.speed > leader.speed && leader.speed > 0.0)) return std::nullopt;
  const double gap = train_separation(a, b, network);
  if (!(gap < headway)) return std::nullopt;
  return make_incident(IncidentKind::RearEndTrack, leader.index, follower.index, gap,
                       follower.speed - leader.speed);
}

std::optional<CollisionIncident> detect_rear_end_platform(VertexIndex station,
                                                          const TrainState& standing,
                                                          const TrainState& incoming,
                                                          const RailNetwork& network) {
  if (standing.index == incoming.index) return std::nullopt;
  if (!standing.platform || standing.platform->station != station) return std::nullopt;
  if (incoming.track != standing.track) return std::nullopt;
  if (!(standing.speed == 0.0)) return std::nullopt;
  if (!(incoming.speed > 0.0)) return std::nullopt;
  const double gap = train_separation(standing, incoming, network);
  auto inc = make_incident(IncidentKind::RearEndPlatform, standing.index, incoming.index, gap,
                           incoming.speed);
  inc.site = station;
  return inc;
}

bool more_severe(const CollisionIncident& a, const CollisionIncident& b,
                 std::span<const TrainState> trains) {
  const int class_a = is_head_on(a.kind) ? 0 : 1;
  const int class_b = is_head_on(b.kind) ? 0 : 1;
  if (class_a != class_b) return class_a < class_b;
  if (a.time_to_collision != b.time_to_collision) {
    return a.time_to_collision < b.time_to_collision;
  }
  auto ids = [&](const CollisionIncident& inc) {
    const auto& x = trains[inc.first].id;
    const auto& y = trains[inc.second].id;
    return x < y ? std::tie(x, y) : std::tie(y, x);
  };
  const auto ia = ids(a);
  const auto ib = ids(b);
  if (ia != ib) return ia < ib;
  if (a.kind != b.kind) return a.kind < b.kind;
  return a.site.value_or(0) < b.site.value_or(0);
}

namespace {

bool vertex_agent_enabled(const Vertex& v, const ScanOptions& options) {
  return v.kind == VertexKind::Station ? options.station_agents : options.junction_agents;
}

// Some agent can observe both trains: directly, or through a station or
// junction whose range reaches each of them.
bool pair_observable(const World& world, const TrainState& a, const TrainState& b, double gap,
                     const ScanOptions& options) {
  if (comm_reachable(gap, a.comm_range, b.comm_range)) return true;
  const auto& net = world.net();
  for (VertexIndex v = 0; v < net.vertex_count(); ++v) {
    const Vertex& vx = net.vertex(v);
    if (!vertex_agent_enabled(vx, options)) continue;
    if (train_to_vertex(a, v, net) <= a.comm_range + vx.comm_range &&
        train_to_vertex(b, v, net) <= b.comm_range + vx.comm_range) {
      return true;
    }
  }
  return false;
}

}  // namespace

std::vector<CollisionIncident> scan_all(const World& world, const ScanOptions& options) {
  const auto& net = world.net();
  const auto& trains = world.trains;
  const double headway = world.distances.headway;
  std::vector<CollisionIncident> found;

  for (std::size_t i = 0; i < trains.size(); ++i) {
    if (!trains[i].in_service) continue;
    for (std::size_t k = i + 1; k < trains.size(); ++k) {
      if (!trains[k].in_service || trains[i].track != trains[k].track) continue;
      for (auto inc : {detect_head_on_track(trains[i], trains[k], net, headway),
                       detect_rear_end_track(trains[i], trains[k], net, headway)}) {
        if (inc && pair_observable(world, trains[i], trains[k], inc->gap, options)) {
          found.push_back(*inc);
        }
      }
    }
  }

  if (options.station_agents) {
    for (const auto& standing : trains) {
      if (!standing.in_service || !standing.platform) continue;
      const VertexIndex station = standing.platform->station;
      const double station_range = net.vertex(station).comm_range;
      for (const auto& incoming : trains) {
        if (!incoming.in_service) continue;
        auto inc = detect_rear_end_platform(station, standing, incoming, net);
        if (!inc) continue;
        const bool observed =
            comm_reachable(inc->gap, standing.comm_range, incoming.comm_range) ||
            train_to_vertex(incoming, station, net) <= incoming.comm_range + station_range;
        if (observed) found.push_back(*inc);
      }
    }
  }

  if (options.junction_agents) {
    std::vector<JunctionApproach> approaching;
    for (VertexIndex j : net.junctions()) {
      approaching.clear();
      const auto hold = world.junction_holds.find(j);
      for (const auto& t : trains) {
        if (!t.in_service) continue;
        if (hold != world.junction_holds.end() && hold->second == t.index &&
            forward_vertex(t, net) != j) {
          // Still clearing the junction it was let through.
          approaching.push_back(JunctionApproach{&t, 0.0});
          continue;
        }
        const double beyond = net.vertex_distance(forward_vertex(t, net), j);
        if (!std::isfinite(beyond)) continue;
        const auto& track = net.track(t.track);
        const double remaining =
            t.direction == Direction::Up ? track.length - t.position : t.position;
        approaching.push_back(JunctionApproach{&t, remaining + beyond});
      }
      auto incs = detect_head_on_junction(j, approaching, net);
      found.insert(found.end(), incs.begin(), incs.end());
    }
  }

  std::stable_sort(found.begin(), found.end(),
                   [&](const CollisionIncident& a, const CollisionIncident& b) {
                     return more_severe(a, b, trains);
                   });
  std::vector<CollisionIncident> out;
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (auto& inc : found) {
    const auto key = std::minmax(inc.first, inc.second);
    if (!seen.insert(key).second) continue;
    inc.severity_rank = out.size();
    out.push_back(inc);
  }
  return out;
}

}  // namespace railguard
