#include "railguard/network.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <unordered_set>

#include <fmt/format.h>

#include "railguard/error.hpp"

namespace railguard {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace

RailNetwork RailNetwork::build(std::vector<VertexSpec> vertices, std::vector<TrackSpec> tracks) {
  RailNetwork net;
  net.vertices_.reserve(vertices.size());
  for (auto& spec : vertices) {
    if (spec.id.empty()) {
      throw Error(ErrorCode::InvalidVertex, "vertex with empty id");
    }
    if (!(spec.comm_range > 0.0)) {
      throw Error(ErrorCode::InvalidVertex,
                  fmt::format("vertex '{}' needs a positive comm_range", spec.id));
    }
    const VertexIndex index = net.vertices_.size();
    if (!net.vertex_ids_.emplace(spec.id, index).second) {
      throw Error(ErrorCode::DuplicateId, fmt::format("vertex id '{}' used twice", spec.id));
    }
    Vertex v;
    v.id = std::move(spec.id);
    v.kind = spec.kind;
    v.comm_range = spec.comm_range;
    if (v.kind == VertexKind::Station) {
      v.kind_index = net.stations_.size();
      net.stations_.push_back(index);
    } else {
      if (!spec.platforms.empty()) {
        throw Error(ErrorCode::InvalidVertex,
                    fmt::format("junction '{}' cannot have platforms", v.id));
      }
      v.kind_index = net.junctions_.size();
      net.junctions_.push_back(index);
    }
    net.vertices_.push_back(std::move(v));
  }

  net.tracks_.reserve(tracks.size());
  for (auto& spec : tracks) {
    const TrackIndex index = net.tracks_.size();
    if (!net.track_ids_.emplace(spec.id, index).second) {
      throw Error(ErrorCode::DuplicateId, fmt::format("track id '{}' used twice", spec.id));
    }
    const auto from = net.find_vertex(spec.from);
    const auto to = net.find_vertex(spec.to);
    if (!from || !to) {
      throw Error(ErrorCode::DanglingEndpoint,
                  fmt::format("track '{}' references unknown vertex '{}'", spec.id,
                              from ? spec.to : spec.from));
    }
    if (*from == *to) {
      throw Error(ErrorCode::LoopTrack, fmt::format("track '{}' is a loop", spec.id));
    }
    if (!(spec.length > 0.0) || !std::isfinite(spec.length)) {
      throw Error(ErrorCode::NonPositiveLength,
                  fmt::format("track '{}' has length {}", spec.id, spec.length));
    }
    Track t;
    t.id = std::move(spec.id);
    t.endpoints = {*from, *to};
    t.length = spec.length;
    net.vertices_[*from].incident.push_back(index);
    net.vertices_[*to].incident.push_back(index);
    net.tracks_.push_back(std::move(t));
  }

  // Platforms and junction degree can only be checked once the tracks exist.
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    Vertex& v = net.vertices_[i];
    if (v.kind == VertexKind::Junction) {
      if (v.incident.size() < 2) {
        throw Error(ErrorCode::InvalidVertex,
                    fmt::format("junction '{}' has {} incident tracks, needs at least 2", v.id,
                                v.incident.size()));
      }
      continue;
    }
    std::unordered_set<int> numbers;
    for (const auto& p : vertices[i].platforms) {
      if (!numbers.insert(p.number).second) {
        throw Error(ErrorCode::DuplicateId,
                    fmt::format("station '{}' lists platform {} twice", v.id, p.number));
      }
      const auto track = net.find_track(p.track);
      if (!track) {
        throw Error(ErrorCode::DanglingEndpoint,
                    fmt::format("platform {} of '{}' references unknown track '{}'", p.number,
                                v.id, p.track));
      }
      const auto& ends = net.tracks_[*track].endpoints;
      if (ends[0] != i && ends[1] != i) {
        throw Error(ErrorCode::InvalidVertex,
                    fmt::format("platform {} of '{}' uses track '{}' which does not end there",
                                p.number, v.id, p.track));
      }
      v.platforms.push_back(Platform{p.number, *track});
    }
  }

  // All-pairs shortest paths, one Dijkstra per vertex.
  const std::size_t n = net.vertices_.size();
  net.distances_.assign(n * n, kInf);
  using Item = std::pair<double, VertexIndex>;
  for (VertexIndex source = 0; source < n; ++source) {
    double* row = net.distances_.data() + source * n;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    row[source] = 0.0;
    queue.emplace(0.0, source);
    while (!queue.empty()) {
      const auto [d, u] = queue.top();
      queue.pop();
      if (d > row[u]) continue;
      for (TrackIndex t : net.vertices_[u].incident) {
        const VertexIndex w = net.other_end(t, u);
        const double nd = d + net.tracks_[t].length;
        if (nd < row[w]) {
          row[w] = nd;
          queue.emplace(nd, w);
        }
      }
    }
  }
  return net;
}

RailNetwork build_network(std::vector<VertexSpec> vertices, std::vector<TrackSpec> tracks) {
  return RailNetwork::build(std::move(vertices), std::move(tracks));
}

std::optional<VertexIndex> RailNetwork::find_vertex(std::string_view id) const {
  const auto it = vertex_ids_.find(std::string(id));
  if (it == vertex_ids_.end()) return std::nullopt;
  return it->second;
}

std::optional<TrackIndex> RailNetwork::find_track(std::string_view id) const {
  const auto it = track_ids_.find(std::string(id));
  if (it == track_ids_.end()) return std::nullopt;
  return it->second;
}

VertexIndex RailNetwork::other_end(TrackIndex t, VertexIndex v) const {
  const auto& ends = tracks_.at(t).endpoints;
  return ends[0] == v ? ends[1] : ends[0];
}

double RailNetwork::vertex_distance(VertexIndex a, VertexIndex b) const {
  const std::size_t n = vertices_.size();
  return distances_.at(a * n + b);
}

double RailNetwork::segment_to_vertex(const Segment& s, VertexIndex v) const {
  const Track& t = tracks_.at(s.track);
  return std::min(s.lo + vertex_distance(t.endpoints[0], v),
                  (t.length - s.hi) + vertex_distance(t.endpoints[1], v));
}

double RailNetwork::point_to_vertex(TrackPoint p, VertexIndex v) const {
  return segment_to_vertex(Segment{p.track, p.offset, p.offset}, v);
}

double RailNetwork::segment_distance(const Segment& a, const Segment& b) const {
  if (a.track == b.track) {
    return std::max(0.0, std::max(a.lo, b.lo) - std::min(a.hi, b.hi));
  }
  const Track& ta = tracks_.at(a.track);
  const Track& tb = tracks_.at(b.track);
  const std::array<double, 2> exit_a{a.lo, ta.length - a.hi};
  const std::array<double, 2> exit_b{b.lo, tb.length - b.hi};
  double best = kInf;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      best = std::min(best, exit_a[i] + vertex_distance(ta.endpoints[i], tb.endpoints[j]) +
                                exit_b[j]);
    }
  }
  return best;
}

double RailNetwork::point_distance(TrackPoint a, TrackPoint b) const {
  return segment_distance(Segment{a.track, a.offset, a.offset},
                          Segment{b.track, b.offset, b.offset});
}

std::string_view to_string(PriorityClass c) noexcept {
  switch (c) {
    case PriorityClass::Freight: return "Freight";
    case PriorityClass::Passenger: return "Passenger";
    case PriorityClass::ExpressMail: return "ExpressMail";
    case PriorityClass::SuperfastExpress: return "SuperfastExpress";
    case PriorityClass::Premium: return "Premium";
  }
  return "Passenger";
}

std::optional<PriorityClass> parse_priority_class(std::string_view text) noexcept {
  for (auto c : {PriorityClass::Freight, PriorityClass::Passenger, PriorityClass::ExpressMail,
                 PriorityClass::SuperfastExpress, PriorityClass::Premium}) {
    if (iequals(text, to_string(c))) return c;
  }
  return std::nullopt;
}

std::vector<Segment> train_body(const TrainState& train, const RailNetwork& network) {
  std::vector<Segment> body;
  body.reserve(1 + train.trail.size());
  const double track_length = network.track(train.track).length;
  Segment tip{train.track, train.position, train.position};
  if (train.direction == Direction::Up) {
    tip.lo = std::max(0.0, train.position - train.length);
  } else {
    tip.hi = std::min(track_length, train.position + train.length);
  }
  body.push_back(tip);
  double remaining = train.length - (tip.hi - tip.lo);
  for (const auto& entry : train.trail) {
    if (remaining <= 0.0) break;
    const double length = network.track(entry.track).length;
    const double take = std::min(remaining, length);
    // The train left this track through its far end.
    if (entry.direction == Direction::Up) {
      body.push_back(Segment{entry.track, length - take, length});
    } else {
      body.push_back(Segment{entry.track, 0.0, take});
    }
    remaining -= take;
  }
  return body;
}

VertexIndex forward_vertex(const TrainState& train, const RailNetwork& network) {
  const auto& ends = network.track(train.track).endpoints;
  return train.direction == Direction::Up ? ends[1] : ends[0];
}

double train_separation(const TrainState& a, const TrainState& b, const RailNetwork& network) {
  return body_separation(train_body(a, network), train_body(b, network), network);
}

double body_separation(std::span<const Segment> a, std::span<const Segment> b,
                       const RailNetwork& network) {
  double best = kInf;
  for (const auto& sa : a) {
    for (const auto& sb : b) {
      best = std::min(best, network.segment_distance(sa, sb));
    }
  }
  return best;
}

double train_to_vertex(const TrainState& train, VertexIndex v, const RailNetwork& network) {
  return body_to_vertex(train_body(train, network), v, network);
}

double body_to_vertex(std::span<const Segment> body, VertexIndex v, const RailNetwork& network) {
  double best = kInf;
  for (const auto& s : body) {
    best = std::min(best, network.segment_to_vertex(s, v));
  }
  return best;
}

void validate_occupancy(const RailNetwork& network, std::span<const TrainState> trains) {
  std::vector<std::pair<PlatformSlot, std::size_t>> slots;
  for (std::size_t k = 0; k < trains.size(); ++k) {
    const TrainState& t = trains[k];
    if (!t.in_service) continue;
    if (t.track >= network.tracks().size()) {
      throw Error(ErrorCode::UnknownTrack, fmt::format("train '{}' is on unknown track", t.id));
    }
    const double length = network.track(t.track).length;
    if (t.position < 0.0 || t.position > length) {
      throw Error(ErrorCode::ValidationError,
                  fmt::format("train '{}' position {} outside track '{}' [0, {}]", t.id,
                              t.position, network.track(t.track).id, length));
    }
    if (t.speed < 0.0) {
      throw Error(ErrorCode::NegativeSpeed, fmt::format("train '{}' has negative speed", t.id));
    }
    if (t.platform) {
      if (t.platform->station >= network.vertex_count() ||
          network.vertex(t.platform->station).kind != VertexKind::Station) {
        throw Error(ErrorCode::ValidationError,
                    fmt::format("train '{}' references a platform of a non-station", t.id));
      }
      const auto& platforms = network.vertex(t.platform->station).platforms;
      const auto it = std::find_if(platforms.begin(), platforms.end(), [&](const Platform& p) {
        return p.number == t.platform->platform;
      });
      if (it == platforms.end() || it->track != t.track) {
        throw Error(ErrorCode::ValidationError,
                    fmt::format("train '{}' platform {} is not on its track", t.id,
                                t.platform->platform));
      }
      if (t.speed != 0.0) {
        throw Error(ErrorCode::ValidationError,
                    fmt::format("train '{}' stands at a platform with nonzero speed", t.id));
      }
      for (const auto& [slot, other] : slots) {
        if (slot == *t.platform) {
          throw Error(ErrorCode::PlatformConflict,
                      fmt::format("trains '{}' and '{}' both occupy platform {} of '{}'",
                                  trains[other].id, t.id, slot.platform,
                                  network.vertex(slot.station).id));
        }
      }
      slots.emplace_back(*t.platform, k);
    }
  }

  std::vector<std::vector<Segment>> bodies(trains.size());
  for (std::size_t k = 0; k < trains.size(); ++k) {
    if (trains[k].in_service) bodies[k] = train_body(trains[k], network);
  }
  for (std::size_t a = 0; a < trains.size(); ++a) {
    for (std::size_t b = a + 1; b < trains.size(); ++b) {
      for (const auto& sa : bodies[a]) {
        for (const auto& sb : bodies[b]) {
          if (sa.track == sb.track && std::max(sa.lo, sb.lo) <= std::min(sa.hi, sb.hi)) {
            throw Error(ErrorCode::OverlapConflict,
                        fmt::format("trains '{}' and '{}' overlap on track '{}'", trains[a].id,
                                    trains[b].id, network.track(sa.track).id));
          }
        }
      }
    }
  }
}

namespace {

void check_agent(const AgentId& agent, const RailNetwork& network,
                 std::span<const TrainState> trains) {
  switch (agent.kind) {
    case AgentKind::Train:
      if (agent.index < trains.size()) return;
      break;
    case AgentKind::Station:
      if (agent.index < network.vertex_count() &&
          network.vertex(agent.index).kind == VertexKind::Station) {
        return;
      }
      break;
    case AgentKind::Junction:
      if (agent.index < network.vertex_count() &&
          network.vertex(agent.index).kind == VertexKind::Junction) {
        return;
      }
      break;
  }
  throw Error(ErrorCode::UnknownAgent, fmt::format("no agent with index {}", agent.index));
}

}  // namespace

std::string agent_label(const AgentId& agent, const RailNetwork& network,
                        std::span<const TrainState> trains) {
  check_agent(agent, network, trains);
  if (agent.kind == AgentKind::Train) return trains[agent.index].id;
  return network.vertex(agent.index).id;
}

double agent_separation(const AgentId& a, const AgentId& b, const RailNetwork& network,
                        std::span<const TrainState> trains) {
  check_agent(a, network, trains);
  check_agent(b, network, trains);
  const bool a_train = a.kind == AgentKind::Train;
  const bool b_train = b.kind == AgentKind::Train;
  if (a_train && b_train) return train_separation(trains[a.index], trains[b.index], network);
  if (a_train) return train_to_vertex(trains[a.index], b.index, network);
  if (b_train) return train_to_vertex(trains[b.index], a.index, network);
  return network.vertex_distance(a.index, b.index);
}

std::vector<AgentId> neighbors_in_range(const RailNetwork& network,
                                        std::span<const TrainState> trains,
                                        const AgentId& agent, double radius_sum) {
  check_agent(agent, network, trains);
  if (!(radius_sum > 0.0)) {
    throw Error(ErrorCode::ValidationError, "radius_sum must be positive");
  }
  std::vector<AgentId> out;
  for (std::size_t k = 0; k < trains.size(); ++k) {
    const AgentId other{AgentKind::Train, k};
    if (other == agent || !trains[k].in_service) continue;
    if (agent_separation(agent, other, network, trains) <= radius_sum) out.push_back(other);
  }
  for (VertexIndex v = 0; v < network.vertex_count(); ++v) {
    const AgentId other{network.vertex(v).kind == VertexKind::Station ? AgentKind::Station
                                                                       : AgentKind::Junction,
                        v};
    if (other == agent) continue;
    if (agent_separation(agent, other, network, trains) <= radius_sum) out.push_back(other);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace railguard
