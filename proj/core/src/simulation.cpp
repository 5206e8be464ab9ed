#include "railguard/simulation.hpp"

#include <array>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <vector>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "railguard/error.hpp"

namespace railguard {

namespace {

constexpr double kContact = 1e-6;

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::ValidationError, what);
}

std::pair<std::size_t, std::size_t> pair_key(std::size_t a, std::size_t b) {
  return {std::min(a, b), std::max(a, b)};
}

void check_route(const TrainState& t, const RailNetwork& net) {
  VertexIndex at = forward_vertex(t, net);
  TrackIndex prev = t.track;
  for (TrackIndex next : t.route) {
    require(next < net.tracks().size(), fmt::format("train '{}' routes over unknown track", t.id));
    const auto& ends = net.track(next).endpoints;
    require(next != prev && (ends[0] == at || ends[1] == at),
            fmt::format("train '{}' route track '{}' does not leave '{}'", t.id,
                        net.track(next).id, net.vertex(at).id));
    at = net.other_end(next, at);
    prev = next;
  }
}

struct TrainMotion {
  double distance = 0.0;
  double speed = 0.0;
};

TrainMotion motion_over_tick(const TrainState& t, double dt, double decel) {
  if (!t.braking) return {t.speed * dt, t.speed};
  const double run = std::min(dt, t.speed / decel);
  return {t.speed * run - 0.5 * decel * run * run, std::max(0.0, t.speed - decel * dt)};
}

bool slot_taken(const World& world, const PlatformSlot& slot) {
  return std::any_of(world.trains.begin(), world.trains.end(), [&](const TrainState& o) {
    return o.in_service && o.platform && *o.platform == slot;
  });
}

void trim_trail(TrainState& t, const RailNetwork& net) {
  double covered = t.direction == Direction::Up ? t.position
                                                : net.track(t.track).length - t.position;
  std::size_t keep = 0;
  while (keep < t.trail.size() && covered < t.length) {
    covered += net.track(t.trail[keep].track).length;
    ++keep;
  }
  t.trail.resize(keep);
}

void advance_train(TrainState& t, World& world, double dt) {
  const auto& net = world.net();
  const auto m = motion_over_tick(t, dt, world.constants.deceleration());
  t.speed = m.speed;
  double left = m.distance;
  while (left > 0.0) {
    const double length = net.track(t.track).length;
    const double room = t.direction == Direction::Up ? length - t.position : t.position;
    if (left <= room) {
      t.position += t.direction == Direction::Up ? left : -left;
      break;
    }
    left -= room;
    t.position = t.direction == Direction::Up ? length : 0.0;
    const VertexIndex at = forward_vertex(t, net);
    if (t.route.empty()) {
      t.speed = 0.0;
      const Vertex& v = net.vertex(at);
      for (const auto& p : v.platforms) {
        const PlatformSlot slot{at, p.number};
        if (p.track == t.track && !slot_taken(world, slot)) {
          t.platform = slot;
          break;
        }
      }
      break;
    }
    const TrackIndex next = t.route.front();
    t.route.erase(t.route.begin());
    t.trail.insert(t.trail.begin(), TrailEntry{t.track, t.direction});
    t.track = next;
    const auto& ends = net.track(next).endpoints;
    t.direction = ends[0] == at ? Direction::Up : Direction::Down;
    t.position = t.direction == Direction::Up ? 0.0 : net.track(next).length;
  }
  trim_trail(t, net);
}

void release_holds(World& world) {
  for (auto it = world.junction_holds.begin(); it != world.junction_holds.end();) {
    const auto& t = world.trains[it->second];
    const bool past = forward_vertex(t, world.net()) != it->first &&
                      train_to_vertex(t, it->first, world.net()) > kContact;
    it = past ? world.junction_holds.erase(it) : std::next(it);
  }
}

bool heading_into(const TrainState& t, VertexIndex junction, const World& world) {
  if (t.speed <= 0.0) return false;
  const auto hold = world.junction_holds.find(junction);
  if (hold != world.junction_holds.end() && hold->second == t.index) return true;
  return forward_vertex(t, world.net()) == junction;
}

std::string run_mode_label(const RunConfig& config) { return std::string(to_string(config.mode)); }

SimEvent make_event(const SimState& state, EventKind kind, const OpenIncident& open, double gap,
                    std::string mode, std::uint64_t messages) {
  SimEvent e;
  e.tick = state.world.tick;
  e.kind = kind;
  e.incident_id = open.id;
  e.incident = open.incident;
  e.gap = gap;
  e.mode = std::move(mode);
  e.messages = messages;
  return e;
}

void wreck(TrainState& t) {
  t.speed = 0.0;
  t.braking = true;
}

// Pairs that some agent can observe; the first time a pair comes into view
// the trains (or their relay) exchange introductions.
std::uint64_t discovery_messages(SimState& state, const RunConfig& config) {
  const auto& world = state.world;
  const auto& net = world.net();
  std::uint64_t msgs = 0;
  const auto& trains = world.trains;
  // Which relay agents each train can reach, computed once per step.
  std::vector<std::vector<char>> reach(trains.size());
  std::vector<std::vector<Segment>> bodies(trains.size());
  for (std::size_t i = 0; i < trains.size(); ++i) {
    if (!trains[i].in_service) continue;
    bodies[i] = train_body(trains[i], net);
    reach[i].assign(net.vertex_count(), 0);
    for (VertexIndex v = 0; v < net.vertex_count(); ++v) {
      const Vertex& vx = net.vertex(v);
      const bool enabled = vx.kind == VertexKind::Station ? config.agents.station_agents
                                                          : config.agents.junction_agents;
      reach[i][v] = enabled && body_to_vertex(bodies[i], v, net) <=
                                   trains[i].comm_range + vx.comm_range;
    }
  }
  auto shared_relay = [&](std::size_t i, std::size_t k) {
    for (VertexIndex v = 0; v < net.vertex_count(); ++v) {
      if (reach[i][v] && reach[k][v]) return true;
    }
    return false;
  };
  for (std::size_t i = 0; i < trains.size(); ++i) {
    if (!trains[i].in_service) continue;
    for (std::size_t k = i + 1; k < trains.size(); ++k) {
      if (!trains[k].in_service) continue;
      const double gap = body_separation(bodies[i], bodies[k], net);
      std::uint64_t cost = 0;
      if (comm_reachable(gap, trains[i].comm_range, trains[k].comm_range)) {
        cost = 2;
      } else if (shared_relay(i, k)) {
        cost = 4;
      }
      const auto key = pair_key(i, k);
      if (cost == 0) {
        state.linked_pairs.erase(key);
      } else if (state.linked_pairs.insert(key).second) {
        msgs += cost;
      }
    }
  }
  return msgs;
}

std::uint64_t polling_messages(const World& world) {
  const auto active = static_cast<std::uint64_t>(
      std::count_if(world.trains.begin(), world.trains.end(),
                    [](const TrainState& t) { return t.in_service; }));
  return 2 * (active + world.net().junction_count());
}

// A train that began braking can leave a Moving partner on a collision course;
// stop the partner too whenever that raises the predicted gap.
std::uint64_t cascade_stops(SimState& state) {
  auto& world = state.world;
  std::uint64_t msgs = 0;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& open : state.open) {
      if (!open.decisions || open.incident.kind == IncidentKind::HeadOnJunction) continue;
      auto& a = world.trains[open.incident.first];
      auto& b = world.trains[open.incident.second];
      if (a.braking && b.braking) continue;
      const double now = predicted_incident_gap(open.incident, world, Action::Move, Action::Move);
      if (now >= world.distances.critical) continue;
      const double stopped =
          predicted_incident_gap(open.incident, world, Action::Stop, Action::Stop);
      if (stopped <= now) continue;
      for (auto* t : {&a, &b}) {
        if (!t->braking) {
          t->braking = true;
          msgs += 2;
          changed = true;
        }
      }
    }
  }
  return msgs;
}

// Bodies touch on a shared track, or meet at a junction they both reach.
// Tracks that only meet at a station end at separate platforms there.
bool bodies_touch(const std::vector<Segment>& body_a, const std::vector<Segment>& body_b,
                  const RailNetwork& net) {
  for (const auto& sa : body_a) {
    for (const auto& sb : body_b) {
      if (sa.track == sb.track) {
        if (net.segment_distance(sa, sb) <= kContact) return true;
        continue;
      }
      const Track& ta = net.track(sa.track);
      const Track& tb = net.track(sb.track);
      const std::array<double, 2> exit_a{sa.lo, ta.length - sa.hi};
      const std::array<double, 2> exit_b{sb.lo, tb.length - sb.hi};
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
          if (ta.endpoints[i] == tb.endpoints[j] && exit_a[i] <= kContact &&
              exit_b[j] <= kContact &&
              net.vertex(ta.endpoints[i]).kind == VertexKind::Junction) {
            return true;
          }
        }
      }
    }
  }
  return false;
}

bool in_contact(const TrainState& a, const TrainState& b, const RailNetwork& net) {
  return bodies_touch(train_body(a, net), train_body(b, net), net);
}

}  // namespace


std::string_view to_string(RunMode mode) noexcept {
  return mode == RunMode::Distributed ? "distributed" : "centralized";
}

std::optional<RunMode> parse_run_mode(std::string_view text) noexcept {
  if (iequals(text, "distributed")) return RunMode::Distributed;
  if (iequals(text, "centralized")) return RunMode::Centralized;
  return std::nullopt;
}

std::string_view to_string(EventKind kind) noexcept {
  switch (kind) {
    case EventKind::Detected: return "detected";
    case EventKind::Resolved: return "resolved";
    case EventKind::Avoided: return "avoided";
    case EventKind::Occurred: return "occurred";
  }
  return "unknown";
}

void Scenario::validate() const {
  require(network != nullptr, "scenario has no network");
  require(run.tick > 0.0, "tick must be positive");
  require(run.horizon >= 1, "horizon must be at least 1 tick");
  require(run.decision_latency >= 0, "decision_latency must not be negative");
  require(run.max_iters >= 1, "max_iters must be at least 1");
  require(distances.critical > 0.0, "critical distance must be positive");
  require(distances.headway > distances.critical, "headway must exceed the critical distance");
  require(constants.mu_k > 0.0 && constants.g > 0.0, "mu_k and g must be positive");
  require(default_comm_range > 0.0, "comm_range must be positive");
  for (std::size_t k = 0; k < trains.size(); ++k) {
    const auto& t = trains[k];
    require(t.index == k, fmt::format("train '{}' has index {} at slot {}", t.id, t.index, k));
    require(t.length > 0.0, fmt::format("train '{}' needs a positive length", t.id));
    require(t.comm_range > 0.0, fmt::format("train '{}' needs a positive comm_range", t.id));
    require(t.activation_tick >= 0, fmt::format("train '{}' has a negative activation", t.id));
    for (std::size_t j = 0; j < k; ++j) {
      require(trains[j].id != t.id, fmt::format("train id '{}' used twice", t.id));
    }
    require(t.track < network->tracks().size(), fmt::format("train '{}' track unknown", t.id));
    check_route(t, *network);
  }
  validate_occupancy(*network, trains);
}

World Scenario::initial_world() const {
  World w;
  w.network = network;
  w.trains = trains;
  for (auto& t : w.trains) t.in_service = t.activation_tick <= 0;
  w.constants = constants;
  w.distances = distances;
  return w;
}

std::string format_event(const SimEvent& e, const World& world) {
  const auto& a = world.trains.at(e.incident.first).id;
  const auto& b = world.trains.at(e.incident.second).id;
  std::string line = fmt::format("tick={} event={} kind={} trains={},{} gap={:.3f} mode={} msgs={} incident={}",
                                 e.tick, to_string(e.kind), to_string(e.incident.kind), a, b, e.gap,
                                 e.mode, e.messages, e.incident_id);
  if (e.decisions) {
    line += " actions=";
    bool comma = false;
    for (const auto& d : e.decisions->decisions) {
      if (comma) line += ',';
      line += fmt::format("{}:{}", world.trains.at(d.train).id, to_string(d.action));
      comma = true;
    }
    line += fmt::format(" safety={}", to_string(e.decisions->safety));
  }
  return line;
}

SimState initial_state(const Scenario& scenario) {
  SimState s;
  s.world = scenario.initial_world();
  return s;
}

bool quiescent(const SimState& state) {
  if (!state.open.empty()) return false;
  return std::all_of(state.world.trains.begin(), state.world.trains.end(),
                     [](const TrainState& t) { return t.in_service && t.speed == 0.0; });
}

std::vector<SimEvent> step(SimState& state, const RunConfig& config) {
  auto& world = state.world;
  const auto& net = world.net();
  std::vector<SimEvent> events;

  for (auto& t : world.trains) {
    if (!t.in_service && t.activation_tick <= world.tick) t.in_service = true;
  }

  // (1) detection
  for (const auto& inc : scan_all(world, config.agents)) {
    const auto key = pair_key(inc.first, inc.second);
    const bool tracked = std::any_of(state.open.begin(), state.open.end(), [&](const OpenIncident& o) {
      return pair_key(o.incident.first, o.incident.second) == key;
    });
    if (tracked) continue;
    OpenIncident open{state.next_incident_id++, inc, world.tick, std::nullopt};
    ++state.detected;
    events.push_back(make_event(state, EventKind::Detected, open, inc.gap, run_mode_label(config), 0));
    state.open.push_back(open);
  }

  if (config.mode == RunMode::Distributed) {
    state.messages += discovery_messages(state, config);
  } else {
    state.messages += polling_messages(world);
  }

  // (2)+(3) resolution in severity order, applying as we go
  CoordinationConfig cc;
  cc.max_iters = config.max_iters;
  cc.agents = config.agents;
  for (auto& open : state.open) {
    if (open.decisions || open.detected_tick + config.decision_latency > world.tick) continue;
    DecisionSet ds = config.mode == RunMode::Distributed ? resolve_incident(open.incident, world, cc)
                                                         : centralized_resolve(open.incident, world, cc);
    apply_decisions_in_place(world, ds);
    state.messages += ds.messages_used;
    if (ds.safety == SafetyOutcome::Infeasible) ++state.infeasible;
    auto e = make_event(state, EventKind::Resolved, open, open.incident.gap,
                        std::string(to_string(ds.mode)), ds.messages_used);
    e.decisions = ds;
    events.push_back(std::move(e));
    open.decisions = std::move(ds);
  }
  state.messages += cascade_stops(state);

  // (4) kinematics
  for (auto& t : world.trains) {
    if (t.in_service) advance_train(t, world, config.tick);
  }
  release_holds(world);

  // (5) incident closure
  std::vector<OpenIncident> still_open;
  for (auto& open : state.open) {
    auto& a = world.trains[open.incident.first];
    auto& b = world.trains[open.incident.second];
    const double gap = train_separation(a, b, net);
    if (in_contact(a, b, net)) {
      ++state.occurred;
      wreck(a);
      wreck(b);
      events.push_back(make_event(state, EventKind::Occurred, open, 0.0, run_mode_label(config), 0));
      continue;
    }
    bool done = false;
    if (open.decisions) {
      if (a.speed == 0.0 && b.speed == 0.0) {
        done = true;
      } else if (open.incident.kind == IncidentKind::HeadOnJunction && open.incident.site) {
        const VertexIndex j = *open.incident.site;
        done = !heading_into(a, j, world) && !heading_into(b, j, world);
      } else if (open.incident.kind == IncidentKind::RearEndPlatform) {
        done = b.speed == 0.0 || forward_vertex(b, net) != open.incident.site;
      } else {
        done = gap >= world.distances.headway;
      }
    }
    if (done) {
      ++state.avoided;
      events.push_back(make_event(state, EventKind::Avoided, open, gap, run_mode_label(config), 0));
    } else {
      still_open.push_back(std::move(open));
    }
  }
  state.open = std::move(still_open);

  // Contacts no incident accounted for.
  auto& trains = world.trains;
  std::vector<std::vector<Segment>> bodies(trains.size());
  for (std::size_t i = 0; i < trains.size(); ++i) {
    if (trains[i].in_service) bodies[i] = train_body(trains[i], net);
  }
  for (std::size_t i = 0; i < trains.size(); ++i) {
    if (!trains[i].in_service) continue;
    for (std::size_t k = i + 1; k < trains.size(); ++k) {
      if (!trains[k].in_service) continue;
      if (trains[i].speed == 0.0 && trains[k].speed == 0.0) continue;
      const auto key = pair_key(i, k);
      const bool tracked = std::any_of(state.open.begin(), state.open.end(), [&](const OpenIncident& o) {
        return pair_key(o.incident.first, o.incident.second) == key;
      });
      if (tracked) continue;
      if (bodies_touch(bodies[i], bodies[k], net)) {
        ++state.unmanaged_contacts;
        spdlog::debug("tick {}: unmanaged contact between {} and {}", world.tick, trains[i].id,
                      trains[k].id);
        wreck(trains[i]);
        wreck(trains[k]);
      }
    }
  }

  ++world.tick;
  return events;
}

SimReport run_scenario(const Scenario& scenario, const StepObserver& observer) {
  scenario.validate();
  const RunConfig& config = scenario.run;
  SimState state = initial_state(scenario);
  SimReport report;
  auto log = [&](const std::vector<SimEvent>& events) {
    for (const auto& e : events) report.event_log.push_back(format_event(e, state.world));
  };

  while (state.world.tick < config.horizon) {
    const bool pending = std::any_of(state.world.trains.begin(), state.world.trains.end(),
                                     [](const TrainState& t) { return !t.in_service; });
    const bool at_rest =
        state.open.empty() &&
        std::all_of(state.world.trains.begin(), state.world.trains.end(),
                    [](const TrainState& t) { return !t.in_service || t.speed == 0.0; });
    if (at_rest) {
      // Nothing moves until the next activation; only polling continues.
      std::int64_t next = config.horizon;
      if (pending) {
        for (const auto& t : state.world.trains) {
          if (!t.in_service) next = std::min(next, std::max(t.activation_tick, state.world.tick));
        }
      }
      if (next > state.world.tick) {
        if (config.mode == RunMode::Centralized) {
          state.messages += polling_messages(state.world) *
                            static_cast<std::uint64_t>(next - state.world.tick);
        }
        state.world.tick = next;
        continue;
      }
    }
    if (observer) {
      const World before = state.world;
      const auto events = step(state, config);
      observer(before, events);
      log(events);
    } else {
      log(step(state, config));
    }
  }

  // Whatever is still open at the horizon ended without contact.
  for (const auto& open : state.open) {
    const auto& a = state.world.trains[open.incident.first];
    const auto& b = state.world.trains[open.incident.second];
    ++state.avoided;
    log({make_event(state, EventKind::Avoided, open, train_separation(a, b, state.world.net()),
                    run_mode_label(config), 0)});
  }
  state.open.clear();

  report.collisions_detected = state.detected;
  report.collisions_avoided = state.avoided;
  report.collisions_occurred = state.occurred;
  report.infeasible_resolutions = state.infeasible;
  report.unmanaged_contacts = state.unmanaged_contacts;
  report.messages_total = state.messages;
  report.ticks_run = state.world.tick;
  report.final_world = std::move(state.world);
  return report;
}

}  // namespace railguard
