#include "railguard/coordination.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "railguard/error.hpp"

namespace railguard {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr ActionValues kPreferMove{-1.0, 1.0};
constexpr ActionValues kPreferStop{1.0, -1.0};

const TrainState& train_at(const World& world, std::size_t index) {
  if (index >= world.trains.size()) {
    throw Error(ErrorCode::UnknownTrain, fmt::format("train index {}", index));
  }
  return world.trains[index];
}

ActionValues train_beta(const TrainState& t) {
  if (t.beta) return ActionValues{(*t.beta)[0], (*t.beta)[1]};
  return t.speed > 0.0 ? kPreferMove : kPreferStop;
}

// Distance from a train to a junction; a train cleared through the junction
// and still on its way out counts as being in it.
double junction_distance(const TrainState& t, VertexIndex junction, const World& world) {
  const auto hold = world.junction_holds.find(junction);
  if (hold != world.junction_holds.end() && hold->second == t.index &&
      forward_vertex(t, world.net()) != junction) {
    return 0.0;
  }
  try {
    return distance_to_junction(t, junction, world.net());
  } catch (const Error&) {
    return kInf;
  }
}

double current_gap(const CollisionIncident& inc, const World& world) {
  const auto& a = train_at(world, inc.first);
  const auto& b = train_at(world, inc.second);
  if (inc.kind == IncidentKind::HeadOnJunction && inc.site) {
    return junction_distance(a, *inc.site, world) + junction_distance(b, *inc.site, world);
  }
  return train_separation(a, b, world.net());
}

bool facing(const TrainState& t, const TrainState& other) {
  if (t.track != other.track) return true;
  return t.direction == Direction::Up ? t.position <= other.position
                                      : t.position >= other.position;
}

struct Candidate {
  Action first;
  Action second;
};

std::vector<Candidate> candidates(const CollisionIncident& inc) {
  if (inc.kind == IncidentKind::RearEndPlatform) {
    return {{Action::Stop, Action::Stop}, {Action::Stop, Action::Move}};
  }
  return {{Action::Stop, Action::Stop},
          {Action::Stop, Action::Move},
          {Action::Move, Action::Stop},
          {Action::Move, Action::Move}};
}

int stop_count(const Candidate& c) {
  return (c.first == Action::Stop ? 1 : 0) + (c.second == Action::Stop ? 1 : 0);
}

// Keeps the proposal when it holds the critical distance; otherwise both
// Stop when that does, otherwise the joint action with the largest future gap.
void verify(DecisionSet& set, const CollisionIncident& inc, const World& world, Candidate proposal) {
  const double critical = world.distances.critical;
  const double proposed = predicted_incident_gap(inc, world, proposal.first, proposal.second);
  Candidate chosen = proposal;
  double chosen_gap = proposed;
  if (proposed >= critical) {
    set.safety = SafetyOutcome::Accepted;
  } else {
    const Candidate both_stop{Action::Stop, Action::Stop};
    const double stop_gap = predicted_incident_gap(inc, world, Action::Stop, Action::Stop);
    if (stop_gap >= critical) {
      chosen = both_stop;
      chosen_gap = stop_gap;
    } else {
      chosen_gap = -kInf;
      for (const auto& c : candidates(inc)) {
        const double g = predicted_incident_gap(inc, world, c.first, c.second);
        if (g > chosen_gap || (g == chosen_gap && stop_count(c) > stop_count(chosen))) {
          chosen = c;
          chosen_gap = g;
        }
      }
    }
    if (chosen_gap >= critical) {
      set.safety = SafetyOutcome::Overridden;
    } else {
      set.safety = SafetyOutcome::Infeasible;
      set.collision_recorded = true;
    }
  }
  set.predicted_gap = chosen_gap;
  set.decisions = {TrainDecision{inc.first, chosen.first}, TrainDecision{inc.second, chosen.second}};
}

}  // namespace

std::string_view to_string(ResolutionMode mode) noexcept {
  switch (mode) {
    case ResolutionMode::MaxSum: return "maxsum";
    case ResolutionMode::JunctionPriority: return "junction_priority";
    case ResolutionMode::CentralizedRelay: return "centralized_relay";
    case ResolutionMode::Unilateral: return "unilateral";
  }
  return "unknown";
}

std::string_view to_string(SafetyOutcome outcome) noexcept {
  switch (outcome) {
    case SafetyOutcome::Accepted: return "ok";
    case SafetyOutcome::Overridden: return "override";
    case SafetyOutcome::Infeasible: return "infeasible";
  }
  return "unknown";
}

std::optional<Action> DecisionSet::action_of(std::size_t train) const {
  for (const auto& d : decisions) {
    if (d.train == train) return d.action;
  }
  return std::nullopt;
}

std::optional<VertexIndex> select_relay(const TrainState& a, const TrainState& b,
                                        const World& world, const ScanOptions& agents) {
  const auto& net = world.net();
  std::optional<VertexIndex> best;
  double best_sum = kInf;
  for (VertexIndex v = 0; v < net.vertex_count(); ++v) {
    const Vertex& vx = net.vertex(v);
    const bool enabled =
        vx.kind == VertexKind::Station ? agents.station_agents : agents.junction_agents;
    if (!enabled) continue;
    const double da = train_to_vertex(a, v, net);
    const double db = train_to_vertex(b, v, net);
    if (da > a.comm_range + vx.comm_range || db > b.comm_range + vx.comm_range) continue;
    if (da + db < best_sum) {
      best_sum = da + db;
      best = v;
    }
  }
  return best;
}

IncidentGraph build_incident_graph(const CollisionIncident& incident, const World& world,
                                   const ScanOptions& agents) {
  const auto& net = world.net();
  const auto& first = train_at(world, incident.first);
  const auto& second = train_at(world, incident.second);
  IncidentGraph out;
  auto add_train = [&](const TrainState& t) {
    out.agents.push_back(AgentId{AgentKind::Train, t.index});
    return out.graph.add_variable(t.id);
  };
  auto add_vertex = [&](VertexIndex v) {
    const auto kind =
        net.vertex(v).kind == VertexKind::Station ? AgentKind::Station : AgentKind::Junction;
    out.agents.push_back(AgentId{kind, v});
    return out.graph.add_variable(net.vertex(v).id);
  };

  if (incident.kind == IncidentKind::RearEndPlatform) {
    const VertexIndex station = incident.site.value_or(forward_vertex(second, net));
    const auto v1 = add_train(second);
    const auto v2 = add_vertex(station);
    out.graph.add_factor(v1, {v1, v2}, train_beta(second));
    out.graph.add_factor(v2, {v1, v2}, kPreferStop);
    out.direct = true;
    return out;
  }

  const double gap = current_gap(incident, world);
  const bool direct = comm_reachable(gap, first.comm_range, second.comm_range);
  out.direct = direct;

  if (incident.kind == IncidentKind::RearEndTrack) {
    // Follower first, leader second.
    const auto v1 = add_train(second);
    const auto v2 = add_train(first);
    if (!direct && !select_relay(first, second, world, agents)) {
      throw Error(ErrorCode::NoRelayInRange,
                  fmt::format("trains '{}' and '{}' are out of range", first.id, second.id));
    }
    out.graph.add_factor(v1, {v1, v2}, train_beta(second));
    out.graph.add_factor(v2, {v1, v2}, train_beta(first));
    return out;
  }

  std::optional<VertexIndex> relay;
  if (incident.kind == IncidentKind::HeadOnJunction && incident.site) {
    relay = incident.site;
  } else {
    relay = select_relay(first, second, world, agents);
  }
  if (!relay) {
    if (!direct) {
      throw Error(ErrorCode::NoRelayInRange,
                  fmt::format("trains '{}' and '{}' are out of range", first.id, second.id));
    }
    const auto v1 = add_train(first);
    const auto v2 = add_train(second);
    out.graph.add_factor(v1, {v1, v2}, train_beta(first));
    out.graph.add_factor(v2, {v1, v2}, train_beta(second));
    return out;
  }

  const auto v1 = add_train(first);
  const auto v2 = add_vertex(*relay);
  const auto v3 = add_train(second);
  if (direct) {
    out.graph.add_factor(v1, {v1, v3}, train_beta(first));
    out.graph.add_factor(v2, {v1, v2, v3}, kPreferStop);
    out.graph.add_factor(v3, {v1, v3}, train_beta(second));
  } else {
    out.graph.add_factor(v1, {v1, v2}, train_beta(first));
    out.graph.add_factor(v2, {v1, v2, v3}, kPreferStop);
    out.graph.add_factor(v3, {v2, v3}, train_beta(second));
  }
  return out;
}

double predicted_incident_gap(const CollisionIncident& incident, const World& world,
                              Action first, Action second) {
  const auto& a = train_at(world, incident.first);
  const auto& b = train_at(world, incident.second);
  LineMotion ma{a.speed, true, a.braking || first == Action::Stop};
  LineMotion mb{b.speed, true, b.braking || second == Action::Stop};
  switch (incident.kind) {
    case IncidentKind::HeadOnTrack:
      ma.approaching = facing(a, b);
      mb.approaching = facing(b, a);
      break;
    case IncidentKind::HeadOnJunction:
      break;
    case IncidentKind::RearEndTrack:
      ma.approaching = false;  // leader
      break;
    case IncidentKind::RearEndPlatform:
      ma.approaching = false;
      mb.approaching = !incident.site || forward_vertex(b, world.net()) == *incident.site;
      break;
  }
  return predicted_min_gap(current_gap(incident, world), ma, mb, world.constants.deceleration());
}

DecisionSet junction_priority_rule(const TrainState& a, const TrainState& b, VertexIndex junction,
                                   const World& world) {
  const double da = junction_distance(a, junction, world);
  const double db = junction_distance(b, junction, world);
  const bool a_stops = da > braking_distance(a.speed, world.constants);
  const bool b_stops = db > braking_distance(b.speed, world.constants);

  DecisionSet set;
  set.mode = ResolutionMode::JunctionPriority;
  set.messages_used = 4;  // each train reports, the junction answers each
  set.predicted_gap = da + db;

  std::optional<bool> a_moves;
  if (a_stops && b_stops) {
    if (a.category != b.category) {
      a_moves = a.category > b.category;
    } else if (da != db) {
      a_moves = da < db;
    } else {
      a_moves = a.index < b.index;
    }
  } else if (!a_stops && b_stops) {
    a_moves = true;
  } else if (a_stops && !b_stops) {
    a_moves = false;
  }

  // Letting a train through onto the track where the other one waits is a
  // head-on meeting, not a crossing.
  auto enters = [](const TrainState& t, const TrainState& other) {
    return !t.route.empty() && t.route.front() == other.track;
  };
  if (a_moves) {
    const TrainState& mover = *a_moves ? a : b;
    const TrainState& waiter = *a_moves ? b : a;
    if (enters(mover, waiter)) {
      if (!(a_stops && b_stops)) {
        a_moves.reset();
      } else if (!enters(waiter, mover)) {
        a_moves = !*a_moves;
      } else {
        set.decisions = {TrainDecision{a.index, Action::Stop},
                         TrainDecision{b.index, Action::Stop}};
        return set;
      }
    }
  }

  if (!a_moves) {
    set.decisions = {TrainDecision{a.index, Action::Stop}, TrainDecision{b.index, Action::Stop}};
    set.safety = SafetyOutcome::Infeasible;
    set.collision_recorded = true;
    return set;
  }
  set.decisions = {TrainDecision{a.index, *a_moves ? Action::Move : Action::Stop},
                   TrainDecision{b.index, *a_moves ? Action::Stop : Action::Move}};
  set.junction = junction;
  return set;
}

DecisionSet resolve_incident(const CollisionIncident& incident, const World& world,
                             const CoordinationConfig& config) {
  const auto& first = train_at(world, incident.first);
  const auto& second = train_at(world, incident.second);
  if (incident.kind == IncidentKind::HeadOnJunction && incident.site) {
    return junction_priority_rule(first, second, *incident.site, world);
  }

  DecisionSet set;
  IncidentGraph ig;
  try {
    ig = build_incident_graph(incident, world, config.agents);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoRelayInRange) throw;
    set.mode = ResolutionMode::Unilateral;
    verify(set, incident, world, Candidate{Action::Stop, Action::Stop});
    return set;
  }

  MaxSumOptions options;
  options.max_iters = config.max_iters;
  options.damping = config.damping.value_or(ig.graph.is_acyclic() ? 0.0 : 0.5);
  options.trace = config.trace;
  const auto result = run_maxsum_detailed(ig.graph, options);

  Candidate proposal{Action::Stop, Action::Stop};
  for (std::size_t v = 0; v < ig.agents.size(); ++v) {
    if (ig.agents[v].kind != AgentKind::Train) continue;
    const Action act = result.assignment.actions[v];
    if (ig.agents[v].index == incident.first) proposal.first = act;
    if (ig.agents[v].index == incident.second) proposal.second = act;
  }
  if (incident.kind == IncidentKind::RearEndPlatform) proposal.first = Action::Stop;

  set.mode = ResolutionMode::MaxSum;
  set.messages_used = 2ULL * ig.graph.inter_agent_link_count() * result.assignment.iterations;
  verify(set, incident, world, proposal);
  return set;
}

DecisionSet centralized_resolve(const CollisionIncident& incident, const World& world,
                                const CoordinationConfig& config) {
  DecisionSet set = resolve_incident(incident, world, config);
  set.mode = ResolutionMode::CentralizedRelay;
  // Each train sends its state and receives a decision, plus the station's
  // report and acknowledgement for the junction or platform involved.
  set.messages_used = 2ULL * set.decisions.size() + 2ULL;
  return set;
}

void apply_decisions_in_place(World& world, const DecisionSet& decisions) {
  for (const auto& d : decisions.decisions) {
    if (d.train >= world.trains.size()) {
      throw Error(ErrorCode::UnknownTrain, fmt::format("train index {}", d.train));
    }
  }
  for (const auto& d : decisions.decisions) {
    if (d.action == Action::Stop) world.trains[d.train].braking = true;
  }
  if (decisions.junction) {
    for (const auto& d : decisions.decisions) {
      if (d.action == Action::Move) world.junction_holds[*decisions.junction] = d.train;
    }
  }
}

World apply_decisions(const World& world, const DecisionSet& decisions) {
  World next = world;
  apply_decisions_in_place(next, decisions);
  return next;
}

}  // namespace railguard
