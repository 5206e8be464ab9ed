#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "railguard/coordination.hpp"
#include "railguard/detection.hpp"
#include "railguard/world.hpp"

namespace railguard {

enum class RunMode : std::uint8_t { Distributed, Centralized };

std::string_view to_string(RunMode mode) noexcept;
std::optional<RunMode> parse_run_mode(std::string_view text) noexcept;

struct RunConfig {
  double tick = 1.0;               // seconds
  std::int64_t horizon = 86400;    // ticks
  RunMode mode = RunMode::Distributed;
  std::uint64_t seed = 0;
  std::int64_t decision_latency = 0;  // ticks between detection and resolution
  ScanOptions agents;
  std::size_t max_iters = 100;
};

struct Scenario {
  std::shared_ptr<const RailNetwork> network;
  std::vector<TrainState> trains;
  KinematicConstants constants;
  SafetyDistances distances;
  double default_comm_range = 200.0;
  RunConfig run;

  /// Throws ValidationError when an invariant fails.
  void validate() const;
  World initial_world() const;
};

enum class EventKind : std::uint8_t { Detected, Resolved, Avoided, Occurred };

std::string_view to_string(EventKind kind) noexcept;

struct SimEvent {
  std::int64_t tick = 0;
  EventKind kind = EventKind::Detected;
  std::uint64_t incident_id = 0;
  CollisionIncident incident;
  double gap = 0.0;
  std::string mode;
  std::uint64_t messages = 0;
  std::optional<DecisionSet> decisions;  // resolved events only
};

/// One line: `tick=<k> event=<...> kind=<...> trains=<a,b> gap=<m> mode=<...> msgs=<n>`,
/// followed on resolved lines by the incident id, actions and safety outcome.
std::string format_event(const SimEvent& event, const World& world);

struct OpenIncident {
  std::uint64_t id = 0;
  CollisionIncident incident;
  std::int64_t detected_tick = 0;
  std::optional<DecisionSet> decisions;
};

/// Mutable simulation state carried between ticks.
struct SimState {
  World world;
  std::vector<OpenIncident> open;
  std::set<std::pair<std::size_t, std::size_t>> linked_pairs;  // pairs already in contact
  std::uint64_t next_incident_id = 1;
  std::uint64_t detected = 0;
  std::uint64_t avoided = 0;
  std::uint64_t occurred = 0;
  std::uint64_t infeasible = 0;
  std::uint64_t unmanaged_contacts = 0;  // bodies met without an open incident
  std::uint64_t messages = 0;
};

SimState initial_state(const Scenario& scenario);

/// Advances one tick: scan, resolve, apply, move, classify.
std::vector<SimEvent> step(SimState& state, const RunConfig& config);

/// True when nothing can change any more: every in-service train is at rest,
/// nothing is pending activation and no incident is open.
bool quiescent(const SimState& state);

struct SimReport {
  std::uint64_t collisions_detected = 0;
  std::uint64_t collisions_avoided = 0;
  std::uint64_t collisions_occurred = 0;
  std::uint64_t infeasible_resolutions = 0;
  std::uint64_t unmanaged_contacts = 0;
  std::uint64_t messages_total = 0;
  std::int64_t ticks_run = 0;
  std::vector<std::string> event_log;
  World final_world;
};

// Called after every simulated step with the world as it was before the step.
using StepObserver = std::function<void(const World& before, const std::vector<SimEvent>& events)>;

SimReport run_scenario(const Scenario& scenario, const StepObserver& observer = {});

}  // namespace railguard
