#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "railguard/detection.hpp"
#include "railguard/maxsum.hpp"
#include "railguard/world.hpp"

namespace railguard {

enum class ResolutionMode : std::uint8_t { MaxSum, JunctionPriority, CentralizedRelay, Unilateral };

std::string_view to_string(ResolutionMode mode) noexcept;

/// Outcome of checking the decided actions against the critical distance.
enum class SafetyOutcome : std::uint8_t { Accepted, Overridden, Infeasible };

std::string_view to_string(SafetyOutcome outcome) noexcept;

struct TrainDecision {
  std::size_t train = 0;
  Action action = Action::Move;
};

struct DecisionSet {
  std::vector<TrainDecision> decisions;  // one per participating train
  ResolutionMode mode = ResolutionMode::MaxSum;
  std::uint64_t messages_used = 0;
  SafetyOutcome safety = SafetyOutcome::Accepted;
  bool collision_recorded = false;  // no joint action keeps the critical distance
  double predicted_gap = 0.0;       // smallest future gap under the decided actions
  std::optional<VertexIndex> junction;  // junction granted to the Moving train

  std::optional<Action> action_of(std::size_t train) const;
};

/// Factor graph for one incident plus the agent behind each variable.
struct IncidentGraph {
  FactorGraph graph;
  std::vector<AgentId> agents;  // agents[v] owns variable v
  bool direct = false;          // trains reach each other without a relay
};

struct CoordinationConfig {
  std::size_t max_iters = 100;
  std::optional<double> damping;  // default: 0 on trees, 0.5 otherwise
  ScanOptions agents;             // which vertex agents may act as relays
  std::ostream* trace = nullptr;
};

/// Nearest enabled station or junction whose range reaches both trains.
std::optional<VertexIndex> select_relay(const TrainState& a, const TrainState& b,
                                        const World& world, const ScanOptions& agents = {});

/// Variable 0 is the follower, incoming or lower-indexed train. Three-agent
/// graphs put the relay at 1 and the other train at 2; two-agent graphs hold
/// the other train or the platform station at 1.
/// Throws NoRelayInRange when the trains cannot talk and no relay covers both.
IncidentGraph build_incident_graph(const CollisionIncident& incident, const World& world,
                                   const ScanOptions& agents = {});

/// Smallest future gap of the incident's pair when `first` and `second` take
/// the given actions. Trains already braking keep braking.
double predicted_incident_gap(const CollisionIncident& incident, const World& world,
                              Action first, Action second);

DecisionSet junction_priority_rule(const TrainState& a, const TrainState& b, VertexIndex junction,
                                   const World& world);

DecisionSet resolve_incident(const CollisionIncident& incident, const World& world,
                             const CoordinationConfig& config = {});

/// Same decisions as resolve_incident, with every exchange routed through a
/// monitoring station.
DecisionSet centralized_resolve(const CollisionIncident& incident, const World& world,
                                const CoordinationConfig& config = {});

/// Stop puts the train into its braking state; Move leaves it unchanged.
/// Throws UnknownTrain.
void apply_decisions_in_place(World& world, const DecisionSet& decisions);
World apply_decisions(const World& world, const DecisionSet& decisions);

}  // namespace railguard
