#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <vector>

#include "railguard/kinematics.hpp"
#include "railguard/network.hpp"

namespace railguard {

/// Snapshot of the whole railway at one tick. `trains[j].index == j` always
/// holds; trains not yet activated are present with `in_service == false`.
struct World {
  std::shared_ptr<const RailNetwork> network;
  std::vector<TrainState> trains;
  KinematicConstants constants;
  SafetyDistances distances;
  /// Junction -> train currently cleared through it by a priority decision.
  std::map<VertexIndex, std::size_t> junction_holds;
  std::int64_t tick = 0;

  const RailNetwork& net() const { return *network; }
};

}  // namespace railguard
