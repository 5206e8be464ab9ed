#pragma once

#include <memory>
#include <string>
#include <vector>

#include "railguard/network.hpp"
#include "railguard/world.hpp"

namespace railguard::testing {

inline VertexSpec station(std::string id, std::vector<PlatformSpec> platforms = {},
                          double range = 200.0) {
  return VertexSpec{std::move(id), VertexKind::Station, range, std::move(platforms)};
}

inline VertexSpec junction(std::string id, double range = 200.0) {
  return VertexSpec{std::move(id), VertexKind::Junction, range, {}};
}

inline TrackSpec track(std::string id, std::string from, std::string to, double length) {
  return TrackSpec{std::move(id), std::move(from), std::move(to), length};
}

inline TrainState train(std::string id, std::size_t index, TrackIndex on, double tip, double speed,
                        Direction dir, double length = 200.0) {
  TrainState t;
  t.id = std::move(id);
  t.index = index;
  t.track = on;
  t.position = tip;
  t.speed = speed;
  t.direction = dir;
  t.length = length;
  return t;
}

/// A --L0-- B, plus a parallel L1 between the same stations.
inline std::shared_ptr<const RailNetwork> twin_track(double length = 5000.0, double range = 200.0) {
  return std::make_shared<const RailNetwork>(build_network(
      {station("A", {}, range), station("B", {}, range)},
      {track("L0", "A", "B", length), track("L1", "A", "B", length)}));
}

/// S1 --L0-- J --L1-- S2, with J --L2-- S3: three tracks meeting at J.
inline std::shared_ptr<const RailNetwork> star(double length = 3000.0, double range = 200.0) {
  return std::make_shared<const RailNetwork>(build_network(
      {station("S1", {}, range), station("S2", {}, range), station("S3", {}, range),
       junction("J", range)},
      {track("L0", "S1", "J", length), track("L1", "J", "S2", length),
       track("L2", "J", "S3", length)}));
}

inline World make_world(std::shared_ptr<const RailNetwork> net, std::vector<TrainState> trains) {
  World w;
  w.network = std::move(net);
  w.trains = std::move(trains);
  for (std::size_t k = 0; k < w.trains.size(); ++k) w.trains[k].index = k;
  return w;
}

}  // namespace railguard::testing
