#include "railguard/kinematics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "railguard/error.hpp"

namespace railguard {

double braking_distance(double speed, const KinematicConstants& constants) {
  if (speed < 0.0) {
    throw Error(ErrorCode::NegativeSpeed, fmt::format("speed {} m/s", speed));
  }
  return speed * speed / (2.0 * constants.mu_k * constants.g);
}

GapReport headway_gap(const TrainState& a, const TrainState& b, const RailNetwork& network,
                      const SafetyDistances& distances) {
  const double gap = train_separation(a, b, network);
  if (!std::isfinite(gap)) {
    throw Error(ErrorCode::DisconnectedTracks,
                fmt::format("no path between trains '{}' and '{}'", a.id, b.id));
  }
  return GapReport{gap, distances.headway, distances.critical};
}

bool comm_reachable(double gap, double r_a, double r_b) noexcept { return gap <= r_a + r_b; }

bool safe_stop_check(double gap, double brake_a, double brake_b, double critical) noexcept {
  return gap - (brake_a + brake_b) >= critical;
}

double distance_to_junction(const TrainState& train, VertexIndex junction,
                            const RailNetwork& network) {
  const Track& track = network.track(train.track);
  const double remaining =
      train.direction == Direction::Up ? track.length - train.position : train.position;
  const double d = remaining + network.vertex_distance(forward_vertex(train, network), junction);
  if (!std::isfinite(d)) {
    throw Error(ErrorCode::Unreachable,
                fmt::format("train '{}' cannot reach '{}'", train.id, network.vertex(junction).id));
  }
  return d;
}

namespace {

double travelled(const LineMotion& m, double t, double deceleration) {
  if (!m.braking) return m.speed * t;
  const double stop_time = m.speed / deceleration;
  if (t >= stop_time) return m.speed * m.speed / (2.0 * deceleration);
  return m.speed * t - 0.5 * deceleration * t * t;
}

double sign(const LineMotion& m) { return m.approaching ? 1.0 : -1.0; }

}  // namespace

double predicted_min_gap(double gap, const LineMotion& a, const LineMotion& b,
                         double deceleration) {
  const std::array<const LineMotion*, 2> motions{&a, &b};
  auto gap_at = [&](double t) {
    double g = gap;
    for (const auto* m : motions) g -= sign(*m) * travelled(*m, t, deceleration);
    return g;
  };

  // Past the last stop the separation changes at a constant rate.
  double final_rate = 0.0;
  for (const auto* m : motions) {
    if (!m->braking) final_rate -= sign(*m) * m->speed;
  }
  if (final_rate < 0.0) return -std::numeric_limits<double>::infinity();

  std::vector<double> breaks{0.0};
  for (const auto* m : motions) {
    if (m->braking && m->speed > 0.0) breaks.push_back(m->speed / deceleration);
  }
  std::sort(breaks.begin(), breaks.end());

  double best = gap;
  for (std::size_t k = 0; k < breaks.size(); ++k) {
    const double t0 = breaks[k];
    best = std::min(best, gap_at(t0));
    if (k + 1 == breaks.size()) break;
    const double t1 = breaks[k + 1];
    // d gap / dt = c0 + c1 t within (t0, t1).
    double c0 = 0.0;
    double c1 = 0.0;
    const double mid = 0.5 * (t0 + t1);
    for (const auto* m : motions) {
      if (!m->braking) {
        c0 -= sign(*m) * m->speed;
      } else if (mid < m->speed / deceleration) {
        c0 -= sign(*m) * m->speed;
        c1 += sign(*m) * deceleration;
      }
    }
    if (c1 != 0.0) {
      const double root = -c0 / c1;
      if (root > t0 && root < t1) best = std::min(best, gap_at(root));
    }
  }
  return best;
}

}  // namespace railguard
