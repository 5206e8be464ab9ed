#pragma once

#include "railguard/network.hpp"

namespace railguard {

struct KinematicConstants {
  double mu_k = 0.42;  // steel wheel on steel rail
  double g = 9.81;     // m/s^2

  /// Full-brake deceleration in m/s^2.
  double deceleration() const noexcept { return mu_k * g; }
};

/// Headway d^H and critical distance d^C, both in meters.
struct SafetyDistances {
  double headway = 200.0;
  double critical = 100.0;
};

struct GapReport {
  double gap = 0.0;       // current tip-to-tail separation
  double headway = 0.0;   // configured headway
  double critical = 0.0;  // configured critical distance
};

constexpr double kmh_to_mps(double kmh) noexcept { return kmh * 1000.0 / 3600.0; }
constexpr double mps_to_kmh(double mps) noexcept { return mps * 3600.0 / 1000.0; }

/// Distance covered under full braking from `speed` (m/s) to standstill:
/// v^2 / (2 mu_k g). Throws NegativeSpeed.
double braking_distance(double speed, const KinematicConstants& constants);

/// Along-track separation of the two bodies. Facing trains measure tip to
/// tip, following trains tail to tip; touching or overlapping bodies give 0.
/// Throws DisconnectedTracks.
GapReport headway_gap(const TrainState& a, const TrainState& b, const RailNetwork& network,
                      const SafetyDistances& distances = {});

/// Two agents with ranges r_a and r_b can talk directly iff gap <= r_a + r_b.
bool comm_reachable(double gap, double r_a, double r_b) noexcept;

/// Both trains stop with at least the critical distance left between them:
/// gap - (brake_a + brake_b) >= critical.
bool safe_stop_check(double gap, double brake_a, double brake_b, double critical) noexcept;

/// Distance from the train tip to `junction`, running forward through the
/// vertex ahead of the train. Throws Unreachable.
double distance_to_junction(const TrainState& train, VertexIndex junction,
                            const RailNetwork& network);

/// One train's motion along the line joining it to another train.
struct LineMotion {
  double speed = 0.0;
  bool approaching = true;  // moving toward the other train
  bool braking = false;     // decelerating to standstill; otherwise constant speed
};

/// Smallest future separation of two trains that start `gap` apart and keep
/// the given motions. Returns -inf when the separation decreases forever.
double predicted_min_gap(double gap, const LineMotion& a, const LineMotion& b,
                         double deceleration);

}  // namespace railguard
