#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "railguard/report.hpp"
#include "railguard/simulation.hpp"

namespace railguard {

struct GeneratorOptions {
  double min_speed = kmh_to_mps(40.0);   // m/s
  double max_speed = kmh_to_mps(220.0);  // m/s
  double train_length = 200.0;
  double platform_share = 0.15;  // chance a train starts standing at a free platform
  std::size_t max_route = 8;     // tracks
};

/// Places `trains` trains on the base network. The first k trains of any
/// count are the same for a given seed. Throws ValidationError when the
/// network has no room left.
Scenario generate_scenario(const Scenario& base, std::size_t trains, std::uint64_t seed,
                           const GeneratorOptions& options = {});

struct SweepSpec {
  Scenario base;
  std::vector<std::size_t> train_counts;
  std::vector<RunMode> modes{RunMode::Distributed, RunMode::Centralized};
  std::filesystem::path output;  // empty: caller decides
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
  bool timing = true;  // false writes runtime_ms = 0
  GeneratorOptions generator;

  /// Throws ValidationError.
  void validate() const;
};

/// Parses "a..b", "a..b:step" or a comma list of counts.
std::vector<std::size_t> parse_train_counts(std::string_view text);

/// One row per (train count, mode), in count-major order regardless of jobs.
std::vector<MetricsRow> run_sweep(const SweepSpec& spec);

}  // namespace railguard
