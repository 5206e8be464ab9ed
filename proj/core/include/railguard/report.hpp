#pragma once

#include <cstdint>
#include <string>

#include "railguard/simulation.hpp"

namespace railguard {

/// avoided / detected * 100, or 100 when nothing was detected.
/// Throws CountMismatch when avoided > detected.
double efficiency(std::uint64_t detected, std::uint64_t avoided);

struct MetricsRow {
  std::size_t trains = 0;
  RunMode mode = RunMode::Distributed;
  std::uint64_t detected = 0;
  std::uint64_t avoided = 0;
  std::uint64_t occurred = 0;
  double efficiency_pct = 100.0;
  std::uint64_t messages = 0;
  double runtime_ms = 0.0;
};

MetricsRow metrics_row(const SimReport& report, std::size_t trains, RunMode mode,
                       double runtime_ms);

/// Fixed column order, dot decimal separator regardless of locale.
std::string csv_header();
std::string csv_row(const MetricsRow& row);

}  // namespace railguard
