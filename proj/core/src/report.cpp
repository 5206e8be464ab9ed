#include "railguard/report.hpp"

#include <fmt/format.h>

#include "railguard/error.hpp"

namespace railguard {

double efficiency(std::uint64_t detected, std::uint64_t avoided) {
  if (avoided > detected) {
    throw Error(ErrorCode::CountMismatch,
                fmt::format("avoided {} exceeds detected {}", avoided, detected));
  }
  if (detected == 0) return 100.0;
  return static_cast<double>(avoided) * 100.0 / static_cast<double>(detected);
}

MetricsRow metrics_row(const SimReport& report, std::size_t trains, RunMode mode,
                       double runtime_ms) {
  MetricsRow row;
  row.trains = trains;
  row.mode = mode;
  row.detected = report.collisions_detected;
  row.avoided = report.collisions_avoided;
  row.occurred = report.collisions_occurred;
  row.efficiency_pct = efficiency(row.detected, row.avoided);
  row.messages = report.messages_total;
  row.runtime_ms = runtime_ms;
  return row;
}

std::string csv_header() {
  return "trains,mode,detected,avoided,occurred,efficiency_pct,messages,runtime_ms";
}

std::string csv_row(const MetricsRow& row) {
  // fmt never consults the global locale without the L specifier.
  return fmt::format("{},{},{},{},{},{:.1f},{},{:.3f}", row.trains, to_string(row.mode), row.detected,
                     row.avoided, row.occurred, row.efficiency_pct, row.messages, row.runtime_ms);
}

}  // namespace railguard
