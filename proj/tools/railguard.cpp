#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "railguard/error.hpp"
#include "railguard/report.hpp"
#include "railguard/scenario.hpp"
#include "railguard/sweep.hpp"

namespace fs = std::filesystem;
using namespace railguard;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitInvalid = 2;

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("railguard");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("%^%l%$: %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("RAILGUARD_LOG")) {
    const auto level = spdlog::level::from_str(env);
    if (level == spdlog::level::off && std::string(env) != "off") {
      spdlog::warn("RAILGUARD_LOG='{}' is not a level; using warn", env);
    } else {
      spdlog::set_level(level);
    }
  }
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  return out;
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
  if (path == "-") {
    for (const auto& l : lines) std::cout << l << '\n';
    return;
  }
  auto out = open_output(path);
  for (const auto& l : lines) out << l << '\n';
}

struct RunArgs {
  std::string scenario;
  std::string mode;
  std::string out;
  std::string events;
  std::int64_t horizon = -1;
  std::int64_t latency = -1;
  bool no_timing = false;
};

int cmd_validate(const std::string& path) {
  const Scenario sc = load_scenario(path);
  const auto& net = *sc.network;
  std::cout << fmt::format("ok: {} stations, {} junctions, {} tracks, {} trains\n",
                           net.station_count(), net.junction_count(), net.tracks().size(),
                           sc.trains.size());
  return kExitOk;
}

int cmd_run(const RunArgs& args) {
  Scenario sc = load_scenario(args.scenario);
  if (!args.mode.empty()) {
    const auto m = parse_run_mode(args.mode);
    if (!m) throw Error(ErrorCode::ValidationError, fmt::format("unknown mode '{}'", args.mode));
    sc.run.mode = *m;
  }
  if (args.horizon >= 0) sc.run.horizon = args.horizon;
  if (args.latency >= 0) sc.run.decision_latency = args.latency;

  const auto start = std::chrono::steady_clock::now();
  const SimReport report = run_scenario(sc);
  const std::chrono::duration<double, std::milli> took = std::chrono::steady_clock::now() - start;
  const auto row = metrics_row(report, sc.trains.size(), sc.run.mode,
                               args.no_timing ? 0.0 : took.count());
  spdlog::info("{} ticks, {} infeasible resolutions, {} unmanaged contacts", report.ticks_run,
               report.infeasible_resolutions, report.unmanaged_contacts);

  const std::vector<std::string> csv{csv_header(), csv_row(row)};
  if (!args.out.empty()) {
    const fs::path dir = args.out;
    write_lines(dir / "metrics.csv", csv);
    write_lines(dir / "events.log", report.event_log);
  } else {
    write_lines("-", csv);
  }
  if (!args.events.empty()) write_lines(args.events, report.event_log);
  return kExitOk;
}

struct SweepArgs {
  std::string scenario;
  std::string trains;
  std::vector<std::string> modes;
  std::size_t jobs = 1;
  std::uint64_t seed = 1;
  std::string out;
  std::string emit;
  double min_kmh = 40.0;
  double max_kmh = 220.0;
  std::int64_t horizon = -1;
  bool no_timing = false;
};

int cmd_sweep(const SweepArgs& args) {
  SweepSpec spec;
  spec.base = load_scenario(args.scenario);
  if (args.horizon >= 0) spec.base.run.horizon = args.horizon;
  spec.train_counts = parse_train_counts(args.trains);
  if (!args.modes.empty()) {
    spec.modes.clear();
    for (const auto& m : args.modes) {
      const auto mode = parse_run_mode(m);
      if (!mode) throw Error(ErrorCode::ValidationError, fmt::format("unknown mode '{}'", m));
      spec.modes.push_back(*mode);
    }
  }
  spec.jobs = args.jobs;
  spec.seed = args.seed;
  spec.timing = !args.no_timing;
  spec.generator.min_speed = kmh_to_mps(args.min_kmh);
  spec.generator.max_speed = kmh_to_mps(args.max_kmh);
  spec.validate();

  if (!args.emit.empty()) {
    for (std::size_t n : spec.train_counts) {
      auto out = open_output(fs::path(args.emit) / fmt::format("sweep_{}_trains.scn", n));
      out << write_scenario(generate_scenario(spec.base, n, spec.seed, spec.generator));
    }
  }

  const auto rows = run_sweep(spec);
  std::vector<std::string> lines{csv_header()};
  for (const auto& r : rows) lines.push_back(csv_row(r));
  write_lines(args.out.empty() ? fs::path("-") : fs::path(args.out) / "sweep.csv", lines);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Railway collision detection and avoidance simulator"};
  app.require_subcommand(1);

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Parse and check a scenario file");
  validate->add_option("file", validate_path, "Scenario file")->required();

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Simulate one scenario");
  run->add_option("file", run_args.scenario, "Scenario file")->required();
  run->add_option("--mode", run_args.mode, "distributed or centralized");
  run->add_option("--out", run_args.out, "Directory for metrics.csv and events.log");
  run->add_option("--events", run_args.events, "Also write the event log here ('-' for stdout)");
  run->add_option("--horizon", run_args.horizon, "Override the horizon in ticks");
  run->add_option("--latency", run_args.latency, "Decision latency in ticks");
  run->add_flag("--no-timing", run_args.no_timing, "Report runtime_ms as 0");

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "Run generated scenarios over a range of train counts");
  sweep->add_option("file", sweep_args.scenario, "Base scenario (network and constants)")->required();
  sweep->add_option("--trains", sweep_args.trains, "a..b[:step] or a comma list")->required();
  sweep->add_option("--modes", sweep_args.modes, "Modes to compare")->delimiter(',');
  sweep->add_option("--jobs", sweep_args.jobs, "Parallel workers")->check(CLI::PositiveNumber);
  sweep->add_option("--seed", sweep_args.seed, "Generator seed");
  sweep->add_option("--out", sweep_args.out, "Directory for sweep.csv");
  sweep->add_option("--emit-scenarios", sweep_args.emit, "Write each generated scenario here");
  sweep->add_option("--min-speed", sweep_args.min_kmh, "Lowest generated speed, km/h");
  sweep->add_option("--max-speed", sweep_args.max_kmh, "Highest generated speed, km/h");
  sweep->add_option("--horizon", sweep_args.horizon, "Override the horizon in ticks");
  sweep->add_flag("--no-timing", sweep_args.no_timing, "Report runtime_ms as 0");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) return cmd_validate(validate_path);
    if (*run) return cmd_run(run_args);
    if (*sweep) return cmd_sweep(sweep_args);
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return kExitInvalid;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitIo;
  }
  return kExitOk;
}
