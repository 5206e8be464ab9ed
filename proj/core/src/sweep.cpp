#include "railguard/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "railguard/error.hpp"

namespace railguard {

namespace {

constexpr PriorityClass kClasses[] = {PriorityClass::Freight, PriorityClass::Passenger,
                                      PriorityClass::ExpressMail, PriorityClass::SuperfastExpress,
                                      PriorityClass::Premium};

// Draws built from raw engine output so sequences match across standard libraries.
class Draw {
 public:
  explicit Draw(std::uint64_t seed) : engine_(seed) {}

  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
  std::size_t index(std::size_t n) {
    return std::min(n - 1, static_cast<std::size_t>(unit() * static_cast<double>(n)));
  }

 private:
  std::mt19937_64 engine_;
};

std::vector<TrackIndex> random_route(const RailNetwork& net, const TrainState& t, Draw& draw,
                                     std::size_t max_route) {
  std::vector<TrackIndex> route;
  const std::size_t steps = 1 + draw.index(max_route);
  VertexIndex at = forward_vertex(t, net);
  TrackIndex prev = t.track;
  for (std::size_t s = 0; s < steps; ++s) {
    std::vector<TrackIndex> options;
    for (TrackIndex e : net.vertex(at).incident) {
      if (e != prev) options.push_back(e);
    }
    if (options.empty()) break;
    const TrackIndex next = options[draw.index(options.size())];
    route.push_back(next);
    at = net.other_end(next, at);
    prev = next;
  }
  return route;
}

std::size_t parse_count(std::string_view text) {
  std::size_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::ValidationError, fmt::format("'{}' is not a train count", text));
  }
  return v;
}

}  // namespace

Scenario generate_scenario(const Scenario& base, std::size_t trains, std::uint64_t seed,
                           const GeneratorOptions& options) {
  if (!(options.min_speed > 0.0) || options.max_speed < options.min_speed) {
    throw Error(ErrorCode::ValidationError, "speed range must be positive and ordered");
  }
  Scenario sc = base;
  sc.trains.clear();
  sc.run.seed = seed;
  const auto& net = *sc.network;
  Draw draw(seed);

  std::vector<TrackIndex> roomy;
  for (TrackIndex e = 0; e < net.tracks().size(); ++e) {
    if (net.track(e).length > options.train_length) roomy.push_back(e);
  }
  if (roomy.empty()) throw Error(ErrorCode::ValidationError, "no track is long enough for a train");

  for (std::size_t k = 0; k < trains; ++k) {
    bool placed = false;
    for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
      TrainState t;
      t.id = fmt::format("T{}", k + 1);
      t.index = k;
      t.category = kClasses[draw.index(std::size(kClasses))];
      t.length = options.train_length;
      t.comm_range = sc.default_comm_range;

      if (draw.unit() < options.platform_share) {
        std::vector<PlatformSlot> free;
        std::vector<TrackIndex> free_tracks;
        for (VertexIndex s : net.stations()) {
          for (const auto& p : net.vertex(s).platforms) {
            const PlatformSlot slot{s, p.number};
            const bool taken = std::any_of(sc.trains.begin(), sc.trains.end(), [&](const TrainState& o) {
              return o.platform && *o.platform == slot;
            });
            if (!taken && net.track(p.track).length > t.length) {
              free.push_back(slot);
              free_tracks.push_back(p.track);
            }
          }
        }
        if (free.empty()) continue;
        const std::size_t pick = draw.index(free.size());
        t.platform = free[pick];
        t.track = free_tracks[pick];
        const auto& tr = net.track(t.track);
        t.direction = tr.endpoints[1] == t.platform->station ? Direction::Up : Direction::Down;
        t.position = t.direction == Direction::Up ? tr.length : 0.0;
        t.speed = 0.0;
      } else {
        t.track = roomy[draw.index(roomy.size())];
        const double length = net.track(t.track).length;
        t.direction = draw.unit() < 0.5 ? Direction::Up : Direction::Down;
        t.position = t.direction == Direction::Up ? draw.uniform(t.length, length)
                                                  : draw.uniform(0.0, length - t.length);
        t.speed = draw.uniform(options.min_speed, options.max_speed);
        t.route = random_route(net, t, draw, options.max_route);
      }

      placed = std::all_of(sc.trains.begin(), sc.trains.end(), [&](const TrainState& o) {
        return train_separation(o, t, net) >= sc.distances.headway;
      });
      if (placed) sc.trains.push_back(std::move(t));
    }
    if (!placed) {
      throw Error(ErrorCode::ValidationError,
                  fmt::format("no room for train {} of {} on this network", k + 1, trains));
    }
  }
  sc.validate();
  return sc;
}

void SweepSpec::validate() const {
  if (train_counts.empty()) throw Error(ErrorCode::ValidationError, "empty train count list");
  if (std::any_of(train_counts.begin(), train_counts.end(), [](std::size_t n) { return n < 1; })) {
    throw Error(ErrorCode::ValidationError, "train counts must be at least 1");
  }
  if (modes.empty()) throw Error(ErrorCode::ValidationError, "empty mode list");
  if (jobs < 1) throw Error(ErrorCode::ValidationError, "jobs must be at least 1");
  base.validate();
}

std::vector<std::size_t> parse_train_counts(std::string_view text) {
  std::vector<std::size_t> out;
  if (const auto dots = text.find(".."); dots != std::string_view::npos) {
    const auto first = parse_count(text.substr(0, dots));
    auto rest = text.substr(dots + 2);
    std::size_t step = 1;
    if (const auto colon = rest.find(':'); colon != std::string_view::npos) {
      step = parse_count(rest.substr(colon + 1));
      rest = rest.substr(0, colon);
    }
    const auto last = parse_count(rest);
    if (step == 0) throw Error(ErrorCode::ValidationError, "step must be positive");
    for (std::size_t n = first; n <= last; n += step) out.push_back(n);
  } else if (!text.empty()) {
    std::size_t start = 0;
    while (start <= text.size()) {
      const auto comma = text.find(',', start);
      out.push_back(parse_count(text.substr(start, comma == text.npos ? text.npos : comma - start)));
      if (comma == text.npos) break;
      start = comma + 1;
    }
  }
  if (out.empty()) throw Error(ErrorCode::ValidationError, fmt::format("no train counts in '{}'", text));
  if (std::find(out.begin(), out.end(), std::size_t{0}) != out.end()) {
    throw Error(ErrorCode::ValidationError, "train counts must be at least 1");
  }
  return out;
}

std::vector<MetricsRow> run_sweep(const SweepSpec& spec) {
  spec.validate();
  std::vector<Scenario> scenarios;
  scenarios.reserve(spec.train_counts.size());
  for (std::size_t n : spec.train_counts) {
    scenarios.push_back(generate_scenario(spec.base, n, spec.seed, spec.generator));
  }

  const std::size_t points = spec.train_counts.size() * spec.modes.size();
  std::vector<MetricsRow> rows(points);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t p = next++; p < points; p = next++) {
      try {
        Scenario sc = scenarios[p / spec.modes.size()];
        sc.run.mode = spec.modes[p % spec.modes.size()];
        const auto start = std::chrono::steady_clock::now();
        const auto report = run_scenario(sc);
        const std::chrono::duration<double, std::milli> took =
            std::chrono::steady_clock::now() - start;
        rows[p] = metrics_row(report, sc.trains.size(), sc.run.mode,
                              spec.timing ? took.count() : 0.0);
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };

  const std::size_t workers = std::min(spec.jobs, points);
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return rows;
}

}  // namespace railguard
