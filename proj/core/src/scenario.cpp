#include "railguard/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "railguard/error.hpp"

namespace railguard {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

class LineContext {
 public:
  LineContext(std::string_view source, std::size_t line) : source_(source), line_(line) {}

  [[noreturn]] void fail(std::string_view field, const std::string& what) const {
    throw Error(ErrorCode::ParseError,
                fmt::format("{}:{}: field '{}': {}", source_, line_, field, what));
  }
  [[noreturn]] void fail_line(const std::string& what) const {
    throw Error(ErrorCode::ParseError, fmt::format("{}:{}: {}", source_, line_, what));
  }

 private:
  std::string_view source_;
  std::size_t line_;
};

double parse_number(const LineContext& ctx, std::string_view field, std::string_view text) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    ctx.fail(field, fmt::format("'{}' is not a number", text));
  }
  return value;
}

std::int64_t parse_integer(const LineContext& ctx, std::string_view field, std::string_view text) {
  std::int64_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    ctx.fail(field, fmt::format("'{}' is not an integer", text));
  }
  return value;
}

// Splits "12.5km/h" into ("12.5", "km/h").
std::pair<std::string_view, std::string> split_unit(std::string_view text) {
  std::size_t k = text.size();
  while (k > 0 && (std::isalpha(static_cast<unsigned char>(text[k - 1])) || text[k - 1] == '/')) {
    --k;
  }
  return {text.substr(0, k), lower(text.substr(k))};
}

double parse_length(const LineContext& ctx, std::string_view field, std::string_view text) {
  const auto [num, unit] = split_unit(text);
  const double v = parse_number(ctx, field, num);
  if (unit.empty() || unit == "m") return v;
  if (unit == "km") return v * 1000.0;
  ctx.fail(field, fmt::format("unknown length unit '{}'", unit));
}

double parse_speed(const LineContext& ctx, std::string_view field, std::string_view text) {
  const auto [num, unit] = split_unit(text);
  const double v = parse_number(ctx, field, num);
  if (unit.empty() || unit == "m/s") return v;
  if (unit == "km/h" || unit == "kmh" || unit == "kph") return kmh_to_mps(v);
  ctx.fail(field, fmt::format("unknown speed unit '{}'", unit));
}

double parse_seconds(const LineContext& ctx, std::string_view field, std::string_view text) {
  const auto [num, unit] = split_unit(text);
  const double v = parse_number(ctx, field, num);
  if (unit.empty() || unit == "s") return v;
  if (unit == "ms") return v / 1000.0;
  ctx.fail(field, fmt::format("unknown time unit '{}'", unit));
}

using Fields = std::vector<std::pair<std::string, std::string_view>>;

Fields parse_fields(const LineContext& ctx, std::string_view rest) {
  Fields out;
  std::size_t pos = 0;
  while (pos < rest.size()) {
    while (pos < rest.size() && std::isspace(static_cast<unsigned char>(rest[pos]))) ++pos;
    if (pos >= rest.size()) break;
    auto end = pos;
    while (end < rest.size() && !std::isspace(static_cast<unsigned char>(rest[end]))) ++end;
    const auto token = rest.substr(pos, end - pos);
    const auto eq = token.find('=');
    if (eq == std::string_view::npos || eq == 0) {
      ctx.fail_line(fmt::format("expected key=value, got '{}'", token));
    }
    std::string key = lower(token.substr(0, eq));
    for (const auto& [k, v] : out) {
      if (k == key) ctx.fail(key, "given twice");
    }
    out.emplace_back(std::move(key), token.substr(eq + 1));
    pos = end;
  }
  return out;
}

class FieldReader {
 public:
  FieldReader(const LineContext& ctx, Fields fields) : ctx_(ctx), fields_(std::move(fields)) {}

  std::optional<std::string_view> get(std::string_view key) {
    for (auto& [k, v] : fields_) {
      if (k == key) {
        used_.push_back(k);
        return v;
      }
    }
    return std::nullopt;
  }
  std::string_view need(std::string_view key) {
    auto v = get(key);
    if (!v) ctx_.fail(key, "missing");
    if (v->empty()) ctx_.fail(key, "empty value");
    return *v;
  }
  void finish() const {
    for (const auto& [k, v] : fields_) {
      if (std::find(used_.begin(), used_.end(), k) == used_.end()) ctx_.fail(k, "unknown field");
    }
  }
  const LineContext& ctx() const { return ctx_; }

 private:
  const LineContext& ctx_;
  Fields fields_;
  std::vector<std::string> used_;
};

struct PendingVertex {
  VertexSpec spec;
  bool range_given = false;
};

struct PendingTrain {
  TrainState state;
  std::string track;
  std::vector<std::string> route;
  std::optional<std::pair<std::string, int>> platform;
  bool position_given = false;
  bool direction_given = false;
  bool range_given = false;
  std::size_t line = 0;
};

Direction parse_direction(const LineContext& ctx, std::string_view text) {
  const auto v = lower(text);
  if (v == "up" || v == "1") return Direction::Up;
  if (v == "down" || v == "0") return Direction::Down;
  ctx.fail("direction", fmt::format("'{}' is not UP or DOWN", text));
}

void read_vertex(FieldReader& r, VertexKind kind, std::vector<PendingVertex>& out) {
  PendingVertex pv;
  pv.spec.kind = kind;
  pv.spec.id = std::string(r.need("id"));
  if (auto v = r.get("comm_range")) {
    pv.spec.comm_range = parse_length(r.ctx(), "comm_range", *v);
    pv.range_given = true;
  }
  if (auto v = r.get("platforms"); v && !v->empty()) {
    for (auto item : split(*v, ',')) {
      const auto colon = item.find(':');
      if (colon == std::string_view::npos) {
        r.ctx().fail("platforms", fmt::format("'{}' is not number:track", item));
      }
      PlatformSpec p;
      p.number = static_cast<int>(parse_integer(r.ctx(), "platforms", item.substr(0, colon)));
      p.track = std::string(item.substr(colon + 1));
      pv.spec.platforms.push_back(std::move(p));
    }
  }
  r.finish();
  out.push_back(std::move(pv));
}

void read_train(FieldReader& r, std::size_t line, std::vector<PendingTrain>& out) {
  const auto& ctx = r.ctx();
  PendingTrain pt;
  pt.line = line;
  auto& t = pt.state;
  t.id = std::string(r.need("id"));
  t.index = out.size();
  if (auto v = r.get("category")) {
    auto c = parse_priority_class(*v);
    if (!c) ctx.fail("category", fmt::format("unknown category '{}'", *v));
    t.category = *c;
  }
  if (auto v = r.get("platform")) {
    const auto colon = v->find(':');
    if (colon == std::string_view::npos) ctx.fail("platform", "expected station:number");
    pt.platform = std::make_pair(std::string(v->substr(0, colon)),
                                 static_cast<int>(parse_integer(ctx, "platform", v->substr(colon + 1))));
  }
  if (auto v = r.get("track")) {
    pt.track = std::string(*v);
  } else if (!pt.platform) {
    ctx.fail("track", "missing");
  }
  if (auto v = r.get("position")) {
    t.position = parse_length(ctx, "position", *v);
    pt.position_given = true;
  }
  if (auto v = r.get("speed")) {
    t.speed = parse_speed(ctx, "speed", *v);
    if (t.speed < 0.0) ctx.fail("speed", "negative");
  }
  if (auto v = r.get("direction")) {
    t.direction = parse_direction(ctx, *v);
    pt.direction_given = true;
  }
  if (auto v = r.get("length")) t.length = parse_length(ctx, "length", *v);
  if (auto v = r.get("comm_range")) {
    t.comm_range = parse_length(ctx, "comm_range", *v);
    pt.range_given = true;
  }
  if (auto v = r.get("route"); v && !v->empty()) {
    for (auto item : split(*v, ',')) pt.route.emplace_back(item);
  }
  if (auto v = r.get("activation")) t.activation_tick = parse_integer(ctx, "activation", *v);
  if (auto v = r.get("beta")) {
    const auto parts = split(*v, ',');
    if (parts.size() != 2) ctx.fail("beta", "expected stop,move");
    t.beta = std::array<double, 2>{parse_number(ctx, "beta", parts[0]),
                                   parse_number(ctx, "beta", parts[1])};
  }
  r.finish();
  out.push_back(std::move(pt));
}

}  // namespace

Scenario parse_scenario(std::string_view text, std::string_view source) {
  enum class Section { None, Network, Trains, Constants, Run };
  Section section = Section::None;
  std::vector<PendingVertex> vertices;
  std::vector<TrackSpec> tracks;
  std::vector<PendingTrain> trains;
  Scenario sc;

  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    std::string_view raw = text.substr(start, nl == std::string_view::npos ? text.npos : nl - start);
    start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const LineContext ctx(source, line_no);
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const auto line = trim(raw);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') ctx.fail_line("unterminated section header");
      const auto name = lower(trim(line.substr(1, line.size() - 2)));
      if (name == "network") section = Section::Network;
      else if (name == "trains") section = Section::Trains;
      else if (name == "constants") section = Section::Constants;
      else if (name == "run") section = Section::Run;
      else ctx.fail_line(fmt::format("unknown section '{}'", name));
      continue;
    }

    if (section == Section::Network || section == Section::Trains) {
      const auto space = line.find_first_of(" \t");
      const auto keyword = lower(line.substr(0, space));
      const auto rest = space == std::string_view::npos ? std::string_view{} : line.substr(space);
      FieldReader r(ctx, parse_fields(ctx, rest));
      if (section == Section::Network && keyword == "station") {
        read_vertex(r, VertexKind::Station, vertices);
      } else if (section == Section::Network && keyword == "junction") {
        read_vertex(r, VertexKind::Junction, vertices);
      } else if (section == Section::Network && keyword == "track") {
        TrackSpec ts;
        ts.id = std::string(r.need("id"));
        const auto ends = split(r.need("endpoints"), ',');
        if (ends.size() != 2) ctx.fail("endpoints", "expected two vertex ids");
        ts.from = std::string(ends[0]);
        ts.to = std::string(ends[1]);
        ts.length = parse_length(ctx, "length", r.need("length"));
        r.finish();
        tracks.push_back(std::move(ts));
      } else if (section == Section::Trains && keyword == "train") {
        read_train(r, line_no, trains);
      } else {
        ctx.fail_line(fmt::format("unexpected '{}' here", keyword));
      }
      continue;
    }

    if (section == Section::None) ctx.fail_line("entry outside any section");
    FieldReader r(ctx, parse_fields(ctx, line));
    if (section == Section::Constants) {
      if (auto v = r.get("mu_k")) sc.constants.mu_k = parse_number(ctx, "mu_k", *v);
      if (auto v = r.get("g")) sc.constants.g = parse_number(ctx, "g", *v);
      if (auto v = r.get("headway")) sc.distances.headway = parse_length(ctx, "headway", *v);
      if (auto v = r.get("critical")) sc.distances.critical = parse_length(ctx, "critical", *v);
      if (auto v = r.get("comm_range")) {
        sc.default_comm_range = parse_length(ctx, "comm_range", *v);
      }
    } else {
      if (auto v = r.get("tick")) sc.run.tick = parse_seconds(ctx, "tick", *v);
      if (auto v = r.get("horizon")) sc.run.horizon = parse_integer(ctx, "horizon", *v);
      if (auto v = r.get("mode")) {
        auto m = parse_run_mode(*v);
        if (!m) ctx.fail("mode", fmt::format("unknown mode '{}'", *v));
        sc.run.mode = *m;
      }
      if (auto v = r.get("seed")) {
        sc.run.seed = static_cast<std::uint64_t>(parse_integer(ctx, "seed", *v));
      }
      if (auto v = r.get("decision_latency")) {
        sc.run.decision_latency = parse_integer(ctx, "decision_latency", *v);
      }
      if (auto v = r.get("max_iters")) {
        const auto n = parse_integer(ctx, "max_iters", *v);
        if (n < 1) ctx.fail("max_iters", "must be at least 1");
        sc.run.max_iters = static_cast<std::size_t>(n);
      }
    }
    r.finish();
  }

  std::vector<VertexSpec> specs;
  for (auto& pv : vertices) {
    if (!pv.range_given) pv.spec.comm_range = sc.default_comm_range;
    specs.push_back(std::move(pv.spec));
  }
  sc.network = std::make_shared<const RailNetwork>(build_network(std::move(specs), std::move(tracks)));
  const auto& net = *sc.network;

  for (auto& pt : trains) {
    const LineContext ctx(source, pt.line);
    auto& t = pt.state;
    if (!pt.range_given) t.comm_range = sc.default_comm_range;
    if (pt.platform) {
      const auto station = net.find_vertex(pt.platform->first);
      if (!station || net.vertex(*station).kind != VertexKind::Station) {
        ctx.fail("platform", fmt::format("unknown station '{}'", pt.platform->first));
      }
      const auto& platforms = net.vertex(*station).platforms;
      const auto p = std::find_if(platforms.begin(), platforms.end(),
                                  [&](const Platform& x) { return x.number == pt.platform->second; });
      if (p == platforms.end()) {
        ctx.fail("platform", fmt::format("station '{}' has no platform {}", pt.platform->first,
                                         pt.platform->second));
      }
      if (!pt.track.empty() && net.find_track(pt.track) != p->track) {
        ctx.fail("track", "does not match the platform's track");
      }
      t.track = p->track;
      t.platform = PlatformSlot{*station, pt.platform->second};
      const auto& tr = net.track(t.track);
      const Direction toward = tr.endpoints[1] == *station ? Direction::Up : Direction::Down;
      if (!pt.direction_given) t.direction = toward;
      if (!pt.position_given) t.position = toward == Direction::Up ? tr.length : 0.0;
    } else {
      const auto track = net.find_track(pt.track);
      if (!track) ctx.fail("track", fmt::format("unknown track '{}'", pt.track));
      t.track = *track;
    }
    for (const auto& id : pt.route) {
      const auto track = net.find_track(id);
      if (!track) ctx.fail("route", fmt::format("unknown track '{}'", id));
      t.route.push_back(*track);
    }
    sc.trains.push_back(std::move(t));
  }

  sc.validate();
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot read '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.string());
}

std::string write_scenario(const Scenario& sc) {
  const auto& net = *sc.network;
  std::string out = "[network]\n";
  for (const auto& v : net.vertices()) {
    out += fmt::format("{} id={} comm_range={}m", v.kind == VertexKind::Station ? "station" : "junction",
                       v.id, v.comm_range);
    if (!v.platforms.empty()) {
      out += " platforms=";
      for (std::size_t k = 0; k < v.platforms.size(); ++k) {
        out += fmt::format("{}{}:{}", k ? "," : "", v.platforms[k].number,
                           net.track(v.platforms[k].track).id);
      }
    }
    out += '\n';
  }
  for (const auto& t : net.tracks()) {
    out += fmt::format("track id={} endpoints={},{} length={}m\n", t.id, net.vertex(t.endpoints[0]).id,
                       net.vertex(t.endpoints[1]).id, t.length);
  }
  out += "\n[trains]\n";
  for (const auto& t : sc.trains) {
    out += fmt::format("train id={} category={} track={} position={}m speed={}m/s direction={} "
                       "length={}m comm_range={}m activation={}",
                       t.id, to_string(t.category), net.track(t.track).id, t.position, t.speed,
                       t.direction == Direction::Up ? "UP" : "DOWN", t.length, t.comm_range,
                       t.activation_tick);
    if (t.platform) {
      out += fmt::format(" platform={}:{}", net.vertex(t.platform->station).id, t.platform->platform);
    }
    if (!t.route.empty()) {
      out += " route=";
      for (std::size_t k = 0; k < t.route.size(); ++k) {
        out += fmt::format("{}{}", k ? "," : "", net.track(t.route[k]).id);
      }
    }
    if (t.beta) out += fmt::format(" beta={},{}", (*t.beta)[0], (*t.beta)[1]);
    out += '\n';
  }
  out += fmt::format("\n[constants]\nmu_k={}\ng={}\nheadway={}m\ncritical={}m\ncomm_range={}m\n",
                     sc.constants.mu_k, sc.constants.g, sc.distances.headway, sc.distances.critical,
                     sc.default_comm_range);
  out += fmt::format("\n[run]\ntick={}s\nhorizon={}\nmode={}\nseed={}\ndecision_latency={}\nmax_iters={}\n",
                     sc.run.tick, sc.run.horizon, to_string(sc.run.mode), sc.run.seed,
                     sc.run.decision_latency, sc.run.max_iters);
  return out;
}

}  // namespace railguard
