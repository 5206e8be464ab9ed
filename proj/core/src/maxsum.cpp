#include "railguard/maxsum.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "railguard/error.hpp"

namespace railguard {

namespace {

// Decisions closer than this are treated as ties.
constexpr double kTieEpsilon = 1e-9;

constexpr std::size_t kBruteForceLimit = 20;

std::string variable_name(const FactorGraph& graph, std::size_t v) {
  const auto& label = graph.variables()[v].label;
  return label.empty() ? fmt::format("v{}", v) : label;
}

}  // namespace

std::string_view to_string(Action a) noexcept { return a == Action::Stop ? "stop" : "move"; }

std::size_t FactorGraph::add_variable(std::string label) {
  variables_.push_back(VariableNode{std::move(label)});
  variable_links_.emplace_back();
  return variables_.size() - 1;
}

std::size_t FactorGraph::add_factor(std::size_t owner, std::vector<std::size_t> scope,
                                    ActionValues beta) {
  if (owner >= variables_.size()) {
    throw Error(ErrorCode::InvalidGraph, fmt::format("factor owner {} is not a variable", owner));
  }
  if (std::find(scope.begin(), scope.end(), owner) == scope.end()) {
    throw Error(ErrorCode::InvalidGraph,
                fmt::format("scope of factor for variable {} must contain it", owner));
  }
  for (std::size_t k = 0; k < scope.size(); ++k) {
    if (scope[k] >= variables_.size()) {
      throw Error(ErrorCode::InvalidGraph, fmt::format("scope variable {} out of range", scope[k]));
    }
    if (std::find(scope.begin(), scope.begin() + static_cast<std::ptrdiff_t>(k), scope[k]) !=
        scope.begin() + static_cast<std::ptrdiff_t>(k)) {
      throw Error(ErrorCode::InvalidGraph, fmt::format("variable {} repeated in scope", scope[k]));
    }
  }
  if (!std::isfinite(beta[0]) || !std::isfinite(beta[1])) {
    throw Error(ErrorCode::InvalidGraph, "beta values must be finite");
  }
  const std::size_t index = factors_.size();
  factor_offsets_.push_back(links_.size());
  for (std::size_t k = 0; k < scope.size(); ++k) {
    variable_links_[scope[k]].push_back(links_.size());
    links_.push_back(Link{index, scope[k], k});
  }
  factors_.push_back(FactorNode{owner, std::move(scope), beta});
  return index;
}

std::size_t FactorGraph::link_between(std::size_t factor, std::size_t variable) const {
  if (factor >= factors_.size()) {
    throw Error(ErrorCode::MissingEdge, fmt::format("no factor {}", factor));
  }
  const auto& scope = factors_[factor].scope;
  const auto it = std::find(scope.begin(), scope.end(), variable);
  if (it == scope.end()) {
    throw Error(ErrorCode::MissingEdge,
                fmt::format("variable {} is not in the scope of factor {}", variable, factor));
  }
  return factor_offsets_[factor] + static_cast<std::size_t>(it - scope.begin());
}

std::size_t FactorGraph::inter_agent_link_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(links_.begin(), links_.end(), [&](const Link& l) {
    return factors_[l.factor].owner != l.variable;
  }));
}

bool FactorGraph::is_acyclic() const {
  // Union-find over variables followed by factors.
  std::vector<std::size_t> parent(variables_.size() + factors_.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const auto& link : links_) {
    const auto a = find(link.variable);
    const auto b = find(variables_.size() + link.factor);
    if (a == b) return false;
    parent[a] = b;
  }
  return true;
}

MsgTable MsgTable::zeros(const FactorGraph& graph) {
  MsgTable t;
  t.zeta.assign(graph.links().size(), ActionValues{0.0, 0.0});
  t.gamma.assign(graph.links().size(), ActionValues{0.0, 0.0});
  return t;
}

double local_utility(const FactorGraph& graph, std::size_t factor, std::span<const Action> joint) {
  const FactorNode& f = graph.factors().at(factor);
  if (joint.size() != f.scope.size()) {
    throw Error(ErrorCode::IncompleteScope,
                fmt::format("factor {} has {} scope variables, got {} states", factor,
                            f.scope.size(), joint.size()));
  }
  Action own = Action::Stop;
  for (std::size_t k = 0; k < f.scope.size(); ++k) {
    if (f.scope[k] == f.owner) own = joint[k];
  }
  double value = f.beta[static_cast<std::size_t>(own)];
  if (own == Action::Move) {
    for (std::size_t k = 0; k < f.scope.size(); ++k) {
      if (f.scope[k] != f.owner && joint[k] == Action::Move) value -= 1.0;
    }
  }
  return value;
}

double total_utility(const FactorGraph& graph, std::span<const Action> assignment) {
  if (assignment.size() != graph.variables().size()) {
    throw Error(ErrorCode::IncompleteScope, "assignment does not cover every variable");
  }
  double total = 0.0;
  std::vector<Action> joint;
  for (std::size_t z = 0; z < graph.factors().size(); ++z) {
    const auto& scope = graph.factors()[z].scope;
    joint.resize(scope.size());
    for (std::size_t k = 0; k < scope.size(); ++k) joint[k] = assignment[scope[k]];
    total += local_utility(graph, z, joint);
  }
  return total;
}

ActionValues msg_var_to_fn(const FactorGraph& graph, std::size_t variable, std::size_t factor,
                           const MsgTable& table) {
  graph.link_between(factor, variable);
  ActionValues sum{0.0, 0.0};
  for (std::size_t l : graph.variable_links(variable)) {
    if (graph.links()[l].factor == factor) continue;
    sum[0] += table.gamma[l][0];
    sum[1] += table.gamma[l][1];
  }
  const double phi = -0.5 * (sum[0] + sum[1]);
  return {sum[0] + phi, sum[1] + phi};
}

ActionValues msg_fn_to_var(const FactorGraph& graph, std::size_t factor, std::size_t variable,
                           const MsgTable& table) {
  const std::size_t link = graph.link_between(factor, variable);
  const FactorNode& f = graph.factors()[factor];
  const std::size_t slot = graph.links()[link].slot;
  const std::size_t offset = graph.factor_link_offset(factor);
  const std::size_t others = f.scope.size() - 1;

  std::vector<Action> joint(f.scope.size(), Action::Stop);
  ActionValues out{0.0, 0.0};
  for (std::size_t own = 0; own < 2; ++own) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t mask = 0; mask < (std::size_t{1} << others); ++mask) {
      double incoming = 0.0;
      std::size_t bit = 0;
      for (std::size_t k = 0; k < f.scope.size(); ++k) {
        if (k == slot) {
          joint[k] = static_cast<Action>(own);
          continue;
        }
        joint[k] = static_cast<Action>((mask >> bit++) & 1U);
        incoming += table.zeta[offset + k][static_cast<std::size_t>(joint[k])];
      }
      best = std::max(best, local_utility(graph, factor, joint) + incoming);
    }
    out[own] = best;
  }
  return out;
}

namespace {

void dump_round(std::ostream& os, const FactorGraph& graph, const MsgTable& table) {
  for (std::size_t l = 0; l < graph.links().size(); ++l) {
    const Link& link = graph.links()[l];
    const auto var = variable_name(graph, link.variable);
    fmt::print(os, "round={} edge={}->f{} stop={} move={}\n", table.iteration, var, link.factor,
               table.zeta[l][0], table.zeta[l][1]);
    fmt::print(os, "round={} edge=f{}->{} stop={} move={}\n", table.iteration, link.factor, var,
               table.gamma[l][0], table.gamma[l][1]);
  }
}

Action preferred(const ActionValues& v) {
  return v[1] > v[0] + kTieEpsilon ? Action::Move : Action::Stop;
}

// Decisive marginals are shared by every optimum, so they are fixed first.
// Tied variables are then settled by one traversal per connected component:
// each is fixed through the factor that links it back towards the root,
// conditioned on everything already fixed there. On trees this is exact.
std::vector<Action> decode(const FactorGraph& graph, const MsgTable& table,
                           const std::vector<ActionValues>& marginals) {
  const std::size_t n = graph.variables().size();
  std::vector<std::optional<Action>> fixed(n);
  for (std::size_t v = 0; v < n; ++v) {
    if (std::abs(marginals[v][1] - marginals[v][0]) > kTieEpsilon) fixed[v] = preferred(marginals[v]);
  }

  std::vector<bool> visited(n, false);
  std::vector<bool> done(graph.factors().size(), false);
  std::deque<std::size_t> queue;
  auto visit = [&](std::size_t v) {
    visited[v] = true;
    for (std::size_t l : graph.variable_links(v)) {
      const std::size_t z = graph.links()[l].factor;
      if (!done[z]) queue.push_back(z);
    }
  };

  std::vector<Action> joint;
  std::vector<std::size_t> open;
  for (std::size_t root = 0; root < n; ++root) {
    if (visited[root]) continue;
    if (!fixed[root]) fixed[root] = preferred(marginals[root]);
    visit(root);
    while (!queue.empty()) {
      const std::size_t z = queue.front();
      queue.pop_front();
      if (done[z]) continue;
      done[z] = true;
      const FactorNode& f = graph.factors()[z];
      const std::size_t offset = graph.factor_link_offset(z);
      open.clear();
      joint.assign(f.scope.size(), Action::Stop);
      for (std::size_t k = 0; k < f.scope.size(); ++k) {
        if (fixed[f.scope[k]]) {
          joint[k] = *fixed[f.scope[k]];
        } else {
          open.push_back(k);
        }
      }
      if (!open.empty()) {
        double best = -std::numeric_limits<double>::infinity();
        std::size_t best_mask = 0;
        // Earlier scope slots are the more significant bits, Stop first.
        for (std::size_t mask = 0; mask < (std::size_t{1} << open.size()); ++mask) {
          double value = 0.0;
          for (std::size_t i = 0; i < open.size(); ++i) {
            const auto a = static_cast<Action>((mask >> (open.size() - 1 - i)) & 1U);
            joint[open[i]] = a;
            value += table.zeta[offset + open[i]][static_cast<std::size_t>(a)];
          }
          value += local_utility(graph, z, joint);
          if (value > best + kTieEpsilon) {
            best = value;
            best_mask = mask;
          }
        }
        for (std::size_t i = 0; i < open.size(); ++i) {
          fixed[f.scope[open[i]]] = static_cast<Action>((best_mask >> (open.size() - 1 - i)) & 1U);
        }
      }
      for (std::size_t v : f.scope) {
        if (!visited[v]) visit(v);
      }
    }
  }

  std::vector<Action> out(n);
  for (std::size_t v = 0; v < n; ++v) out[v] = *fixed[v];
  return out;
}

}  // namespace

MaxSumResult run_maxsum_detailed(const FactorGraph& graph, const MaxSumOptions& options) {
  if (options.max_iters < 1) {
    throw Error(ErrorCode::InvalidGraph, "max_iters must be at least 1");
  }
  if (!(options.damping >= 0.0 && options.damping < 1.0)) {
    throw Error(ErrorCode::InvalidGraph, "damping must lie in [0, 1)");
  }

  const auto& links = graph.links();
  MsgTable table = MsgTable::zeros(graph);
  MsgTable next = table;
  bool converged = false;
  std::size_t iterations = options.max_iters;
  const double keep = options.damping;

  for (std::size_t round = 1; round <= options.max_iters; ++round) {
    double delta = 0.0;
    for (std::size_t l = 0; l < links.size(); ++l) {
      const Link& link = links[l];
      const auto zeta = msg_var_to_fn(graph, link.variable, link.factor, table);
      auto gamma = msg_fn_to_var(graph, link.factor, link.variable, table);
      const double shift = 0.5 * (gamma[0] + gamma[1]);
      gamma[0] -= shift;
      gamma[1] -= shift;
      for (std::size_t a = 0; a < 2; ++a) {
        next.zeta[l][a] = keep * table.zeta[l][a] + (1.0 - keep) * zeta[a];
        next.gamma[l][a] = keep * table.gamma[l][a] + (1.0 - keep) * gamma[a];
        delta = std::max({delta, std::abs(next.zeta[l][a] - table.zeta[l][a]),
                          std::abs(next.gamma[l][a] - table.gamma[l][a])});
      }
    }
    next.iteration = round;
    std::swap(table, next);
    if (options.trace) dump_round(*options.trace, graph, table);
    if (delta < options.tolerance) {
      converged = true;
      // The last round only confirmed the fixed point reached one round earlier.
      iterations = std::max<std::size_t>(1, round - 1);
      break;
    }
  }

  MaxSumResult result;
  result.marginals.assign(graph.variables().size(), ActionValues{0.0, 0.0});
  for (std::size_t l = 0; l < links.size(); ++l) {
    auto& m = result.marginals[links[l].variable];
    m[0] += table.gamma[l][0];
    m[1] += table.gamma[l][1];
  }
  result.assignment.actions = decode(graph, table, result.marginals);
  result.assignment.converged = converged;
  result.assignment.iterations = iterations;
  result.table = std::move(table);
  return result;
}

Assignment run_maxsum(const FactorGraph& graph, std::size_t max_iters, double damping) {
  MaxSumOptions options;
  options.max_iters = max_iters;
  options.damping = damping;
  return run_maxsum_detailed(graph, options).assignment;
}

Assignment brute_force_optimum(const FactorGraph& graph) {
  const std::size_t n = graph.variables().size();
  if (n > kBruteForceLimit) {
    throw Error(ErrorCode::TooLarge,
                fmt::format("{} variables exceed the enumeration limit of {}", n, kBruteForceLimit));
  }
  Assignment best;
  best.actions.assign(n, Action::Stop);
  best.converged = true;
  double best_value = -std::numeric_limits<double>::infinity();
  std::vector<Action> current(n);
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    for (std::size_t v = 0; v < n; ++v) {
      current[v] = static_cast<Action>((mask >> (n - 1 - v)) & 1U);
    }
    const double value = total_utility(graph, current);
    if (value > best_value) {
      best_value = value;
      best.actions = current;
    }
  }
  return best;
}

}  // namespace railguard
