#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace railguard {

/// Binary action domain; index 0 is Stop and index 1 is Move.
enum class Action : std::uint8_t { Stop = 0, Move = 1 };

std::string_view to_string(Action a) noexcept;

/// One value per action, indexed by Action.
using ActionValues = std::array<double, 2>;

struct VariableNode {
  std::string label;
};

/// Utility of the agent owning variable `owner`, defined over `scope`
/// (which always contains `owner`). `beta` is the agent's own preference.
struct FactorNode {
  std::size_t owner = 0;
  std::vector<std::size_t> scope;
  ActionValues beta{0.0, 0.0};
};

/// A variable/factor adjacency. Links are numbered factor by factor in scope order.
struct Link {
  std::size_t factor = 0;
  std::size_t variable = 0;
  std::size_t slot = 0;  // position of `variable` in the factor's scope
};

/// Bipartite factor graph over binary Stop/Move variables.
class FactorGraph {
 public:
  std::size_t add_variable(std::string label = {});
  /// Throws InvalidGraph when the scope is malformed or beta is not finite.
  std::size_t add_factor(std::size_t owner, std::vector<std::size_t> scope, ActionValues beta);

  const std::vector<VariableNode>& variables() const noexcept { return variables_; }
  const std::vector<FactorNode>& factors() const noexcept { return factors_; }
  const std::vector<Link>& links() const noexcept { return links_; }
  /// Links touching a variable, in link order.
  const std::vector<std::size_t>& variable_links(std::size_t variable) const {
    return variable_links_.at(variable);
  }
  /// First link id of a factor; its links are contiguous.
  std::size_t factor_link_offset(std::size_t factor) const { return factor_offsets_.at(factor); }

  /// Returns the link joining `factor` and `variable`; throws MissingEdge.
  std::size_t link_between(std::size_t factor, std::size_t variable) const;

  /// Links whose factor belongs to a different agent than the variable.
  std::size_t inter_agent_link_count() const noexcept;

  bool is_acyclic() const;

 private:
  std::vector<VariableNode> variables_;
  std::vector<FactorNode> factors_;
  std::vector<Link> links_;
  std::vector<std::vector<std::size_t>> variable_links_;
  std::vector<std::size_t> factor_offsets_;
};

/// Messages per link: zeta flows variable -> factor, gamma factor -> variable.
/// Stored messages are recentred so their two values sum to 0.
struct MsgTable {
  std::vector<ActionValues> zeta;
  std::vector<ActionValues> gamma;
  std::size_t iteration = 0;

  static MsgTable zeros(const FactorGraph& graph);
};

struct Assignment {
  std::vector<Action> actions;
  bool converged = false;
  std::size_t iterations = 0;
};

/// U_z = beta_z(own) - #(neighbours in scope that Move while the owner Moves).
/// `joint` is indexed like the factor's scope. Throws IncompleteScope.
double local_utility(const FactorGraph& graph, std::size_t factor, std::span<const Action> joint);

/// Sum of all factor utilities under a full assignment.
double total_utility(const FactorGraph& graph, std::span<const Action> assignment);

/// Variable -> factor message: incoming gammas from every other factor,
/// shifted by the normalising constant that makes the two entries sum to 0.
ActionValues msg_var_to_fn(const FactorGraph& graph, std::size_t variable, std::size_t factor,
                           const MsgTable& table);

/// Factor -> variable message: for each action of `variable`, the best value of
/// U_z plus the incoming zetas of the other scope variables.
ActionValues msg_fn_to_var(const FactorGraph& graph, std::size_t factor, std::size_t variable,
                           const MsgTable& table);

struct MaxSumOptions {
  std::size_t max_iters = 100;
  double damping = 0.0;       // weight kept from the previous round, in [0, 1)
  double tolerance = 1e-9;    // max-norm change that counts as converged
  std::ostream* trace = nullptr;  // per-round message dump
};

struct MaxSumResult {
  Assignment assignment;
  MsgTable table;
  std::vector<ActionValues> marginals;  // sum of incoming gammas per variable
};

/// Synchronous max-sum. Decodes the argmax of each variable's marginal with
/// Stop winning ties; tied variables are fixed one at a time through their
/// factors so that the decoded assignment stays jointly consistent.
/// Throws InvalidGraph on bad options.
MaxSumResult run_maxsum_detailed(const FactorGraph& graph, const MaxSumOptions& options);

Assignment run_maxsum(const FactorGraph& graph, std::size_t max_iters, double damping);

/// Exhaustive maximiser of total_utility; the first optimum in the order where
/// variable 0 is most significant and Stop precedes Move. Throws TooLarge past
/// 20 variables.
Assignment brute_force_optimum(const FactorGraph& graph);

}  // namespace railguard
