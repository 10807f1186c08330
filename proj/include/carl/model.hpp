#pragma once

#include <Eigen/Core>

#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace carl {

using StateId = int;
using ActionId = int;

/// Per-cost expected values; entry 0 is the primary cost, entries 1..n the
/// secondary costs.
using CostVector = Eigen::VectorXd;

inline constexpr double kProbabilityTolerance = 1e-9;
inline constexpr double kFeasibilityTolerance = 1e-6;

struct Outcome {
  StateId target;
  double prob;
};

struct Action {
  std::string name;
  StateId source;
  CostVector cost;
  std::vector<Outcome> outcomes;
};

/// Name-based description of a model, the form read from and written to the
/// interchange format.
struct ActionSpec {
  std::string name;
  std::string source;
  std::vector<double> cost;
  std::vector<std::pair<std::string, double>> outcomes;
};

struct ModelSpec {
  std::vector<std::string> states;
  std::string initial;
  std::vector<std::string> goals;
  int n = 0;
  std::vector<double> bounds;
  std::vector<ActionSpec> actions;
};

/**
 * Explicit-state constrained SSP.
 *
 * States and actions are dense integer ids assigned in document order. The
 * constructor validates the description: distributions must be nonnegative
 * and sum to one, primary costs must be strictly positive and secondary costs
 * nonnegative. Actions listed on goal states are dropped and repeated
 * outcome targets within one action are merged. A model is immutable once
 * built.
 */
class CsspModel {
 public:
  explicit CsspModel(const ModelSpec& spec);

  int num_states() const { return static_cast<int>(state_names_.size()); }
  int num_actions() const { return static_cast<int>(actions_.size()); }
  /// Number of secondary cost functions.
  int n() const { return n_; }

  StateId initial() const { return initial_; }
  bool is_goal(StateId s) const { return is_goal_[s] != 0; }
  const std::vector<StateId>& goals() const { return goals_; }
  const Eigen::VectorXd& bounds() const { return bounds_; }

  std::span<const ActionId> actions(StateId s) const { return state_actions_[s]; }
  const Action& action(ActionId a) const { return actions_[a]; }
  /// Actions with at least one outcome landing in `s`.
  std::span<const ActionId> predecessors(StateId s) const { return predecessors_[s]; }

  const std::string& state_name(StateId s) const { return state_names_[s]; }
  std::optional<StateId> find_state(const std::string& name) const;
  std::optional<ActionId> find_action(const std::string& name) const;

  ModelSpec to_spec() const;

 private:
  std::vector<std::string> state_names_;
  std::unordered_map<std::string, StateId> state_index_;
  std::unordered_map<std::string, ActionId> action_index_;
  StateId initial_ = 0;
  std::vector<char> is_goal_;
  std::vector<StateId> goals_;
  int n_ = 0;
  Eigen::VectorXd bounds_;
  std::vector<Action> actions_;
  std::vector<std::vector<ActionId>> state_actions_;
  std::vector<std::vector<ActionId>> predecessors_;
};

// Policies ---------------------------------------------------------------

struct ActionChoice {
  ActionId action;
  double prob;
};

using StateAction = std::pair<StateId, ActionId>;

/// Set of (state, action) pairs, kept sorted and unique.
using PolicySupport = std::vector<StateAction>;

/// Partial map from states to action distributions. States without an entry
/// are undefined.
class StochasticPolicy {
 public:
  StochasticPolicy() = default;
  explicit StochasticPolicy(int num_states) : table_(num_states) {}

  int num_states() const { return static_cast<int>(table_.size()); }
  bool defined(StateId s) const { return !table_[s].empty(); }
  std::span<const ActionChoice> choices(StateId s) const { return table_[s]; }
  /// Probability of `a` in `s`, zero when absent.
  double prob(StateId s, ActionId a) const;

  void set(StateId s, std::vector<ActionChoice> choices) { table_[s] = std::move(choices); }
  void set_deterministic(StateId s, ActionId a) { table_[s] = {{a, 1.0}}; }
  void clear(StateId s) { table_[s].clear(); }

 private:
  std::vector<std::vector<ActionChoice>> table_;
};

/// Partial map from states to single actions.
class DeterministicPolicy {
 public:
  DeterministicPolicy() = default;
  explicit DeterministicPolicy(int num_states) : table_(num_states) {}

  int num_states() const { return static_cast<int>(table_.size()); }
  std::optional<ActionId> operator[](StateId s) const { return table_[s]; }
  void set(StateId s, ActionId a) { table_[s] = a; }
  void clear(StateId s) { table_[s].reset(); }

  StochasticPolicy to_stochastic() const;

 private:
  std::vector<std::optional<ActionId>> table_;
};

/// Throws MalformedModel if a mapped action is not applicable in its state or
/// a distribution does not sum to one.
void validate_policy(const CsspModel& model, const StochasticPolicy& policy);

// Operations --------------------------------------------------------------

/// States reachable from `from` along positive-probability choices of
/// `policy`, in discovery order. Throws OpenPolicy when a reachable non-goal
/// state has no entry.
std::vector<StateId> envelope(const CsspModel& model, const StochasticPolicy& policy,
                              StateId from);

/// Support of `policy` from the initial state.
PolicySupport support(const CsspModel& model, const StochasticPolicy& policy);

/**
 * Expected cost vector of a closed proper policy from the initial state.
 *
 * Solves V(s) = sum_a pi(s,a) (C(a) + sum_s' P(s'|s,a) V(s')) over the
 * policy envelope for every cost component at once. Envelopes of up to 2000
 * states are solved by dense elimination, larger ones by Gauss-Seidel sweeps
 * down to a residual of 1e-10. Properness is established first from the
 * goal-reachability system; ImproperPolicy is thrown when some envelope state
 * reaches a goal with probability below 1 - 1e-9.
 */
CostVector evaluate_policy(const CsspModel& model, const StochasticPolicy& policy);

/// Adds a deterministic give-up action with cost `penalty` from every
/// non-goal state to a dedicated goal. States that already own a give-up
/// action are left alone, so applying the transform twice is a no-op.
CsspModel finite_penalty_transform(const CsspModel& model, const CostVector& penalty);

inline constexpr const char* kGiveUpGoal = "__give_up_goal";
inline constexpr const char* kGiveUpPrefix = "__give_up@";

/// True iff cost[i] <= u_i + 1e-6 for every secondary cost.
bool feasibility_check(const CsspModel& model, const CostVector& cost);

}  // namespace carl
