#pragma once

#include "carl/heuristics.hpp"
#include "carl/model.hpp"
#include "carl/scalarisation.hpp"

#include <Eigen/Core>

#include <deque>
#include <optional>
#include <vector>

namespace carl {

enum class SearchMode { Plain, Strong };

/// States and actions of the model explored so far. An expanded state has at
/// least one included action; a seeded state without any is a fringe.
struct PartialSsp {
  std::vector<char> expanded;
  std::vector<std::vector<ActionId>> included;

  bool is_included(StateId s, ActionId a) const;
  void include(StateId s, ActionId a);
};

/**
 * Vector cost-to-go estimates, the explored partial SSP and the dirty set
 * Gamma of (state, action) pairs whose Q value may have dropped below the
 * state's value.
 */
class VectorValueFunction {
 public:
  VectorValueFunction() = default;
  VectorValueFunction(int num_states, int n);

  int num_states() const { return static_cast<int>(values_.cols()); }
  int n() const { return static_cast<int>(values_.rows()) - 1; }

  bool seeded(StateId s) const { return seeded_[s] != 0; }
  bool from_heuristic(StateId s) const { return from_heuristic_[s] != 0; }
  auto operator()(StateId s) const { return values_.col(s); }
  const Eigen::MatrixXd& values() const { return values_; }

  /// Installs a value; `heuristic` marks it as a refreshable estimate.
  void set(StateId s, const Eigen::VectorXd& v, bool heuristic = false);

  /// Action picked by the latest backup of `s`, or -1.
  ActionId choice(StateId s) const { return choice_[s]; }
  void set_choice(StateId s, ActionId a) { choice_[s] = a; }

  PartialSsp& partial() { return partial_; }
  const PartialSsp& partial() const { return partial_; }

  void mark(StateId s, ActionId a);
  bool has_dirty() const { return !gamma_.empty(); }
  std::optional<StateAction> pop_dirty();
  std::size_t dirty_count() const { return gamma_.size(); }

 private:
  Eigen::MatrixXd values_;
  std::vector<char> seeded_;
  std::vector<char> from_heuristic_;
  std::vector<ActionId> choice_;
  PartialSsp partial_;
  std::deque<StateAction> gamma_;
  std::vector<std::vector<ActionId>> gamma_members_;
};

/// Tied-greedy actions per state; empty for states off the tied envelope.
using TiedGreedySets = std::vector<std::vector<ActionId>>;

struct SearchOptions {
  double epsilon = 1e-4;
  /// Negative selects `epsilon`.
  double tie_epsilon = -1.0;
  SearchMode mode = SearchMode::Plain;
  long backup_budget = 100000000;

  double tie_threshold() const { return tie_epsilon < 0.0 ? epsilon : tie_epsilon; }
};

struct SearchStats {
  long backups = 0;
  long expansions = 0;
  long iterations = 0;
  long lambda_ssps = 0;
};

struct SearchResult {
  VectorValueFunction values;
  Scalarisation lambda;
  std::vector<StateId> envelope;
  DeterministicPolicy greedy;
  std::optional<TiedGreedySets> tied;
  SearchStats stats;
  double max_residual = 0.0;
  /// Exact cost vector of `greedy` from the initial state. Its projection is
  /// within epsilon of the projection of values at the initial state.
  CostVector policy_cost;
};

/// Q(s, a) = C(a) + sum_s' P(s'|s,a) V(s'). All successors must be seeded.
Eigen::VectorXd q_value(const CsspModel& model, const VectorValueFunction& v, ActionId a);

struct BackupResult {
  ActionId action = -1;
  double residual = 0.0;
};

/**
 * Vector Bellman backup over the included actions of `s` (all applicable
 * actions when `s` is not expanded).
 *
 * Sets V(s) to the Q vector of the chosen action: among actions whose
 * scalarised Q lies within min(epsilon, 1e-9 (1 + |min|)) of the minimum,
 * the action picked by the previous backup of `s` is kept if present;
 * otherwise the lexicographically smallest Q vector wins, then the smallest
 * action id. Returns the chosen
 * action and max_i |V_i(s) - Q_i(s, a)|. A goal state is left untouched.
 * Throws NoApplicableAction for a non-goal state without actions.
 */
BackupResult lambda_bellman_backup(const CsspModel& model, const Scalarisation& lambda,
                                   VectorValueFunction& v, StateId s, double epsilon);

/**
 * CG-iLAO* style search for an epsilon-consistent lambda-SSP solution.
 *
 * Each iteration repairs Gamma, walks the greedy envelope from the initial
 * state, expands its fringes and backs up its states in post-order. Plain
 * mode follows the tie-broken greedy action; Strong mode follows every
 * tied-greedy action and additionally waits until no action enters a tied
 * set for the first time.
 *
 * On an epsilon-consistent envelope the greedy policy is evaluated exactly.
 * If its scalarised cost from the initial state is more than epsilon away
 * from V, the residual threshold shrinks tenfold and the search continues.
 * Throws Nonconvergence once the backup budget is spent or the greedy policy
 * stays improper at the tightest threshold.
 */
SearchResult solve_lambda_ssp(const CsspModel& model, const Scalarisation& lambda, VectorValueFunction v,
                              const HeuristicVector& h, const SearchOptions& options = {});

/// Queues in Gamma every pair whose Q or value projection moves when the
/// scalarisation changes from `from` to `to`.
VectorValueFunction warm_restart(const CsspModel& model, VectorValueFunction v, const Scalarisation& from,
                                 const Scalarisation& to);

struct EnvelopeWalk {
  std::vector<StateId> post_order;
  std::vector<StateId> fringes;
  DeterministicPolicy greedy;
  TiedGreedySets tied;
  double max_residual = 0.0;
};

/**
 * Post-order walk from the initial state over the tie-broken greedy action
 * (Plain) or over every tied-greedy action (Strong), using each state's
 * included actions. Fringes are reported and not descended into.
 */
EnvelopeWalk greedy_envelope(const CsspModel& model, const VectorValueFunction& v, const Scalarisation& lambda,
                             double epsilon, SearchMode mode, double tie_epsilon = -1.0);

}  // namespace carl
