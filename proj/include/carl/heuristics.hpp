#pragma once

#include "carl/model.hpp"
#include "carl/scalarisation.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>

namespace carl {

enum class HeuristicKind { Zero, IdealPoint, Lambda };

std::string to_string(HeuristicKind kind);
HeuristicKind parse_heuristic_kind(const std::string& name);

/// Per-state cost-to-go estimates, one column per state.
struct HeuristicVector {
  HeuristicKind kind = HeuristicKind::Zero;
  Scalarisation lambda;  // meaningful for HeuristicKind::Lambda only
  Eigen::MatrixXd values;

  auto operator()(StateId s) const { return values.col(s); }
  int num_states() const { return static_cast<int>(values.cols()); }
};

HeuristicVector zero_heuristic(const CsspModel& model);

/**
 * Component-wise shortest distances to a goal in the all-outcomes
 * determinisation, one backward Dijkstra pass per cost function.
 *
 * States unreachable from the initial state that cannot reach a goal get the
 * zero vector; an initial-reachable state with no path to a goal raises
 * UnreachableGoal.
 */
HeuristicVector ideal_point_heuristic(const CsspModel& model);

/**
 * Shortest paths in the determinisation under the scalarised weight
 * [1 lambda] . C(a), returned as the vector sum of the action costs along
 * each state's path. Equal distances are resolved towards the smallest state
 * id.
 */
HeuristicVector lambda_heuristic(const CsspModel& model, const Scalarisation& lambda);

/// Heuristic source for a sequence of lambda-SSP solves. Ideal-point values
/// are computed once; lambda heuristics are recomputed whenever lambda moves.
class HeuristicSource {
 public:
  HeuristicSource(const CsspModel& model, HeuristicKind kind);

  HeuristicKind kind() const { return kind_; }
  const HeuristicVector& at(const Scalarisation& lambda);

 private:
  const CsspModel* model_;
  HeuristicKind kind_;
  std::optional<HeuristicVector> cached_;
};

}  // namespace carl
