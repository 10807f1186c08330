#pragma once

#include "carl/model.hpp"
#include "carl/scalarisation.hpp"
#include "carl/search.hpp"
#include "carl/simplex.hpp"

#include <Eigen/Core>

#include <vector>

namespace carl {

inline constexpr double kPositiveMultiplier = 1e-9;
inline constexpr double kMinimumFlow = 1e-9;

/// Expected visit counts x(s, a) over a declared support.
struct OccupationMeasure {
  PolicySupport pairs;
  Eigen::VectorXd x;

  double out(StateId s) const;
  double in(const CsspModel& model, StateId s) const;
  CostVector cost(const CsspModel& model) const;
  /// Largest violation of flow conservation and unit goal inflow.
  double flow_residual(const CsspModel& model) const;
};

/// Feasibility system over x(s, a) for the pairs of a support.
struct XpiSystem {
  LinearProgram lp;
  PolicySupport pairs;
};

/**
 * Complementary-slackness system for an optimal policy at `lambda`.
 *
 * Flow conservation for every non-goal state touched by the support and unit
 * goal inflow; primary cost within (n + 1) epsilon + 1e-7 of
 * `scalar_value_s0 - lambda . u`; each secondary cost at most u_i, or equal to
 * u_i when lambda_i > 1e-9. Throws EmptySupport.
 */
XpiSystem build_xpi_system(const CsspModel& model, const Scalarisation& lambda, double scalar_value_s0,
                           const PolicySupport& support, double epsilon);

/// pi(s, a) = x(s, a) / out(s) for states with out(s) > 1e-9.
StochasticPolicy decode_policy(const CsspModel& model, const OccupationMeasure& x);

struct FlatSolution {
  StochasticPolicy policy;
  OccupationMeasure measure;
  CostVector cost;
  long pivots = 0;
};

/// Occupation-measure LP over every state reachable from the initial state.
/// Throws Infeasible when no policy satisfies the bounds.
FlatSolution flat_dual_solve(const CsspModel& model, const SimplexOptions& options = {});

/// Pairs (s, a) with a tied at s, over the tied envelope of a Strong result.
PolicySupport tied_support(const CsspModel& model, const SearchResult& result);

struct Extraction {
  StochasticPolicy policy;
  OccupationMeasure measure;
  CostVector cost;
  long pivots = 0;
};

/**
 * Solves the complementary-slackness system over the tied support of a
 * Strong-mode result and decodes the policy. Throws ExtractionInfeasible when
 * the system has no solution.
 */
Extraction extract_opt_policy(const CsspModel& model, const Scalarisation& lambda, const SearchResult& strong,
                              double epsilon, const SimplexOptions& options = {});

}  // namespace carl
