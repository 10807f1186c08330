#pragma once

#include "carl/heuristics.hpp"
#include "carl/model.hpp"
#include "carl/scalarise.hpp"
#include "carl/search.hpp"
#include "carl/simplex.hpp"

namespace carl {

struct SolveOptions {
  ScalariseOptions scalarise;
  HeuristicKind heuristic = HeuristicKind::IdealPoint;
  /// Mode of the final re-solve whose tied support feeds extraction.
  SearchMode extraction_mode = SearchMode::Strong;
  SimplexOptions simplex;
};

struct SolveReport {
  StochasticPolicy policy;
  CostVector cost;
  Scalarisation lambda;
  double lagrangian = 0.0;
  /// cost[0] - lagrangian.
  double gap = 0.0;
  bool coordinate_failure = false;
  bool fallback_used = false;
  long lambda_ssps = 0;
  long backups = 0;
  long lp_pivots = 0;
  double wall_time_s = 0.0;
  LambdaSearchTrace trace;
};

/**
 * Full pipeline: coordinate search for lambda, a re-solve at the result,
 * extraction of a stochastic policy, and the subgradient fallback when
 * extraction fails or leaves a primary cost above L.
 *
 * When no policy can be extracted the exact occupation-measure LP decides the
 * error: Infeasible if the bounds admit no policy, ExtractionInfeasible
 * otherwise.
 */
SolveReport solve_cssp(const CsspModel& model, const SolveOptions& options = {});

}  // namespace carl
