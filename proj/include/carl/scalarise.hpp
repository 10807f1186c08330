#pragma once

#include "carl/heuristics.hpp"
#include "carl/model.hpp"
#include "carl/scalarisation.hpp"
#include "carl/search.hpp"

#include <Eigen/Core>

#include <optional>
#include <utility>
#include <vector>

namespace carl {

/// One Lagrangian evaluation: L(lambda) = [1 lambda] . V(s0) - lambda . u and
/// the subgradient g = V_{1..n}(s0) - u of the solving policy.
struct LagrangianSample {
  Scalarisation lambda;
  double L = 0.0;
  Eigen::VectorXd g;
  CostVector v0;
};

enum class SearchOutcome { CoordinateConverged, FellBackToSubgradient, SubgradientConverged };

struct LambdaSearchTrace {
  std::vector<LagrangianSample> samples;  // every oracle call, in order
  std::vector<Scalarisation> steps;       // lambda after each line search
  SearchOutcome outcome = SearchOutcome::CoordinateConverged;
  long lambda_ssps = 0;
};

struct ScalariseOptions {
  SearchOptions search;
  double eta = 1e-4;
  double alpha0 = 1.0;
  long max_subgradient_iters = 100000;
  double line_search_cap = 1e6;
  bool warm_start = true;
};

/**
 * Stateful lambda-SSP oracle. Every call solves in Plain mode and, when warm
 * starting is on, reuses the previous call's value function and partial SSP.
 */
class LagrangianOracle {
 public:
  LagrangianOracle(const CsspModel& model, HeuristicKind heuristic, ScalariseOptions options);

  LagrangianSample operator()(const Scalarisation& lambda);

  /// Re-solves at `lambda` with the given mode, starting from the latest
  /// values. A nonnegative `tie_epsilon` overrides the configured tie window.
  SearchResult resolve(const Scalarisation& lambda, SearchMode mode, double tie_epsilon = -1.0);

  const CsspModel& model() const { return *model_; }
  const ScalariseOptions& options() const { return options_; }
  const LambdaSearchTrace& trace() const { return trace_; }
  LambdaSearchTrace& trace() { return trace_; }
  const SearchStats& totals() const { return totals_; }

 private:
  VectorValueFunction start_from(const Scalarisation& lambda) const;
  void absorb(const SearchResult& result);

  const CsspModel* model_;
  HeuristicSource heuristic_;
  ScalariseOptions options_;
  std::optional<SearchResult> last_;
  LambdaSearchTrace trace_;
  SearchStats totals_;
};

/// L(lambda) and its subgradient from a single Plain-mode solve.
LagrangianSample oracle(const CsspModel& model, const Scalarisation& lambda, const VectorValueFunction* warm,
                        const HeuristicVector& h, double epsilon);

/**
 * Maximises L along coordinate `i` with the other coordinates of `lambda`
 * frozen. Starts from l = 0 and an upper point doubled from 1 until its
 * subgradient is no longer positive, then repeatedly evaluates the crossing
 * of the two supporting lines. Returns the sample at the chosen point.
 * Throws UnboundedCoordinate when the upper point passes the cap.
 */
LagrangianSample exact_line_search(LagrangianOracle& oracle, const Scalarisation& lambda, int i);

/// Ascending-index sweeps of exact line searches until a full sweep improves
/// L by no more than eta.
std::pair<Scalarisation, LagrangianSample> coordinate_search(LagrangianOracle& oracle);

/// True iff the extracted primary cost exceeds L by more than
/// slack + 1e-6 (1 + |L|).
bool detect_coordinate_failure(double extracted_primary_cost, double lagrangian, double slack = 0.0);

/**
 * Projected subgradient ascent lambda <- max(0, lambda + alpha_k g) with
 * alpha_k = alpha0 / (1 + k), stopped once alpha_k < eta or the projected
 * step no longer moves lambda. Returns the best sample seen. Throws
 * IterationCapExceeded after `max_subgradient_iters` steps.
 */
LagrangianSample subgradient_fallback(LagrangianOracle& oracle, const Scalarisation& start);

/// L at each grid point, warm starting along the grid.
std::vector<std::pair<Scalarisation, double>> sample_surface(const CsspModel& model,
                                                             const std::vector<Scalarisation>& grid,
                                                             HeuristicKind heuristic,
                                                             const ScalariseOptions& options = {});

}  // namespace carl
