#include "carl/solver.hpp"

#include "carl/errors.hpp"
#include "carl/extract.hpp"

#include <algorithm>
#include <chrono>
#include <optional>

namespace carl {

namespace {

struct Attempt {
  std::optional<Extraction> extraction;
  bool failed = true;
};

Attempt try_extract(LagrangianOracle& oracle, const LagrangianSample& at, const SolveOptions& options,
                    long& pivots, double tie_epsilon = -1.0) {
  Attempt attempt;
  const SearchResult strong = oracle.resolve(at.lambda, options.extraction_mode, tie_epsilon);
  try {
    attempt.extraction =
        extract_opt_policy(oracle.model(), at.lambda, strong, options.scalarise.search.epsilon, options.simplex);
    pivots += attempt.extraction->pivots;
    // Coordinate search stops on an eta rule, so L may trail its maximum by
    // a few eta even when the multipliers are right.
    const double slack = 10.0 * std::max(options.scalarise.search.epsilon, options.scalarise.eta);
    attempt.failed = detect_coordinate_failure(attempt.extraction->cost[0], at.L, slack);
  } catch (const ExtractionInfeasible&) {
    attempt.failed = true;
  }
  return attempt;
}

// Subgradient steps leave the multipliers only approximately optimal, so the
// policies an optimal mixture needs can miss the tie window and tiny positive
// multipliers can force bound equalities. Retries snap multipliers below eta
// to zero and widen the window tenfold up to three times.
Attempt retry_after_fallback(LagrangianOracle& oracle, LagrangianSample& at, const SolveOptions& options,
                             long& pivots) {
  const double eta = oracle.options().eta;
  std::vector<LagrangianSample> points{at};
  const Eigen::VectorXd lambda = at.lambda.lambda();
  const Eigen::VectorXd snapped = (lambda.array() < eta).select(0.0, lambda);
  if (snapped != lambda) points.push_back(oracle(Scalarisation(snapped)));

  const double base = options.scalarise.search.tie_threshold();
  for (double scale : {1.0, 10.0, 100.0, 1000.0}) {
    for (std::size_t k = 0; k < points.size(); ++k) {
      if (scale == 1.0 && k == 0) continue;
      Attempt attempt = try_extract(oracle, points[k], options, pivots, scale * base);
      if (attempt.extraction) {
        at = points[k];
        return attempt;
      }
    }
  }
  return {};
}

[[noreturn]] void give_up(const CsspModel& model, const SolveOptions& options, const std::string& why) {
  try {
    flat_dual_solve(model, options.simplex);
  } catch (const Infeasible&) {
    throw Infeasible("no policy satisfies the secondary-cost bounds");
  }
  throw ExtractionInfeasible(why);
}

}  // namespace

SolveReport solve_cssp(const CsspModel& model, const SolveOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  SolveReport report;
  report.policy = StochasticPolicy(model.num_states());
  report.lambda = Scalarisation::zeros(model.n());
  auto finish = [&](const LagrangianOracle* oracle) {
    if (oracle) {
      report.trace = oracle->trace();
      report.lambda_ssps = oracle->trace().lambda_ssps;
      report.backups = oracle->totals().backups;
    }
    report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  if (model.is_goal(model.initial())) {
    report.cost = CostVector::Zero(model.n() + 1);
    finish(nullptr);
    return report;
  }

  LagrangianOracle oracle(model, options.heuristic, options.scalarise);
  LagrangianSample chosen;
  Attempt attempt;
  try {
    chosen = coordinate_search(oracle).second;
    attempt = try_extract(oracle, chosen, options, report.lp_pivots);
    if (attempt.failed) {
      report.coordinate_failure = true;
      report.fallback_used = true;
      oracle.trace().outcome = SearchOutcome::FellBackToSubgradient;
      LagrangianSample best = subgradient_fallback(oracle, chosen.lambda);
      Attempt second = try_extract(oracle, best, options, report.lp_pivots);
      if (!second.extraction) second = retry_after_fallback(oracle, best, options, report.lp_pivots);
      oracle.trace().outcome = SearchOutcome::SubgradientConverged;
      // A policy from the first attempt is feasible, only possibly suboptimal.
      if (second.extraction || !attempt.extraction) {
        attempt = std::move(second);
        chosen = best;
      }
    }
  } catch (const UnboundedCoordinate& e) {
    give_up(model, options, e.what());
  }
  if (!attempt.extraction) give_up(model, options, "no policy could be extracted at the final multipliers");

  report.policy = attempt.extraction->policy;
  report.cost = attempt.extraction->cost;
  report.lambda = chosen.lambda;
  report.lagrangian = chosen.L;
  report.gap = report.cost[0] - chosen.L;
  finish(&oracle);
  return report;
}

}  // namespace carl
