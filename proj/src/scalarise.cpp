#include "carl/scalarise.hpp"

#include "carl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace carl {

namespace {

LagrangianSample package(const CsspModel& model, const Scalarisation& lambda, const SearchResult& result) {
  LagrangianSample sample;
  sample.lambda = lambda;
  // The greedy policy's exact cost makes L + g . (l' - l) a supporting line.
  sample.v0 = result.policy_cost;
  sample.L = lambda.project(sample.v0) + lambda.terminal(model.bounds());
  sample.g = sample.v0.tail(model.n()) - model.bounds();
  return sample;
}

void accumulate(SearchStats& totals, const SearchStats& s) {
  totals.backups += s.backups;
  totals.expansions += s.expansions;
  totals.iterations += s.iterations;
  totals.lambda_ssps += s.lambda_ssps;
}

}  // namespace

LagrangianOracle::LagrangianOracle(const CsspModel& model, HeuristicKind heuristic, ScalariseOptions options)
    : model_(&model), heuristic_(model, heuristic), options_(std::move(options)) {}

VectorValueFunction LagrangianOracle::start_from(const Scalarisation& lambda) const {
  if (options_.warm_start && last_) return warm_restart(*model_, last_->values, last_->lambda, lambda);
  return VectorValueFunction(model_->num_states(), model_->n());
}

void LagrangianOracle::absorb(const SearchResult& result) {
  accumulate(totals_, result.stats);
  ++trace_.lambda_ssps;
}

LagrangianSample LagrangianOracle::operator()(const Scalarisation& lambda) {
  SearchOptions search = options_.search;
  search.mode = SearchMode::Plain;
  SearchResult result = solve_lambda_ssp(*model_, lambda, start_from(lambda), heuristic_.at(lambda), search);
  absorb(result);
  LagrangianSample sample = package(*model_, lambda, result);
  trace_.samples.push_back(sample);
  last_ = std::move(result);
  return sample;
}

SearchResult LagrangianOracle::resolve(const Scalarisation& lambda, SearchMode mode, double tie_epsilon) {
  SearchOptions search = options_.search;
  search.mode = mode;
  if (tie_epsilon >= 0.0) search.tie_epsilon = tie_epsilon;
  VectorValueFunction v = start_from(lambda);
  // A change of mode changes which excluded actions matter, so every
  // explored pair is rechecked.
  for (StateId s = 0; s < v.num_states(); ++s) {
    if (!v.partial().expanded[s]) continue;
    for (ActionId a : model_->actions(s)) v.mark(s, a);
  }
  SearchResult result = solve_lambda_ssp(*model_, lambda, std::move(v), heuristic_.at(lambda), search);
  absorb(result);
  last_ = result;
  return result;
}

LagrangianSample oracle(const CsspModel& model, const Scalarisation& lambda, const VectorValueFunction* warm,
                        const HeuristicVector& h, double epsilon) {
  SearchOptions search;
  search.epsilon = epsilon;
  VectorValueFunction v = warm ? *warm : VectorValueFunction(model.num_states(), model.n());
  const SearchResult result = solve_lambda_ssp(model, lambda, std::move(v), h, search);
  return package(model, lambda, result);
}

LagrangianSample exact_line_search(LagrangianOracle& oracle, const Scalarisation& lambda, int i) {
  const ScalariseOptions& opt = oracle.options();
  auto at = [&](double x) {
    Eigen::VectorXd point = lambda.lambda();
    point[i] = x;
    return oracle(Scalarisation(point));
  };

  double l = 0.0;
  LagrangianSample lo = at(l);
  if (lo.g[i] <= 0.0) return lo;

  double u = 1.0;
  LagrangianSample hi = at(u);
  while (hi.g[i] > 0.0) {
    u *= 2.0;
    if (u > opt.line_search_cap) {
      throw UnboundedCoordinate("subgradient of coordinate " + std::to_string(i + 1) +
                                " stays positive past " + std::to_string(opt.line_search_cap));
    }
    l = u / 2.0;
    lo = std::move(hi);
    hi = at(u);
  }

  constexpr int kMaxRounds = 200;
  for (int round = 0; round < kMaxRounds && u - l > opt.eta; ++round) {
    const double gl = lo.g[i];
    const double gu = hi.g[i];
    if (!(gl > 0.0) || !(gu <= 0.0)) break;
    const double m = std::clamp((hi.L - lo.L + gl * l - gu * u) / (gl - gu), l, u);
    if (m - l <= 1e-12) return lo;
    if (u - m <= 1e-12) return hi;
    const double predicted = lo.L + gl * (m - l);
    LagrangianSample mid = at(m);
    const double tol = opt.search.epsilon + 1e-9 * (1.0 + std::abs(predicted));
    if (mid.L >= predicted - tol || mid.g[i] == 0.0) return mid;
    if (mid.g[i] > 0.0) {
      l = m;
      lo = std::move(mid);
    } else {
      u = m;
      hi = std::move(mid);
    }
  }
  return lo.L >= hi.L ? lo : hi;
}

std::pair<Scalarisation, LagrangianSample> coordinate_search(LagrangianOracle& oracle) {
  const CsspModel& model = oracle.model();
  const double eta = oracle.options().eta;
  LagrangianSample current = oracle(Scalarisation::zeros(model.n()));
  oracle.trace().steps.push_back(current.lambda);

  constexpr int kMaxSweeps = 100000;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool improved = false;
    for (int i = 0; i < model.n(); ++i) {
      LagrangianSample next = exact_line_search(oracle, current.lambda, i);
      if (next.L > current.L + eta) improved = true;
      if (next.L >= current.L) current = std::move(next);
      oracle.trace().steps.push_back(current.lambda);
    }
    if (!improved) break;
  }
  oracle.trace().outcome = SearchOutcome::CoordinateConverged;
  return {current.lambda, current};
}

bool detect_coordinate_failure(double extracted_primary_cost, double lagrangian, double slack) {
  return extracted_primary_cost > lagrangian + slack + 1e-6 * (1.0 + std::abs(lagrangian));
}

LagrangianSample subgradient_fallback(LagrangianOracle& oracle, const Scalarisation& start) {
  const ScalariseOptions& opt = oracle.options();
  LagrangianSample current = oracle(start);
  LagrangianSample best = current;
  for (long k = 0;; ++k) {
    const double alpha = opt.alpha0 / (1.0 + static_cast<double>(k));
    if (alpha < opt.eta) break;
    const Scalarisation next(current.lambda.lambda() + alpha * current.g);
    if (next == current.lambda) break;
    if (k >= opt.max_subgradient_iters) {
      throw IterationCapExceeded("subgradient method exceeded " + std::to_string(opt.max_subgradient_iters) +
                                 " steps");
    }
    current = oracle(next);
    if (current.L > best.L) best = current;
  }
  oracle.trace().outcome = SearchOutcome::SubgradientConverged;
  return best;
}

std::vector<std::pair<Scalarisation, double>> sample_surface(const CsspModel& model,
                                                             const std::vector<Scalarisation>& grid,
                                                             HeuristicKind heuristic,
                                                             const ScalariseOptions& options) {
  LagrangianOracle oracle(model, heuristic, options);
  std::vector<std::pair<Scalarisation, double>> out;
  out.reserve(grid.size());
  for (const auto& lambda : grid) {
    if (lambda.n() != model.n()) {
      throw DimensionMismatch("grid point has " + std::to_string(lambda.n()) + " entries, expected " +
                              std::to_string(model.n()));
    }
    out.emplace_back(lambda, oracle(lambda).L);
  }
  return out;
}

}  // namespace carl
