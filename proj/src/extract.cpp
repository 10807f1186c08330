#include "carl/extract.hpp"

#include "carl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <string>

namespace carl {

double OccupationMeasure::out(StateId s) const {
  double total = 0.0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    if (pairs[k].first == s) total += x[static_cast<Eigen::Index>(k)];
  }
  return total;
}

double OccupationMeasure::in(const CsspModel& model, StateId s) const {
  double total = 0.0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    for (const auto& o : model.action(pairs[k].second).outcomes) {
      if (o.target == s) total += o.prob * x[static_cast<Eigen::Index>(k)];
    }
  }
  return total;
}

CostVector OccupationMeasure::cost(const CsspModel& model) const {
  CostVector c = CostVector::Zero(model.n() + 1);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    c.noalias() += x[static_cast<Eigen::Index>(k)] * model.action(pairs[k].second).cost;
  }
  return c;
}

double OccupationMeasure::flow_residual(const CsspModel& model) const {
  std::vector<double> out_flow(model.num_states(), 0.0);
  std::vector<double> in_flow(model.num_states(), 0.0);
  std::vector<char> touched(model.num_states(), 0);
  touched[model.initial()] = 1;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const double xk = x[static_cast<Eigen::Index>(k)];
    out_flow[pairs[k].first] += xk;
    touched[pairs[k].first] = 1;
    for (const auto& o : model.action(pairs[k].second).outcomes) {
      in_flow[o.target] += o.prob * xk;
      touched[o.target] = 1;
    }
  }
  double worst = 0.0;
  double goal_in = 0.0;
  for (StateId s = 0; s < model.num_states(); ++s) {
    if (model.is_goal(s)) {
      goal_in += in_flow[s];
    } else if (touched[s]) {
      const double expected = s == model.initial() ? 1.0 : 0.0;
      worst = std::max(worst, std::abs(out_flow[s] - in_flow[s] - expected));
    }
  }
  if (!model.is_goal(model.initial())) worst = std::max(worst, std::abs(goal_in - 1.0));
  return worst;
}

namespace {

// Flow conservation and unit goal inflow over the given pairs.
void add_flow_constraints(const CsspModel& model, LinearProgram& lp, const PolicySupport& pairs) {
  std::map<StateId, std::map<int, double>> rows;
  std::map<int, double> goal_row;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const int var = static_cast<int>(k);
    rows[pairs[k].first][var] += 1.0;
    for (const auto& o : model.action(pairs[k].second).outcomes) {
      if (model.is_goal(o.target)) {
        goal_row[var] += o.prob;
      } else {
        rows[o.target][var] -= o.prob;
      }
    }
  }
  rows[model.initial()];
  for (const auto& [s, terms] : rows) {
    lp.add_constraint(std::vector<std::pair<int, double>>(terms.begin(), terms.end()), Relation::Equal,
                      s == model.initial() ? 1.0 : 0.0);
  }
  lp.add_constraint(std::vector<std::pair<int, double>>(goal_row.begin(), goal_row.end()), Relation::Equal, 1.0);
}

std::vector<std::pair<int, double>> cost_row(const CsspModel& model, const PolicySupport& pairs, int i) {
  std::vector<std::pair<int, double>> terms;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const double c = model.action(pairs[k].second).cost[i];
    if (c != 0.0) terms.emplace_back(static_cast<int>(k), c);
  }
  return terms;
}

// Makes `policy` closed from the initial state: reachable states left
// undefined take their largest-flow action, or `fallback` when they carry no
// flow at all.
template <typename Fallback>
void close_policy(const CsspModel& model, const OccupationMeasure& x, StochasticPolicy& policy,
                  Fallback&& fallback) {
  std::vector<char> seen(model.num_states(), 0);
  std::queue<StateId> frontier;
  seen[model.initial()] = 1;
  frontier.push(model.initial());
  while (!frontier.empty()) {
    const StateId s = frontier.front();
    frontier.pop();
    if (model.is_goal(s)) continue;
    if (!policy.defined(s)) {
      ActionId pick = -1;
      double best = 0.0;
      for (std::size_t k = 0; k < x.pairs.size(); ++k) {
        if (x.pairs[k].first == s && x.x[static_cast<Eigen::Index>(k)] > best) {
          best = x.x[static_cast<Eigen::Index>(k)];
          pick = x.pairs[k].second;
        }
      }
      if (pick < 0 && model.actions(s).empty()) continue;
      if (pick < 0) pick = fallback(s);
      policy.set_deterministic(s, pick);
    }
    for (const auto& c : policy.choices(s)) {
      if (!(c.prob > 0.0)) continue;
      for (const auto& o : model.action(c.action).outcomes) {
        if (!seen[o.target]) {
          seen[o.target] = 1;
          frontier.push(o.target);
        }
      }
    }
  }
}

OccupationMeasure measure_from(const PolicySupport& pairs, const Eigen::VectorXd& x) {
  return {pairs, x.cwiseMax(0.0)};
}

}  // namespace

XpiSystem build_xpi_system(const CsspModel& model, const Scalarisation& lambda, double scalar_value_s0,
                           const PolicySupport& support, double epsilon) {
  if (support.empty()) throw EmptySupport("complementary-slackness system has an empty support");
  if (lambda.n() != model.n()) {
    throw DimensionMismatch("scalarisation has " + std::to_string(lambda.n()) + " entries, expected " +
                            std::to_string(model.n()));
  }
  XpiSystem sys{LinearProgram(static_cast<int>(support.size())), support};
  add_flow_constraints(model, sys.lp, support);

  const double target = scalar_value_s0 + lambda.terminal(model.bounds());
  const double band = (model.n() + 1) * epsilon + 1e-7;
  const auto primary = cost_row(model, support, 0);
  sys.lp.add_constraint(primary, Relation::LessEqual, target + band);
  sys.lp.add_constraint(primary, Relation::GreaterEqual, target - band);

  for (int i = 0; i < model.n(); ++i) {
    const Relation rel = lambda[i] > kPositiveMultiplier ? Relation::Equal : Relation::LessEqual;
    sys.lp.add_constraint(cost_row(model, support, i + 1), rel, model.bounds()[i]);
  }
  return sys;
}

StochasticPolicy decode_policy(const CsspModel& model, const OccupationMeasure& x) {
  StochasticPolicy policy(model.num_states());
  std::map<StateId, std::vector<ActionChoice>> rows;
  std::map<StateId, double> out;
  for (std::size_t k = 0; k < x.pairs.size(); ++k) {
    out[x.pairs[k].first] += x.x[static_cast<Eigen::Index>(k)];
  }
  for (std::size_t k = 0; k < x.pairs.size(); ++k) {
    const auto [s, a] = x.pairs[k];
    const double xk = x.x[static_cast<Eigen::Index>(k)];
    if (out[s] > kMinimumFlow && xk > 0.0) rows[s].push_back({a, xk / out[s]});
  }
  for (auto& [s, choices] : rows) policy.set(s, std::move(choices));
  return policy;
}

FlatSolution flat_dual_solve(const CsspModel& model, const SimplexOptions& options) {
  FlatSolution sol;
  sol.policy = StochasticPolicy(model.num_states());
  if (model.is_goal(model.initial())) {
    sol.cost = CostVector::Zero(model.n() + 1);
    return sol;
  }

  std::vector<char> seen(model.num_states(), 0);
  std::vector<StateId> stack{model.initial()};
  seen[model.initial()] = 1;
  PolicySupport pairs;
  while (!stack.empty()) {
    const StateId s = stack.back();
    stack.pop_back();
    for (ActionId a : model.actions(s)) {
      pairs.emplace_back(s, a);
      for (const auto& o : model.action(a).outcomes) {
        if (!seen[o.target]) {
          seen[o.target] = 1;
          stack.push_back(o.target);
        }
      }
    }
  }
  std::sort(pairs.begin(), pairs.end());
  if (pairs.empty()) throw Infeasible("initial state has no applicable action");

  LinearProgram lp(static_cast<int>(pairs.size()));
  add_flow_constraints(model, lp, pairs);
  for (int i = 0; i < model.n(); ++i) {
    lp.add_constraint(cost_row(model, pairs, i + 1), Relation::LessEqual, model.bounds()[i]);
  }
  Eigen::VectorXd c(pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) c[static_cast<Eigen::Index>(k)] = model.action(pairs[k].second).cost[0];
  lp.set_objective(Sense::Minimise, c);

  const LpSolution lps = solve_lp(lp, options);
  sol.pivots = lps.pivots;
  if (lps.status != LpStatus::Optimal) throw Infeasible("no policy satisfies the secondary-cost bounds");

  sol.measure = measure_from(pairs, lps.x);
  sol.policy = decode_policy(model, sol.measure);
  close_policy(model, sol.measure, sol.policy, [&](StateId s) { return model.actions(s).front(); });
  sol.cost = sol.measure.cost(model);
  return sol;
}

PolicySupport tied_support(const CsspModel& model, const SearchResult& result) {
  PolicySupport pairs;
  for (StateId s : result.envelope) {
    if (model.is_goal(s)) continue;
    if (result.tied && !(*result.tied)[s].empty()) {
      for (ActionId a : (*result.tied)[s]) pairs.emplace_back(s, a);
    } else if (auto a = result.greedy[s]) {
      pairs.emplace_back(s, *a);
    }
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return pairs;
}

Extraction extract_opt_policy(const CsspModel& model, const Scalarisation& lambda, const SearchResult& strong,
                              double epsilon, const SimplexOptions& options) {
  Extraction ex;
  ex.policy = StochasticPolicy(model.num_states());
  if (model.is_goal(model.initial())) {
    ex.cost = CostVector::Zero(model.n() + 1);
    return ex;
  }

  const double v0 = lambda.project(strong.values(model.initial()));
  XpiSystem sys = build_xpi_system(model, lambda, v0, tied_support(model, strong), epsilon);
  const LpSolution lps = solve_lp(sys.lp, options);
  ex.pivots = lps.pivots;
  if (lps.status != LpStatus::Optimal) {
    throw ExtractionInfeasible("complementary-slackness system is infeasible at the given multipliers");
  }

  ex.measure = measure_from(sys.pairs, lps.x);
  ex.policy = decode_policy(model, ex.measure);
  close_policy(model, ex.measure, ex.policy, [&](StateId s) {
    if (auto a = strong.greedy[s]) return *a;
    return model.actions(s).front();
  });
  try {
    ex.cost = evaluate_policy(model, ex.policy);
  } catch (const ImproperPolicy& e) {
    throw ExtractionInfeasible(std::string("extracted policy is improper: ") + e.what());
  }
  return ex;
}

}  // namespace carl
