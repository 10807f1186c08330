#pragma once

// Reference computations used to check the library. Each one is written
// from the definitions, without sharing code paths with the solvers.

#include "carl/domains.hpp"
#include "carl/errors.hpp"
#include "carl/extract.hpp"
#include "carl/model.hpp"
#include "carl/scalarisation.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <vector>

namespace oracle {

using carl::ActionId;
using carl::CsspModel;
using carl::StateId;

inline double scalar_cost(const CsspModel& m, ActionId a, const carl::Scalarisation& lambda) {
  return lambda.project(m.action(a).cost);
}

/// Optimal scalarised cost-to-go without the terminal constant, by
/// Gauss-Seidel value iteration from zero until the largest change is <= tol.
inline std::vector<double> value_iteration(const CsspModel& m, const carl::Scalarisation& lambda,
                                           double tol = 1e-10, long max_sweeps = 10000000) {
  std::vector<double> v(m.num_states(), 0.0);
  for (long sweep = 0; sweep < max_sweeps; ++sweep) {
    double change = 0.0;
    for (StateId s = 0; s < m.num_states(); ++s) {
      if (m.is_goal(s) || m.actions(s).empty()) continue;
      double best = std::numeric_limits<double>::infinity();
      for (ActionId a : m.actions(s)) {
        double q = scalar_cost(m, a, lambda);
        for (const auto& o : m.action(a).outcomes) q += o.prob * v[o.target];
        best = std::min(best, q);
      }
      change = std::max(change, std::abs(best - v[s]));
      v[s] = best;
    }
    if (change <= tol) return v;
  }
  return v;
}

inline double q_star(const CsspModel& m, const std::vector<double>& v, ActionId a,
                     const carl::Scalarisation& lambda) {
  double q = scalar_cost(m, a, lambda);
  for (const auto& o : m.action(a).outcomes) q += o.prob * v[o.target];
  return q;
}

/// L(lambda) from value iteration.
inline double lagrangian(const CsspModel& m, const carl::Scalarisation& lambda) {
  return value_iteration(m, lambda)[m.initial()] + lambda.terminal(m.bounds());
}

/// Expected cost vector by recursion over every outcome; only for policies
/// whose envelope is acyclic.
inline Eigen::VectorXd exhaustive_expectation(const CsspModel& m, const carl::StochasticPolicy& pi, StateId s) {
  Eigen::VectorXd total = Eigen::VectorXd::Zero(m.n() + 1);
  if (m.is_goal(s)) return total;
  for (const auto& c : pi.choices(s)) {
    Eigen::VectorXd branch = m.action(c.action).cost;
    for (const auto& o : m.action(c.action).outcomes) branch += o.prob * exhaustive_expectation(m, pi, o.target);
    total += c.prob * branch;
  }
  return total;
}

struct MonteCarlo {
  Eigen::VectorXd mean;
  Eigen::VectorXd stderr_;
};

/// Simulates `trials` episodes of `pi` from the initial state.
inline MonteCarlo monte_carlo(const CsspModel& m, const carl::StochasticPolicy& pi, long trials,
                              std::uint64_t seed, long max_steps = 100000) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int k = m.n() + 1;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(k);
  for (long t = 0; t < trials; ++t) {
    Eigen::VectorXd episode = Eigen::VectorXd::Zero(k);
    StateId s = m.initial();
    for (long step = 0; step < max_steps && !m.is_goal(s); ++step) {
      double r = unit(rng);
      ActionId a = pi.choices(s).back().action;
      for (const auto& c : pi.choices(s)) {
        if (r < c.prob) {
          a = c.action;
          break;
        }
        r -= c.prob;
      }
      episode += m.action(a).cost;
      double u = unit(rng);
      StateId next = m.action(a).outcomes.back().target;
      for (const auto& o : m.action(a).outcomes) {
        if (u < o.prob) {
          next = o.target;
          break;
        }
        u -= o.prob;
      }
      s = next;
    }
    sum += episode;
    sum_sq += episode.cwiseProduct(episode);
  }
  MonteCarlo mc;
  const double n = static_cast<double>(trials);
  mc.mean = sum / n;
  const Eigen::VectorXd var = (sum_sq / n - mc.mean.cwiseProduct(mc.mean)).cwiseMax(0.0);
  mc.stderr_ = (var / n).cwiseSqrt();
  return mc;
}

/// Solves the expected-cost equations of a deterministic policy by plain
/// fixed-point iteration; nullopt when the policy is open or some state on its
/// envelope has no path to a goal.
inline std::optional<Eigen::VectorXd> iterate_policy(const CsspModel& m, const carl::DeterministicPolicy& pi,
                                                     double tol = 1e-12, long max_sweeps = 1000000) {
  // Envelope by graph search, then backward reachability of the goals.
  std::vector<char> on(m.num_states(), 0);
  std::vector<StateId> stack{m.initial()};
  on[m.initial()] = 1;
  while (!stack.empty()) {
    const StateId s = stack.back();
    stack.pop_back();
    if (m.is_goal(s)) continue;
    if (!pi[s]) return std::nullopt;
    for (const auto& o : m.action(*pi[s]).outcomes) {
      if (!on[o.target]) {
        on[o.target] = 1;
        stack.push_back(o.target);
      }
    }
  }
  std::vector<char> reaches(m.num_states(), 0);
  for (StateId g : m.goals()) reaches[g] = 1;
  for (bool grew = true; grew;) {
    grew = false;
    for (StateId s = 0; s < m.num_states(); ++s) {
      if (!on[s] || reaches[s] || m.is_goal(s)) continue;
      for (const auto& o : m.action(*pi[s]).outcomes) {
        if (reaches[o.target]) {
          reaches[s] = 1;
          grew = true;
          break;
        }
      }
    }
  }
  for (StateId s = 0; s < m.num_states(); ++s) {
    if (on[s] && !reaches[s]) return std::nullopt;
  }

  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(m.n() + 1, m.num_states());
  for (long sweep = 0; sweep < max_sweeps; ++sweep) {
    double change = 0.0;
    for (StateId s = 0; s < m.num_states(); ++s) {
      if (!on[s] || m.is_goal(s)) continue;
      const auto& act = m.action(*pi[s]);
      Eigen::VectorXd next = act.cost;
      for (const auto& o : act.outcomes) next += o.prob * v.col(o.target);
      change = std::max(change, (next - v.col(s)).cwiseAbs().maxCoeff());
      v.col(s) = next;
    }
    if (change <= tol * (1.0 + v.cwiseAbs().maxCoeff())) break;
  }
  return Eigen::VectorXd(v.col(m.initial()));
}

/// Every closed deterministic policy over the states reachable from the
/// initial state, visited through `visit`. Stops after `cap` policies.
inline void for_each_policy(const CsspModel& m, const std::function<void(const carl::DeterministicPolicy&)>& visit,
                            long cap = 200000) {
  // All-outcome reachable states: every closed policy lives inside them.
  std::vector<StateId> states;
  std::vector<char> seen(m.num_states(), 0);
  std::vector<StateId> stack{m.initial()};
  seen[m.initial()] = 1;
  while (!stack.empty()) {
    const StateId s = stack.back();
    stack.pop_back();
    if (!m.is_goal(s)) states.push_back(s);
    for (ActionId a : m.actions(s)) {
      for (const auto& o : m.action(a).outcomes) {
        if (!seen[o.target]) {
          seen[o.target] = 1;
          stack.push_back(o.target);
        }
      }
    }
  }
  std::vector<std::size_t> index(states.size(), 0);
  long count = 0;
  while (count++ < cap) {
    carl::DeterministicPolicy pi(m.num_states());
    for (std::size_t k = 0; k < states.size(); ++k) pi.set(states[k], m.actions(states[k])[index[k]]);
    visit(pi);
    std::size_t k = 0;
    while (k < states.size() && ++index[k] == m.actions(states[k]).size()) index[k++] = 0;
    if (k == states.size()) break;
  }
}

struct Constituent {
  double weight;
  carl::DeterministicPolicy policy;
};

/// Peels deterministic policies off an occupation measure: follow the
/// largest-flow action in every state, take the bottleneck flow ratio as the
/// weight, subtract, repeat.
inline std::vector<Constituent> flow_decomposition(const CsspModel& m, const carl::OccupationMeasure& x,
                                                   double floor = 1e-9, int max_parts = 64) {
  std::map<std::pair<StateId, ActionId>, double> flow;
  for (std::size_t k = 0; k < x.pairs.size(); ++k) flow[x.pairs[k]] = x.x[static_cast<Eigen::Index>(k)];

  std::vector<Constituent> parts;
  double remaining = 1.0;
  while (remaining > floor && static_cast<int>(parts.size()) < max_parts) {
    carl::DeterministicPolicy pi(m.num_states());
    std::vector<double> out(m.num_states(), 0.0);
    for (const auto& [sa, f] : flow) out[sa.first] += f;
    for (const auto& [sa, f] : flow) {
      const auto current = pi[sa.first];
      if (f > floor && (!current || f > flow[{sa.first, *current}])) pi.set(sa.first, sa.second);
    }
    // Occupancy of the peeled policy, scaled to unit start mass.
    carl::StochasticPolicy stoch = pi.to_stochastic();
    std::vector<StateId> env;
    try {
      env = carl::envelope(m, stoch, m.initial());
    } catch (const carl::Error&) {
      break;
    }
    const int ne = static_cast<int>(env.size());
    std::map<StateId, int> pos;
    for (int i = 0; i < ne; ++i) pos[env[i]] = i;
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(ne, ne);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(ne);
    b[pos[m.initial()]] = 1.0;
    for (StateId s : env) {
      if (m.is_goal(s)) continue;
      for (const auto& o : m.action(*pi[s]).outcomes) {
        if (!m.is_goal(o.target)) a(pos[o.target], pos[s]) -= o.prob;
      }
    }
    const Eigen::VectorXd occ = a.partialPivLu().solve(b);
    double weight = remaining;
    for (StateId s : env) {
      if (m.is_goal(s) || occ[pos[s]] <= floor) continue;
      weight = std::min(weight, flow[{s, *pi[s]}] / occ[pos[s]]);
    }
    if (!(weight > floor)) break;
    for (StateId s : env) {
      if (!m.is_goal(s)) flow[{s, *pi[s]}] -= weight * occ[pos[s]];
    }
    remaining -= weight;
    parts.push_back({weight, pi});
  }
  return parts;
}

/// Brute-force LP optimum for min c.x s.t. A x <= b, x >= 0 by enumerating
/// every basis of the stacked system; nullopt when infeasible.
inline std::optional<double> vertex_enumeration_min(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                                    const Eigen::VectorXd& c) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  Eigen::MatrixXd rows(m + n, n);
  Eigen::VectorXd rhs(m + n);
  rows << A, -Eigen::MatrixXd::Identity(n, n);
  rhs << b, Eigen::VectorXd::Zero(n);
  std::optional<double> best;
  std::vector<int> pick(n);
  std::function<void(int, int)> choose = [&](int start, int depth) {
    if (depth == n) {
      Eigen::MatrixXd sub(n, n);
      Eigen::VectorXd r(n);
      for (int i = 0; i < n; ++i) {
        sub.row(i) = rows.row(pick[i]);
        r[i] = rhs[pick[i]];
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
      if (!lu.isInvertible()) return;
      const Eigen::VectorXd x = lu.solve(r);
      if (((rows * x) - rhs).maxCoeff() > 1e-9) return;
      const double value = c.dot(x);
      if (!best || value < *best) best = value;
      return;
    }
    for (int k = start; k < m + n; ++k) {
      pick[depth] = k;
      choose(k + 1, depth + 1);
    }
  };
  choose(0, 0);
  return best;
}

/// Random CSSP parameters used across the property suites.
inline carl::GeneratorSpec random_spec(std::uint64_t seed, int max_states = 40) {
  carl::GeneratorSpec g;
  g.kind = carl::DomainKind::Random;
  g.seed = seed;
  g.states = 5 + static_cast<int>(seed % static_cast<std::uint64_t>(max_states - 4));
  g.n = 1 + static_cast<int>(seed % 2);
  g.actions_per_state = 2 + static_cast<int>(seed % 3);
  return g;
}

}  // namespace oracle
