#include "carl/model.hpp"

#include "carl/errors.hpp"
#include "carl/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <string>

namespace carl {

namespace {

std::string quoted(const std::string& s) { return "'" + s + "'"; }

}  // namespace

CsspModel::CsspModel(const ModelSpec& spec) : n_(spec.n) {
  if (spec.states.empty()) throw MalformedModel("model has no states");
  if (spec.n < 0) throw MalformedModel("negative secondary cost count");

  state_names_ = spec.states;
  for (std::size_t i = 0; i < state_names_.size(); ++i) {
    if (!state_index_.emplace(state_names_[i], static_cast<StateId>(i)).second) {
      throw MalformedModel("duplicate state " + quoted(state_names_[i]));
    }
  }
  auto lookup = [&](const std::string& name, const char* what) {
    auto it = state_index_.find(name);
    if (it == state_index_.end()) {
      throw MalformedModel(std::string(what) + " refers to unknown state " + quoted(name));
    }
    return it->second;
  };

  initial_ = lookup(spec.initial, "initial");
  is_goal_.assign(state_names_.size(), 0);
  for (const auto& g : spec.goals) is_goal_[lookup(g, "goal")] = 1;
  for (StateId s = 0; s < num_states(); ++s) {
    if (is_goal_[s]) goals_.push_back(s);
  }

  if (static_cast<int>(spec.bounds.size()) != n_) {
    throw MalformedModel("expected " + std::to_string(n_) + " bounds, got " +
                         std::to_string(spec.bounds.size()));
  }
  bounds_ = Eigen::Map<const Eigen::VectorXd>(spec.bounds.data(), n_);
  for (int i = 0; i < n_; ++i) {
    if (!std::isfinite(bounds_[i]) || bounds_[i] < 0.0) {
      throw MalformedModel("bound " + std::to_string(i + 1) + " must be finite and nonnegative");
    }
  }

  state_actions_.resize(state_names_.size());
  predecessors_.resize(state_names_.size());

  for (const auto& as : spec.actions) {
    if (as.name.empty()) throw MalformedModel("action with empty name");
    const StateId src = lookup(as.source, "action source");
    if (static_cast<int>(as.cost.size()) != n_ + 1) {
      throw MalformedModel("action " + quoted(as.name) + " has " + std::to_string(as.cost.size()) +
                           " costs, expected " + std::to_string(n_ + 1));
    }
    for (double c : as.cost) {
      if (!std::isfinite(c)) throw MalformedModel("action " + quoted(as.name) + " has a non-finite cost");
    }
    if (!(as.cost[0] > 0.0)) {
      throw NonpositivePrimaryCost("action " + quoted(as.name) + " has primary cost " +
                                   std::to_string(as.cost[0]));
    }
    for (int i = 1; i <= n_; ++i) {
      if (as.cost[i] < 0.0) {
        throw MalformedModel("action " + quoted(as.name) + " has negative secondary cost");
      }
    }
    if (as.outcomes.empty()) throw BadDistribution("action " + quoted(as.name) + " has no outcomes");

    std::map<StateId, double> merged;
    double total = 0.0;
    for (const auto& [target, prob] : as.outcomes) {
      const StateId t = lookup(target, "outcome");
      if (!std::isfinite(prob) || prob < 0.0) {
        throw BadDistribution("action " + quoted(as.name) + " has a negative probability");
      }
      merged[t] += prob;
      total += prob;
    }
    if (std::abs(total - 1.0) > kProbabilityTolerance) {
      throw BadDistribution("outcomes of action " + quoted(as.name) + " sum to " + std::to_string(total));
    }

    if (is_goal_[src]) continue;

    Action a;
    a.name = as.name;
    a.source = src;
    a.cost = Eigen::Map<const Eigen::VectorXd>(as.cost.data(), n_ + 1);
    for (const auto& [t, p] : merged) {
      if (p > 0.0) a.outcomes.push_back({t, p});
    }
    const auto id = static_cast<ActionId>(actions_.size());
    if (!action_index_.emplace(a.name, id).second) {
      throw MalformedModel("duplicate action " + quoted(a.name));
    }
    state_actions_[src].push_back(id);
    for (const auto& o : a.outcomes) predecessors_[o.target].push_back(id);
    actions_.push_back(std::move(a));
  }
}

std::optional<StateId> CsspModel::find_state(const std::string& name) const {
  auto it = state_index_.find(name);
  if (it == state_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<ActionId> CsspModel::find_action(const std::string& name) const {
  auto it = action_index_.find(name);
  if (it == action_index_.end()) return std::nullopt;
  return it->second;
}

ModelSpec CsspModel::to_spec() const {
  ModelSpec spec;
  spec.states = state_names_;
  spec.initial = state_names_[initial_];
  for (StateId g : goals_) spec.goals.push_back(state_names_[g]);
  spec.n = n_;
  spec.bounds.assign(bounds_.data(), bounds_.data() + n_);
  for (const auto& a : actions_) {
    ActionSpec as;
    as.name = a.name;
    as.source = state_names_[a.source];
    as.cost.assign(a.cost.data(), a.cost.data() + a.cost.size());
    for (const auto& o : a.outcomes) as.outcomes.emplace_back(state_names_[o.target], o.prob);
    spec.actions.push_back(std::move(as));
  }
  return spec;
}

double StochasticPolicy::prob(StateId s, ActionId a) const {
  for (const auto& c : table_[s]) {
    if (c.action == a) return c.prob;
  }
  return 0.0;
}

StochasticPolicy DeterministicPolicy::to_stochastic() const {
  StochasticPolicy pi(num_states());
  for (StateId s = 0; s < num_states(); ++s) {
    if (table_[s]) pi.set_deterministic(s, *table_[s]);
  }
  return pi;
}

void validate_policy(const CsspModel& model, const StochasticPolicy& policy) {
  if (policy.num_states() != model.num_states()) {
    throw DimensionMismatch("policy covers " + std::to_string(policy.num_states()) +
                            " states, model has " + std::to_string(model.num_states()));
  }
  for (StateId s = 0; s < model.num_states(); ++s) {
    if (!policy.defined(s)) continue;
    double total = 0.0;
    for (const auto& c : policy.choices(s)) {
      if (c.action < 0 || c.action >= model.num_actions() || model.action(c.action).source != s) {
        throw MalformedModel("policy maps state " + quoted(model.state_name(s)) +
                             " to an inapplicable action");
      }
      if (!(c.prob >= 0.0)) {
        throw BadDistribution("policy has a negative probability at " + quoted(model.state_name(s)));
      }
      total += c.prob;
    }
    if (std::abs(total - 1.0) > kProbabilityTolerance) {
      throw BadDistribution("policy probabilities at " + quoted(model.state_name(s)) + " sum to " +
                            std::to_string(total));
    }
  }
}

std::vector<StateId> envelope(const CsspModel& model, const StochasticPolicy& policy, StateId from) {
  std::vector<char> seen(model.num_states(), 0);
  std::vector<StateId> order;
  std::queue<StateId> frontier;
  seen[from] = 1;
  frontier.push(from);
  while (!frontier.empty()) {
    const StateId s = frontier.front();
    frontier.pop();
    order.push_back(s);
    if (model.is_goal(s)) continue;
    if (!policy.defined(s)) {
      throw OpenPolicy("policy undefined at reachable state " + quoted(model.state_name(s)));
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
  return order;
}

PolicySupport support(const CsspModel& model, const StochasticPolicy& policy) {
  PolicySupport pairs;
  for (StateId s : envelope(model, policy, model.initial())) {
    if (model.is_goal(s)) continue;
    for (const auto& c : policy.choices(s)) {
      if (c.prob > 0.0) pairs.emplace_back(s, c.action);
    }
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return pairs;
}

namespace {

constexpr int kDenseEvaluationLimit = 2000;
constexpr double kIterativeResidual = 1e-10;
constexpr double kImproperThreshold = 1e-9;

// Sparse restriction of a policy's Markov chain to its non-goal envelope.
struct EnvelopeChain {
  std::vector<StateId> states;
  std::vector<int> local;  // model state -> row, -1 outside
  std::vector<std::vector<std::pair<int, double>>> rows;
  Eigen::VectorXd goal_mass;
  Eigen::MatrixXd cost;  // expected immediate cost vector per row
};

EnvelopeChain build_chain(const CsspModel& model, const StochasticPolicy& policy) {
  EnvelopeChain chain;
  chain.local.assign(model.num_states(), -1);
  for (StateId s : envelope(model, policy, model.initial())) {
    if (model.is_goal(s)) continue;
    chain.local[s] = static_cast<int>(chain.states.size());
    chain.states.push_back(s);
  }
  const auto m = static_cast<int>(chain.states.size());
  chain.rows.resize(m);
  chain.goal_mass = Eigen::VectorXd::Zero(m);
  chain.cost = Eigen::MatrixXd::Zero(m, model.n() + 1);
  for (int r = 0; r < m; ++r) {
    std::map<int, double> row;
    for (const auto& c : policy.choices(chain.states[r])) {
      if (!(c.prob > 0.0)) continue;
      const Action& a = model.action(c.action);
      chain.cost.row(r) += c.prob * a.cost.transpose();
      for (const auto& o : a.outcomes) {
        const int t = chain.local[o.target];
        if (t < 0) {
          chain.goal_mass[r] += c.prob * o.prob;
        } else {
          row[t] += c.prob * o.prob;
        }
      }
    }
    chain.rows[r].assign(row.begin(), row.end());
  }
  return chain;
}

// Rows that cannot reach a goal along positive-probability edges.
std::vector<int> stranded_rows(const EnvelopeChain& chain) {
  const auto m = static_cast<int>(chain.states.size());
  std::vector<std::vector<int>> reverse(m);
  for (int r = 0; r < m; ++r) {
    for (const auto& [t, p] : chain.rows[r]) reverse[t].push_back(r);
  }
  std::vector<char> reaches(m, 0);
  std::queue<int> frontier;
  for (int r = 0; r < m; ++r) {
    if (chain.goal_mass[r] > 0.0) {
      reaches[r] = 1;
      frontier.push(r);
    }
  }
  while (!frontier.empty()) {
    const int r = frontier.front();
    frontier.pop();
    for (int p : reverse[r]) {
      if (!reaches[p]) {
        reaches[p] = 1;
        frontier.push(p);
      }
    }
  }
  std::vector<int> out;
  for (int r = 0; r < m; ++r) {
    if (!reaches[r]) out.push_back(r);
  }
  return out;
}

Eigen::MatrixXd dense_solve(const EnvelopeChain& chain, const Eigen::MatrixXd& rhs) {
  const auto m = static_cast<Eigen::Index>(chain.states.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(m, m);
  for (Eigen::Index r = 0; r < m; ++r) {
    for (const auto& [t, p] : chain.rows[r]) a(r, t) -= p;
  }
  return DenseLu<double>(std::move(a)).solve(rhs);
}

Eigen::MatrixXd gauss_seidel(const EnvelopeChain& chain, const Eigen::MatrixXd& rhs) {
  const auto m = static_cast<Eigen::Index>(chain.states.size());
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(m, rhs.cols());
  for (;;) {
    double residual = 0.0;
    for (Eigen::Index r = 0; r < m; ++r) {
      double self = 0.0;
      Eigen::RowVectorXd acc = rhs.row(r);
      for (const auto& [t, p] : chain.rows[r]) {
        if (t == r) {
          self += p;
        } else {
          acc += p * x.row(t);
        }
      }
      Eigen::RowVectorXd next = acc / (1.0 - self);
      residual = std::max(residual, (next - x.row(r)).cwiseAbs().maxCoeff());
      x.row(r) = next;
    }
    if (residual <= kIterativeResidual) break;
  }
  return x;
}

}  // namespace

CostVector evaluate_policy(const CsspModel& model, const StochasticPolicy& policy) {
  validate_policy(model, policy);
  EnvelopeChain chain = build_chain(model, policy);
  if (chain.states.empty()) return CostVector::Zero(model.n() + 1);

  if (auto stranded = stranded_rows(chain); !stranded.empty()) {
    throw ImproperPolicy("state " + quoted(model.state_name(chain.states[stranded.front()])) +
                         " cannot reach a goal under the policy");
  }

  const bool dense = static_cast<int>(chain.states.size()) <= kDenseEvaluationLimit;
  auto solve = [&](const Eigen::MatrixXd& rhs) {
    return dense ? dense_solve(chain, rhs) : gauss_seidel(chain, rhs);
  };

  Eigen::MatrixXd rhs(chain.states.size(), model.n() + 2);
  rhs << chain.goal_mass, chain.cost;
  Eigen::MatrixXd x;
  try {
    x = solve(rhs);
  } catch (const SingularMatrix&) {
    throw ImproperPolicy("policy chain is singular; goal is not reached with probability one");
  }
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    if (x(r, 0) < 1.0 - kImproperThreshold) {
      throw ImproperPolicy("state " + quoted(model.state_name(chain.states[r])) +
                           " reaches a goal with probability " + std::to_string(x(r, 0)));
    }
  }
  const int root = chain.local[model.initial()];
  return x.row(root).tail(model.n() + 1).transpose();
}

CsspModel finite_penalty_transform(const CsspModel& model, const CostVector& penalty) {
  if (penalty.size() != model.n() + 1) {
    throw DimensionMismatch("penalty has " + std::to_string(penalty.size()) + " entries, expected " +
                            std::to_string(model.n() + 1));
  }
  ModelSpec spec = model.to_spec();
  if (!model.find_state(kGiveUpGoal)) {
    spec.states.emplace_back(kGiveUpGoal);
    spec.goals.emplace_back(kGiveUpGoal);
  }
  const std::vector<double> cost(penalty.data(), penalty.data() + penalty.size());
  for (StateId s = 0; s < model.num_states(); ++s) {
    if (model.is_goal(s)) continue;
    const std::string name = kGiveUpPrefix + model.state_name(s);
    if (model.find_action(name)) continue;
    spec.actions.push_back({name, model.state_name(s), cost, {{kGiveUpGoal, 1.0}}});
  }
  return CsspModel(spec);
}

bool feasibility_check(const CsspModel& model, const CostVector& cost) {
  if (cost.size() != model.n() + 1) {
    throw DimensionMismatch("cost vector has " + std::to_string(cost.size()) + " entries, expected " +
                            std::to_string(model.n() + 1));
  }
  for (int i = 0; i < model.n(); ++i) {
    if (cost[i + 1] > model.bounds()[i] + kFeasibilityTolerance) return false;
  }
  return true;
}

}  // namespace carl
