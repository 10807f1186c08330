#include "carl/search.hpp"

#include "carl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace carl {

bool PartialSsp::is_included(StateId s, ActionId a) const {
  const auto& inc = included[s];
  return std::find(inc.begin(), inc.end(), a) != inc.end();
}

void PartialSsp::include(StateId s, ActionId a) {
  auto& inc = included[s];
  if (std::find(inc.begin(), inc.end(), a) != inc.end()) return;
  inc.insert(std::upper_bound(inc.begin(), inc.end(), a), a);
  expanded[s] = 1;
}

VectorValueFunction::VectorValueFunction(int num_states, int n)
    : values_(Eigen::MatrixXd::Zero(n + 1, num_states)),
      seeded_(num_states, 0),
      from_heuristic_(num_states, 0),
      choice_(num_states, -1),
      gamma_members_(num_states) {
  partial_.expanded.assign(num_states, 0);
  partial_.included.resize(num_states);
}

void VectorValueFunction::set(StateId s, const Eigen::VectorXd& v, bool heuristic) {
  values_.col(s) = v;
  seeded_[s] = 1;
  from_heuristic_[s] = heuristic ? 1 : 0;
}

void VectorValueFunction::mark(StateId s, ActionId a) {
  auto& members = gamma_members_[s];
  if (std::find(members.begin(), members.end(), a) != members.end()) return;
  members.push_back(a);
  gamma_.emplace_back(s, a);
}

std::optional<StateAction> VectorValueFunction::pop_dirty() {
  if (gamma_.empty()) return std::nullopt;
  const StateAction sa = gamma_.front();
  gamma_.pop_front();
  auto& members = gamma_members_[sa.first];
  members.erase(std::find(members.begin(), members.end(), sa.second));
  return sa;
}

Eigen::VectorXd q_value(const CsspModel& model, const VectorValueFunction& v, ActionId a) {
  const Action& act = model.action(a);
  Eigen::VectorXd q = act.cost;
  for (const auto& o : act.outcomes) {
    if (!v.seeded(o.target)) {
      throw Error("successor '" + model.state_name(o.target) + "' of action '" + act.name +
                  "' has no value");
    }
    q.noalias() += o.prob * v(o.target);
  }
  return q;
}

namespace {

constexpr double kProjectionChange = 1e-12;

// Projections this close count as equal when choosing a greedy action.
double tie_window(double value, double epsilon) { return std::min(epsilon, 1e-9 * (1.0 + std::abs(value))); }

// Lexicographic order on Q vectors, equal components compared up to rounding.
bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double tol = 1e-9 * (1.0 + std::max(std::abs(a[i]), std::abs(b[i])));
    if (a[i] < b[i] - tol) return true;
    if (b[i] < a[i] - tol) return false;
  }
  return false;
}

struct Candidate {
  ActionId action;
  Eigen::VectorXd q;
  double projected;
};

// Index of the tie-broken choice among `cands`, which are in ascending id order.
// The incumbent keeps its place while it stays within the window; a pure
// lexicographic rule can flip forever when the choice feeds back into its
// own Q through a cycle.
std::size_t tie_broken(const std::vector<Candidate>& cands, double epsilon, ActionId incumbent) {
  double best = cands.front().projected;
  for (const auto& c : cands) best = std::min(best, c.projected);
  const double window = tie_window(best, epsilon);
  std::size_t pick = cands.size();
  for (std::size_t k = 0; k < cands.size(); ++k) {
    if (cands[k].action == incumbent && cands[k].projected <= best + window) return k;
  }
  for (std::size_t k = 0; k < cands.size(); ++k) {
    if (cands[k].projected > best + window) continue;
    if (pick == cands.size() || lex_less(cands[k].q, cands[pick].q)) pick = k;
  }
  return pick;
}

std::vector<Candidate> candidates(const CsspModel& model, const Scalarisation& lambda,
                                  const VectorValueFunction& v, std::span<const ActionId> actions) {
  std::vector<Candidate> out;
  out.reserve(actions.size());
  for (ActionId a : actions) {
    Eigen::VectorXd q = q_value(model, v, a);
    const double p = lambda.project(q);
    out.push_back({a, std::move(q), p});
  }
  return out;
}

std::span<const ActionId> backup_actions(const CsspModel& model, const VectorValueFunction& v, StateId s) {
  if (v.partial().expanded[s]) return v.partial().included[s];
  return model.actions(s);
}

double residual(const VectorValueFunction& v, StateId s, const Eigen::VectorXd& q) {
  return (v(s) - q).cwiseAbs().maxCoeff();
}

class Search {
 public:
  Search(const CsspModel& model, const Scalarisation& lambda, VectorValueFunction& v, const HeuristicVector& h,
         const SearchOptions& options, SearchStats& stats)
      : model_(model), lambda_(lambda), v_(v), h_(h), options_(options), stats_(stats) {}

  SearchResult run() {
    if (model_.n() != lambda_.n()) {
      throw DimensionMismatch("scalarisation has " + std::to_string(lambda_.n()) + " entries, expected " +
                              std::to_string(model_.n()));
    }
    seed(model_.initial());
    refresh_fringes();
    const bool strong = options_.mode == SearchMode::Strong;
    std::set<StateAction> ever_tied;
    double threshold = options_.epsilon;

    for (;;) {
      ++stats_.iterations;
      const bool repaired = repair();
      EnvelopeWalk walk =
          greedy_envelope(model_, v_, lambda_, options_.epsilon, options_.mode, options_.tie_threshold());
      bool newly_tied = false;
      if (strong) {
        for (StateId s : walk.post_order) {
          for (ActionId a : walk.tied[s]) newly_tied |= ever_tied.emplace(s, a).second;
        }
      }
      if (walk.fringes.empty() && walk.max_residual <= threshold && !repaired && !newly_tied) {
        // A residual of epsilon lets V(s0) drift from the greedy policy's cost
        // by up to epsilon times the expected path length; tighten until the
        // two agree.
        if (auto cost = certify(walk, threshold)) return finish(std::move(walk), std::move(*cost));
        threshold /= 10.0;
      }
      std::vector<StateId> fringes = walk.fringes;
      std::sort(fringes.begin(), fringes.end());
      for (StateId s : fringes) expand(s);
      for (StateId s : walk.post_order) {
        if (!model_.is_goal(s)) backup(s);
      }
    }
  }

 private:
  void charge() {
    if (++stats_.backups > options_.backup_budget) {
      throw Nonconvergence("backup budget of " + std::to_string(options_.backup_budget) + " exhausted");
    }
  }

  void seed(StateId s) {
    if (v_.seeded(s)) return;
    if (model_.is_goal(s)) {
      v_.set(s, Eigen::VectorXd::Zero(model_.n() + 1));
    } else {
      v_.set(s, h_(s), true);
    }
  }

  void seed_successors(ActionId a) {
    for (const auto& o : model_.action(a).outcomes) seed(o.target);
  }

  void mark_predecessors(StateId s) {
    for (ActionId a : model_.predecessors(s)) {
      const StateId p = model_.action(a).source;
      if (v_.partial().expanded[p]) v_.mark(p, a);
    }
  }

  void mark_excluded(StateId s) {
    for (ActionId a : model_.actions(s)) {
      if (!v_.partial().is_included(s, a)) v_.mark(s, a);
    }
  }

  // Re-seeds fringe estimates that came from an earlier heuristic.
  void refresh_fringes() {
    for (StateId s = 0; s < model_.num_states(); ++s) {
      if (!v_.seeded(s) || v_.partial().expanded[s] || !v_.from_heuristic(s)) continue;
      const Eigen::VectorXd fresh = h_(s);
      if (fresh == v_(s)) continue;
      const double before = lambda_.project(v_(s));
      v_.set(s, fresh, true);
      if (lambda_.project(fresh) != before) mark_predecessors(s);
    }
  }

  void expand(StateId s) {
    const auto actions = model_.actions(s);
    if (actions.empty()) {
      throw NoApplicableAction("state '" + model_.state_name(s) + "' has no applicable action");
    }
    for (ActionId a : actions) seed_successors(a);
    const auto cands = candidates(model_, lambda_, v_, actions);
    const std::size_t pick = tie_broken(cands, options_.epsilon, v_.choice(s));
    v_.partial().include(s, cands[pick].action);
    if (options_.mode == SearchMode::Strong) {
      double best = cands[pick].projected;
      for (const auto& c : cands) best = std::min(best, c.projected);
      for (const auto& c : cands) {
        if (c.projected <= best + options_.tie_threshold()) v_.partial().include(s, c.action);
      }
    }
    ++stats_.expansions;
  }

  void backup(StateId s) {
    charge();
    const double before = lambda_.project(v_(s));
    lambda_bellman_backup(model_, lambda_, v_, s, options_.epsilon);
    const double after = lambda_.project(v_(s));
    if (after > before) {
      mark_excluded(s);
    } else if (after < before) {
      mark_predecessors(s);
    }
  }

  // Processes Gamma to a fixed point; true when any value or action set moved.
  bool repair() {
    bool changed = false;
    const bool strong = options_.mode == SearchMode::Strong;
    while (auto sa = v_.pop_dirty()) {
      const auto [s, a] = *sa;
      if (!v_.partial().expanded[s]) continue;
      seed_successors(a);
      Eigen::VectorXd q = q_value(model_, v_, a);
      const double qp = lambda_.project(q);
      const double vp = lambda_.project(v_(s));
      const bool included = v_.partial().is_included(s, a);
      // Re-running the backup rule, rather than copying Q, keeps repairs from
      // undoing the tie-break of an earlier backup.
      if (qp < vp - tie_window(vp, options_.epsilon)) {
        v_.partial().include(s, a);
        backup(s);
        changed = true;
      } else if (strong && !included && qp <= vp + options_.tie_threshold()) {
        v_.partial().include(s, a);
        changed = true;
      }
    }
    return changed;
  }

  std::optional<CostVector> certify(const EnvelopeWalk& walk, double threshold) const {
    const StateId s0 = model_.initial();
    if (model_.is_goal(s0)) return CostVector::Zero(model_.n() + 1);
    const double v0 = lambda_.project(v_(s0));
    const bool exhausted = threshold < 1e-12 * (1.0 + std::abs(v0));
    try {
      CostVector cost = evaluate_policy(model_, walk.greedy.to_stochastic());
      if (exhausted || std::abs(lambda_.project(cost) - v0) <= options_.epsilon) return cost;
    } catch (const ImproperPolicy&) {
      if (exhausted) throw Nonconvergence("greedy policy stays improper at the tightest residual");
    }
    return std::nullopt;
  }

  SearchResult finish(EnvelopeWalk walk, CostVector cost) {
    SearchResult result;
    result.policy_cost = std::move(cost);
    result.lambda = lambda_;
    result.envelope = std::move(walk.post_order);
    result.greedy = std::move(walk.greedy);
    if (options_.mode == SearchMode::Strong) result.tied = std::move(walk.tied);
    result.max_residual = walk.max_residual;
    result.stats = stats_;
    return result;
  }

  const CsspModel& model_;
  const Scalarisation& lambda_;
  VectorValueFunction& v_;
  const HeuristicVector& h_;
  const SearchOptions& options_;
  SearchStats& stats_;
};

}  // namespace

BackupResult lambda_bellman_backup(const CsspModel& model, const Scalarisation& lambda, VectorValueFunction& v,
                                   StateId s, double epsilon) {
  if (model.is_goal(s)) return {};
  const auto actions = backup_actions(model, v, s);
  if (actions.empty()) {
    throw NoApplicableAction("state '" + model.state_name(s) + "' has no applicable action");
  }
  const auto cands = candidates(model, lambda, v, actions);
  const Candidate& best = cands[tie_broken(cands, epsilon, v.choice(s))];
  BackupResult out;
  out.action = best.action;
  out.residual = v.seeded(s) ? residual(v, s, best.q) : std::numeric_limits<double>::infinity();
  v.set(s, best.q);
  v.set_choice(s, best.action);
  return out;
}

EnvelopeWalk greedy_envelope(const CsspModel& model, const VectorValueFunction& v, const Scalarisation& lambda,
                             double epsilon, SearchMode mode, double tie_epsilon) {
  const double tie = tie_epsilon < 0.0 ? epsilon : tie_epsilon;
  EnvelopeWalk walk;
  walk.greedy = DeterministicPolicy(model.num_states());
  walk.tied.resize(model.num_states());

  struct Frame {
    StateId s;
    std::vector<StateId> children;
    std::size_t next = 0;
  };
  std::vector<char> visited(model.num_states(), 0);
  std::vector<Frame> stack;

  auto open = [&](StateId s) {
    visited[s] = 1;
    Frame f{s, {}, 0};
    if (model.is_goal(s)) {
      stack.push_back(std::move(f));
      return;
    }
    if (!v.partial().expanded[s]) {
      walk.fringes.push_back(s);
      stack.push_back(std::move(f));
      return;
    }
    const auto cands = candidates(model, lambda, v, v.partial().included[s]);
    const std::size_t pick = tie_broken(cands, epsilon, v.choice(s));
    walk.greedy.set(s, cands[pick].action);
    walk.max_residual = std::max(walk.max_residual, residual(v, s, cands[pick].q));
    std::vector<ActionId> follow;
    if (mode == SearchMode::Strong) {
      double best = cands[pick].projected;
      for (const auto& c : cands) best = std::min(best, c.projected);
      for (const auto& c : cands) {
        if (c.projected <= best + tie) follow.push_back(c.action);
      }
      walk.tied[s] = follow;
    } else {
      follow.push_back(cands[pick].action);
    }
    for (ActionId a : follow) {
      for (const auto& o : model.action(a).outcomes) f.children.push_back(o.target);
    }
    stack.push_back(std::move(f));
  };

  open(model.initial());
  while (!stack.empty()) {
    Frame& top = stack.back();
    if (top.next < top.children.size()) {
      const StateId c = top.children[top.next++];
      if (!visited[c]) open(c);
      continue;
    }
    walk.post_order.push_back(top.s);
    stack.pop_back();
  }
  return walk;
}

SearchResult solve_lambda_ssp(const CsspModel& model, const Scalarisation& lambda, VectorValueFunction v,
                              const HeuristicVector& h, const SearchOptions& options) {
  if (v.num_states() != model.num_states()) v = VectorValueFunction(model.num_states(), model.n());
  SearchStats stats;
  stats.lambda_ssps = 1;
  SearchResult result = Search(model, lambda, v, h, options, stats).run();
  result.stats = stats;
  result.values = std::move(v);
  return result;
}

VectorValueFunction warm_restart(const CsspModel& model, VectorValueFunction v, const Scalarisation& from,
                                 const Scalarisation& to) {
  if (from == to) return v;
  const int ns = v.num_states();
  std::vector<char> moved(ns, 0);
  for (StateId s = 0; s < ns; ++s) {
    if (v.seeded(s)) moved[s] = std::abs(to.project(v(s)) - from.project(v(s))) > kProjectionChange;
  }
  for (StateId s = 0; s < ns; ++s) {
    if (!v.partial().expanded[s]) continue;
    for (ActionId a : model.actions(s)) {
      const Action& act = model.action(a);
      bool dirty = moved[s] || std::abs(to.project(act.cost) - from.project(act.cost)) > kProjectionChange;
      for (const auto& o : act.outcomes) dirty = dirty || moved[o.target];
      if (dirty) v.mark(s, a);
    }
  }
  return v;
}

}  // namespace carl
