#include "carl/heuristics.hpp"

#include "carl/errors.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <queue>
#include <tuple>
#include <vector>

namespace carl {

std::string to_string(HeuristicKind kind) {
  switch (kind) {
    case HeuristicKind::Zero: return "zero";
    case HeuristicKind::IdealPoint: return "ideal-point";
    case HeuristicKind::Lambda: return "lambda";
  }
  return "zero";
}

HeuristicKind parse_heuristic_kind(const std::string& name) {
  if (name == "zero") return HeuristicKind::Zero;
  if (name == "ideal-point") return HeuristicKind::IdealPoint;
  if (name == "lambda") return HeuristicKind::Lambda;
  throw BadSpec("unknown heuristic '" + name + "'");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct ShortestPaths {
  std::vector<double> dist;
  std::vector<ActionId> via;       // first action on the path
  std::vector<StateId> next;       // successor the path continues from
};

// Backward Dijkstra from the goals over every outcome edge of every action.
ShortestPaths backward_dijkstra(const CsspModel& model, const std::function<double(ActionId)>& weight) {
  const int ns = model.num_states();
  ShortestPaths sp{std::vector<double>(ns, kInf), std::vector<ActionId>(ns, -1),
                   std::vector<StateId>(ns, -1)};
  std::vector<char> settled(ns, 0);
  using Entry = std::pair<double, StateId>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  for (StateId g : model.goals()) {
    sp.dist[g] = 0.0;
    heap.emplace(0.0, g);
  }
  while (!heap.empty()) {
    const auto [d, t] = heap.top();
    heap.pop();
    if (settled[t]) continue;
    settled[t] = 1;
    for (ActionId a : model.predecessors(t)) {
      const StateId s = model.action(a).source;
      if (settled[s]) continue;
      const double cand = weight(a) + d;
      if (cand < sp.dist[s]) {
        sp.dist[s] = cand;
        sp.via[s] = a;
        sp.next[s] = t;
        heap.emplace(cand, s);
      }
    }
  }
  return sp;
}

std::vector<char> reachable_from_initial(const CsspModel& model) {
  std::vector<char> seen(model.num_states(), 0);
  std::vector<StateId> stack{model.initial()};
  seen[model.initial()] = 1;
  while (!stack.empty()) {
    const StateId s = stack.back();
    stack.pop_back();
    for (ActionId a : model.actions(s)) {
      for (const auto& o : model.action(a).outcomes) {
        if (!seen[o.target]) {
          seen[o.target] = 1;
          stack.push_back(o.target);
        }
      }
    }
  }
  return seen;
}

void require_reachable(const CsspModel& model, const std::vector<double>& dist) {
  const auto reach = reachable_from_initial(model);
  for (StateId s = 0; s < model.num_states(); ++s) {
    if (reach[s] && dist[s] == kInf) {
      throw UnreachableGoal("state '" + model.state_name(s) + "' cannot reach a goal");
    }
  }
}

}  // namespace

HeuristicVector zero_heuristic(const CsspModel& model) {
  return {HeuristicKind::Zero, Scalarisation::zeros(model.n()),
          Eigen::MatrixXd::Zero(model.n() + 1, model.num_states())};
}

HeuristicVector ideal_point_heuristic(const CsspModel& model) {
  HeuristicVector h = zero_heuristic(model);
  h.kind = HeuristicKind::IdealPoint;
  for (int i = 0; i <= model.n(); ++i) {
    const auto sp = backward_dijkstra(model, [&](ActionId a) { return model.action(a).cost[i]; });
    if (i == 0) require_reachable(model, sp.dist);
    for (StateId s = 0; s < model.num_states(); ++s) {
      h.values(i, s) = sp.dist[s] == kInf ? 0.0 : sp.dist[s];
    }
  }
  return h;
}

HeuristicVector lambda_heuristic(const CsspModel& model, const Scalarisation& lambda) {
  if (lambda.n() != model.n()) {
    throw DimensionMismatch("scalarisation has " + std::to_string(lambda.n()) + " entries, expected " +
                            std::to_string(model.n()));
  }
  HeuristicVector h = zero_heuristic(model);
  h.kind = HeuristicKind::Lambda;
  h.lambda = lambda;
  const auto sp = backward_dijkstra(model, [&](ActionId a) { return lambda.project(model.action(a).cost); });
  require_reachable(model, sp.dist);

  // Scalarised weights are at least the primary cost, so each path continues
  // from a successor strictly closer to the goal.
  std::vector<StateId> order;
  for (StateId s = 0; s < model.num_states(); ++s) {
    if (sp.dist[s] < kInf && !model.is_goal(s)) order.push_back(s);
  }
  std::sort(order.begin(), order.end(),
            [&](StateId a, StateId b) { return std::tie(sp.dist[a], a) < std::tie(sp.dist[b], b); });
  for (StateId s : order) {
    h.values.col(s) = model.action(sp.via[s]).cost + h.values.col(sp.next[s]);
  }
  return h;
}

HeuristicSource::HeuristicSource(const CsspModel& model, HeuristicKind kind) : model_(&model), kind_(kind) {}

const HeuristicVector& HeuristicSource::at(const Scalarisation& lambda) {
  switch (kind_) {
    case HeuristicKind::Zero:
      if (!cached_) cached_ = zero_heuristic(*model_);
      break;
    case HeuristicKind::IdealPoint:
      if (!cached_) cached_ = ideal_point_heuristic(*model_);
      break;
    case HeuristicKind::Lambda:
      if (!cached_ || !(cached_->lambda == lambda)) cached_ = lambda_heuristic(*model_, lambda);
      break;
  }
  return *cached_;
}

}  // namespace carl
