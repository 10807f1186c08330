#pragma once

#include "carl/domains.hpp"
#include "carl/model.hpp"

#include <initializer_list>
#include <string>
#include <utility>

namespace fixture {

inline carl::CsspModel make(carl::DomainKind kind) {
  carl::GeneratorSpec g;
  g.kind = kind;
  return carl::generate(g);
}

inline carl::CsspModel getting_to_work() { return make(carl::DomainKind::GettingToWork); }
inline carl::CsspModel coord_interesting() { return make(carl::DomainKind::CoordInteresting); }
inline carl::CsspModel coord_pathological() { return make(carl::DomainKind::CoordPathological); }
inline carl::CsspModel strong_eps() { return make(carl::DomainKind::StrongEpsExample); }

inline carl::StateId state(const carl::CsspModel& m, const std::string& name) { return *m.find_state(name); }
inline carl::ActionId action(const carl::CsspModel& m, const std::string& name) { return *m.find_action(name); }

/// Policy from (state, [(action, prob)]) names.
inline carl::StochasticPolicy policy(
    const carl::CsspModel& m,
    std::initializer_list<std::pair<const char*, std::initializer_list<std::pair<const char*, double>>>> rows) {
  carl::StochasticPolicy pi(m.num_states());
  for (const auto& [s, choices] : rows) {
    std::vector<carl::ActionChoice> list;
    for (const auto& [a, p] : choices) list.push_back({action(m, a), p});
    pi.set(state(m, s), std::move(list));
  }
  return pi;
}

/// Two-policy single-constraint model whose Lagrangian is min(1 + 10 l, 10).
inline carl::CsspModel kinked_line() {
  carl::ModelSpec spec;
  spec.states = {"s0", "g"};
  spec.initial = "s0";
  spec.goals = {"g"};
  spec.n = 1;
  spec.bounds = {5};
  spec.actions = {{"cheap", "s0", {1, 15}, {{"g", 1.0}}}, {"safe", "s0", {10, 5}, {{"g", 1.0}}}};
  return carl::CsspModel(spec);
}

/// s0 -> s1 -> g, each step costing [1, 2].
inline carl::CsspModel chain() {
  carl::ModelSpec spec;
  spec.states = {"s0", "s1", "g"};
  spec.initial = "s0";
  spec.goals = {"g"};
  spec.n = 1;
  spec.bounds = {10};
  spec.actions = {{"step0", "s0", {1, 2}, {{"s1", 1.0}}}, {"step1", "s1", {1, 2}, {{"g", 1.0}}}};
  return carl::CsspModel(spec);
}

inline carl::CsspModel goal_only() {
  carl::ModelSpec spec;
  spec.states = {"g"};
  spec.initial = "g";
  spec.goals = {"g"};
  return carl::CsspModel(spec);
}

}  // namespace fixture
