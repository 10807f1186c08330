#include "carl/domains.hpp"

#include "carl/errors.hpp"

#include <map>
#include <queue>
#include <random>
#include <tuple>

namespace carl {

std::string to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::GettingToWork: return "getting-to-work";
    case DomainKind::CoordInteresting: return "coord-interesting";
    case DomainKind::CoordPathological: return "coord-pathological";
    case DomainKind::StrongEpsExample: return "strong-eps";
    case DomainKind::Tireworld: return "tireworld";
    case DomainKind::Random: return "random";
  }
  return "random";
}

DomainKind parse_domain_kind(const std::string& name) {
  for (DomainKind k : {DomainKind::GettingToWork, DomainKind::CoordInteresting, DomainKind::CoordPathological,
                       DomainKind::StrongEpsExample, DomainKind::Tireworld, DomainKind::Random}) {
    if (to_string(k) == name) return k;
  }
  throw BadSpec("unknown domain kind '" + name + "'");
}

namespace {

ActionSpec act(std::string name, std::string source, std::vector<double> cost,
               std::vector<std::pair<std::string, double>> outcomes) {
  return {std::move(name), std::move(source), std::move(cost), std::move(outcomes)};
}

ModelSpec getting_to_work() {
  ModelSpec m;
  m.states = {"s0", "s1", "s2", "g"};
  m.initial = "s0";
  m.goals = {"g"};
  m.n = 2;
  m.bounds = {15, 10};
  m.actions = {
      act("run", "s0", {1, 0, 20}, {{"g", 1.0}}),
      act("taxi", "s0", {1, 30, 0}, {{"g", 1.0}}),
      act("walk", "s0", {1, 0, 1}, {{"s1", 0.5}, {"s2", 0.5}}),
      act("train", "s1", {1, 20, 0}, {{"g", 1.0}}),
      act("walk_to_work", "s2", {3, 0, 6}, {{"g", 1.0}}),
  };
  return m;
}

ModelSpec coord_interesting() {
  ModelSpec m;
  m.states = {"s0", "s1", "g"};
  m.initial = "s0";
  m.goals = {"g"};
  m.n = 2;
  m.bounds = {15, 15};
  m.actions = {
      act("a0", "s0", {1, 40, 40}, {{"g", 1.0}}),  act("a1", "s0", {5, 5, 5}, {{"s1", 1.0}}),
      act("a2", "s0", {3, 10, 0}, {{"s1", 1.0}}),  act("a3", "s0", {1, 0, 20}, {{"s1", 1.0}}),
      act("a4", "s1", {1, 20, 0}, {{"g", 1.0}}),   act("a5", "s1", {1, 0, 20}, {{"g", 1.0}}),
  };
  return m;
}

ModelSpec coord_pathological() {
  ModelSpec m;
  m.states = {"s0", "g"};
  m.initial = "s0";
  m.goals = {"g"};
  m.n = 2;
  m.bounds = {1, 1};
  m.actions = {
      act("a0", "s0", {10, 1, 1}, {{"g", 1.0}}),
      act("a1", "s0", {1, 11, 0}, {{"g", 1.0}}),
      act("a2", "s0", {1, 0, 11}, {{"g", 1.0}}),
  };
  return m;
}

ModelSpec strong_eps_example() {
  ModelSpec m;
  m.states = {"s0", "s1", "s2", "s3", "g"};
  m.initial = "s0";
  m.goals = {"g"};
  m.n = 0;
  m.actions = {
      act("a0_prime", "s0", {4}, {{"g", 1.0}}), act("a0", "s0", {1}, {{"s1", 1.0}}),
      act("a1_prime", "s1", {1}, {{"s2", 1.0}}), act("a1", "s1", {1}, {{"s3", 1.0}}),
      act("a2", "s2", {5}, {{"g", 1.0}}),        act("a3", "s3", {2}, {{"g", 1.0}}),
  };
  return m;
}

struct TireState {
  int r;
  int k;
  bool spare;
  bool flat;
  auto key() const { return std::tie(r, k, spare, flat); }
  bool operator<(const TireState& o) const { return key() < o.key(); }
};

std::string tire_name(const TireState& t) {
  return "c" + std::to_string(t.r) + "_" + std::to_string(t.k) + (t.spare ? "_spare" : "_none") +
         (t.flat ? "_flat" : "_ok");
}

ModelSpec tireworld(int size, int distance, int currencies) {
  if (size < 2) throw BadSpec("tireworld size must be at least 2");
  if (distance < 1 || distance > size) throw BadSpec("tireworld distance must lie in 1..size");
  if (currencies < 1) throw BadSpec("tireworld needs at least one currency");

  // Currency of each spare city, numbered in row-major order.
  std::map<std::pair<int, int>, int> shop;
  int next_shop = 0;
  for (int r = 0; r <= size; ++r) {
    for (int k = 0; k <= r; ++k) {
      if (r == 0) continue;
      if (k == 0 || r == size) shop[{r, k}] = next_shop++ % currencies;
    }
  }

  ModelSpec m;
  m.n = currencies;
  m.bounds.assign(currencies, 1.0);
  m.goals = {"goal"};
  const std::vector<double> base(currencies + 1, 0.0);
  auto cost = [&](int currency) {
    std::vector<double> c = base;
    c[0] = 1.0;
    if (currency >= 0) c[currency + 1] = 1.0;
    return c;
  };

  std::map<TireState, std::string> names;
  std::queue<TireState> frontier;
  auto visit = [&](const TireState& t) -> std::string {
    if (t.r == 0 && t.k == 0) return "goal";
    auto it = names.find(t);
    if (it != names.end()) return it->second;
    const std::string name = tire_name(t);
    names.emplace(t, name);
    m.states.push_back(name);
    frontier.push(t);
    return name;
  };

  const TireState start{distance, distance, true, false};
  m.initial = visit(start);
  while (!frontier.empty()) {
    const TireState t = frontier.front();
    frontier.pop();
    const std::string here = names.at(t);
    if (t.flat) {
      if (t.spare) {
        m.actions.push_back(act("change@" + here, here, cost(-1), {{visit({t.r, t.k, false, false}), 1.0}}));
      }
      continue;
    }
    const std::pair<int, int> moves[] = {{t.r - 1, t.k - 1}, {t.r, t.k - 1}, {t.r - 1, t.k}};
    const char* labels[] = {"short", "left", "up"};
    for (int i = 0; i < 3; ++i) {
      const auto [r, k] = moves[i];
      if (r < 0 || k < 0 || k > r) continue;
      const std::string name = std::string(labels[i]) + "@" + here;
      if (r == 0 && k == 0) {
        m.actions.push_back(act(name, here, cost(-1), {{"goal", 1.0}}));
      } else {
        const std::string ok = visit({r, k, t.spare, false});
        const std::string flat = visit({r, k, t.spare, true});
        m.actions.push_back(act(name, here, cost(-1), {{ok, 0.5}, {flat, 0.5}}));
      }
    }
    if (!t.spare) {
      if (auto it = shop.find({t.r, t.k}); it != shop.end()) {
        m.actions.push_back(act("buy@" + here, here, cost(it->second), {{visit({t.r, t.k, true, false}), 1.0}}));
      }
    }
  }
  m.states.push_back("goal");
  return m;
}

ModelSpec random_cssp(const GeneratorSpec& g) {
  if (g.states < 2) throw BadSpec("random models need at least two states");
  if (g.actions_per_state < 1) throw BadSpec("random models need at least one action per state");
  if (g.n < 0) throw BadSpec("negative secondary cost count");

  std::mt19937_64 rng(g.seed);
  auto uniform_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto uniform_real = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

  const int inner = g.states - 1;
  ModelSpec m;
  for (int i = 0; i < inner; ++i) m.states.push_back("s" + std::to_string(i));
  m.states.push_back("g");
  m.initial = "s0";
  m.goals = {"g"};
  m.n = g.n;

  auto draw_outcomes = [&](int lo) {
    const int count = uniform_int(1, 3);
    std::map<int, double> weights;
    for (int c = 0; c < count; ++c) weights[uniform_int(lo, inner)] += uniform_real(0.1, 1.0);
    double total = 0.0;
    for (const auto& [t, w] : weights) total += w;
    std::vector<std::pair<std::string, double>> out;
    double assigned = 0.0;
    std::size_t idx = 0;
    for (const auto& [t, w] : weights) {
      const double p = ++idx == weights.size() ? 1.0 - assigned : w / total;
      assigned += p;
      out.emplace_back(m.states[t], p);
    }
    return out;
  };
  for (int i = 0; i < inner; ++i) {
    for (int a = 0; a < g.actions_per_state; ++a) {
      std::vector<double> cost(g.n + 1);
      cost[0] = uniform_int(1, 10);
      for (int j = 1; j <= g.n; ++j) cost[j] = uniform_int(0, 10);
      auto outcomes = a == 0 ? draw_outcomes(i + 1) : draw_outcomes(0);
      m.actions.push_back(act("s" + std::to_string(i) + "_a" + std::to_string(a), m.states[i], std::move(cost),
                              std::move(outcomes)));
    }
  }

  m.bounds.assign(g.n, 0.0);
  if (g.n > 0) {
    ModelSpec unbounded = m;
    unbounded.bounds.assign(g.n, 0.0);
    const CsspModel draft(unbounded);
    StochasticPolicy descending(draft.num_states());
    for (StateId s = 0; s < inner; ++s) descending.set_deterministic(s, draft.actions(s).front());
    const CostVector c = evaluate_policy(draft, descending);
    for (int j = 0; j < g.n; ++j) m.bounds[j] = 1.2 * c[j + 1];
  }
  return m;
}

}  // namespace

CsspModel generate(const GeneratorSpec& spec) {
  switch (spec.kind) {
    case DomainKind::GettingToWork: return CsspModel(getting_to_work());
    case DomainKind::CoordInteresting: return CsspModel(coord_interesting());
    case DomainKind::CoordPathological: return CsspModel(coord_pathological());
    case DomainKind::StrongEpsExample: return CsspModel(strong_eps_example());
    case DomainKind::Tireworld: return CsspModel(tireworld(spec.size, spec.distance, spec.currencies));
    case DomainKind::Random: return CsspModel(random_cssp(spec));
  }
  throw BadSpec("unknown domain kind");
}

VectorValueFunction strong_eps_printed_values(const CsspModel& model) {
  VectorValueFunction v(model.num_states(), model.n());
  const std::pair<const char*, double> printed[] = {{"s0", 4}, {"s1", 3}, {"s2", 1}, {"s3", 2}, {"g", 0}};
  for (const auto& [name, value] : printed) {
    const auto s = model.find_state(name);
    if (!s) throw BadSpec(std::string("model has no state ") + name);
    v.set(*s, Eigen::VectorXd::Constant(model.n() + 1, value));
  }
  return v;
}

}  // namespace carl
