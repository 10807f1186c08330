#include "carl/cli.hpp"

#include "carl/domains.hpp"
#include "carl/errors.hpp"
#include "carl/io.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace carl {

using nlohmann::json;

SearchMode parse_search_mode(const std::string& name) {
  if (name == "plain") return SearchMode::Plain;
  if (name == "strong") return SearchMode::Strong;
  throw BadSpec("unknown search mode '" + name + "'");
}

namespace {

double parse_number(const std::string& text) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || !std::isfinite(value)) throw BadSpec("not a number: '" + text + "'");
  return value;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, sep)) parts.push_back(item);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

std::vector<Scalarisation> parse_grid(const std::string& text, int n) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw BadSpec("grid must look like a:b:step");
  const double lo = parse_number(parts[0]);
  const double hi = parse_number(parts[1]);
  const double step = parse_number(parts[2]);
  if (!(step > 0.0) || hi < lo || lo < 0.0) throw BadSpec("grid needs 0 <= a <= b and step > 0");
  const long count = static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;

  std::vector<Scalarisation> grid;
  std::vector<long> index(n, 0);
  while (true) {
    Eigen::VectorXd point(n);
    for (int i = 0; i < n; ++i) point[i] = lo + static_cast<double>(index[i]) * step;
    grid.emplace_back(point);
    int i = n - 1;
    while (i >= 0 && ++index[i] == count) index[i--] = 0;
    if (i < 0) break;
  }
  return grid;
}

CostVector parse_penalty(const std::string& text) {
  const auto parts = split(text, ',');
  CostVector p(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) p[static_cast<Eigen::Index>(i)] = parse_number(parts[i]);
  return p;
}

json report_to_json(const CsspModel& model, const SolveReport& report) {
  return {
      {"solver", "carl"},
      {"primary_cost", report.cost[0]},
      {"secondary_costs", to_vector(report.cost.tail(model.n()))},
      {"bounds", to_vector(model.bounds())},
      {"optimality_gap", report.gap},
      {"lambda", to_vector(report.lambda.lambda())},
      {"lagrangian", report.lagrangian},
      {"counts", {{"lambda_ssps", report.lambda_ssps}, {"backups", report.backups}, {"lp_pivots", report.lp_pivots}}},
      {"wall_time_s", report.wall_time_s},
      {"coordinate_failure", report.coordinate_failure},
      {"fallback_used", report.fallback_used},
      {"policy", policy_to_json(model, report.policy)},
  };
}

json oracle_to_json(const CsspModel& model, const FlatSolution& solution, double wall_time_s) {
  return {
      {"solver", "oracle"},
      {"primary_cost", solution.cost[0]},
      {"secondary_costs", to_vector(solution.cost.tail(model.n()))},
      {"bounds", to_vector(model.bounds())},
      {"optimality_gap", 0.0},
      {"lambda", nullptr},
      {"lagrangian", nullptr},
      {"counts", {{"lambda_ssps", 0}, {"backups", 0}, {"lp_pivots", solution.pivots}}},
      {"wall_time_s", wall_time_s},
      {"coordinate_failure", false},
      {"fallback_used", false},
      {"policy", policy_to_json(model, solution.policy)},
  };
}

namespace {

struct Settings {
  std::string model_path;
  std::string policy_path;
  std::string out_path;
  double epsilon = 1e-4;
  double tie_epsilon = -1.0;
  double eta = 1e-4;
  double alpha0 = 1.0;
  long max_subgradient_iters = 100000;
  std::string heuristic = "ideal-point";
  std::string mode = "strong";
  std::string penalty;
  std::string grid;
  std::string kind = "random";
  int size = 3;
  int distance = 2;
  int currencies = 1;
  int states = 20;
  int actions = 3;
  int n = 2;
  std::uint64_t seed = 0;
};

void add_solver_flags(CLI::App* cmd, Settings& s) {
  cmd->add_option("--epsilon", s.epsilon, "Bellman residual tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--tie-epsilon", s.tie_epsilon, "tie window for greedy actions (default: epsilon)");
  cmd->add_option("--eta", s.eta, "multiplier search tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--alpha0", s.alpha0, "initial subgradient step")->check(CLI::PositiveNumber);
  cmd->add_option("--max-subgradient-iters", s.max_subgradient_iters, "subgradient step cap");
  cmd->add_option("--heuristic", s.heuristic, "zero, ideal-point or lambda")
      ->check(CLI::IsMember({"zero", "ideal-point", "lambda"}));
  cmd->add_option("--mode", s.mode, "search mode of the extraction re-solve")
      ->check(CLI::IsMember({"plain", "strong"}));
}

void add_model_flags(CLI::App* cmd, Settings& s) {
  cmd->add_option("model", s.model_path, "model file")->required();
  cmd->add_option("--penalty", s.penalty, "add give-up actions with this cost vector p0,p1,...");
  cmd->add_option("--out", s.out_path, "output file (default: standard output)");
}

SolveOptions solve_options(const Settings& s) {
  SolveOptions opt;
  opt.scalarise.search.epsilon = s.epsilon;
  opt.scalarise.search.tie_epsilon = s.tie_epsilon;
  opt.scalarise.eta = s.eta;
  opt.scalarise.alpha0 = s.alpha0;
  opt.scalarise.max_subgradient_iters = s.max_subgradient_iters;
  opt.heuristic = parse_heuristic_kind(s.heuristic);
  opt.extraction_mode = parse_search_mode(s.mode);
  return opt;
}

CsspModel read_model(const Settings& s) {
  CsspModel model = load_model(s.model_path);
  if (!s.penalty.empty()) return finite_penalty_transform(model, parse_penalty(s.penalty));
  return model;
}

void emit(const Settings& s, std::ostream& out, const std::string& text) {
  if (s.out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(s.out_path);
  if (!file) throw Error("cannot write '" + s.out_path + "'");
  file << text;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_solve(const Settings& s, std::ostream& out) {
  const CsspModel model = read_model(s);
  const SolveReport report = solve_cssp(model, solve_options(s));
  emit(s, out, report_to_json(model, report).dump(2) + "\n");
  return kExitOk;
}

int cmd_oracle(const Settings& s, std::ostream& out) {
  const CsspModel model = read_model(s);
  const auto t0 = std::chrono::steady_clock::now();
  const FlatSolution sol = flat_dual_solve(model);
  emit(s, out, oracle_to_json(model, sol, seconds_since(t0)).dump(2) + "\n");
  return kExitOk;
}

int cmd_compare(const Settings& s, std::ostream& out) {
  const CsspModel model = read_model(s);
  const SolveReport carl = solve_cssp(model, solve_options(s));
  const FlatSolution flat = flat_dual_solve(model);
  const double delta = std::abs(carl.cost[0] - flat.cost[0]);
  const double tolerance = 10.0 * s.epsilon + 1e-5;
  const json doc = {{"carl_primary_cost", carl.cost[0]},
                    {"oracle_primary_cost", flat.cost[0]},
                    {"delta", delta},
                    {"tolerance", tolerance},
                    {"within_tolerance", delta <= tolerance}};
  emit(s, out, doc.dump(2) + "\n");
  return delta <= tolerance ? kExitOk : kExitError;
}

int cmd_eval(const Settings& s, std::ostream& out) {
  const CsspModel model = read_model(s);
  const StochasticPolicy policy = load_policy(model, s.policy_path);
  const CostVector cost = evaluate_policy(model, policy);
  const json doc = {{"cost", to_vector(cost)}, {"bounds", to_vector(model.bounds())},
                    {"feasible", feasibility_check(model, cost)}};
  emit(s, out, doc.dump(2) + "\n");
  return kExitOk;
}

int cmd_surface(const Settings& s, std::ostream& out) {
  const CsspModel model = read_model(s);
  const auto grid = parse_grid(s.grid, model.n());
  const SolveOptions opt = solve_options(s);
  const auto rows = sample_surface(model, grid, opt.heuristic, opt.scalarise);

  std::ostringstream csv;
  csv << std::setprecision(12);
  for (int i = 0; i < model.n(); ++i) csv << "lambda_" << i + 1 << ',';
  csv << "L\n";
  for (const auto& [lambda, L] : rows) {
    for (int i = 0; i < model.n(); ++i) csv << lambda[i] << ',';
    csv << L << '\n';
  }
  emit(s, out, csv.str());
  return kExitOk;
}

int cmd_gen(const Settings& s, std::ostream& out) {
  GeneratorSpec spec;
  spec.kind = parse_domain_kind(s.kind);
  spec.size = s.size;
  spec.distance = s.distance;
  spec.currencies = s.currencies;
  spec.states = s.states;
  spec.actions_per_state = s.actions;
  spec.n = s.n;
  spec.seed = s.seed;
  emit(s, out, model_to_json(generate(spec)).dump(2) + "\n");
  return kExitOk;
}

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  Settings s;
  CLI::App app{"Constrained SSP solver by scalarisation and heuristic search", "carl"};
  app.require_subcommand(1);
  std::function<int(const Settings&, std::ostream&)> command;

  auto* solve = app.add_subcommand("solve", "solve a model and print the report and policy");
  add_model_flags(solve, s);
  add_solver_flags(solve, s);
  solve->callback([&] { command = cmd_solve; });

  auto* oracle = app.add_subcommand("oracle", "solve the flat occupation-measure LP");
  add_model_flags(oracle, s);
  oracle->callback([&] { command = cmd_oracle; });

  auto* compare = app.add_subcommand("compare", "compare the solver against the flat LP");
  add_model_flags(compare, s);
  add_solver_flags(compare, s);
  compare->callback([&] { command = cmd_compare; });

  auto* eval = app.add_subcommand("eval", "evaluate a policy file");
  add_model_flags(eval, s);
  eval->add_option("policy", s.policy_path, "policy file")->required();
  eval->callback([&] { command = cmd_eval; });

  auto* surface = app.add_subcommand("surface", "sample L over a grid of multipliers");
  add_model_flags(surface, s);
  add_solver_flags(surface, s);
  surface->add_option("--grid", s.grid, "a:b:step per coordinate")->required();
  surface->callback([&] { command = cmd_surface; });

  auto* gen = app.add_subcommand("gen", "generate a benchmark model");
  gen->add_option("--kind", s.kind, "getting-to-work, coord-interesting, coord-pathological, strong-eps, "
                                    "tireworld or random");
  gen->add_option("--size", s.size, "tireworld grid size");
  gen->add_option("--distance", s.distance, "tireworld start distance");
  gen->add_option("--currencies", s.currencies, "tireworld currency count");
  gen->add_option("--states", s.states, "random state count");
  gen->add_option("--actions", s.actions, "random actions per state");
  gen->add_option("--n", s.n, "random secondary cost count");
  gen->add_option("--seed", s.seed, "random seed");
  gen->add_option("--out", s.out_path, "output file (default: standard output)");
  gen->callback([&] { command = cmd_gen; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    return command(s, out);
  } catch (const Infeasible& e) {
    err << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const Nonconvergence& e) {
    err << "nonconvergence: " << e.what() << '\n';
    return kExitNonconvergence;
  } catch (const IterationCapExceeded& e) {
    err << "nonconvergence: " << e.what() << '\n';
    return kExitNonconvergence;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace carl
