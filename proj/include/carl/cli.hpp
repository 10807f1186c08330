#pragma once

#include "carl/extract.hpp"
#include "carl/model.hpp"
#include "carl/scalarisation.hpp"
#include "carl/solver.hpp"

#include "json.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace carl {

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitInfeasible = 2;
inline constexpr int kExitNonconvergence = 3;

SearchMode parse_search_mode(const std::string& name);

/// "a:b:step" expanded to a, a + step, ... up to b; the n-fold cartesian
/// product of that axis, first coordinate slowest.
std::vector<Scalarisation> parse_grid(const std::string& text, int n);

/// Comma-separated penalty vector "p0,p1,...".
CostVector parse_penalty(const std::string& text);

nlohmann::json report_to_json(const CsspModel& model, const SolveReport& report);
nlohmann::json oracle_to_json(const CsspModel& model, const FlatSolution& solution, double wall_time_s);

/// Entry point of the `carl` tool. Subcommands: solve, oracle, compare, eval,
/// surface, gen. Returns the process exit code.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace carl
