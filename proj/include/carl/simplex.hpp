#pragma once

#include <Eigen/Core>

#include <limits>
#include <utility>
#include <vector>

namespace carl {

enum class Relation { LessEqual, Equal, GreaterEqual };
enum class Sense { Minimise, Maximise, None };

struct LinearConstraint {
  std::vector<std::pair<int, double>> terms;  // (variable, coefficient)
  Relation relation;
  double rhs;
};

/**
 * Linear program or feasibility system over `num_vars()` variables.
 *
 * Variables default to the box [0, +inf). Either bound may be set to an
 * infinite value; a variable with both bounds infinite is free.
 */
class LinearProgram {
 public:
  explicit LinearProgram(int num_vars)
      : objective_(Eigen::VectorXd::Zero(num_vars)),
        lower_(Eigen::VectorXd::Zero(num_vars)),
        upper_(Eigen::VectorXd::Constant(num_vars, std::numeric_limits<double>::infinity())) {}

  int num_vars() const { return static_cast<int>(objective_.size()); }
  int num_constraints() const { return static_cast<int>(constraints_.size()); }

  void set_objective(Sense sense, Eigen::VectorXd c);
  void set_bounds(int var, double lower, double upper);

  /// Sparse (variable, coefficient) terms. Spell the type out at call sites:
  /// a bare brace list also matches Eigen's initializer-list constructor.
  using Terms = std::vector<std::pair<int, double>>;

  void add_constraint(Terms terms, Relation rel, double rhs);
  void add_constraint(const Eigen::VectorXd& row, Relation rel, double rhs);

  Sense sense() const { return sense_; }
  const Eigen::VectorXd& objective() const { return objective_; }
  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& upper() const { return upper_; }
  const std::vector<LinearConstraint>& constraints() const { return constraints_; }

  /// Largest violation of any constraint or bound at `x`.
  double max_violation(const Eigen::VectorXd& x) const;

 private:
  Sense sense_ = Sense::None;
  Eigen::VectorXd objective_;
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
  std::vector<LinearConstraint> constraints_;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
  long pivots = 0;
};

struct SimplexOptions {
  double feasibility_tolerance = 1e-7;
  double pivot_tolerance = 1e-12;
  double optimality_tolerance = 1e-9;
  /// Zero selects 100 * (rows + columns) + 1000.
  long max_pivots = 0;
  /// Recompute basic values from the original rows after the final pivot.
  bool polish = true;
};

/**
 * Two-phase dense tableau simplex.
 *
 * Phase one minimises the sum of artificial variables; phase two optimises
 * the objective when one is set. Pricing follows Dantzig's rule and switches
 * to Bland's rule once a phase has used 3 * (rows + columns) pivots. Throws
 * NumericalBreakdown when the pivot cap is reached.
 */
LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& options = {});

}  // namespace carl
