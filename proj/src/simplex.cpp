#include "carl/simplex.hpp"

#include "carl/errors.hpp"
#include "carl/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace carl {

void LinearProgram::set_objective(Sense sense, Eigen::VectorXd c) {
  if (c.size() != num_vars()) {
    throw DimensionMismatch("objective has " + std::to_string(c.size()) + " coefficients, expected " +
                            std::to_string(num_vars()));
  }
  sense_ = sense;
  objective_ = std::move(c);
}

void LinearProgram::set_bounds(int var, double lower, double upper) {
  if (var < 0 || var >= num_vars()) throw DimensionMismatch("bound on unknown variable");
  if (lower > upper) throw MalformedModel("variable lower bound exceeds upper bound");
  lower_[var] = lower;
  upper_[var] = upper;
}

void LinearProgram::add_constraint(Terms terms, Relation rel, double rhs) {
  if (!std::isfinite(rhs)) throw MalformedModel("constraint right-hand side is not finite");
  for (const auto& [j, a] : terms) {
    if (j < 0 || j >= num_vars()) throw DimensionMismatch("constraint refers to unknown variable");
  }
  constraints_.push_back({std::move(terms), rel, rhs});
}

void LinearProgram::add_constraint(const Eigen::VectorXd& row, Relation rel, double rhs) {
  if (row.size() != num_vars()) {
    throw DimensionMismatch("constraint row has " + std::to_string(row.size()) + " entries, expected " +
                            std::to_string(num_vars()));
  }
  std::vector<std::pair<int, double>> terms;
  for (int j = 0; j < num_vars(); ++j) {
    if (row[j] != 0.0) terms.emplace_back(j, row[j]);
  }
  add_constraint(std::move(terms), rel, rhs);
}

double LinearProgram::max_violation(const Eigen::VectorXd& x) const {
  double worst = 0.0;
  for (int j = 0; j < num_vars(); ++j) {
    worst = std::max({worst, lower_[j] - x[j], x[j] - upper_[j]});
  }
  for (const auto& c : constraints_) {
    double lhs = 0.0;
    for (const auto& [j, a] : c.terms) lhs += a * x[j];
    switch (c.relation) {
      case Relation::LessEqual: worst = std::max(worst, lhs - c.rhs); break;
      case Relation::GreaterEqual: worst = std::max(worst, c.rhs - lhs); break;
      case Relation::Equal: worst = std::max(worst, std::abs(lhs - c.rhs)); break;
    }
  }
  return worst;
}

namespace {

// x_j = offset + sign * y_col - y_neg
struct VariableMap {
  int col = -1;
  int neg = -1;
  double sign = 1.0;
  double offset = 0.0;
};

enum class PhaseResult { Optimal, Unbounded };

class Tableau {
 public:
  Tableau(Eigen::MatrixXd body, std::vector<int> basis, const SimplexOptions& options, long cap)
      : t_(std::move(body)), basis_(std::move(basis)), options_(options), cap_(cap) {}

  Eigen::Index rows() const { return static_cast<Eigen::Index>(basis_.size()); }
  Eigen::Index cols() const { return t_.cols() - 1; }
  Eigen::MatrixXd& data() { return t_; }
  std::vector<int>& basis() { return basis_; }
  long pivots() const { return pivots_; }

  // Minimises the cost row `obj` over columns `< allowed`.
  PhaseResult run(Eigen::Index obj, Eigen::Index allowed) {
    const long bland_after = 3 * static_cast<long>(rows() + cols());
    long phase_pivots = 0;
    for (;;) {
      if (pivots_ >= cap_) {
        throw NumericalBreakdown("simplex exceeded " + std::to_string(cap_) + " pivots");
      }
      const bool bland = phase_pivots >= bland_after;
      Eigen::Index enter = -1;
      double best = -options_.optimality_tolerance;
      for (Eigen::Index j = 0; j < allowed; ++j) {
        const double d = t_(obj, j);
        if (d < best) {
          enter = j;
          if (bland) break;
          best = d;
        }
      }
      if (enter < 0) return PhaseResult::Optimal;

      const Eigen::Index leave = ratio_test(enter, bland);
      if (leave < 0) return PhaseResult::Unbounded;
      pivot(leave, enter);
      ++phase_pivots;
    }
  }

  // Harris two-pass ratio test. The first pass bounds the step with every
  // right-hand side relaxed by a small slack; the second takes the largest
  // pivot element under that bound, so rounding noise in a degenerate row
  // cannot become the pivot. Bland's rule takes the lowest basic index.
  Eigen::Index ratio_test(Eigen::Index enter, bool bland) const {
    const double slack = std::min(options_.feasibility_tolerance, 1e-9);
    double bound = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < rows(); ++i) {
      const double a = t_(i, enter);
      if (a > options_.pivot_tolerance) bound = std::min(bound, (std::max(0.0, t_(i, cols())) + slack) / a);
    }
    if (!std::isfinite(bound)) return -1;
    Eigen::Index leave = -1;
    for (Eigen::Index i = 0; i < rows(); ++i) {
      const double a = t_(i, enter);
      if (a <= options_.pivot_tolerance || std::max(0.0, t_(i, cols())) / a > bound) continue;
      if (leave < 0) {
        leave = i;
      } else if (bland ? basis_[i] < basis_[leave] : a > t_(leave, enter)) {
        leave = i;
      }
    }
    return leave;
  }

  void pivot(Eigen::Index r, Eigen::Index j) {
    t_.row(r) /= t_(r, j);
    Eigen::VectorXd factors = t_.col(j);
    factors[r] = 0.0;
    const Eigen::RowVectorXd pivot_row = t_.row(r);
    t_.noalias() -= factors * pivot_row;
    t_.col(j).setZero();
    t_(r, j) = 1.0;
    basis_[r] = static_cast<int>(j);
    ++pivots_;
  }

  void drop_rows(const std::vector<char>& drop) {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < t_.rows(); ++i) {
      if (i >= rows() || !drop[i]) keep.push_back(i);
    }
    Eigen::MatrixXd next(static_cast<Eigen::Index>(keep.size()), t_.cols());
    std::vector<int> next_basis;
    for (std::size_t k = 0; k < keep.size(); ++k) {
      next.row(static_cast<Eigen::Index>(k)) = t_.row(keep[k]);
      if (keep[k] < rows()) next_basis.push_back(basis_[keep[k]]);
    }
    t_ = std::move(next);
    basis_ = std::move(next_basis);
  }

 private:
  Eigen::MatrixXd t_;
  std::vector<int> basis_;
  const SimplexOptions& options_;
  long cap_;
  long pivots_ = 0;
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& options) {
  const int nv = lp.num_vars();
  constexpr double inf = std::numeric_limits<double>::infinity();

  // Shift and split variables into nonnegative columns.
  std::vector<VariableMap> vars(nv);
  int ns = 0;
  struct UpperRow {
    int col;
    double bound;
  };
  std::vector<UpperRow> upper_rows;
  for (int j = 0; j < nv; ++j) {
    const double lo = lp.lower()[j];
    const double hi = lp.upper()[j];
    VariableMap& v = vars[j];
    if (std::isfinite(lo)) {
      v = {ns++, -1, 1.0, lo};
      if (hi < inf) upper_rows.push_back({v.col, hi - lo});
    } else if (hi < inf) {
      v = {ns++, -1, -1.0, hi};
    } else {
      v.col = ns++;
      v.neg = ns++;
    }
  }

  const int m = lp.num_constraints() + static_cast<int>(upper_rows.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, ns);
  Eigen::VectorXd b(m);
  std::vector<Relation> rel(m);
  int row = 0;
  for (const auto& c : lp.constraints()) {
    double rhs = c.rhs;
    for (const auto& [j, coef] : c.terms) {
      const VariableMap& v = vars[j];
      a(row, v.col) += coef * v.sign;
      if (v.neg >= 0) a(row, v.neg) -= coef;
      rhs -= coef * v.offset;
    }
    b[row] = rhs;
    rel[row] = c.relation;
    ++row;
  }
  for (const auto& u : upper_rows) {
    a(row, u.col) = 1.0;
    b[row] = u.bound;
    rel[row] = Relation::LessEqual;
    ++row;
  }
  for (int i = 0; i < m; ++i) {
    if (b[i] < 0.0) {
      a.row(i) *= -1.0;
      b[i] = -b[i];
      if (rel[i] == Relation::LessEqual) {
        rel[i] = Relation::GreaterEqual;
      } else if (rel[i] == Relation::GreaterEqual) {
        rel[i] = Relation::LessEqual;
      }
    }
  }

  int n_slack = 0;
  int n_art = 0;
  for (Relation r : rel) {
    if (r != Relation::Equal) ++n_slack;
    if (r != Relation::LessEqual) ++n_art;
  }
  const int art_start = ns + n_slack;
  const int ncols = art_start + n_art;

  // Rows 0..m-1 constraints, m the phase-two costs, m+1 the phase-one costs.
  Eigen::MatrixXd body = Eigen::MatrixXd::Zero(m + 2, ncols + 1);
  body.topLeftCorner(m, ns) = a;
  body.col(ncols).head(m) = b;
  std::vector<int> basis(m);
  int next_slack = ns;
  int next_art = art_start;
  for (int i = 0; i < m; ++i) {
    switch (rel[i]) {
      case Relation::LessEqual:
        body(i, next_slack) = 1.0;
        basis[i] = next_slack++;
        break;
      case Relation::GreaterEqual:
        body(i, next_slack++) = -1.0;
        body(i, next_art) = 1.0;
        basis[i] = next_art++;
        break;
      case Relation::Equal:
        body(i, next_art) = 1.0;
        basis[i] = next_art++;
        break;
    }
  }
  const Eigen::MatrixXd original = body.topRows(m);

  double obj_sign = 1.0;
  if (lp.sense() == Sense::Maximise) obj_sign = -1.0;
  if (lp.sense() != Sense::None) {
    for (int j = 0; j < nv; ++j) {
      const VariableMap& v = vars[j];
      const double c = obj_sign * lp.objective()[j];
      body(m, v.col) += c * v.sign;
      if (v.neg >= 0) body(m, v.neg) -= c;
    }
  }
  for (int i = 0; i < m; ++i) {
    if (basis[i] >= art_start) body.row(m + 1) -= body.row(i);
  }
  body.block(m + 1, art_start, 1, n_art).setZero();

  const long cap = options.max_pivots > 0 ? options.max_pivots : 100L * (m + ncols) + 1000;
  Tableau tab(std::move(body), std::move(basis), options, cap);

  LpSolution result;
  tab.run(m + 1, art_start);
  const double infeasibility = -tab.data()(static_cast<Eigen::Index>(m) + 1, ncols);
  if (infeasibility > options.feasibility_tolerance) {
    result.status = LpStatus::Infeasible;
    result.pivots = tab.pivots();
    return result;
  }

  // Drive artificials out of the basis; rows where that fails are redundant.
  std::vector<char> drop(m, 0);
  bool any_drop = false;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (tab.basis()[i] < art_start) continue;
    Eigen::Index best = -1;
    double mag = 1e-9;
    for (Eigen::Index j = 0; j < art_start; ++j) {
      if (std::abs(tab.data()(i, j)) > mag) {
        mag = std::abs(tab.data()(i, j));
        best = j;
      }
    }
    if (best >= 0) {
      tab.pivot(i, best);
    } else {
      drop[i] = 1;
      any_drop = true;
    }
  }
  std::vector<Eigen::Index> kept_rows;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!drop[i]) kept_rows.push_back(i);
  }
  if (any_drop) tab.drop_rows(drop);
  const Eigen::Index mk = tab.rows();

  if (lp.sense() != Sense::None && tab.run(mk, art_start) == PhaseResult::Unbounded) {
    result.status = LpStatus::Unbounded;
    result.pivots = tab.pivots();
    return result;
  }

  Eigen::VectorXd y = Eigen::VectorXd::Zero(ncols);
  for (Eigen::Index i = 0; i < mk; ++i) y[tab.basis()[i]] = tab.data()(i, ncols);

  if (options.polish && mk > 0) {
    Eigen::MatrixXd basis_matrix(mk, mk);
    Eigen::VectorXd rhs(mk);
    for (Eigen::Index i = 0; i < mk; ++i) {
      rhs[i] = original(kept_rows[i], ncols);
      for (Eigen::Index k = 0; k < mk; ++k) {
        basis_matrix(i, k) = original(kept_rows[i], tab.basis()[k]);
      }
    }
    try {
      const Eigen::VectorXd yb = DenseLu<double>(std::move(basis_matrix)).solve(rhs);
      if (yb.minCoeff() >= -options.feasibility_tolerance) {
        for (Eigen::Index k = 0; k < mk; ++k) y[tab.basis()[k]] = yb[k];
      }
    } catch (const SingularMatrix&) {
    }
  }
  y = y.cwiseMax(0.0);

  result.x.resize(nv);
  for (int j = 0; j < nv; ++j) {
    const VariableMap& v = vars[j];
    result.x[j] = v.offset + v.sign * y[v.col] - (v.neg >= 0 ? y[v.neg] : 0.0);
  }
  result.status = LpStatus::Optimal;
  result.objective = lp.sense() == Sense::None ? 0.0 : lp.objective().dot(result.x);
  result.pivots = tab.pivots();
  return result;
}

}  // namespace carl
