#pragma once

#include "carl/errors.hpp"

#include <Eigen/Core>

#include <cmath>
#include <string>
#include <utility>

namespace carl {

inline constexpr double kSingularPivot = 1e-13;

/**
 * LU factorisation with partial pivoting.
 *
 * Unlike Eigen::PartialPivLU this reports singularity: a pivot whose
 * magnitude falls below `pivot_tolerance * max(1, max|A_ij|)` raises
 * SingularMatrix. Solves apply one step of iterative refinement against the
 * original matrix.
 */
template <typename Scalar>
class DenseLu {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  explicit DenseLu(Matrix a, Scalar pivot_tolerance = Scalar(kSingularPivot))
      : original_(a), lu_(std::move(a)), perm_(lu_.rows()) {
    if (lu_.rows() != lu_.cols()) {
      throw DimensionMismatch("DenseLu: matrix is " + std::to_string(lu_.rows()) + "x" +
                              std::to_string(lu_.cols()));
    }
    const Eigen::Index dim = lu_.rows();
    const Scalar scale = std::max(Scalar(1), dim > 0 ? lu_.cwiseAbs().maxCoeff() : Scalar(1));
    const Scalar threshold = pivot_tolerance * scale;
    for (Eigen::Index i = 0; i < dim; ++i) perm_[i] = i;

    for (Eigen::Index k = 0; k < dim; ++k) {
      Eigen::Index pivot_row = k;
      const Scalar pivot_mag = lu_.col(k).tail(dim - k).cwiseAbs().maxCoeff(&pivot_row);
      pivot_row += k;
      if (!(pivot_mag >= threshold)) {
        throw SingularMatrix("DenseLu: pivot " + std::to_string(static_cast<double>(pivot_mag)) +
                             " in column " + std::to_string(k));
      }
      if (pivot_row != k) {
        lu_.row(k).swap(lu_.row(pivot_row));
        std::swap(perm_[k], perm_[pivot_row]);
      }
      const Scalar inv = Scalar(1) / lu_(k, k);
      lu_.col(k).tail(dim - k - 1) *= inv;
      lu_.bottomRightCorner(dim - k - 1, dim - k - 1).noalias() -=
          lu_.col(k).tail(dim - k - 1) * lu_.row(k).tail(dim - k - 1);
    }
  }

  Eigen::Index size() const { return lu_.rows(); }

  /// Solves A x = b for one or many right-hand sides.
  template <typename Rhs>
  Eigen::Matrix<Scalar, Eigen::Dynamic, Rhs::ColsAtCompileTime> solve(
      const Eigen::MatrixBase<Rhs>& b) const {
    using Result = Eigen::Matrix<Scalar, Eigen::Dynamic, Rhs::ColsAtCompileTime>;
    if (b.rows() != size()) {
      throw DimensionMismatch("DenseLu::solve: rhs has " + std::to_string(b.rows()) +
                              " rows, expected " + std::to_string(size()));
    }
    Result x = raw_solve(b);
    Result residual = b - original_ * x;
    x += raw_solve(residual);
    return x;
  }

 private:
  template <typename Rhs>
  Eigen::Matrix<Scalar, Eigen::Dynamic, Rhs::ColsAtCompileTime> raw_solve(
      const Eigen::MatrixBase<Rhs>& b) const {
    Eigen::Matrix<Scalar, Eigen::Dynamic, Rhs::ColsAtCompileTime> y(b.rows(), b.cols());
    for (Eigen::Index i = 0; i < size(); ++i) y.row(i) = b.row(perm_[i]);
    lu_.template triangularView<Eigen::UnitLower>().solveInPlace(y);
    lu_.template triangularView<Eigen::Upper>().solveInPlace(y);
    return y;
  }

  Matrix original_;
  Matrix lu_;
  Eigen::Matrix<Eigen::Index, Eigen::Dynamic, 1> perm_;
};

/// x with A x = b, by partial-pivot elimination and one refinement step.
template <typename DerivedA, typename DerivedB>
auto solve_linear_system(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  return DenseLu<Scalar>(a.eval()).solve(b);
}

}  // namespace carl
