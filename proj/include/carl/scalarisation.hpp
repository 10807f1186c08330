#pragma once

#include <Eigen/Core>

#include <utility>

namespace carl {

/**
 * Nonnegative multiplier vector lambda.
 *
 * Projects a cost vector v in R^{n+1} onto v_0 + lambda . v_{1..n}. Negative
 * entries supplied by callers are clamped to zero.
 */
class Scalarisation {
 public:
  Scalarisation() = default;
  explicit Scalarisation(Eigen::VectorXd lambda) : lambda_(std::move(lambda)) {
    lambda_ = lambda_.cwiseMax(0.0);
  }

  static Scalarisation zeros(int n) { return Scalarisation(Eigen::VectorXd::Zero(n)); }

  int n() const { return static_cast<int>(lambda_.size()); }
  const Eigen::VectorXd& lambda() const { return lambda_; }
  double operator[](int i) const { return lambda_[i]; }

  /// The row [1 lambda].
  Eigen::VectorXd weights() const {
    Eigen::VectorXd w(lambda_.size() + 1);
    w << 1.0, lambda_;
    return w;
  }

  template <typename Derived>
  double project(const Eigen::MatrixBase<Derived>& v) const {
    return v[0] + lambda_.dot(v.tail(lambda_.size()));
  }

  /// Constant term -lambda . u added to every lambda-SSP policy cost.
  double terminal(const Eigen::VectorXd& bounds) const { return -lambda_.dot(bounds); }

  bool operator==(const Scalarisation& other) const { return lambda_ == other.lambda_; }

 private:
  Eigen::VectorXd lambda_;
};

}  // namespace carl
