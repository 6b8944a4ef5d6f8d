#pragma once

#include <Eigen/Dense>

#include <cassert>
#include <utility>

namespace pspin {

/// Real tridiagonal operator on the N+1 magnetization sectors.
///
/// `off(k)` couples sectors k and k+1. When `symmetric` is true the operator is
/// `diag + off (above) + off (below)`; otherwise `lower(k)` holds the (k+1, k)
/// entry and `off(k)` the (k, k+1) entry.
struct TridiagonalOperator {
  Eigen::VectorXd diag;
  Eigen::VectorXd off;
  Eigen::VectorXd lower;
  bool symmetric = true;

  TridiagonalOperator() = default;
  TridiagonalOperator(Eigen::VectorXd d, Eigen::VectorXd e)
      : diag(std::move(d)), off(std::move(e)) {
    assert(off.size() + 1 == diag.size() || (diag.size() == 0 && off.size() == 0));
  }

  Eigen::Index size() const { return diag.size(); }

  double upper_at(Eigen::Index k) const { return off(k); }
  double lower_at(Eigen::Index k) const { return symmetric ? off(k) : lower(k); }

  /// y = A x. Works for real and complex vectors; O(n).
  template <typename In, typename Out>
  void apply(const Eigen::MatrixBase<In>& x, Eigen::MatrixBase<Out>& y) const {
    const Eigen::Index n = size();
    assert(x.size() == n && y.size() == n);
    if (n == 0) return;
    if (n == 1) {
      y(0) = diag(0) * x(0);
      return;
    }
    y(0) = diag(0) * x(0) + upper_at(0) * x(1);
    for (Eigen::Index k = 1; k + 1 < n; ++k) {
      y(k) = lower_at(k - 1) * x(k - 1) + diag(k) * x(k) + upper_at(k) * x(k + 1);
    }
    y(n - 1) = lower_at(n - 2) * x(n - 2) + diag(n - 1) * x(n - 1);
  }

  template <typename In>
  auto operator*(const Eigen::MatrixBase<In>& x) const {
    Eigen::Matrix<typename In::Scalar, Eigen::Dynamic, 1> y(size());
    apply(x, y);
    return y;
  }

  /// <x|A|y> without forming A y explicitly.
  template <typename A, typename B>
  auto matrix_element(const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& y) const {
    return x.dot(*this * y);
  }

  Eigen::MatrixXd dense() const {
    const Eigen::Index n = size();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) m(k, k) = diag(k);
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
      m(k, k + 1) = upper_at(k);
      m(k + 1, k) = lower_at(k);
    }
    return m;
  }

  /// Gershgorin enclosure [lo, hi] of the (real) spectrum of a symmetric operator.
  std::pair<double, double> gershgorin() const {
    const Eigen::Index n = size();
    double lo = 0.0, hi = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      double r = 0.0;
      if (k > 0) r += std::abs(lower_at(k - 1));
      if (k + 1 < n) r += std::abs(upper_at(k));
      if (k == 0 || diag(k) - r < lo) lo = diag(k) - r;
      if (k == 0 || diag(k) + r > hi) hi = diag(k) + r;
    }
    return {lo, hi};
  }
};

}  // namespace pspin
