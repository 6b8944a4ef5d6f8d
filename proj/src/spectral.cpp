#include "pspin/spectral.hpp"

#include "pspin/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

namespace pspin {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct SturmCounter {
  const Eigen::VectorXd& d;
  Eigen::VectorXd b2;
  double pivmin;

  explicit SturmCounter(const TridiagonalOperator& op) : d(op.diag), b2(op.off.array().square()) {
    const double bmax = b2.size() ? b2.maxCoeff() : 0.0;
    pivmin = std::numeric_limits<double>::min() * std::max(1.0, bmax);
  }

  // Number of eigenvalues strictly below x.
  int below(double x) const {
    const Eigen::Index n = d.size();
    int count = 0;
    double q = d(0) - x;
    if (std::abs(q) < pivmin) q = -pivmin;
    if (q < 0.0) ++count;
    for (Eigen::Index i = 1; i < n; ++i) {
      q = (d(i) - x) - b2(i - 1) / q;
      if (std::abs(q) < pivmin) q = -pivmin;
      if (q < 0.0) ++count;
    }
    return count;
  }
};

// Solves (A - shift I) x = rhs by Gaussian elimination with partial pivoting,
// overwriting rhs. Tiny pivots are replaced by +-floor.
class ShiftedTridiagonalSolver {
 public:
  ShiftedTridiagonalSolver(const TridiagonalOperator& op, double shift, double floor)
      : n_(op.size()), u0_(n_), u1_(n_), u2_(n_), mult_(n_), swapped_(n_, false) {
    const auto& a = op.diag;
    const auto& b = op.off;
    double cur0 = a(0) - shift;
    double cur1 = n_ > 1 ? b(0) : 0.0;
    for (Eigen::Index i = 0; i + 1 < n_; ++i) {
      const double s = b(i);
      const double nd = a(i + 1) - shift;
      const double ns = i + 2 < n_ ? b(i + 1) : 0.0;
      if (std::abs(cur0) >= std::abs(s)) {
        if (std::abs(cur0) < floor) cur0 = std::copysign(floor, cur0 == 0.0 ? 1.0 : cur0);
        u0_(i) = cur0;
        u1_(i) = cur1;
        u2_(i) = 0.0;
        mult_(i) = s / cur0;
        cur0 = nd - mult_(i) * cur1;
        cur1 = ns;
      } else {
        swapped_[static_cast<std::size_t>(i)] = true;
        u0_(i) = s;
        u1_(i) = nd;
        u2_(i) = ns;
        mult_(i) = cur0 / s;
        cur0 = cur1 - mult_(i) * nd;
        cur1 = -mult_(i) * ns;
      }
    }
    if (std::abs(cur0) < floor) cur0 = std::copysign(floor, cur0 == 0.0 ? 1.0 : cur0);
    u0_(n_ - 1) = cur0;
  }

  void solve(Eigen::VectorXd& x) const {
    for (Eigen::Index i = 0; i + 1 < n_; ++i) {
      if (swapped_[static_cast<std::size_t>(i)]) std::swap(x(i), x(i + 1));
      x(i + 1) -= mult_(i) * x(i);
    }
    x(n_ - 1) /= u0_(n_ - 1);
    if (n_ > 1) x(n_ - 2) = (x(n_ - 2) - u1_(n_ - 2) * x(n_ - 1)) / u0_(n_ - 2);
    for (Eigen::Index i = n_ - 3; i >= 0; --i)
      x(i) = (x(i) - u1_(i) * x(i + 1) - u2_(i) * x(i + 2)) / u0_(i);
  }

 private:
  Eigen::Index n_;
  Eigen::VectorXd u0_, u1_, u2_, mult_;
  std::vector<bool> swapped_;
};

void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  const double total = v.sum();
  if (std::abs(total) > 1e-8) {
    if (total < 0.0) v = -v;
    return;
  }
  const double big = v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-3 * big) {
      if (v(i) < 0.0) v = -v;
      return;
    }
  }
}

}  // namespace

SpectrumSlice tridiag_lowest_eigs(const TridiagonalOperator& op, int k, bool with_vectors) {
  if (!op.symmetric) throw DomainError("tridiag_lowest_eigs: operator must be symmetric");
  const Eigen::Index n = op.size();
  if (n == 0) throw DomainError("tridiag_lowest_eigs: empty operator");
  if (k < 1 || k > n) throw DomainError("tridiag_lowest_eigs: need 1 <= k <= n");

  const auto [glo, ghi] = op.gershgorin();
  const double scale = std::max({std::abs(glo), std::abs(ghi), std::numeric_limits<double>::min()});
  const double tol = 4.0 * kEps * scale;
  const SturmCounter sturm(op);

  SpectrumSlice out;
  out.values.resize(k);
  double lo_start = glo - tol;
  for (int j = 0; j < k; ++j) {
    double lo = lo_start, hi = ghi + tol;
    int it = 0;
    while (hi - lo > tol) {
      const double mid = lo + 0.5 * (hi - lo);
      if (mid <= lo || mid >= hi) break;
      (sturm.below(mid) > j ? hi : lo) = mid;
      if (++it > 300)
        throw ConvergenceError("tridiag_lowest_eigs: bisection failed for eigenvalue " +
                               std::to_string(j));
    }
    out.values(j) = 0.5 * (lo + hi);
    lo_start = lo;
  }
  if (!with_vectors) return out;

  out.vectors.resize(n, k);
  std::mt19937_64 rng(0x5eedULL);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  const double cluster_gap = 1e-3 * scale;
  const double floor = kEps * scale;

  int cluster_start = 0;
  double prev_shift = 0.0;
  for (int j = 0; j < k; ++j) {
    double shift = out.values(j);
    if (j > 0) {
      if (out.values(j) - out.values(j - 1) > cluster_gap) cluster_start = j;
      if (shift - prev_shift < 10.0 * floor) shift = prev_shift + 10.0 * floor;
    }
    prev_shift = shift;
    const ShiftedTridiagonalSolver solver(op, shift, floor);

    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = uniform(rng);
    x.normalize();
    for (int iter = 0; iter < 3; ++iter) {
      solver.solve(x);
      for (int pass = 0; pass < 2; ++pass)
        for (int q = cluster_start; q < j; ++q) x -= out.vectors.col(q).dot(x) * out.vectors.col(q);
      const double nrm = x.norm();
      if (!(nrm > 0.0) || !std::isfinite(nrm))
        throw ConvergenceError("tridiag_lowest_eigs: inverse iteration failed for eigenvector " +
                               std::to_string(j));
      x /= nrm;
    }
    fix_sign(x);
    out.vectors.col(j) = x;
  }
  return out;
}

double reflection_parity(const Eigen::Ref<const Eigen::VectorXd>& v) {
  return v.dot(v.reverse()) / v.squaredNorm();
}

ParitySpectrum parity_resolved_spectrum(const TridiagonalOperator& op, int k) {
  const Eigen::Index n = op.size();
  const int want = static_cast<int>(std::min<Eigen::Index>(n, k));
  const int kk = static_cast<int>(std::min<Eigen::Index>(n, want + 2));
  const SpectrumSlice s = tridiag_lowest_eigs(op, kk, true);

  const auto [glo, ghi] = op.gershgorin();
  const double scale = std::max({std::abs(glo), std::abs(ghi), 1.0});
  const double degenerate = 1e-7 * scale;

  // Consecutive eigenvalues closer than `degenerate` form a cluster whose
  // eigenvectors are not individually resolved; rotate them to parity eigenstates.
  std::vector<std::pair<int, int>> clusters;
  for (int j = 0; j < kk;) {
    int e = j + 1;
    while (e < kk && s.values(e) - s.values(e - 1) < degenerate) ++e;
    clusters.emplace_back(j, e);
    j = e;
  }
  if (kk < n && clusters.size() > 1 && clusters.back().second == kk) clusters.pop_back();

  struct Level {
    double value;
    int parity;
    Eigen::VectorXd vec;
  };
  std::vector<Level> levels;
  for (const auto& [b, e] : clusters) {
    const int c = e - b;
    if (c == 1) {
      const double par = reflection_parity(s.vectors.col(b));
      if (std::abs(std::abs(par) - 1.0) > 1e-6)
        throw ConvergenceError("parity classification failed: eigenvector " + std::to_string(b) +
                               " has parity " + std::to_string(par));
      levels.push_back({s.values(b), par > 0.0 ? 1 : -1, s.vectors.col(b)});
      continue;
    }
    const Eigen::MatrixXd V = s.vectors.middleCols(b, c);
    const Eigen::MatrixXd RV = V.colwise().reverse();
    const Eigen::MatrixXd M = 0.5 * (V.transpose() * RV + RV.transpose() * V);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    const Eigen::MatrixXd W = V * es.eigenvectors();
    for (int q = 0; q < c; ++q) {
      const double par = es.eigenvalues()(q);
      if (std::abs(std::abs(par) - 1.0) > 1e-6)
        throw ConvergenceError("parity classification failed inside a degenerate cluster");
      Eigen::VectorXd w = W.col(q).normalized();
      fix_sign(w);
      levels.push_back({op.matrix_element(w, w), par > 0.0 ? 1 : -1, w});
    }
  }
  std::stable_sort(levels.begin(), levels.end(),
                   [](const Level& a, const Level& b) { return a.value < b.value; });

  const int m = std::min<int>(want, static_cast<int>(levels.size()));
  ParitySpectrum out;
  out.values.resize(m);
  out.vectors.resize(n, m);
  for (int j = 0; j < m; ++j) {
    out.values(j) = levels[static_cast<std::size_t>(j)].value;
    out.vectors.col(j) = levels[static_cast<std::size_t>(j)].vec;
    out.parity.push_back(levels[static_cast<std::size_t>(j)].parity);
  }
  return out;
}

double sector_gap(const TridiagonalOperator& op, bool parity_selected) {
  const Eigen::Index n = op.size();
  if (n < 2) throw DomainError("gap: operator has a single level");
  if (!parity_selected) {
    const auto s = tridiag_lowest_eigs(op, 2, false);
    return s.values(1) - s.values(0);
  }
  const auto [glo, ghi] = op.gershgorin();
  const double degenerate = 1e-7 * std::max({std::abs(glo), std::abs(ghi), 1.0});
  for (int k = 4;; k *= 2) {
    const auto ps = parity_resolved_spectrum(op, k);
    // Ties in the lowest cluster resolve to the even sector (nodeless ground state).
    int ground_parity = ps.parity.at(0);
    for (std::size_t j = 1; j < ps.parity.size(); ++j)
      if (ps.values(static_cast<Eigen::Index>(j)) - ps.values(0) < degenerate && ps.parity[j] > 0)
        ground_parity = 1;
    std::vector<double> same;
    for (std::size_t j = 0; j < ps.parity.size(); ++j)
      if (ps.parity[j] == ground_parity) same.push_back(ps.values(static_cast<Eigen::Index>(j)));
    if (same.size() >= 2) return same[1] - same[0];
    if (k >= n) throw ConvergenceError("gap: ground-state parity sector has a single level");
  }
}

double dynamical_gap(const ModelParams& params, double gamma) {
  return sector_gap(build_quantum_hamiltonian(params, gamma), params.p % 2 == 0);
}

MinimumGap min_gap_scan(const ModelParams& params, double lo, double hi, int resolution,
                        double tolerance) {
  if (!(hi > lo) || !(lo >= 0.0)) throw DomainError("min_gap_scan: need 0 <= lo < hi");
  if (resolution < 3) throw DomainError("min_gap_scan: resolution must be >= 3");
  auto gap = [&](double g) { return dynamical_gap(params, g); };

  std::vector<double> grid(static_cast<std::size_t>(resolution));
  std::vector<double> values(grid.size());
  for (int i = 0; i < resolution; ++i) {
    grid[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (resolution - 1);
    values[static_cast<std::size_t>(i)] = gap(grid[static_cast<std::size_t>(i)]);
  }
  const auto best = static_cast<std::size_t>(
      std::min_element(values.begin(), values.end()) - values.begin());
  if (best == 0 || best + 1 == grid.size())
    throw DomainError("min_gap_scan: minimum lies on the range endpoint; widen the range");

  // Golden-section search on the bracketing cells.
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = grid[best - 1], b = grid[best + 1];
  double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
  double f1 = gap(x1), f2 = gap(x2);
  for (int it = 0; it < 200 && (b - a) > tolerance * std::max(1.0, std::abs(a)); ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = gap(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = gap(x2);
    }
  }
  MinimumGap out;
  out.location = f1 < f2 ? x1 : x2;
  out.gap = std::min(f1, f2);
  if (values[best] < out.gap) {
    out.location = grid[best];
    out.gap = values[best];
  }
  return out;
}

GapScaling gap_scaling_fit(const std::vector<double>& sizes, const std::vector<double>& gaps,
                           ScalingModel model) {
  if (sizes.size() != gaps.size()) throw DomainError("gap_scaling_fit: size mismatch");
  const auto n = static_cast<Eigen::Index>(sizes.size());
  if (n < 4) throw FitError("gap_scaling_fit: need at least 4 sizes");

  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double N = sizes[static_cast<std::size_t>(i)];
    const double g = gaps[static_cast<std::size_t>(i)];
    if (!(N > 0.0) || !(g > 0.0)) throw DomainError("gap_scaling_fit: sizes and gaps must be > 0");
    A(i, 0) = 1.0;
    A(i, 1) = model == ScalingModel::power ? std::log(N) : N;
    y(i) = std::log(g);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  if (qr.rank() < 2) throw FitError("gap_scaling_fit: rank-deficient design (all sizes equal)");
  const Eigen::Vector2d c = qr.solve(y);
  const Eigen::VectorXd r = y - A * c;

  GapScaling out;
  out.model = model;
  out.sizes = sizes;
  out.gaps = gaps;
  out.exponent = -c(1);
  out.log_prefactor = c(0);
  out.residual_norm = r.norm();
  out.residuals.assign(r.data(), r.data() + r.size());
  const Eigen::VectorXd xc = A.col(1).array() - A.col(1).mean();
  out.exponent_stderr = n > 2 ? std::sqrt(r.squaredNorm() / static_cast<double>(n - 2) / xc.squaredNorm()) : 0.0;
  return out;
}

SpectrumSlice classical_spectrum(const ModelParams& params, double T, int k) {
  auto s = tridiag_lowest_eigs(build_effective_hamiltonian(params, T),
                               std::min(k, params.N + 1), true);
  s.control = T;
  return s;
}

double classical_dynamical_gap(const ModelParams& params, double T) {
  return sector_gap(build_effective_hamiltonian(params, T), params.p % 2 == 0);
}

}  // namespace pspin
