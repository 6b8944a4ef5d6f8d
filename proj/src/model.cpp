#include "pspin/model.hpp"

#include "pspin/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace pspin {

void ModelParams::validate() const {
  if (p < 2) throw DomainError("model: p must be >= 2, got " + std::to_string(p));
  if (N < 1) throw DomainError("model: N must be >= 1, got " + std::to_string(N));
  if (!(J > 0.0) || !std::isfinite(J)) throw DomainError("model: J must be positive and finite");
}

Eigen::VectorXd ModelParams::magnetization_grid() const {
  Eigen::VectorXd m(N + 1);
  for (int k = 0; k <= N; ++k) m(k) = magnetization(k);
  return m;
}

double ModelParams::energy(int k) const { return -0.5 * J * N * ipow(magnetization(k), p); }

Eigen::VectorXd ModelParams::energies() const {
  Eigen::VectorXd e(N + 1);
  for (int k = 0; k <= N; ++k) e(k) = energy(k);
  return e;
}

void AnnealingSchedule::validate() const {
  if (!(start_value >= 0.0) || !(end_value >= 0.0))
    throw DomainError("schedule: start and end values must be >= 0");
  if (!(total_time > 0.0) || !std::isfinite(total_time))
    throw DomainError("schedule: total time must be positive and finite");
}

double AnnealingSchedule::value(double t) const {
  if (t <= 0.0) return start_value;
  if (t >= total_time) return end_value;
  const double s = t / total_time;
  return start_value * (1.0 - s) + end_value * s;
}

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

double classical_energy(double m, const ModelParams& params) {
  if (!(std::abs(m) <= 1.0)) throw DomainError("classical_energy: |m| > 1");
  return -0.5 * params.J * params.N * ipow(m, params.p);
}

std::pair<double, double> kinetic_coefficients(double m, int N) {
  if (N < 1) throw DomainError("kinetic_coefficients: N must be >= 1");
  constexpr double kSlack = 1e-12;
  auto root = [&](double arg) {
    if (arg < -kSlack) throw DomainError("kinetic_coefficients: m is off the magnetization grid");
    return std::sqrt(std::max(arg, 0.0));
  };
  const double base = 1.0 - m * m;
  return {root(base + 2.0 * (1.0 - m) / N), root(base + 2.0 * (1.0 + m) / N)};
}

Eigen::VectorXd transverse_couplings(int N) {
  // (N/2) K+(m_k) = sqrt((N-k)(k+1)), written in integers so the grid ends are exact.
  Eigen::VectorXd c(N);
  for (int k = 0; k < N; ++k) c(k) = -std::sqrt(static_cast<double>(N - k) * (k + 1));
  return c;
}

TridiagonalOperator build_quantum_hamiltonian(const ModelParams& params, double gamma) {
  params.validate();
  if (!(gamma >= 0.0)) throw DomainError("build_quantum_hamiltonian: gamma must be >= 0");
  return TridiagonalOperator(params.energies(), gamma * transverse_couplings(params.N));
}

double inverse_temperature(double T) {
  if (!(T >= 0.0)) throw DomainError("temperature must be >= 0");
  if (T == 0.0) return kInfinity;
  if (std::isinf(T)) return 0.0;
  return 1.0 / T;
}

double heat_bath_rate(double dE, double beta) {
  if (std::isinf(beta)) {
    if (dE > 0.0) return 0.0;
    if (dE < 0.0) return 1.0;
    return 0.5;
  }
  const double x = beta * dE;
  if (x == 0.0) return 0.5;
  if (x > 0.0) {
    const double e = std::exp(-x);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(x));
}

namespace {

// 1 / (2 cosh(y)), finite for any y.
double half_sech(double y) {
  const double e = std::exp(-std::abs(y));
  return e / (1.0 + e * e);
}

// e^x / (1 + e^x)^2, the derivative of the logistic function.
double logistic_slope(double x) {
  const double e = std::exp(-std::abs(x));
  return e / ((1.0 + e) * (1.0 + e));
}

double times_beta(double beta, double dE) {
  if (dE == 0.0) return 0.0;
  return beta * dE;
}

double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

MasterGenerator build_master_generator(const ModelParams& params, double T) {
  params.validate();
  const double beta = inverse_temperature(T);
  const int N = params.N;
  const Eigen::VectorXd E = params.energies();

  MasterGenerator g;
  g.sub.resize(N);
  g.super.resize(N);
  g.diag.resize(N + 1);
  for (int k = 0; k < N; ++k) {
    const double dE = E(k + 1) - E(k);
    g.sub(k) = (N - k) * heat_bath_rate(dE, beta);
    g.super(k) = (k + 1) * heat_bath_rate(-dE, beta);
  }
  for (int k = 0; k <= N; ++k) {
    const double up = k < N ? g.sub(k) : 0.0;
    const double down = k > 0 ? g.super(k - 1) : 0.0;
    g.diag(k) = -(up + down);
  }
  return g;
}

Eigen::MatrixXd MasterGenerator::dense() const { return as_operator().dense(); }

Eigen::VectorXd MasterGenerator::column_sums() const {
  const Eigen::Index n = size();
  Eigen::VectorXd s = diag;
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    s(k) += sub(k);
    s(k + 1) += super(k);
  }
  return s;
}

TridiagonalOperator MasterGenerator::as_operator() const {
  TridiagonalOperator op(diag, super);
  op.lower = sub;
  op.symmetric = false;
  return op;
}

EquilibriumDistribution equilibrium_distribution(const ModelParams& params, double T) {
  params.validate();
  const double beta = inverse_temperature(T);
  const int N = params.N;
  const Eigen::VectorXd E = params.energies();

  EquilibriumDistribution eq;
  eq.temperature = T;
  eq.probabilities = Eigen::VectorXd::Zero(N + 1);

  if (std::isinf(beta)) {
    const double emin = E.minCoeff();
    int count = 0;
    for (int k = 0; k <= N; ++k) count += (E(k) == emin);
    for (int k = 0; k <= N; ++k)
      if (E(k) == emin) eq.probabilities(k) = 1.0 / count;
    return eq;
  }

  Eigen::VectorXd logw(N + 1);
  for (int k = 0; k <= N; ++k) logw(k) = log_binomial(N, k) - times_beta(beta, E(k));
  const double top = logw.maxCoeff();
  double z = 0.0;
  for (int k = 0; k <= N; ++k) z += std::exp(logw(k) - top);
  for (int k = 0; k <= N; ++k) eq.probabilities(k) = std::exp(logw(k) - top) / z;
  return eq;
}

double equilibrium_energy(const ModelParams& params, double T) {
  const auto eq = equilibrium_distribution(params, T);
  return eq.probabilities.dot(params.energies());
}

TridiagonalOperator build_effective_hamiltonian(const ModelParams& params, double T) {
  params.validate();
  if (!(T > 0.0))
    throw DomainError("build_effective_hamiltonian: undefined at T = 0 (all couplings vanish)");
  const double beta = inverse_temperature(T);
  const int N = params.N;
  const Eigen::VectorXd E = params.energies();

  Eigen::VectorXd d = Eigen::VectorXd::Zero(N + 1);
  Eigen::VectorXd e(N);
  for (int k = 0; k <= N; ++k) {
    if (k < N) d(k) += (N - k) * heat_bath_rate(E(k + 1) - E(k), beta);
    if (k > 0) d(k) += k * heat_bath_rate(E(k - 1) - E(k), beta);
  }
  for (int k = 0; k < N; ++k) {
    const double flips = std::sqrt(static_cast<double>(N - k) * (k + 1));
    e(k) = -flips * half_sech(0.5 * times_beta(beta, E(k + 1) - E(k)));
  }
  return TridiagonalOperator(std::move(d), std::move(e));
}

TridiagonalOperator effective_hamiltonian_beta_derivative(const ModelParams& params, double T) {
  params.validate();
  if (!(T > 0.0))
    throw DomainError("effective_hamiltonian_beta_derivative: undefined at T = 0");
  const double beta = inverse_temperature(T);
  const int N = params.N;
  const Eigen::VectorXd E = params.energies();

  Eigen::VectorXd d = Eigen::VectorXd::Zero(N + 1);
  Eigen::VectorXd e(N);
  for (int k = 0; k <= N; ++k) {
    if (k < N) {
      const double dE = E(k + 1) - E(k);
      d(k) -= (N - k) * dE * logistic_slope(times_beta(beta, dE));
    }
    if (k > 0) {
      const double dE = E(k - 1) - E(k);
      d(k) -= k * dE * logistic_slope(times_beta(beta, dE));
    }
  }
  for (int k = 0; k < N; ++k) {
    const double dE = E(k + 1) - E(k);
    const double y = 0.5 * times_beta(beta, dE);
    const double flips = std::sqrt(static_cast<double>(N - k) * (k + 1));
    e(k) = flips * 0.5 * dE * std::tanh(y) * half_sech(y);
  }
  return TridiagonalOperator(std::move(d), std::move(e));
}

double entropy_density(double m) {
  if (!(std::abs(m) <= 1.0)) throw DomainError("entropy_density: |m| > 1");
  auto xlogx = [](double x) { return x > 0.0 ? x * std::log(x) : 0.0; };
  return std::log(2.0) - 0.5 * xlogx(1.0 - m) - 0.5 * xlogx(1.0 + m);
}

double free_energy_density(double m, double T, const ModelParams& params) {
  return -0.5 * params.J * ipow(m, params.p) - T * entropy_density(m);
}

namespace {

// Slope of f(., T) on 0 < m < 1.
double free_energy_slope(double m, double T, const ModelParams& params) {
  return T * std::atanh(m) - 0.5 * params.p * params.J * ipow(m, params.p - 1);
}

// Sample points on (0, 1), dense near both ends.
const std::vector<double>& slope_grid() {
  static const std::vector<double> grid = [] {
    std::vector<double> g;
    constexpr int kPerSide = 2000;
    for (int i = 0; i < kPerSide; ++i) g.push_back(std::pow(10.0, -12.0 + 12.0 * i / kPerSide) * 0.5);
    for (int i = kPerSide; i >= 0; --i) g.push_back(1.0 - std::pow(10.0, -15.5 + 15.5 * i / kPerSide) * 0.5);
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    return g;
  }();
  return grid;
}

template <typename F>
double bisect_root(F&& f, double lo, double hi) {
  double flo = f(lo);
  for (int it = 0; it < 200 && hi - lo > 1e-17; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Roots of f'(., T) on (0, 1) where the slope changes sign in the given direction.
std::vector<double> slope_roots(const ModelParams& params, double T, bool rising) {
  const auto& g = slope_grid();
  std::vector<double> roots;
  auto s = [&](double m) { return free_energy_slope(m, T, params); };
  double prev = s(g.front());
  for (std::size_t i = 1; i < g.size(); ++i) {
    const double cur = s(g[i]);
    const bool crosses = rising ? (prev < 0.0 && cur >= 0.0) : (prev > 0.0 && cur <= 0.0);
    if (crosses) roots.push_back(bisect_root(s, g[i - 1], g[i]));
    prev = cur;
  }
  return roots;
}

}  // namespace

double ferromagnetic_minimum(const ModelParams& params, double T) {
  params.validate();
  if (T <= 0.0) return 1.0;
  auto rises = slope_roots(params, T, true);
  if (!rises.empty()) return rises.back();
  // Slope still negative at the last representable point: the minimum sits at m = 1.
  if (free_energy_slope(slope_grid().back(), T, params) < 0.0) return 1.0;
  return std::numeric_limits<double>::quiet_NaN();
}

double critical_temperature(const ModelParams& params) {
  params.validate();
  if (params.p == 2) return params.J;

  auto depth = [&](double T) {
    const double mf = ferromagnetic_minimum(params, T);
    if (std::isnan(mf)) return 1.0;
    return free_energy_density(mf, T, params) - free_energy_density(0.0, T, params);
  };
  // f(1, T) = f(0, T) at T = J / (2 log 2), and the ferromagnetic minimum lies below f(1).
  double lo = params.J / (2.0 * std::log(2.0));
  double hi = params.J;
  for (int i = 0; i < 60 && depth(hi) <= 0.0; ++i) hi *= 2.0;
  if (depth(lo) > 0.0 || depth(hi) <= 0.0)
    throw ConvergenceError("critical_temperature: could not bracket the transition");
  for (int it = 0; it < 200; ++it) {
    if (hi - lo < 1e-10 * params.J) return 0.5 * (lo + hi);
    const double mid = 0.5 * (lo + hi);
    (depth(mid) <= 0.0 ? lo : hi) = mid;
  }
  throw ConvergenceError("critical_temperature: bisection did not converge in 200 iterations");
}

}  // namespace pspin
