#include "pspin/dynamics.hpp"

#include "pspin/errors.hpp"
#include "pspin/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace pspin {

namespace {

constexpr int kGaugeNodes = 65;
constexpr double kNegativeReport = -1e-12;

// Piecewise-linear interpolant on a uniform grid of [t0, t1].
struct UniformInterpolant {
  double t0 = 0.0, t1 = 1.0;
  std::vector<double> values;

  double operator()(double t) const {
    const auto n = static_cast<double>(values.size() - 1);
    const double x = std::clamp((t - t0) / (t1 - t0), 0.0, 1.0) * n;
    const auto i = std::min(static_cast<std::size_t>(x), values.size() - 2);
    const double w = x - static_cast<double>(i);
    return values[i] * (1.0 - w) + values[i + 1] * w;
  }
};

class Recorder {
 public:
  Recorder(TrajectoryRecord* record, const std::optional<double>& every, double t1)
      : record_(record), every_(every.value_or(0.0)), t1_(t1) {
    if (record_) *record_ = TrajectoryRecord{};
  }

  template <typename Sample>
  void offer(double t, Sample&& sample) {
    if (!record_ || !(every_ > 0.0)) return;
    const bool last = t >= t1_;
    if (record_->times.empty() || t >= next_ || last) {
      if (!record_->times.empty() && t <= record_->times.back()) return;
      record_->times.push_back(t);
      sample(*record_);
      next_ = std::max(next_ + every_, t);
      while (next_ <= t) next_ += every_;
    }
  }

 private:
  TrajectoryRecord* record_;
  double every_;
  double t1_;
  double next_ = 0.0;
};

void push_moments(TrajectoryRecord& r, const Eigen::VectorXd& w) {
  const auto [m1, m2] = magnetization_moments(w);
  r.m_mean.push_back(m1);
  r.m2_mean.push_back(m2);
}

void check_normalized(const WaveFunction& state) {
  if (state.size() < 2) throw DomainError("wave function must have at least two sectors");
  if (std::abs(state.amplitudes.squaredNorm() - 1.0) > 1e-6)
    throw DomainError("initial wave function is not normalized");
}

}  // namespace

void WaveFunction::normalize() {
  const double n = amplitudes.norm();
  if (!(n > 0.0)) throw DomainError("cannot normalize a zero wave function");
  amplitudes /= n;
  log_norm += std::log(n);
  normalized = true;
}

TridiagonalOperator AffineHamiltonian::at(double t) const {
  const double f = coefficient(t);
  return TridiagonalOperator(fixed.diag + f * driven.diag, fixed.off + f * driven.off);
}

std::pair<double, double> magnetization_moments(const Eigen::Ref<const Eigen::VectorXd>& weights) {
  const Eigen::Index n = weights.size();
  const double total = weights.sum();
  double m1 = 0.0, m2 = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double m = n > 1 ? -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(n - 1) : 0.0;
    m1 += weights(k) * m;
    m2 += weights(k) * m * m;
  }
  return {m1 / total, m2 / total};
}

WaveFunction evolve_schrodinger(const WaveFunction& state, const AffineHamiltonian& h, double t0,
                                double t1, const IntegratorConfig& config, bool imaginary_time,
                                TrajectoryRecord* record, EvolutionDiagnostics* diagnostics) {
  config.validate();
  check_normalized(state);
  const Eigen::Index n = state.size();
  if (h.fixed.size() != n || h.driven.size() != n || !h.fixed.symmetric || !h.driven.symmetric)
    throw DomainError("evolve_schrodinger: Hamiltonian does not match the state dimension");
  if (!(t1 > t0)) throw DomainError("evolve_schrodinger: need t1 > t0");

  UniformInterpolant gauge{t0, t1, std::vector<double>(kGaugeNodes)};
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int i = 0; i < kGaugeNodes; ++i) {
    const double t = t0 + (t1 - t0) * i / (kGaugeNodes - 1);
    const TridiagonalOperator H = h.at(t);
    gauge.values[static_cast<std::size_t>(i)] = tridiag_lowest_eigs(H, 1, false).values(0);
    const auto [a, b] = H.gershgorin();
    lo = std::min(lo, a);
    hi = std::max(hi, b);
  }
  const double stability_step = kStabilityMargin / std::max(hi - lo, 1e-300);

  const Eigen::VectorXd& d0 = h.fixed.diag;
  const Eigen::VectorXd& d1 = h.driven.diag;
  const Eigen::VectorXd& e0 = h.fixed.off;
  const Eigen::VectorXd& e1 = h.driven.off;
  Eigen::VectorXd coupling(std::max<Eigen::Index>(n - 1, 0));
  Eigen::VectorXd onsite(n);
  auto rhs = [&](double t, const Eigen::VectorXcd& x, Eigen::VectorXcd& dx) {
    const double f = h.coefficient(t);
    const double c = gauge(t);
    onsite = d0 + f * d1;
    onsite.array() -= c;
    coupling = e0 + f * e1;
    dx(0) = onsite(0) * x(0) + coupling(0) * x(1);
    for (Eigen::Index k = 1; k + 1 < n; ++k)
      dx(k) = onsite(k) * x(k) + coupling(k - 1) * x(k - 1) + coupling(k) * x(k + 1);
    dx(n - 1) = onsite(n - 1) * x(n - 1) + coupling(n - 2) * x(n - 2);
    if (imaginary_time) {
      dx = -dx;
    } else {
      // multiply by -i
      for (Eigen::Index k = 0; k < n; ++k) dx(k) = std::complex<double>(dx(k).imag(), -dx(k).real());
    }
  };

  WaveFunction out = state;
  Eigen::VectorXcd y = state.amplitudes;
  Recorder recorder(record, config.record_every, t1);
  auto sample = [&](double t, const Eigen::VectorXcd& x) {
    recorder.offer(t, [&](TrajectoryRecord& r) {
      const Eigen::VectorXd w = x.cwiseAbs2();
      const double nrm2 = w.sum();
      const TridiagonalOperator H = h.at(t);
      r.control.push_back(h.coefficient(t));
      r.norm.push_back(std::sqrt(nrm2));
      r.energy.push_back(std::real(x.dot(H * x)) / nrm2);
      push_moments(r, w);
    });
  };
  sample(t0, y);

  auto hook = [&](double t, Eigen::VectorXcd& x) {
    bool changed = false;
    if (imaginary_time) {
      const double nrm = x.norm();
      if (!(nrm > 0.0) || !std::isfinite(nrm))
        throw IntegrationError("imaginary-time evolution lost the state at t = " + std::to_string(t));
      x /= nrm;
      out.log_norm += std::log(nrm);
      changed = true;
    }
    sample(t, x);
    return changed;
  };

  const IntegrationStats stats = integrate(rhs, y, t0, t1, config, stability_step, hook);

  const double drift = std::abs(y.squaredNorm() - 1.0);
  if (!imaginary_time && !(drift <= 1e-4))
    throw IntegrationError("norm drift " + std::to_string(drift) + " exceeds 1e-4");
  if (diagnostics) {
    diagnostics->stats = stats;
    diagnostics->norm_drift = drift;
  }
  out.amplitudes = std::move(y);
  out.normalized = false;
  out.normalize();
  if (!imaginary_time) out.log_norm = state.log_norm;
  return out;
}

WaveFunction initial_quantum_state(const ModelParams& params, double gamma) {
  const auto s = tridiag_lowest_eigs(build_quantum_hamiltonian(params, gamma), 1, true);
  WaveFunction psi;
  psi.amplitudes = s.vectors.col(0).cast<std::complex<double>>();
  return psi;
}

WaveFunction x_polarized_state(int N) {
  if (N < 1) throw DomainError("x_polarized_state: N must be >= 1");
  WaveFunction psi;
  psi.amplitudes.resize(N + 1);
  const double log2N = N * std::log(2.0);
  for (int k = 0; k <= N; ++k) {
    const double lb = std::lgamma(N + 1.0) - std::lgamma(k + 1.0) - std::lgamma(N - k + 1.0);
    psi.amplitudes(k) = std::sqrt(std::exp(lb - log2N));
  }
  psi.amplitudes /= psi.amplitudes.norm();
  return psi;
}

namespace {

AffineHamiltonian quantum_path(const ModelParams& params, const AnnealingSchedule& schedule) {
  params.validate();
  schedule.validate();
  if (schedule.driver != Driver::transverse_field)
    throw DomainError("quantum annealing needs a transverse-field schedule");
  const int N = params.N;
  AffineHamiltonian h;
  h.fixed = TridiagonalOperator(params.energies(), Eigen::VectorXd::Zero(N));
  h.driven = TridiagonalOperator(Eigen::VectorXd::Zero(N + 1), transverse_couplings(N));
  h.coefficient = [schedule](double t) { return schedule.value(t); };
  return h;
}

void check_dimension(Eigen::Index n, const ModelParams& params) {
  if (n != params.N + 1)
    throw DomainError("state has " + std::to_string(n) + " sectors, model needs " +
                      std::to_string(params.N + 1));
}

}  // namespace

WaveFunction evolve_rt(const WaveFunction& state, const AnnealingSchedule& schedule,
                       const ModelParams& params, const IntegratorConfig& config,
                       TrajectoryRecord* record, EvolutionDiagnostics* diagnostics) {
  const AffineHamiltonian h = quantum_path(params, schedule);
  check_dimension(state.size(), params);
  return evolve_schrodinger(state, h, 0.0, schedule.total_time, config, false, record, diagnostics);
}

WaveFunction evolve_it(const WaveFunction& state, const AnnealingSchedule& schedule,
                       const ModelParams& params, const IntegratorConfig& config,
                       TrajectoryRecord* record, EvolutionDiagnostics* diagnostics) {
  const AffineHamiltonian h = quantum_path(params, schedule);
  check_dimension(state.size(), params);
  return evolve_schrodinger(state, h, 0.0, schedule.total_time, config, true, record, diagnostics);
}

ProbabilityVector equilibrium_state(const ModelParams& params, double T) {
  return ProbabilityVector{equilibrium_distribution(params, T).probabilities};
}

ProbabilityVector evolve_sa(const ProbabilityVector& prob, const AnnealingSchedule& schedule,
                            const ModelParams& params, const IntegratorConfig& config,
                            TrajectoryRecord* record, EvolutionDiagnostics* diagnostics) {
  params.validate();
  schedule.validate();
  config.validate();
  if (schedule.driver != Driver::temperature)
    throw DomainError("simulated annealing needs a temperature schedule");
  check_dimension(prob.size(), params);
  if (std::abs(prob.total() - 1.0) > 1e-9 || prob.probabilities.minCoeff() < kNegativeReport)
    throw DomainError("initial probability vector is not a normalized distribution");

  const int N = params.N;
  const double tau = schedule.total_time;
  const Eigen::VectorXd E = params.energies();
  Eigen::VectorXd dE(N);
  for (int k = 0; k < N; ++k) dE(k) = E(k + 1) - E(k);

  // Spectral radius of the symmetrized generator along the schedule; the T = 0
  // node uses a small positive temperature since the rates are continuous there.
  double rho = 0.0;
  for (int i = 0; i < kGaugeNodes; ++i) {
    const double T = std::max(schedule.value(tau * i / (kGaugeNodes - 1)), 1e-6 * params.J);
    TridiagonalOperator neg = build_effective_hamiltonian(params, T);
    neg.diag = -neg.diag;
    neg.off = -neg.off;
    rho = std::max(rho, -tridiag_lowest_eigs(neg, 1, false).values(0));
  }
  const double stability_step = kStabilityMargin / std::max(rho, 1e-300);

  Eigen::ArrayXd n_up(N), n_down(N), up(N), down(N), flux(N);
  for (int k = 0; k < N; ++k) {
    n_up(k) = N - k;
    n_down(k) = k + 1;
  }
  auto rhs = [&](double t, const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
    const double beta = inverse_temperature(schedule.value(t));
    if (std::isinf(beta)) {
      for (int k = 0; k < N; ++k) {
        up(k) = heat_bath_rate(dE(k), beta);
        down(k) = heat_bath_rate(-dE(k), beta);
      }
    } else {
      const Eigen::ArrayXd z = beta * dE.array();
      const Eigen::ArrayXd e = (-z.abs()).exp();
      const Eigen::ArrayXd big = (1.0 + e).inverse();
      const Eigen::ArrayXd small = e * big;
      up = (z > 0.0).select(small, big);
      down = (z > 0.0).select(big, small);
    }
    flux = n_up * up * x.head(N).array() - n_down * down * x.tail(N).array();
    dx(0) = -flux(0);
    dx.segment(1, N - 1) = flux.head(N - 1) - flux.tail(N - 1);
    dx(N) = flux(N - 1);
  };

  EvolutionDiagnostics diag;
  Recorder recorder(record, config.record_every, tau);
  auto sample = [&](double t, const Eigen::VectorXd& x) {
    recorder.offer(t, [&](TrajectoryRecord& r) {
      r.control.push_back(schedule.value(t));
      r.norm.push_back(x.sum());
      r.energy.push_back(x.dot(E) / x.sum());
      push_moments(r, x);
    });
  };

  Eigen::VectorXd y = prob.probabilities;
  sample(0.0, y);
  auto hook = [&](double t, Eigen::VectorXd& x) {
    bool clipped = false;
    for (int k = 0; k <= N; ++k) {
      if (x(k) < 0.0) {
        if (x(k) < kNegativeReport) ++diag.clipped_entries;
        diag.most_negative = std::min(diag.most_negative, x(k));
        x(k) = 0.0;
        clipped = true;
      }
    }
    const double drift = std::abs(x.sum() - 1.0);
    if (!(drift <= 1e-6))
      throw IntegrationError("probability loss " + std::to_string(drift) + " at t = " + std::to_string(t));
    sample(t, x);
    return clipped;
  };

  diag.stats = integrate(rhs, y, 0.0, tau, config, stability_step, hook);
  diag.norm_drift = std::abs(y.sum() - 1.0);
  if (diagnostics) *diagnostics = diag;
  return ProbabilityVector{std::move(y)};
}

namespace {

// (E_k - E_0) / N per sector, without cancellation.
Eigen::VectorXd excess_energy_density(const ModelParams& params) {
  Eigen::VectorXd x(params.N + 1);
  for (int k = 0; k <= params.N; ++k)
    x(k) = 0.5 * params.J * (1.0 - ipow(params.magnetization(k), params.p));
  return x;
}

}  // namespace

double residual_energy_quantum(const WaveFunction& state, const ModelParams& params) {
  check_dimension(state.size(), params);
  const Eigen::VectorXd w = state.probabilities();
  return w.dot(excess_energy_density(params)) / w.sum();
}

double residual_energy_classical(const ProbabilityVector& prob, const ModelParams& params, double T_f) {
  check_dimension(prob.size(), params);
  const Eigen::VectorXd x = excess_energy_density(params);
  const Eigen::VectorXd eq = equilibrium_distribution(params, T_f).probabilities;
  return prob.probabilities.dot(x) / prob.total() - eq.dot(x);
}

}  // namespace pspin
