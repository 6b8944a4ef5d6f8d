#include "pspin/oracle.hpp"

#include "pspin/errors.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <string>

namespace pspin {

namespace {

double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

Eigen::VectorXd configuration_energies(const ModelParams& params) {
  const Eigen::Index dim = Eigen::Index{1} << params.N;
  Eigen::VectorXd E(dim);
  for (Eigen::Index s = 0; s < dim; ++s) E(s) = params.energy(up_count(static_cast<std::uint32_t>(s)));
  return E;
}

void check_state(const FullSpaceState& state, FullStateKind kind) {
  check_oracle_size(state.N);
  if (state.kind != kind)
    throw DomainError(kind == FullStateKind::quantum ? "oracle: expected a quantum state"
                                                     : "oracle: expected a classical state");
  const Eigen::Index n = kind == FullStateKind::quantum ? state.amplitudes.size() : state.probabilities.size();
  if (n != state.size()) throw DomainError("oracle: state length is not 2^N");
}

// Samples observables at multiples of `every` and at the final time.
class TraceSampler {
 public:
  TraceSampler(OracleTrace* trace, std::optional<double> every, double t_end)
      : trace_(trace), every_(every), t_end_(t_end) {}

  template <typename Fill>
  void offer(double t, Fill&& fill) {
    if (!trace_) return;
    const bool due = !every_ ? (t == t_end_ || trace_->times.empty()) : (t >= next_ || t == t_end_);
    if (!due) return;
    trace_->times.push_back(t);
    fill(*trace_);
    if (every_) {
      next_ = std::max(next_ + *every_, t);
      while (next_ <= t) next_ += *every_;
    }
  }

 private:
  OracleTrace* trace_;
  std::optional<double> every_;
  double t_end_;
  double next_ = 0.0;
};

}  // namespace

Eigen::VectorXd FullSpaceState::weights() const {
  return kind == FullStateKind::quantum ? Eigen::VectorXd(amplitudes.cwiseAbs2()) : probabilities;
}

void check_oracle_size(int N) {
  if (N < 1 || N > kOracleMaxSpins)
    throw DomainError("oracle: N = " + std::to_string(N) + " outside 1.." + std::to_string(kOracleMaxSpins));
}

int up_count(std::uint32_t s) { return std::popcount(s); }

FullSpaceState uniform_superposition(int N) {
  check_oracle_size(N);
  FullSpaceState st;
  st.N = N;
  st.kind = FullStateKind::quantum;
  st.amplitudes = Eigen::VectorXcd::Constant(st.size(), std::pow(2.0, -0.5 * N));
  return st;
}

void apply_full_hamiltonian(const ModelParams& params, double gamma, const Eigen::VectorXcd& x,
                            Eigen::VectorXcd& y) {
  const int N = params.N;
  const Eigen::Index dim = Eigen::Index{1} << N;
  for (Eigen::Index s = 0; s < dim; ++s) {
    const auto u = static_cast<std::uint32_t>(s);
    std::complex<double> flips = 0.0;
    for (int i = 0; i < N; ++i) flips += x(static_cast<Eigen::Index>(u ^ (1u << i)));
    y(s) = params.energy(up_count(u)) * x(s) - gamma * flips;
  }
}

FullSpaceState full_ground_state(const ModelParams& params, double gamma) {
  params.validate();
  check_oracle_size(params.N);
  if (!(gamma >= 0.0)) throw DomainError("full_ground_state: gamma must be >= 0");
  // sigma - H is nonnegative and irreducible for gamma > 0, so power iteration
  // converges to the Perron vector, the ground state of H.
  const double sigma = 0.5 * params.J * params.N + gamma * params.N;
  FullSpaceState st = uniform_superposition(params.N);
  Eigen::VectorXcd Hx(st.size());
  const double tol = 1e-13 * std::max(1.0, sigma);
  for (int it = 0; it < 200000; ++it) {
    apply_full_hamiltonian(params, gamma, st.amplitudes, Hx);
    const double e = std::real(st.amplitudes.dot(Hx));
    const double residual = (Hx - e * st.amplitudes).norm();
    if (residual <= tol) return st;
    st.amplitudes = (sigma * st.amplitudes - Hx).normalized();
  }
  throw ConvergenceError("full_ground_state: power iteration did not converge");
}

FullSpaceState full_boltzmann_state(const ModelParams& params, double T) {
  params.validate();
  check_oracle_size(params.N);
  if (!(T >= 0.0)) throw DomainError("full_boltzmann_state: T must be >= 0");
  const Eigen::VectorXd E = configuration_energies(params);
  FullSpaceState st;
  st.N = params.N;
  st.kind = FullStateKind::classical;
  const double Emin = E.minCoeff();
  if (T == 0.0) {
    const double tol = 1e-12 * std::max(1.0, std::abs(Emin));
    st.probabilities = (E.array() <= Emin + tol).cast<double>().matrix();
  } else {
    const double beta = inverse_temperature(T);
    st.probabilities = (-beta * (E.array() - Emin)).exp().matrix();
  }
  st.probabilities /= st.probabilities.sum();
  return st;
}

double detailed_balance_residual(const ModelParams& params, double T) {
  params.validate();
  check_oracle_size(params.N);
  if (!(T >= 0.0)) throw DomainError("detailed_balance_residual: T must be >= 0");
  if (T == 0.0) return 0.0;
  const double beta = inverse_temperature(T);
  const Eigen::VectorXd P = full_boltzmann_state(params, T).probabilities;
  const Eigen::VectorXd E = configuration_energies(params);
  double worst = 0.0;
  for (Eigen::Index s = 0; s < P.size(); ++s) {
    for (int i = 0; i < params.N; ++i) {
      const auto t = static_cast<Eigen::Index>(static_cast<std::uint32_t>(s) ^ (1u << i));
      const double forward = heat_bath_rate(E(t) - E(s), beta) * P(s);
      const double backward = heat_bath_rate(E(s) - E(t), beta) * P(t);
      const double scale = std::max(forward, backward);
      if (scale > 0.0) worst = std::max(worst, std::abs(forward - backward) / scale);
    }
  }
  return worst;
}

FullSpaceState full_quantum_evolve(const FullSpaceState& state, const ModelParams& params,
                                   const AnnealingSchedule& schedule, bool imaginary_time,
                                   const IntegratorConfig& config, OracleTrace* trace) {
  params.validate();
  schedule.validate();
  check_state(state, FullStateKind::quantum);
  if (state.N != params.N) throw DomainError("full_quantum_evolve: state and model sizes differ");
  if (schedule.driver != Driver::transverse_field)
    throw DomainError("full_quantum_evolve: needs a transverse-field schedule");

  const double tau = schedule.total_time;
  const double gmax = std::max(schedule.start_value, schedule.end_value);
  const double stability_step = kStabilityMargin / (params.J * params.N + 2.0 * gmax * params.N);

  auto rhs = [&](double t, const Eigen::VectorXcd& x, Eigen::VectorXcd& dx) {
    apply_full_hamiltonian(params, schedule.value(t), x, dx);
    if (imaginary_time)
      dx = -dx;
    else
      dx *= std::complex<double>(0.0, -1.0);
  };

  TraceSampler sampler(trace, config.record_every, tau);
  auto sample = [&](double t, const Eigen::VectorXcd& x) {
    sampler.offer(t, [&](OracleTrace& tr) {
      FullSpaceState tmp{params.N, FullStateKind::quantum, x / x.norm(), {}};
      tr.symmetric_weight.push_back(symmetric_weight(tmp));
      tr.permutation_spread.push_back(permutation_spread(tmp));
    });
  };

  Eigen::VectorXcd y = state.amplitudes;
  sample(0.0, y);
  auto hook = [&](double t, Eigen::VectorXcd& x) {
    if (imaginary_time) x.normalize();
    sample(t, x);
    return imaginary_time;
  };
  integrate(rhs, y, 0.0, tau, config, stability_step, hook);
  if (!imaginary_time && !(std::abs(y.squaredNorm() - 1.0) <= 1e-4))
    throw IntegrationError("full_quantum_evolve: norm drift exceeds 1e-4");

  FullSpaceState out = state;
  out.amplitudes = y.normalized();
  return out;
}

FullSpaceState full_master_evolve(const FullSpaceState& state, const ModelParams& params,
                                  const AnnealingSchedule& schedule, const IntegratorConfig& config,
                                  OracleTrace* trace) {
  params.validate();
  schedule.validate();
  check_state(state, FullStateKind::classical);
  if (state.N != params.N) throw DomainError("full_master_evolve: state and model sizes differ");
  if (schedule.driver != Driver::temperature)
    throw DomainError("full_master_evolve: needs a temperature schedule");
  for (double T : {schedule.start_value, schedule.end_value}) {
    const double r = detailed_balance_residual(params, T);
    if (!(r <= 1e-10))
      throw DomainError("full_master_evolve: detailed balance violated by " + std::to_string(r));
  }

  const int N = params.N;
  const Eigen::Index dim = state.size();
  const double tau = schedule.total_time;
  // Every configuration leaves at total rate <= N.
  const double stability_step = kStabilityMargin / (2.0 * N);

  // up(k): rate of one particular k -> k+1 flip; down(k): one particular k -> k-1 flip.
  Eigen::VectorXd up(N + 1), down(N + 1);
  auto rhs = [&](double t, const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
    const double beta = inverse_temperature(schedule.value(t));
    for (int k = 0; k <= N; ++k) {
      up(k) = k < N ? heat_bath_rate(params.energy(k + 1) - params.energy(k), beta) : 0.0;
      down(k) = k > 0 ? heat_bath_rate(params.energy(k - 1) - params.energy(k), beta) : 0.0;
    }
    for (Eigen::Index s = 0; s < dim; ++s) {
      const auto u = static_cast<std::uint32_t>(s);
      const int k = up_count(u);
      double gain = 0.0;
      for (int i = 0; i < N; ++i) {
        const std::uint32_t v = u ^ (1u << i);
        // v has spin i flipped; it enters s by flipping that spin back.
        gain += ((u >> i) & 1u ? up(k - 1) : down(k + 1)) * x(static_cast<Eigen::Index>(v));
      }
      const double loss = (N - k) * up(k) + k * down(k);
      dx(s) = gain - loss * x(s);
    }
  };

  const Eigen::VectorXd binom = [&] {
    Eigen::VectorXd b(N + 1);
    for (int k = 0; k <= N; ++k) b(k) = std::exp(log_binomial(N, k));
    return b;
  }();
  TraceSampler sampler(trace, config.record_every, tau);
  auto sample = [&](double t, const Eigen::VectorXd& x) {
    sampler.offer(t, [&](OracleTrace& tr) {
      FullSpaceState tmp{N, FullStateKind::classical, {}, x};
      const Eigen::VectorXd marginal = magnetization_marginal(tmp);
      double agg = 0.0;
      for (Eigen::Index s = 0; s < dim; ++s) {
        const int k = up_count(static_cast<std::uint32_t>(s));
        agg = std::max(agg, std::abs(marginal(k) - binom(k) * x(s)));
      }
      tr.aggregation_residual.push_back(agg);
      tr.permutation_spread.push_back(permutation_spread(tmp));
    });
  };

  Eigen::VectorXd y = state.probabilities;
  sample(0.0, y);
  auto hook = [&](double t, Eigen::VectorXd& x) {
    const bool clipped = (x.array() < 0.0).any();
    if (clipped) x = x.cwiseMax(0.0);
    sample(t, x);
    return clipped;
  };
  integrate(rhs, y, 0.0, tau, config, stability_step, hook);
  if (!(std::abs(y.sum() - 1.0) <= 1e-6)) throw IntegrationError("full_master_evolve: probability drift exceeds 1e-6");

  FullSpaceState out = state;
  out.probabilities = y;
  return out;
}

Eigen::VectorXd magnetization_marginal(const FullSpaceState& state) {
  check_oracle_size(state.N);
  const Eigen::VectorXd w = state.weights();
  Eigen::VectorXd marginal = Eigen::VectorXd::Zero(state.N + 1);
  for (Eigen::Index s = 0; s < w.size(); ++s) marginal(up_count(static_cast<std::uint32_t>(s))) += w(s);
  return marginal;
}

Eigen::VectorXcd symmetric_projection(const FullSpaceState& state) {
  check_state(state, FullStateKind::quantum);
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(state.N + 1);
  for (Eigen::Index s = 0; s < state.size(); ++s) psi(up_count(static_cast<std::uint32_t>(s))) += state.amplitudes(s);
  for (int k = 0; k <= state.N; ++k) psi(k) *= std::exp(-0.5 * log_binomial(state.N, k));
  return psi;
}

double symmetric_weight(const FullSpaceState& state) { return symmetric_projection(state).squaredNorm(); }

double full_residual_energy(const FullSpaceState& state, const ModelParams& params, double T_f) {
  params.validate();
  check_oracle_size(state.N);
  if (state.N != params.N) throw DomainError("full_residual_energy: state and model sizes differ");
  const Eigen::VectorXd marginal = magnetization_marginal(state);
  const double total = marginal.sum();
  double excess = 0.0;
  for (int k = 0; k <= params.N; ++k)
    excess += marginal(k) * 0.5 * params.J * params.N * (1.0 - ipow(params.magnetization(k), params.p));
  excess /= total;
  if (state.kind == FullStateKind::quantum) return excess / params.N;
  const double eq_excess = equilibrium_energy(params, T_f) - params.ground_energy();
  return (excess - eq_excess) / params.N;
}

double permutation_spread(const FullSpaceState& state) {
  check_oracle_size(state.N);
  const Eigen::VectorXd w = state.weights();
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(state.N + 1, std::numeric_limits<double>::infinity());
  Eigen::VectorXd hi = Eigen::VectorXd::Constant(state.N + 1, -std::numeric_limits<double>::infinity());
  for (Eigen::Index s = 0; s < w.size(); ++s) {
    const int k = up_count(static_cast<std::uint32_t>(s));
    lo(k) = std::min(lo(k), w(s));
    hi(k) = std::max(hi(k), w(s));
  }
  return (hi - lo).maxCoeff();
}

}  // namespace pspin
