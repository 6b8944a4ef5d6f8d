#pragma once

#include "pspin/model.hpp"
#include "pspin/ode.hpp"
#include "pspin/tridiagonal.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

namespace pspin {

/// Amplitudes psi(m_k) on the N+1 magnetization sectors.
struct WaveFunction {
  Eigen::VectorXcd amplitudes;
  bool normalized = true;
  /// Accumulated log of the norm removed by imaginary-time renormalization.
  double log_norm = 0.0;

  Eigen::Index size() const { return amplitudes.size(); }
  double norm() const { return amplitudes.norm(); }
  Eigen::VectorXd probabilities() const { return amplitudes.cwiseAbs2(); }
  void normalize();
};

/// Sector probabilities P(m_k).
struct ProbabilityVector {
  Eigen::VectorXd probabilities;

  Eigen::Index size() const { return probabilities.size(); }
  double total() const { return probabilities.sum(); }
};

/// Observables sampled along a run; states are not stored.
struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<double> control;  ///< field or temperature at each time
  std::vector<double> norm;     ///< norm (quantum) or total probability (classical)
  std::vector<double> energy;   ///< <H_Q(t)> for quantum runs, <H_C> for classical runs
  std::vector<double> m_mean;
  std::vector<double> m2_mean;

  std::size_t size() const { return times.size(); }
};

struct EvolutionDiagnostics {
  IntegrationStats stats;
  /// |norm - 1| (quantum) or |sum P - 1| (classical) at the end, before renormalization.
  double norm_drift = 0.0;
  /// Entries found below -1e-12 before clipping, summed over steps (classical only).
  std::int64_t clipped_entries = 0;
  double most_negative = 0.0;
};

/// Time-dependent Hamiltonian H(t) = fixed + coefficient(t) * driven on a
/// tridiagonal sector basis.
struct AffineHamiltonian {
  TridiagonalOperator fixed;
  TridiagonalOperator driven;
  std::function<double(double)> coefficient;

  TridiagonalOperator at(double t) const;
};

/// Schrodinger evolution under `h` from t0 to t1: i dpsi/dt = H psi, or
/// -dpsi/dt = H psi when `imaginary_time` is set (renormalized every step).
/// A smooth estimate of the instantaneous ground energy is subtracted from H;
/// this changes only the global phase (real time) or the discarded norm (imaginary time).
WaveFunction evolve_schrodinger(const WaveFunction& state, const AffineHamiltonian& h, double t0,
                                double t1, const IntegratorConfig& config, bool imaginary_time,
                                TrajectoryRecord* record = nullptr,
                                EvolutionDiagnostics* diagnostics = nullptr);

/// Ground state of H_Q(gamma): real, nodeless, positive, normalized.
WaveFunction initial_quantum_state(const ModelParams& params, double gamma);

/// Product state polarized along x: sqrt(C(N,k) / 2^N).
WaveFunction x_polarized_state(int N);

/// Quantum annealing in real time along a transverse-field schedule.
WaveFunction evolve_rt(const WaveFunction& state, const AnnealingSchedule& schedule,
                       const ModelParams& params, const IntegratorConfig& config = {},
                       TrajectoryRecord* record = nullptr,
                       EvolutionDiagnostics* diagnostics = nullptr);

/// Quantum annealing in imaginary time along a transverse-field schedule.
WaveFunction evolve_it(const WaveFunction& state, const AnnealingSchedule& schedule,
                       const ModelParams& params, const IntegratorConfig& config = {},
                       TrajectoryRecord* record = nullptr,
                       EvolutionDiagnostics* diagnostics = nullptr);

/// Simulated annealing: heat-bath master equation along a temperature schedule.
ProbabilityVector evolve_sa(const ProbabilityVector& prob, const AnnealingSchedule& schedule,
                            const ModelParams& params, const IntegratorConfig& config = {},
                            TrajectoryRecord* record = nullptr,
                            EvolutionDiagnostics* diagnostics = nullptr);

/// Equilibrium distribution at T as a ProbabilityVector.
ProbabilityVector equilibrium_state(const ModelParams& params, double T);

/// (<psi|H_C|psi> - E_0) / N, with E_0 = -J N / 2.
double residual_energy_quantum(const WaveFunction& state, const ModelParams& params);

/// (sum_k E_k P_k - <E>_eq(T_f)) / N.
double residual_energy_classical(const ProbabilityVector& prob, const ModelParams& params, double T_f);

/// Magnetization moments (<m>, <m^2>) of a sector distribution.
std::pair<double, double> magnetization_moments(const Eigen::Ref<const Eigen::VectorXd>& weights);

}  // namespace pspin
