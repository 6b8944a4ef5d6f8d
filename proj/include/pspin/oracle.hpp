#pragma once

#include "pspin/dynamics.hpp"
#include "pspin/model.hpp"
#include "pspin/ode.hpp"

#include <Eigen/Dense>

#include <vector>

namespace pspin {

/// Brute-force evolutions over all 2^N spin configurations, used to validate the
/// reduction to the N+1 magnetization sectors. Bit i of the index is spin i, set = up.
inline constexpr int kOracleMaxSpins = 12;

enum class FullStateKind { quantum, classical };

struct FullSpaceState {
  int N = 0;
  FullStateKind kind = FullStateKind::quantum;
  Eigen::VectorXcd amplitudes;    ///< quantum states
  Eigen::VectorXd probabilities;  ///< classical states

  Eigen::Index size() const { return Eigen::Index{1} << N; }
  /// Weight per configuration: |a|^2 or P.
  Eigen::VectorXd weights() const;
};

/// Samples taken along an oracle run.
struct OracleTrace {
  std::vector<double> times;
  std::vector<double> symmetric_weight;        ///< quantum: weight in the maximal-spin sector
  std::vector<double> permutation_spread;      ///< max over sectors of max - min configuration weight
  std::vector<double> aggregation_residual;    ///< classical: max_k |P(m_k) - C(N,k) P(sigma in k)|
};

/// Throws DomainError unless 1 <= N <= kOracleMaxSpins.
void check_oracle_size(int N);

/// Number of up spins in configuration s.
int up_count(std::uint32_t s);

/// Uniform superposition 2^{-N/2} sum_s |s>, the x-polarized state.
FullSpaceState uniform_superposition(int N);

/// Ground state of the full transverse-field Hamiltonian at field gamma, by
/// shifted power iteration; real and positive.
FullSpaceState full_ground_state(const ModelParams& params, double gamma);

/// Boltzmann distribution over configurations at temperature T.
FullSpaceState full_boltzmann_state(const ModelParams& params, double T);

/// y = H_Q(gamma) x on the full space: diagonal -(JN/2) m(s)^p, -gamma per single spin flip.
void apply_full_hamiltonian(const ModelParams& params, double gamma, const Eigen::VectorXcd& x,
                            Eigen::VectorXcd& y);

/// Largest violation of W(s -> s') P(s) = W(s' -> s) P(s') over all single flips,
/// relative to the larger side; 0 at T = 0 by convention.
double detailed_balance_residual(const ModelParams& params, double T);

/// Schrodinger evolution (real or imaginary time) of a full-space state along a
/// transverse-field schedule.
FullSpaceState full_quantum_evolve(const FullSpaceState& state, const ModelParams& params,
                                   const AnnealingSchedule& schedule, bool imaginary_time,
                                   const IntegratorConfig& config = {}, OracleTrace* trace = nullptr);

/// Single-spin-flip heat-bath master equation over all configurations along a
/// temperature schedule, starting from `state`. Detailed balance is verified at
/// both schedule endpoints before integrating.
FullSpaceState full_master_evolve(const FullSpaceState& state, const ModelParams& params,
                                  const AnnealingSchedule& schedule, const IntegratorConfig& config = {},
                                  OracleTrace* trace = nullptr);

/// Per-sector total weight P(m_k).
Eigen::VectorXd magnetization_marginal(const FullSpaceState& state);

/// Amplitudes on the normalized symmetric (maximal total spin) basis states.
Eigen::VectorXcd symmetric_projection(const FullSpaceState& state);

/// Squared norm of symmetric_projection.
double symmetric_weight(const FullSpaceState& state);

/// Quantum: (<H_C> - E_0)/N. Classical: (<E> - <E>_eq(T_f))/N.
double full_residual_energy(const FullSpaceState& state, const ModelParams& params, double T_f = 0.0);

/// Largest spread of configuration weights within one magnetization sector.
double permutation_spread(const FullSpaceState& state);

}  // namespace pspin
