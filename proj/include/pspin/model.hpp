#pragma once

#include "pspin/tridiagonal.hpp"

#include <Eigen/Dense>

#include <limits>
#include <utility>

namespace pspin {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Fully-connected p-spin ferromagnet with energy -(J N / 2) m^p.
struct ModelParams {
  int p = 2;
  double J = 1.0;
  int N = 1;

  /// Throws DomainError unless p >= 2, N >= 1, J > 0.
  void validate() const;

  /// m_k = -1 + 2k/N, exact at both endpoints.
  double magnetization(int k) const { return -1.0 + 2.0 * k / N; }
  Eigen::VectorXd magnetization_grid() const;

  /// Classical energy of sector k.
  double energy(int k) const;
  Eigen::VectorXd energies() const;
  /// E_0 = -J N / 2, the classical ground energy.
  double ground_energy() const { return -0.5 * J * N; }
};

enum class Driver { transverse_field, temperature };

/// Linear ramp value(t) = start (1 - t/tau) + end t/tau on [0, tau].
struct AnnealingSchedule {
  Driver driver = Driver::transverse_field;
  double start_value = 0.0;
  double end_value = 0.0;
  double total_time = 1.0;

  void validate() const;
  double value(double t) const;
  /// d value / dt, constant.
  double rate() const { return (end_value - start_value) / total_time; }
};

/// Integer power; exact for m = +-1 and m = 0.
double ipow(double x, int n);

/// E(m) = -(J N / 2) m^p for |m| <= 1.
double classical_energy(double m, const ModelParams& params);

/// (K+, K-) with K(+-) = sqrt(1 - m^2 + 2 (1 -+ m) / N).
std::pair<double, double> kinetic_coefficients(double m, int N);

/// Symmetric-subspace quantum Hamiltonian at transverse field gamma.
TridiagonalOperator build_quantum_hamiltonian(const ModelParams& params, double gamma);

/// Coupling pattern of the transverse-field term at gamma = 1: off(k) = -sqrt((N-k)(k+1)).
Eigen::VectorXd transverse_couplings(int N);

/// Inverse temperature; T = 0 maps to +inf and T = +inf to 0.
double inverse_temperature(double T);

/// Heat-bath acceptance 1 / (1 + e^{beta dE}), with the beta -> inf limit.
double heat_bath_rate(double dE, double beta);

/// Permutation-symmetric master-equation generator G with dP/dt = G P.
///
/// `sub(k)` is G(k+1, k): the gain of sector k+1 from k, (N-k) W(k -> k+1).
/// `super(k)` is G(k, k+1): the gain of sector k from k+1, (k+1) W(k+1 -> k).
/// `diag(k)` is minus the total outflow of sector k.
struct MasterGenerator {
  Eigen::VectorXd sub;
  Eigen::VectorXd super;
  Eigen::VectorXd diag;

  Eigen::Index size() const { return diag.size(); }

  template <typename In, typename Out>
  void apply(const Eigen::MatrixBase<In>& x, Eigen::MatrixBase<Out>& y) const {
    const Eigen::Index n = size();
    for (Eigen::Index k = 0; k < n; ++k) {
      typename Out::Scalar acc = diag(k) * x(k);
      if (k > 0) acc += sub(k - 1) * x(k - 1);
      if (k + 1 < n) acc += super(k) * x(k + 1);
      y(k) = acc;
    }
  }

  Eigen::MatrixXd dense() const;
  /// Column sums (all zero up to rounding).
  Eigen::VectorXd column_sums() const;
  TridiagonalOperator as_operator() const;
};

MasterGenerator build_master_generator(const ModelParams& params, double T);

/// Equilibrium distribution over sectors, P(k) ~ C(N,k) exp(-beta E_k).
struct EquilibriumDistribution {
  Eigen::VectorXd probabilities;
  double temperature = 0.0;
};

EquilibriumDistribution equilibrium_distribution(const ModelParams& params, double T);

/// <E>_eq at temperature T.
double equilibrium_energy(const ModelParams& params, double T);

/// Symmetrized generator  H = -P^{-1/2} G P^{1/2}; positive semidefinite.
TridiagonalOperator build_effective_hamiltonian(const ModelParams& params, double T);

/// Analytic d H / d beta at temperature T.
TridiagonalOperator effective_hamiltonian_beta_derivative(const ModelParams& params, double T);

/// s(m) = log 2 - (1-m)/2 log(1-m) - (1+m)/2 log(1+m).
double entropy_density(double m);

/// f(m, T) = -(J/2) m^p - T s(m).
double free_energy_density(double m, double T, const ModelParams& params);

/// Temperature of the thermal transition: J for p = 2, degenerate-minima
/// temperature of f(m, T) for p >= 3.
double critical_temperature(const ModelParams& params);

/// Local minimum of f(., T) on the ferromagnetic side (m > 0), if any.
/// Returns NaN when f(., T) has no minimum other than m = 0 there.
double ferromagnetic_minimum(const ModelParams& params, double T);

}  // namespace pspin
