#pragma once

#include "pspin/model.hpp"
#include "pspin/tridiagonal.hpp"

#include <Eigen/Dense>

#include <vector>

namespace pspin {

/// Lowest eigenpairs of a symmetric operator at one value of the control
/// parameter (transverse field or temperature).
struct SpectrumSlice {
  double control = 0.0;
  Eigen::VectorXd values;   ///< ascending
  Eigen::MatrixXd vectors;  ///< one normalized eigenvector per column; empty if not requested
};

/// k lowest eigenpairs by Sturm-sequence bisection and inverse iteration.
/// Eigenvalues are accurate to a few ulps of the operator norm.
SpectrumSlice tridiag_lowest_eigs(const TridiagonalOperator& op, int k, bool with_vectors = true);

/// Expectation of the reflection k -> N-k in a vector; +-1 for parity eigenstates.
double reflection_parity(const Eigen::Ref<const Eigen::VectorXd>& v);

/// Parity-resolved low spectrum: eigenpairs rotated within near-degenerate
/// clusters so that each vector is a reflection eigenstate.
struct ParitySpectrum {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  std::vector<int> parity;  ///< +1 or -1 per column
};

ParitySpectrum parity_resolved_spectrum(const TridiagonalOperator& op, int k);

/// Gap from the ground state to the lowest state it couples to: E1 - E0 for
/// odd p, and the second level of the reflection-even sector for even p.
double dynamical_gap(const ModelParams& params, double gamma);

/// Same selection rule applied to an arbitrary reflection-symmetric operator.
double sector_gap(const TridiagonalOperator& op, bool parity_selected);

struct MinimumGap {
  double location = 0.0;
  double gap = 0.0;
};

/// Coarse scan of the dynamical gap over [lo, hi] with `resolution` points,
/// refined by golden-section search around the smallest sample.
MinimumGap min_gap_scan(const ModelParams& params, double lo, double hi, int resolution,
                        double tolerance = 1e-10);

enum class ScalingModel { power, exponential };

struct GapScaling {
  ScalingModel model = ScalingModel::power;
  std::vector<double> sizes;
  std::vector<double> gaps;
  std::vector<double> locations;  ///< may be empty
  double exponent = 0.0;          ///< z for power, alpha for exponential
  double exponent_stderr = 0.0;
  double log_prefactor = 0.0;
  double residual_norm = 0.0;     ///< sqrt of the sum of squared log residuals
  std::vector<double> residuals;
};

/// Least squares of log gap against log N (power) or N (exponential).
GapScaling gap_scaling_fit(const std::vector<double>& sizes, const std::vector<double>& gaps,
                           ScalingModel model);

/// Lowest k eigenvalues (and vectors) of the symmetrized master-equation generator.
SpectrumSlice classical_spectrum(const ModelParams& params, double T, int k);

/// Relaxation gap seen by a reflection-symmetric distribution.
double classical_dynamical_gap(const ModelParams& params, double T);

}  // namespace pspin
