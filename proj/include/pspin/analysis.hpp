#pragma once

#include "pspin/model.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace pspin {

/// Ordinary least squares y = intercept + slope x.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double intercept_stderr = 0.0;
  double r_squared = 0.0;
  double residual_norm = 0.0;
  std::size_t points = 0;
};

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

/// Residual energy per spin as a function of annealing time at fixed model.
struct ResidualEnergyCurve {
  ModelParams params;
  Driver driver = Driver::transverse_field;
  double start_value = 0.0;
  double end_value = 0.0;
  std::vector<double> tau;
  std::vector<double> eps;

  /// tau > 0 strictly increasing, eps >= -1e-10, equal lengths.
  void validate() const;
  std::size_t size() const { return tau.size(); }
};

struct FitWindow {
  double lo = 0.0;
  double hi = 0.0;
};

/// eps_N(tau) = (C / N) exp(-tau / tau*) fitted on a window.
struct LZFit {
  int N = 0;
  double C = 0.0;
  double tau_star = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  double residual_norm = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
  /// Fitted to the crests of coherent oscillations rather than to every point.
  bool crests = false;

  double eps(double tau) const;
};

/// Linear fit of log(N eps) against tau. Without an explicit window the
/// strictly decreasing stretch with R^2 >= 0.995 and at least five points that
/// spans the most e-folds is used. For even p, data decorated by coherent
/// oscillations (two or more nodes, i.e. local minima followed by further
/// decay) are reduced to their crests first; with a single node the window
/// starts after it.
LZFit fit_lz_regime(const ResidualEnergyCurve& curve, std::optional<FitWindow> window = std::nullopt);

/// Family parameters of eps_N(tau) = (C/N) exp(-tau/tau*_N): tau*_N = N^{2z}/gamma
/// for p = 2 and tau*_N = e^{2 alpha N}/gamma for p >= 3.
struct LZFamily {
  int p = 2;
  double C = 0.0;
  double gamma = 0.0;
  double exponent = 0.0;  ///< z (p = 2) or alpha (p >= 3)
  LinearFit tau_fit;      ///< log tau* against log N (p = 2) or N (p >= 3)

  double tau_star(double N) const;
  double eps(double N, double tau) const;
};

/// C is the mean of the fitted prefactors; gamma and the exponent come from tau*_N.
LZFamily fit_lz_family(const std::vector<LZFit>& fits, int p);

struct EnvelopeResult {
  int p = 2;
  double C = 0.0;
  double gamma = 0.0;
  double exponent = 0.0;
  std::vector<double> tau;
  std::vector<double> eps;         ///< envelope
  std::vector<double> size;        ///< N(tau), treated as continuous
  std::vector<double> eps_asymptotic;  ///< p >= 3 only: 2 alpha C e^{-1/L} / (L + log L), L = log(gamma tau)
};

/// N(tau) = (2 z gamma tau)^{1/(2z)}, eps = (C / N) e^{-1/(2z)}.
EnvelopeResult envelope_closed_form_p2(double C, double gamma, double z, const std::vector<double>& tau);

/// Solves e^{2 alpha N} / (2 alpha N) = gamma tau for N(tau) by Newton iteration on u = 2 alpha N.
EnvelopeResult envelope_implicit_pge3(double C, double gamma, double alpha, const std::vector<double>& tau);

/// Root u > 1 of u - log u = L (L > 1).
double solve_envelope_equation(double L);

enum class EnvelopeSide { lower, upper };

struct EnvelopePoint {
  double value = 0.0;
  double member = 0.0;  ///< family parameter at which the envelope touches
};

/// Extremum over the continuous family parameter s in [lo, hi] of member(s),
/// by a log-spaced scan refined with golden-section search.
EnvelopePoint family_envelope(const std::function<double(double)>& member, double lo, double hi,
                              EnvelopeSide side, int samples = 400);

/// Landau-Zener excitation probability e^{-(pi/4) Delta^2 tau}.
double lz_probability(double gap, double tau);

struct BarrierEstimate {
  double temperature = 0.0;
  double m_closed = 0.0;         ///< (2T/(Jp))^{1/(p-2)}
  double height_closed = 0.0;    ///< J(p-1)/2 (2T/(Jp))^{p/(p-2)}, the small-T form quoted in the literature
  double height_leading = 0.0;   ///< J(p-2)/4 m_closed^p, the leading small-T term of f(m_closed) - f(0)
  double m_exact = 0.0;
  double height_exact = 0.0;
  double m_minimum = 0.0;        ///< ferromagnetic minimum bounding the barrier
  double relative_discrepancy = 0.0;  ///< |height_leading - height_exact| / height_exact
  double location_discrepancy = 0.0;  ///< |m_closed - m_exact| / m_exact
};

/// Free-energy barrier between the paramagnetic and ferromagnetic minima.
BarrierEstimate barrier(const ModelParams& params, double T);

struct KramersPrediction {
  double critical_temperature = 0.0;
  double rate = 0.0;       ///< fitted A tilde
  double tau_star = 0.0;   ///< T_c N^{(p-2)/2} / A tilde
  std::vector<double> tau;
  std::vector<double> survival;  ///< P_0(tau) = exp(-tau / tau*)
  double integral_infinite = 0.0;   ///< closed form of the escape integral to infinity
  double integral_truncated = 0.0;  ///< quadrature up to T_c N^{(p-2)/2}
  double integral_tail = 0.0;       ///< quadrature of the part beyond the cutoff
  double relative_difference = 0.0; ///< tail / infinite

  double residual_energy(std::size_t i) const { return 0.5 * survival.at(i); }
};

KramersPrediction kramers_predict(const ModelParams& params, const std::vector<double>& tau, double rate);

/// Least-squares A tilde from measured tau*_N: log tau* = log(T_c / A) + (p-2)/2 log N.
double fit_kramers_rate(const ModelParams& params, const std::vector<int>& sizes,
                        const std::vector<double>& tau_star);

/// Gamma_i^2 / (p^3 tau^2).
double adiabatic_qa_prediction(double gamma_i, int p, double tau);

/// Finite-N version: Gamma_i^2 / (tau^2 Delta_N^3) with Delta_N = E(1 - 2/N) - E(1)
/// the first gap at the end of the schedule.
double adiabatic_qa_prediction_finite(const ModelParams& params, double gamma_i, double tau);

struct AdiabaticTail {
  double eps = 0.0;           ///< M c_ex / N
  double coefficient = 0.0;   ///< c_ex = 2 beta_dot <ex|dH/dbeta|0> / gap^2
  double gap = 0.0;
  double energy_element = 0.0;      ///< M = <ex|H_C|0>
  double derivative_element = 0.0;  ///< <ex|dH/dbeta|0>
  double beta_rate = 0.0;           ///< d beta / dt at the end of the schedule
  int level = 0;
  double eps_all_levels = 0.0;  ///< beta_dot / N sum_n M_n^2 / gap_n over the computed levels
  std::vector<double> excited_vector;  ///< phi_ex, for projecting measured distributions
};

/// First-order adiabatic tail of simulated annealing ending at T_f > 0. The
/// excited level is the lowest one with a non-vanishing energy matrix element;
/// for even p only reflection-even levels are considered.
AdiabaticTail adiabatic_sa_tail(const ModelParams& params, double T_i, double T_f, double tau);

struct ExponentialFit {
  double prefactor = 0.0;
  double tau_star = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  double r_squared = 0.0;
  double residual_norm = 0.0;
  std::size_t points = 0;
};

/// eps = A exp(-tau / tau*) by least squares on log eps. Without a window, the
/// same automatic selection as fit_lz_regime applies.
ExponentialFit fit_sa_exponential(const ResidualEnergyCurve& curve,
                                  std::optional<FitWindow> window = std::nullopt);

}  // namespace pspin
