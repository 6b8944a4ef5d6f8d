#pragma once

#include "pspin/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

namespace pspin {

enum class IntegrationMethod { adaptive_explicit_rk, fixed_step_rk4 };

struct IntegratorConfig {
  IntegrationMethod method = IntegrationMethod::adaptive_explicit_rk;
  double rtol = 1e-10;
  double atol = 1e-12;
  /// Upper bound on the step; 0 selects a stability bound from the operator norm.
  double max_step = 0.0;
  /// Sampling interval for trajectory records; unset disables recording.
  std::optional<double> record_every;

  void validate() const {
    if (!(rtol > 0.0) || !(atol > 0.0)) throw DomainError("integrator: rtol and atol must be positive");
    if (!(max_step >= 0.0)) throw DomainError("integrator: max_step must be >= 0");
    if (record_every && !(*record_every > 0.0))
      throw DomainError("integrator: record_every must be positive");
  }
};

struct IntegrationStats {
  std::int64_t accepted = 0;
  std::int64_t rejected = 0;
  std::int64_t rhs_evaluations = 0;
};

/// Real-axis stability reach of the embedded pair; the imaginary-axis reach is similar.
inline constexpr double kStabilityMargin = 2.8;

namespace detail {

template <typename Vector>
double scaled_rms(const Vector& err, const Vector& y0, const Vector& y1, double rtol, double atol) {
  const auto sc = (atol + rtol * y0.cwiseAbs().cwiseMax(y1.cwiseAbs()).array());
  return std::sqrt((err.cwiseAbs().array() / sc).square().mean());
}

}  // namespace detail

/// Integrates dy/dt = f(t, y) from t0 to t1 with the Dormand-Prince 5(4) pair.
///
/// `rhs(t, y, dydt)` fills the derivative. `after_step(t, y)` runs after every
/// accepted step and may rescale or clip `y`; it returns true when it did.
template <typename Vector, typename Rhs, typename Hook>
IntegrationStats integrate_adaptive(Rhs&& rhs, Vector& y, double t0, double t1, double rtol,
                                    double atol, double max_step, Hook&& after_step) {
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                   b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  // PI step-size control constants.
  constexpr double kBeta = 0.04, kSafety = 0.9, kGrowMax = 5.0, kShrinkMax = 0.1;
  const double expo = 0.2 - 0.75 * kBeta;

  IntegrationStats stats;
  if (!(t1 > t0)) return stats;
  if (!(max_step > 0.0)) max_step = t1 - t0;

  const Eigen::Index n = y.size();
  Vector k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), err(n);

  double t = t0;
  double h = std::min(max_step, 0.01 * (t1 - t0));
  double err_old = 1e-4;
  bool reject_last = false;

  rhs(t, y, k1);
  ++stats.rhs_evaluations;

  while (t < t1) {
    if (t + 1.01 * h >= t1) h = t1 - t;
    if (h < 1e-14 * std::max(1.0, std::abs(t)))
      throw IntegrationError("step size underflow at t = " + std::to_string(t));

    ytmp.noalias() = y + h * a21 * k1;
    rhs(t + c2 * h, ytmp, k2);
    ytmp.noalias() = y + h * (a31 * k1 + a32 * k2);
    rhs(t + c3 * h, ytmp, k3);
    ytmp.noalias() = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(t + c4 * h, ytmp, k4);
    ytmp.noalias() = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(t + c5 * h, ytmp, k5);
    ytmp.noalias() = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    const double t_new = (h == t1 - t) ? t1 : t + h;
    rhs(t_new, ytmp, k6);
    ynew.noalias() = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    rhs(t_new, ynew, k7);
    stats.rhs_evaluations += 6;
    err.noalias() = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double e = detail::scaled_rms(err, y, ynew, rtol, atol);
    if (!std::isfinite(e)) e = 1e10;

    const double fac_err = std::pow(std::max(e, 1e-300), expo);
    if (e <= 1.0) {
      double fac = fac_err / std::pow(err_old, kBeta) / kSafety;
      fac = std::clamp(fac, 1.0 / kGrowMax, 1.0 / kShrinkMax);
      double h_new = h / fac;
      if (reject_last) h_new = std::min(h_new, h);
      err_old = std::max(e, 1e-4);
      t = t_new;
      y.swap(ynew);
      k1.swap(k7);
      ++stats.accepted;
      if (after_step(t, y)) {
        rhs(t, y, k1);
        ++stats.rhs_evaluations;
      }
      h = std::min(h_new, max_step);
      reject_last = false;
    } else {
      h = h / std::min(1.0 / kShrinkMax, fac_err / kSafety);
      reject_last = true;
      ++stats.rejected;
    }
  }
  return stats;
}

/// Classical RK4 with a fixed step no larger than `step`.
template <typename Vector, typename Rhs, typename Hook>
IntegrationStats integrate_rk4(Rhs&& rhs, Vector& y, double t0, double t1, double step,
                               Hook&& after_step) {
  IntegrationStats stats;
  if (!(t1 > t0)) return stats;
  if (!(step > 0.0)) throw DomainError("rk4: step must be positive");
  const auto steps = static_cast<std::int64_t>(std::ceil((t1 - t0) / step));
  const double h = (t1 - t0) / static_cast<double>(steps);
  const Eigen::Index n = y.size();
  Vector k1(n), k2(n), k3(n), k4(n), ytmp(n);
  for (std::int64_t i = 0; i < steps; ++i) {
    const double t = t0 + static_cast<double>(i) * h;
    const double t_end = (i + 1 == steps) ? t1 : t + h;
    rhs(t, y, k1);
    ytmp.noalias() = y + 0.5 * h * k1;
    rhs(t + 0.5 * h, ytmp, k2);
    ytmp.noalias() = y + 0.5 * h * k2;
    rhs(t + 0.5 * h, ytmp, k3);
    ytmp.noalias() = y + h * k3;
    rhs(t_end, ytmp, k4);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    stats.rhs_evaluations += 4;
    ++stats.accepted;
    after_step(t_end, y);
  }
  return stats;
}

/// Dispatches on `config.method`. `stability_step` is the largest step the
/// explicit method tolerates for the problem; it caps `config.max_step`.
template <typename Vector, typename Rhs, typename Hook>
IntegrationStats integrate(Rhs&& rhs, Vector& y, double t0, double t1, const IntegratorConfig& config,
                           double stability_step, Hook&& after_step) {
  config.validate();
  double cap = stability_step;
  if (config.max_step > 0.0) cap = std::min(cap, config.max_step);
  if (config.method == IntegrationMethod::fixed_step_rk4)
    return integrate_rk4(rhs, y, t0, t1, cap, after_step);
  return integrate_adaptive(rhs, y, t0, t1, config.rtol, config.atol, cap, after_step);
}

}  // namespace pspin
