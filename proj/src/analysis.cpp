#include "pspin/analysis.hpp"

#include "pspin/errors.hpp"
#include "pspin/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

namespace pspin {

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DomainError("linear_fit: size mismatch");
  const std::size_t n = x.size();
  if (n < 2) throw FitError("linear_fit: need at least two points");
  const double xm = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double ym = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - xm) * (x[i] - xm);
    sxy += (x[i] - xm) * (y[i] - ym);
    syy += (y[i] - ym) * (y[i] - ym);
  }
  if (!(sxx > 0.0)) throw FitError("linear_fit: degenerate abscissae");
  LinearFit f;
  f.points = n;
  f.slope = sxy / sxx;
  f.intercept = ym - f.slope * xm;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    rss += r * r;
  }
  f.residual_norm = std::sqrt(rss);
  f.r_squared = syy > 0.0 ? 1.0 - rss / syy : 1.0;
  if (n > 2) {
    const double s2 = rss / static_cast<double>(n - 2);
    f.slope_stderr = std::sqrt(s2 / sxx);
    f.intercept_stderr = std::sqrt(s2 * (1.0 / static_cast<double>(n) + xm * xm / sxx));
  }
  return f;
}

void ResidualEnergyCurve::validate() const {
  params.validate();
  if (tau.size() != eps.size()) throw DomainError("residual-energy curve: tau and eps lengths differ");
  for (std::size_t i = 0; i < tau.size(); ++i) {
    if (!(tau[i] > 0.0)) throw DomainError("residual-energy curve: tau must be positive");
    if (i > 0 && !(tau[i] > tau[i - 1]))
      throw DomainError("residual-energy curve: tau must be strictly increasing");
    if (!(eps[i] >= -1e-10)) throw DomainError("residual-energy curve: negative residual energy");
  }
}

namespace {

constexpr double kMinRSquared = 0.995;
constexpr std::size_t kMinWindowPoints = 5;

struct Window {
  std::size_t first = 0;
  std::size_t last = 0;  // inclusive
  LinearFit fit;
};

std::vector<double> slice(const std::vector<double>& v, std::size_t a, std::size_t b) {
  return {v.begin() + static_cast<std::ptrdiff_t>(a), v.begin() + static_cast<std::ptrdiff_t>(b) + 1};
}

bool strictly_decreasing(const std::vector<double>& y, std::size_t a, std::size_t b) {
  for (std::size_t i = a; i < b; ++i)
    if (!(y[i + 1] < y[i])) return false;
  return true;
}

// Widest linear stretch of y(tau), measured in e-folds of decay.
std::optional<Window> select_window(const std::vector<double>& tau, const std::vector<double>& y,
                                    std::size_t first_allowed) {
  std::optional<Window> best;
  double best_score = -1.0;
  const std::size_t n = tau.size();
  for (std::size_t a = first_allowed; a + kMinWindowPoints <= n; ++a) {
    for (std::size_t b = a + kMinWindowPoints - 1; b < n; ++b) {
      if (!std::isfinite(y[b]) || !strictly_decreasing(y, a, b)) break;
      const LinearFit f = linear_fit(slice(tau, a, b), slice(y, a, b));
      if (f.r_squared < kMinRSquared || !(f.slope < 0.0)) continue;
      const double score = -f.slope * (tau[b] - tau[a]);
      const bool better = score > best_score * (1.0 + 1e-12) ||
                          (best && std::abs(score - best_score) <= 1e-12 * best_score &&
                           b - a > best->last - best->first);
      if (better) {
        best = Window{a, b, f};
        best_score = score;
      }
    }
  }
  return best;
}

// Oscillation nodes: local minima of y followed by further decay.
std::vector<std::size_t> oscillation_nodes(const std::vector<double>& y) {
  const std::size_t n = y.size();
  std::vector<double> suffix_min(n + 1, std::numeric_limits<double>::infinity());
  for (std::size_t i = n; i-- > 0;) suffix_min[i] = std::min(suffix_min[i + 1], y[i]);
  std::vector<std::size_t> nodes;
  for (std::size_t i = 1; i + 1 < n; ++i)
    if (y[i] < y[i - 1] && y[i] <= y[i + 1] && suffix_min[i + 1] < y[i]) nodes.push_back(i);
  return nodes;
}

// Interior local maxima of y.
std::vector<std::size_t> crest_indices(const std::vector<double>& y) {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i + 1 < y.size(); ++i)
    if (y[i] >= y[i - 1] && y[i] > y[i + 1]) out.push_back(i);
  return out;
}

std::vector<double> window_indices(const std::vector<double>& tau, FitWindow w, std::size_t& a,
                                   std::size_t& b) {
  if (!(w.hi > w.lo)) throw DomainError("fit window: need hi > lo");
  a = tau.size();
  b = 0;
  for (std::size_t i = 0; i < tau.size(); ++i) {
    if (tau[i] >= w.lo && tau[i] <= w.hi) {
      a = std::min(a, i);
      b = std::max(b, i);
    }
  }
  if (a == tau.size() || b + 1 < a + kMinWindowPoints)
    throw FitError("fit window holds fewer than 5 points");
  return slice(tau, a, b);
}

}  // namespace

double LZFit::eps(double tau) const { return C / N * std::exp(-tau / tau_star); }

LZFit fit_lz_regime(const ResidualEnergyCurve& curve, std::optional<FitWindow> window) {
  curve.validate();
  const double N = curve.params.N;
  std::vector<double> y(curve.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    y[i] = curve.eps[i] > 0.0 ? std::log(N * curve.eps[i]) : -std::numeric_limits<double>::infinity();

  std::vector<double> tau = curve.tau;
  bool crests = false;
  std::size_t first = 0;
  if (!window && curve.params.p % 2 == 0) {
    const auto nodes = oscillation_nodes(y);
    if (nodes.size() >= 2) {
      std::vector<double> ct, cy;
      for (std::size_t i : crest_indices(y)) {
        ct.push_back(tau[i]);
        cy.push_back(y[i]);
      }
      tau = std::move(ct);
      y = std::move(cy);
      crests = true;
    } else if (nodes.size() == 1) {
      first = nodes.front() + 1;
    }
  }

  Window w;
  if (window) {
    std::size_t a = 0, b = 0;
    const auto t = window_indices(tau, *window, a, b);
    if (!strictly_decreasing(y, a, b)) throw FitError("LZ window: residual energy is not decreasing");
    w = Window{a, b, linear_fit(t, slice(y, a, b))};
  } else {
    const auto found = select_window(tau, y, first);
    if (!found)
      throw FitError(std::string("no LZ window: no stretch of log(N eps)") + (crests ? " crests" : "") +
                     " is linear in tau with R^2 >= 0.995 over at least 5 points");
    w = *found;
  }
  if (!(w.fit.slope < 0.0)) throw FitError("LZ fit: residual energy does not decay");

  LZFit out;
  out.N = curve.params.N;
  out.C = std::exp(w.fit.intercept);
  out.tau_star = -1.0 / w.fit.slope;
  out.window_lo = tau[w.first];
  out.window_hi = tau[w.last];
  out.residual_norm = w.fit.residual_norm;
  out.r_squared = w.fit.r_squared;
  out.points = w.fit.points;
  out.crests = crests;
  return out;
}

double LZFamily::tau_star(double N) const {
  return p == 2 ? std::pow(N, 2.0 * exponent) / gamma : std::exp(2.0 * exponent * N) / gamma;
}

double LZFamily::eps(double N, double tau) const { return C / N * std::exp(-tau / tau_star(N)); }

LZFamily fit_lz_family(const std::vector<LZFit>& fits, int p) {
  if (fits.size() < 2) throw FitError("LZ family: need fits at two or more sizes");
  if (p < 2) throw DomainError("LZ family: p must be >= 2");
  std::vector<double> x, y;
  double csum = 0.0;
  for (const auto& f : fits) {
    if (!(f.C > 0.0) || !(f.tau_star > 0.0)) throw FitError("LZ family: invalid member fit");
    x.push_back(p == 2 ? std::log(static_cast<double>(f.N)) : static_cast<double>(f.N));
    y.push_back(std::log(f.tau_star));
    csum += f.C;
  }
  LZFamily fam;
  fam.p = p;
  fam.C = csum / static_cast<double>(fits.size());
  fam.tau_fit = linear_fit(x, y);
  fam.exponent = 0.5 * fam.tau_fit.slope;
  fam.gamma = std::exp(-fam.tau_fit.intercept);
  if (!(fam.exponent > 0.0)) throw FitError("LZ family: tau* does not grow with N");
  return fam;
}

EnvelopeResult envelope_closed_form_p2(double C, double gamma, double z, const std::vector<double>& tau) {
  if (!(C > 0.0) || !(gamma > 0.0)) throw DomainError("envelope: C and gamma must be positive");
  if (!(z > 0.0 && z < 1.0)) throw DomainError("envelope: z must lie in (0, 1)");
  EnvelopeResult r;
  r.p = 2;
  r.C = C;
  r.gamma = gamma;
  r.exponent = z;
  for (double t : tau) {
    if (!(t > 0.0)) throw DomainError("envelope: tau must be positive");
    const double N = std::pow(2.0 * z * gamma * t, 1.0 / (2.0 * z));
    r.tau.push_back(t);
    r.size.push_back(N);
    r.eps.push_back(C / N * std::exp(-1.0 / (2.0 * z)));
  }
  return r;
}

double solve_envelope_equation(double L) {
  if (!(L > 1.0)) throw DomainError("envelope: log(gamma tau) must exceed 1");
  double u = L;
  for (int it = 0; it < 100; ++it) {
    const double g = u - std::log(u) - L;
    double next = u - g / (1.0 - 1.0 / u);
    if (!(next > 1.0)) next = 0.5 * (1.0 + u);
    const double step = std::abs(next - u);
    u = next;
    if (step <= 4.0 * std::numeric_limits<double>::epsilon() * u) return u;
  }
  throw ConvergenceError("envelope: Newton iteration did not converge in 100 steps");
}

EnvelopeResult envelope_implicit_pge3(double C, double gamma, double alpha, const std::vector<double>& tau) {
  if (!(C > 0.0) || !(gamma > 0.0) || !(alpha > 0.0))
    throw DomainError("envelope: C, gamma and alpha must be positive");
  EnvelopeResult r;
  r.p = 3;
  r.C = C;
  r.gamma = gamma;
  r.exponent = alpha;
  for (double t : tau) {
    if (!(t > 0.0)) throw DomainError("envelope: tau must be positive");
    const double L = std::log(gamma * t);
    const double u = solve_envelope_equation(L);
    const double N = u / (2.0 * alpha);
    r.tau.push_back(t);
    r.size.push_back(N);
    r.eps.push_back(C / N * std::exp(-1.0 / u));
    r.eps_asymptotic.push_back(2.0 * alpha * C * std::exp(-1.0 / L) / (L + std::log(L)));
  }
  return r;
}

EnvelopePoint family_envelope(const std::function<double(double)>& member, double lo, double hi,
                              EnvelopeSide side, int samples) {
  if (!(lo > 0.0) || !(hi > lo)) throw DomainError("family_envelope: need 0 < lo < hi");
  if (samples < 3) throw DomainError("family_envelope: need at least 3 samples");
  const double sign = side == EnvelopeSide::upper ? -1.0 : 1.0;
  auto g = [&](double s) { return sign * member(s); };
  std::vector<double> s(static_cast<std::size_t>(samples));
  std::size_t best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) {
    s[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, static_cast<double>(i) / (samples - 1));
    const double v = g(s[static_cast<std::size_t>(i)]);
    if (v < best_val) {
      best_val = v;
      best = static_cast<std::size_t>(i);
    }
  }
  double a = s[best == 0 ? 0 : best - 1];
  double b = s[std::min(best + 1, s.size() - 1)];
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
  double f1 = g(x1), f2 = g(x2);
  for (int it = 0; it < 200 && b - a > 1e-13 * b; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = g(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = g(x2);
    }
  }
  EnvelopePoint out;
  out.member = f1 < f2 ? x1 : x2;
  double v = std::min(f1, f2);
  if (best_val < v) {
    v = best_val;
    out.member = s[best];
  }
  out.value = sign * v;
  return out;
}

double lz_probability(double gap, double tau) {
  if (!(gap >= 0.0) || !(tau >= 0.0)) throw DomainError("lz_probability: gap and tau must be >= 0");
  return std::exp(-0.25 * std::numbers::pi * gap * gap * tau);
}

namespace {

// f(m, T) - f(0, T) without the cancellation of the two log 2 terms.
double free_energy_excess(double m, double T, const ModelParams& params) {
  const double mixing = 0.5 * (1.0 - m) * std::log1p(-m) + 0.5 * (1.0 + m) * std::log1p(m);
  return -0.5 * params.J * ipow(m, params.p) + T * mixing;
}

}  // namespace

BarrierEstimate barrier(const ModelParams& params, double T) {
  params.validate();
  if (params.p < 3) throw DomainError("barrier: needs p >= 3");
  if (!(T > 0.0)) throw DomainError("barrier: needs T > 0");
  const double mf = ferromagnetic_minimum(params, T);
  if (std::isnan(mf))
    throw DomainError("barrier: f(m, T) has a single minimum at T = " + std::to_string(T));

  BarrierEstimate b;
  b.temperature = T;
  b.m_minimum = mf;
  const double p = params.p, J = params.J;
  const double x = 2.0 * T / (J * p);
  b.m_closed = std::pow(x, 1.0 / (p - 2.0));
  b.height_closed = 0.5 * J * (p - 1.0) * std::pow(x, p / (p - 2.0));
  b.height_leading = 0.25 * J * (p - 2.0) * std::pow(b.m_closed, p);

  // The excess is unimodal between the paramagnetic minimum at 0 and mf.
  // At low T the minimum rounds to m = 1, where the entropy term is singular.
  double a = 0.0, c = std::min(mf, 1.0 - 1e-12);
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto g = [&](double m) { return -free_energy_excess(m, T, params); };
  double x1 = c - invphi * (c - a), x2 = a + invphi * (c - a);
  double f1 = g(x1), f2 = g(x2);
  for (int it = 0; it < 300 && c - a > 1e-15; ++it) {
    if (f1 < f2) {
      c = x2;
      x2 = x1;
      f2 = f1;
      x1 = c - invphi * (c - a);
      f1 = g(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (c - a);
      f2 = g(x2);
    }
  }
  b.m_exact = 0.5 * (a + c);
  b.height_exact = free_energy_excess(b.m_exact, T, params);
  if (!(b.height_exact > 0.0)) throw DomainError("barrier: no barrier between the minima");
  b.relative_discrepancy = std::abs(b.height_leading - b.height_exact) / b.height_exact;
  b.location_discrepancy = std::abs(b.m_closed - b.m_exact) / b.m_exact;
  return b;
}

namespace {

template <typename F>
double simpson_step(F& f, double a, double b, double fa, double fm, double fb, double whole, double tol,
                    int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double diff = left + right - whole;
  if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

// Adaptive Simpson quadrature to a relative tolerance, on 64 starting panels.
template <typename F>
double integrate_simpson(F&& f, double a, double b, double rtol) {
  constexpr int kPanels = 64;
  const double h = (b - a) / kPanels;
  double rough = 0.0;
  for (int i = 0; i < kPanels; ++i) rough += h * f(a + (i + 0.5) * h);
  const double tol = rtol * std::max(std::abs(rough), std::numeric_limits<double>::min());
  double total = 0.0;
  for (int i = 0; i < kPanels; ++i) {
    const double x0 = a + i * h, x1 = (i + 1 == kPanels) ? b : x0 + h;
    const double f0 = f(x0), f1 = f(x1), fm = f(0.5 * (x0 + x1));
    const double whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
    total += simpson_step(f, x0, x1, f0, fm, f1, whole, tol / kPanels, 40);
  }
  return total;
}

}  // namespace

KramersPrediction kramers_predict(const ModelParams& params, const std::vector<double>& tau, double rate) {
  params.validate();
  if (params.p < 3) throw DomainError("kramers_predict: needs p >= 3");
  if (!(rate > 0.0)) throw DomainError("kramers_predict: rate must be positive");
  const double p = params.p, J = params.J;

  KramersPrediction k;
  k.critical_temperature = critical_temperature(params);
  k.rate = rate;
  k.tau_star = k.critical_temperature * std::pow(static_cast<double>(params.N), (p - 2.0) / 2.0) / rate;
  for (double t : tau) {
    if (!(t >= 0.0)) throw DomainError("kramers_predict: tau must be >= 0");
    k.tau.push_back(t);
    k.survival.push_back(std::exp(-t / k.tau_star));
  }

  const double q = 2.0 / (p - 2.0);
  const double c = ((p - 1.0) / p) * std::pow(2.0 / (J * p), q);
  auto integrand = [&](double y) { return std::exp(-c * std::pow(y, q)); };
  const double cutoff = k.critical_temperature * std::pow(static_cast<double>(params.N), (p - 2.0) / 2.0);
  k.integral_infinite = std::tgamma(1.0 + 1.0 / q) * std::pow(c, -1.0 / q);
  k.integral_truncated = integrate_simpson(integrand, 0.0, cutoff, 1e-13);
  // Beyond the cutoff the integrand is below e^{-60} of its value at the cutoff past `far`.
  const double far = std::pow((c * std::pow(cutoff, q) + 60.0) / c, 1.0 / q);
  k.integral_tail = integrate_simpson(integrand, cutoff, far, 1e-12);
  k.relative_difference = k.integral_tail / k.integral_infinite;
  return k;
}

double fit_kramers_rate(const ModelParams& params, const std::vector<int>& sizes,
                        const std::vector<double>& tau_star) {
  params.validate();
  if (sizes.empty() || sizes.size() != tau_star.size())
    throw DomainError("fit_kramers_rate: need matching, non-empty size and tau* lists");
  const double Tc = critical_temperature(params);
  const double e = (params.p - 2.0) / 2.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (!(tau_star[i] > 0.0)) throw DomainError("fit_kramers_rate: tau* must be positive");
    acc += std::log(Tc) + e * std::log(static_cast<double>(sizes[i])) - std::log(tau_star[i]);
  }
  return std::exp(acc / static_cast<double>(sizes.size()));
}

double adiabatic_qa_prediction(double gamma_i, int p, double tau) {
  if (!(tau > 0.0)) throw DomainError("adiabatic_qa_prediction: tau must be positive");
  if (p < 2) throw DomainError("adiabatic_qa_prediction: p must be >= 2");
  return gamma_i * gamma_i / (static_cast<double>(p) * p * p * tau * tau);
}

double adiabatic_qa_prediction_finite(const ModelParams& params, double gamma_i, double tau) {
  params.validate();
  if (!(tau > 0.0)) throw DomainError("adiabatic_qa_prediction_finite: tau must be positive");
  if (params.N < 2) throw DomainError("adiabatic_qa_prediction_finite: needs N >= 2");
  const double gap = params.energy(params.N - 1) - params.energy(params.N);
  return gamma_i * gamma_i / (tau * tau * gap * gap * gap);
}

AdiabaticTail adiabatic_sa_tail(const ModelParams& params, double T_i, double T_f, double tau) {
  params.validate();
  if (!(T_f > 0.0))
    throw DomainError("adiabatic_sa_tail: undefined at T_f = 0 (the effective couplings vanish)");
  if (!(T_i >= T_f)) throw DomainError("adiabatic_sa_tail: needs T_i >= T_f");
  if (!(tau > 0.0)) throw DomainError("adiabatic_sa_tail: tau must be positive");

  const int n = params.N + 1;
  const TridiagonalOperator H = build_effective_hamiltonian(params, T_f);
  const TridiagonalOperator dH = effective_hamiltonian_beta_derivative(params, T_f);
  // For even p only reflection-even levels couple to the symmetric equilibrium
  // state; below T_c the odd tunnelling level has a matrix element that is zero
  // up to rounding and must not be selected.
  const bool even_p = params.p % 2 == 0;
  SpectrumSlice s;
  std::vector<int> parity;
  if (even_p) {
    const ParitySpectrum ps = parity_resolved_spectrum(H, std::min(n, 16));
    s.values = ps.values;
    s.vectors = ps.vectors;
    parity = ps.parity;
  } else {
    s = tridiag_lowest_eigs(H, std::min(n, 16), true);
  }
  const Eigen::VectorXd phi0 = equilibrium_distribution(params, T_f).probabilities.cwiseSqrt().normalized();
  const Eigen::VectorXd E = params.energies();
  const double scale = 0.5 * params.J * params.N;

  AdiabaticTail out;
  out.beta_rate = (T_i - T_f) / (tau * T_f * T_f);
  // The ground level is identified by overlap, not position: a degenerate odd
  // partner may be ordered first.
  Eigen::Index ground = 0;
  (s.vectors.transpose() * phi0).cwiseAbs().maxCoeff(&ground);
  bool found = false;
  for (Eigen::Index j = 0; j < s.values.size(); ++j) {
    if (j == ground || (even_p && parity[static_cast<std::size_t>(j)] < 0)) continue;
    const Eigen::VectorXd phi = s.vectors.col(j);
    const double M = phi.dot(E.cwiseProduct(phi0));
    const double gap = s.values(j) - s.values(ground);
    if (!(gap > 0.0)) continue;
    out.eps_all_levels += out.beta_rate * M * M / gap / params.N;
    if (!found && std::abs(M) > 1e-8 * scale) {
      found = true;
      out.level = static_cast<int>(j);
      out.gap = gap;
      out.energy_element = M;
      out.derivative_element = dH.matrix_element(phi, phi0);
      out.coefficient = 2.0 * out.beta_rate * out.derivative_element / (gap * gap);
      out.eps = M * out.coefficient / params.N;
      out.excited_vector.assign(phi.data(), phi.data() + phi.size());
    }
  }
  if (!found) throw ConvergenceError("adiabatic_sa_tail: no low excited state couples to H_C");
  return out;
}

ExponentialFit fit_sa_exponential(const ResidualEnergyCurve& curve, std::optional<FitWindow> window) {
  curve.validate();
  std::vector<double> y(curve.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    y[i] = curve.eps[i] > 0.0 ? std::log(curve.eps[i]) : -std::numeric_limits<double>::infinity();

  Window w;
  if (window) {
    std::size_t a = 0, b = 0;
    const auto t = window_indices(curve.tau, *window, a, b);
    if (!strictly_decreasing(y, a, b)) throw FitError("exponential fit: data are not monotone decreasing");
    w = Window{a, b, linear_fit(t, slice(y, a, b))};
  } else {
    const auto found = select_window(curve.tau, y, 0);
    if (!found) throw FitError("exponential fit: no decaying stretch is linear in tau with R^2 >= 0.995");
    w = *found;
  }
  if (!(w.fit.slope < 0.0)) throw FitError("exponential fit: data do not decay");
  ExponentialFit out;
  out.prefactor = std::exp(w.fit.intercept);
  out.tau_star = -1.0 / w.fit.slope;
  out.window_lo = curve.tau[w.first];
  out.window_hi = curve.tau[w.last];
  out.r_squared = w.fit.r_squared;
  out.residual_norm = w.fit.residual_norm;
  out.points = w.fit.points;
  return out;
}

}  // namespace pspin
