// Acceptance suite: one PASS/FAIL line per criterion on stdout, diagnostics on stderr.
//
//   acceptance                 run every criterion
//   acceptance --criterion 4   run one criterion (repeatable)

#include "pspin/analysis.hpp"
#include "pspin/dynamics.hpp"
#include "pspin/errors.hpp"
#include "pspin/oracle.hpp"
#include "pspin/spectral.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

using namespace pspin;
namespace fs = std::filesystem;

namespace {

constexpr double kGammaI = 2.0;  // initial transverse field
constexpr double kTi = 2.0;      // initial temperature

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void note(const std::string& s) { std::fprintf(stderr, "  %s\n", s.c_str()); }

std::vector<double> log_grid(double lo, double hi, int per_decade) {
  std::vector<double> v;
  const int n = static_cast<int>(std::lround(std::log10(hi / lo) * per_decade));
  for (int i = 0; i <= n; ++i) v.push_back(lo * std::pow(10.0, static_cast<double>(i) / per_decade));
  return v;
}

std::vector<double> lin_grid(double lo, double hi, double step) {
  std::vector<double> v;
  for (double t = lo; t <= hi + 1e-9 * step; t += step) v.push_back(t);
  return v;
}

double qa_rt(const ModelParams& mp, double tau) {
  AnnealingSchedule s{Driver::transverse_field, kGammaI, 0.0, tau};
  return residual_energy_quantum(evolve_rt(initial_quantum_state(mp, kGammaI), s, mp), mp);
}

double qa_it(const ModelParams& mp, double tau) {
  AnnealingSchedule s{Driver::transverse_field, kGammaI, 0.0, tau};
  return residual_energy_quantum(evolve_it(initial_quantum_state(mp, kGammaI), s, mp), mp);
}

double sa(const ModelParams& mp, double T_f, double tau) {
  AnnealingSchedule s{Driver::temperature, kTi, T_f, tau};
  return residual_energy_classical(evolve_sa(equilibrium_state(mp, kTi), s, mp), mp, T_f);
}

ResidualEnergyCurve qa_rt_curve(const ModelParams& mp, const std::vector<double>& taus) {
  ResidualEnergyCurve c;
  c.params = mp;
  c.start_value = kGammaI;
  c.tau = taus;
  for (double t : taus) c.eps.push_back(qa_rt(mp, t));
  return c;
}

double slope_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return linear_fit(lx, ly).slope;
}

// Results shared between criteria are cached next to the binary's working
// directory, keyed by the binary's modification time.
std::string cache_key() {
  std::error_code ec;
  const auto t = fs::last_write_time("/proc/self/exe", ec);
  return ec ? std::string("none") : std::to_string(t.time_since_epoch().count());
}

// ---------------------------------------------------------------------------

Outcome criterion_1() {
  double worst = 0.0;
  for (int N : {6, 8, 10}) {
    for (int p : {2, 3}) {
      ModelParams mp{p, 1.0, N};
      AnnealingSchedule q{Driver::transverse_field, kGammaI, 0.0, 20.0};
      AnnealingSchedule s{Driver::temperature, kTi, 0.0, 50.0};
      const double rt = std::abs(full_residual_energy(full_quantum_evolve(full_ground_state(mp, kGammaI), mp, q, false), mp) -
                                 residual_energy_quantum(evolve_rt(initial_quantum_state(mp, kGammaI), q, mp), mp));
      const double it = std::abs(full_residual_energy(full_quantum_evolve(full_ground_state(mp, kGammaI), mp, q, true), mp) -
                                 residual_energy_quantum(evolve_it(initial_quantum_state(mp, kGammaI), q, mp), mp));
      const double cl = std::abs(full_residual_energy(full_master_evolve(full_boltzmann_state(mp, kTi), mp, s), mp, 0.0) -
                                 residual_energy_classical(evolve_sa(equilibrium_state(mp, kTi), s, mp), mp, 0.0));
      note(fmt("N=%d p=%d  |d eps| qa-rt %.2e  qa-it %.2e  sa %.2e", N, p, rt, it, cl));
      worst = std::max({worst, rt, it, cl});
    }
  }
  return {worst < 1e-8, fmt("max |eps_reduced - eps_full| = %.2e (tolerance 1e-8)", worst)};
}

Outcome criterion_2() {
  std::vector<double> sizes, gaps;
  double loc_1024 = 0.0;
  for (int N : {64, 128, 256, 512, 1024}) {
    const auto mg = min_gap_scan(ModelParams{2, 1.0, N}, 0.5, 1.5, 101);
    note(fmt("N=%4d  Gamma_min %.6f  Delta %.6e", N, mg.location, mg.gap));
    sizes.push_back(N);
    gaps.push_back(mg.gap);
    if (N == 1024) loc_1024 = mg.location;
  }
  const auto fit = gap_scaling_fit(sizes, gaps, ScalingModel::power);
  const bool z_ok = std::abs(fit.exponent - 0.33) <= 0.03;
  const bool loc_ok = std::abs(loc_1024 - 1.0) <= 0.02;
  return {z_ok && loc_ok, fmt("z = %.4f (0.33 +- 0.03: %s), Gamma_min(1024) = %.4f (1.00 +- 0.02: %s)", fit.exponent,
                              z_ok ? "ok" : "out", loc_1024, loc_ok ? "ok" : "out")};
}

Outcome criterion_3() {
  std::vector<double> sizes, gaps;
  for (int N = 16; N <= 64; ++N) {
    const auto mg = min_gap_scan(ModelParams{3, 1.0, N}, 0.3, 1.5, 121);
    sizes.push_back(N);
    gaps.push_back(mg.gap);
    if (N % 8 == 0) note(fmt("N=%d  Gamma_min %.6f  Delta %.6e", N, mg.location, mg.gap));
  }
  const auto ex = gap_scaling_fit(sizes, gaps, ScalingModel::exponential);
  const auto pw = gap_scaling_fit(sizes, gaps, ScalingModel::power);
  const double ratio = pw.residual_norm / ex.residual_norm;
  note(fmt("exponential alpha %.5f residual %.4e; power z %.4f residual %.4e", ex.exponent, ex.residual_norm,
           pw.exponent, pw.residual_norm));
  return {ratio >= 5.0, fmt("power/exponential residual-norm ratio = %.2f (>= 5), alpha_3 = %.4f", ratio, ex.exponent)};
}

// QA-RT at N = 512, p = 2 on a log grid; shared by criteria 4 and 8.
struct IntermediateRegime {
  std::vector<double> tau, eps;
  double sudden = 0.0;
  double lo = 0.0, hi = 0.0;  ///< pre-LZ window
  double slope = 0.0;
  double amplitude = 0.0;     ///< A in eps = A tau^{-3/2}, least squares in log over the window
};

IntermediateRegime intermediate_regime() {
  static std::optional<IntermediateRegime> cached;
  if (cached) return *cached;
  IntermediateRegime r;
  const ModelParams mp{2, 1.0, 512};
  const auto psi0 = initial_quantum_state(mp, kGammaI);
  r.sudden = residual_energy_quantum(psi0, mp);
  for (double t : log_grid(0.1, 1000.0, 8)) {
    r.tau.push_back(t);
    r.eps.push_back(qa_rt(mp, t));
    if (t >= 10.0 && r.lo > 0.0 && t > 10.0 * r.lo * 1.0001) break;
    if (r.lo == 0.0 && r.eps.back() <= 0.5 * r.sudden) r.lo = t;
  }
  r.hi = 10.0 * r.lo;
  std::vector<double> x, y;
  double log_a = 0.0;
  for (std::size_t i = 0; i < r.tau.size(); ++i) {
    if (r.tau[i] < r.lo * 0.9999 || r.tau[i] > r.hi * 1.0001) continue;
    x.push_back(r.tau[i]);
    y.push_back(r.eps[i]);
    log_a += std::log(r.eps[i]) + 1.5 * std::log(r.tau[i]);
  }
  r.slope = slope_loglog(x, y);
  r.amplitude = std::exp(log_a / static_cast<double>(x.size()));
  cached = r;
  return r;
}

Outcome criterion_4() {
  const auto r = intermediate_regime();
  for (std::size_t i = 0; i < r.tau.size(); ++i) note(fmt("tau %9.4f  eps %.6e", r.tau[i], r.eps[i]));
  note(fmt("sudden-quench eps %.6f; window [%.3f, %.3f]; A = eps tau^1.5 = %.4f", r.sudden, r.lo, r.hi, r.amplitude));
  const bool ok = std::abs(r.slope + 1.5) <= 0.1;
  return {ok, fmt("log-log slope on [%.2f, %.2f] = %.4f (-1.5 +- 0.1)", r.lo, r.hi, r.slope)};
}

Outcome criterion_5() {
  bool ok = true;
  std::string detail;
  for (int p : {2, 3}) {
    const ModelParams mp{p, 1.0, 16};
    std::vector<double> taus = log_grid(1e3, 1e4, 16), eps;
    double log_mean = 0.0;
    for (double t : taus) {
      eps.push_back(qa_rt(mp, t));
      log_mean += std::log(eps.back() * t * t);
    }
    const double measured = std::exp(log_mean / static_cast<double>(taus.size()));
    const double slope = slope_loglog(taus, eps);
    const double target = adiabatic_qa_prediction(kGammaI, p, 1.0);
    const double finite = adiabatic_qa_prediction_finite(mp, kGammaI, 1.0);
    const double rel = std::abs(measured / target - 1.0);
    note(fmt("p=%d: slope on [1e3, 1e4] %.4f; eps tau^2 %.5f; Gamma_i^2/p^3 %.5f; finite-N Gamma_i^2/Delta_N^3 %.5f",
             p, slope, measured, target, finite));
    const bool regime = std::abs(slope + 2.0) <= 0.1;
    ok = ok && regime && rel <= 0.15;
    detail += fmt("%sp=%d eps*tau^2 %.4f vs %.4f (%+.1f%%)", detail.empty() ? "" : "; ", p, measured, target,
                  100.0 * (measured / target - 1.0));
    if (!regime) detail += " [not in tau^-2 regime]";
  }
  return {ok, detail + " (within 15%)"};
}

Outcome criterion_6() {
  bool ok = true;
  double worst_target = 0.0, worst_size = 0.0;
  for (int p : {2, 3}) {
    const double target = adiabatic_qa_prediction(kGammaI, p, 1.0);
    for (double t : log_grid(10.0, 1000.0, 4)) {
      const double a = qa_it(ModelParams{p, 1.0, 32}, t) * t * t;
      const double b = qa_it(ModelParams{p, 1.0, 256}, t) * t * t;
      const double dt = std::max(std::abs(a / target - 1.0), std::abs(b / target - 1.0));
      const double ds = std::abs(a - b) / (0.5 * (a + b));
      note(fmt("p=%d tau %8.2f  eps tau^2: N=32 %.5f  N=256 %.5f  target %.5f", p, t, a, b, target));
      worst_target = std::max(worst_target, dt);
      worst_size = std::max(worst_size, ds);
    }
  }
  ok = worst_target <= 0.15 && worst_size < 0.05;
  return {ok, fmt("max |eps tau^2 / (Gamma_i^2/p^3) - 1| = %.1f%% (15%%), max N=32 vs 256 spread = %.1f%% (5%%)",
                  100.0 * worst_target, 100.0 * worst_size)};
}

// LZ fits of QA-RT at p = 3 with the minimum gaps; shared by criteria 7 and 9.
struct P3Fits {
  std::vector<LZFit> fits;
  std::vector<double> gaps;
};

P3Fits p3_fits() {
  static std::optional<P3Fits> cached;
  if (cached) return *cached;
  const fs::path cache = "acceptance_cache_p3_lz.txt";
  const std::string key = cache_key();
  P3Fits out;
  {
    std::ifstream in(cache);
    std::string k;
    if (in && std::getline(in, k) && k == key) {
      LZFit f;
      double gap;
      while (in >> f.N >> f.C >> f.tau_star >> f.window_lo >> f.window_hi >> f.r_squared >> f.points >> gap) {
        out.fits.push_back(f);
        out.gaps.push_back(gap);
      }
      if (!out.fits.empty()) {
        note("p = 3 LZ fits read from " + cache.string());
        cached = out;
        return out;
      }
    }
  }
  for (int N : {24, 32, 40, 48, 56, 64}) {
    const ModelParams mp{3, 1.0, N};
    // Bracket the LZ decay by doubling: from N eps ~ 1 down to N eps ~ 0.05.
    double lo = 1.0, hi = 0.0;
    for (double t = 1.0;; t *= 2.0) {
      const double ne = N * qa_rt(mp, t);
      if (ne >= 1.0) lo = t;
      if (ne <= 0.05) {
        hi = t;
        break;
      }
    }
    const auto curve = qa_rt_curve(mp, lin_grid(lo, hi, (hi - lo) / 9.0));
    const auto fit = fit_lz_regime(curve);
    const double gap = min_gap_scan(mp, 0.3, 1.5, 121).gap;
    note(fmt("N=%d  grid [%g, %g]  C %.4f  tau* %.5g  window [%.4g, %.4g]  R^2 %.5f  Delta %.5e", N, lo, hi, fit.C,
             fit.tau_star, fit.window_lo, fit.window_hi, fit.r_squared, gap));
    out.fits.push_back(fit);
    out.gaps.push_back(gap);
  }
  std::ofstream o(cache);
  o << key << '\n';
  o.precision(17);
  for (std::size_t i = 0; i < out.fits.size(); ++i) {
    const auto& f = out.fits[i];
    o << f.N << ' ' << f.C << ' ' << f.tau_star << ' ' << f.window_lo << ' ' << f.window_hi << ' ' << f.r_squared
      << ' ' << f.points << ' ' << out.gaps[i] << '\n';
  }
  cached = out;
  return out;
}

Outcome criterion_7() {
  const auto d = p3_fits();
  std::vector<double> tau, gap;
  for (std::size_t i = 0; i < d.fits.size(); ++i) {
    tau.push_back(d.fits[i].tau_star);
    gap.push_back(d.gaps[i]);
    note(fmt("N=%d  Delta %.5e  tau* %.5g  tau* Delta^2 %.4f  C %.4f", d.fits[i].N, gap.back(), tau.back(),
             tau.back() * gap.back() * gap.back(), d.fits[i].C));
  }
  const double slope = slope_loglog(gap, tau);
  const double C = d.fits.back().C;
  const bool slope_ok = std::abs(slope + 2.0) <= 0.15;
  const bool c_ok = std::abs(C / 3.0 - 1.0) <= 0.15;
  return {slope_ok && c_ok, fmt("d log tau* / d log Delta = %.3f (-2 +- 0.15: %s); C_%d = %.3f (3J +- 15%%: %s)", slope,
                                slope_ok ? "ok" : "out", d.fits.back().N, C, c_ok ? "ok" : "out")};
}

Outcome criterion_8() {
  // Dense linear grids covering the LZ decay of each size.
  struct Member {
    int N;
    double lo, hi, step;
  };
  const std::vector<Member> members{{128, 60, 500, 10}, {192, 100, 650, 10}, {256, 150, 795, 15}};
  std::vector<LZFit> fits;
  for (const auto& m : members) {
    const auto curve = qa_rt_curve(ModelParams{2, 1.0, m.N}, lin_grid(m.lo, m.hi, m.step));
    const auto f = fit_lz_regime(curve);
    note(fmt("N=%d  C %.4f  tau* %.4f  window [%g, %g] (%zu %s)  R^2 %.5f", m.N, f.C, f.tau_star, f.window_lo,
             f.window_hi, f.points, f.crests ? "crests" : "points", f.r_squared));
    fits.push_back(f);
  }
  const auto fam = fit_lz_family(fits, 2);
  const double exponent = -1.0 / (2.0 * fam.exponent);
  const double predicted = std::pow(3.0 / (2.0 * std::exp(1.0) * fam.gamma), 1.5) * fam.C;
  const auto r = intermediate_regime();
  const double rel = std::abs(predicted / r.amplitude - 1.0);
  note(fmt("family: C %.4f  gamma %.5f  z %.4f  envelope exponent %.4f", fam.C, fam.gamma, fam.exponent, exponent));
  note(fmt("(3/(2 e gamma))^{3/2} C = %.4f; measured N=512 A = %.4f on [%.2f, %.2f]", predicted, r.amplitude, r.lo, r.hi));
  for (std::size_t i = 0; i < r.tau.size(); ++i) {
    if (r.tau[i] < r.lo * 0.9999 || r.tau[i] > r.hi * 1.0001) continue;
    const double e = envelope_closed_form_p2(fam.C, fam.gamma, fam.exponent, {r.tau[i]}).eps[0];
    note(fmt("tau %8.3f  envelope %.5e  measured N=512 %.5e  ratio %.3f", r.tau[i], e, r.eps[i], e / r.eps[i]));
  }

  // Tangency: every family member lies below the envelope and touches it once.
  const auto taus = log_grid(1.0, 1e5, 200);
  const auto env = envelope_closed_form_p2(fam.C, fam.gamma, fam.exponent, taus);
  bool tangent = true;
  for (const auto& f : fits) {
    double peak = 0.0;
    int maxima = 0;
    std::vector<double> ratio;
    for (std::size_t i = 0; i < taus.size(); ++i) ratio.push_back(fam.eps(f.N, taus[i]) / env.eps[i]);
    for (std::size_t i = 0; i < ratio.size(); ++i) {
      peak = std::max(peak, ratio[i]);
      if (i > 0 && i + 1 < ratio.size() && ratio[i] >= ratio[i - 1] && ratio[i] > ratio[i + 1]) ++maxima;
    }
    const bool ok = peak <= 1.0 + 1e-9 && peak >= 0.99 && maxima == 1;
    note(fmt("tangency N=%d: max eps_N / eps_env = %.6f, contacts %d", f.N, peak, maxima));
    tangent = tangent && ok;
  }
  const bool exp_ok = std::abs(exponent + 1.5) <= 0.1;
  const bool pre_ok = rel <= 0.2;
  return {exp_ok && pre_ok && tangent,
          fmt("envelope exponent %.3f (-1.5 +- 0.1: %s); prefactor %.3f vs measured %.3f (%+.0f%%, 20%%: %s); tangency %s",
              exponent, exp_ok ? "ok" : "out", predicted, r.amplitude, 100.0 * (predicted / r.amplitude - 1.0),
              pre_ok ? "ok" : "out", tangent ? "ok" : "violated")};
}

Outcome criterion_9() {
  const auto d = p3_fits();
  const auto fam = fit_lz_family(d.fits, 3);
  note(fmt("family: C %.4f  gamma %.5g  alpha %.5f", fam.C, fam.gamma, fam.exponent));
  std::vector<double> taus;
  for (double g : log_grid(10.0, 1e15, 20)) taus.push_back(g / fam.gamma);
  const auto env = envelope_implicit_pge3(fam.C, fam.gamma, fam.exponent, taus);

  bool monotone = true;
  for (std::size_t i = 1; i < env.eps.size(); ++i) monotone = monotone && env.eps[i] < env.eps[i - 1];

  bool tangent = true;
  for (const auto& f : d.fits) {
    double peak = 0.0;
    for (std::size_t i = 0; i < taus.size(); ++i) peak = std::max(peak, fam.eps(f.N, taus[i]) / env.eps[i]);
    // Refine the contact on a fine grid around the member's own timescale.
    for (double t : log_grid(std::max(fam.tau_star(f.N) / 100.0, taus.front()), fam.tau_star(f.N) * 100.0, 400)) {
      const auto e = envelope_implicit_pge3(fam.C, fam.gamma, fam.exponent, {t});
      peak = std::max(peak, fam.eps(f.N, t) / e.eps[0]);
    }
    note(fmt("tangency N=%d: max eps_N / eps_env = %.6f", f.N, peak));
    tangent = tangent && peak <= 1.0 + 1e-9 && peak >= 0.99;
  }

  double worst = 0.0, first_within = 0.0;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const double gt = fam.gamma * taus[i];
    if (gt < 1e3 * 0.9999) continue;
    const double L = std::log(gt);
    const double form = 2.0 * fam.exponent * fam.C / (L + std::log(L));
    const double rel = std::abs(env.eps[i] / form - 1.0);
    if (first_within == 0.0 && rel <= 0.05) first_within = gt;
    worst = std::max(worst, rel);
    if (std::fmod(static_cast<double>(i), 20.0) == 0.0)
      note(fmt("gamma tau %.0e  envelope %.5e  2 alpha C/(L + log L) %.5e  (%+.2f%%)  with e^{-1/u}: %.5e", gt,
               env.eps[i], form, 100.0 * (env.eps[i] / form - 1.0), env.eps_asymptotic[i]));
  }
  const bool form_ok = worst <= 0.05;
  return {monotone && tangent && form_ok,
          fmt("monotone %s; tangency %s; max deviation from 2 alpha C/(L + log L) for gamma tau >= 1e3 = %.1f%% (5%%)%s",
              monotone ? "ok" : "violated", tangent ? "ok" : "violated", 100.0 * worst,
              form_ok ? "" : fmt(", within 5%% from gamma tau = %.0e", first_within).c_str())};
}

Outcome criterion_10() {
  // T_f = 0: size collapse and exponential decay.
  const auto taus = log_grid(1.0, 100.0, 8);
  std::map<int, std::vector<double>> curves;
  bool exponential = true;
  for (int N : {32, 128, 512}) {
    ResidualEnergyCurve c;
    c.params = ModelParams{2, 1.0, N};
    c.driver = Driver::temperature;
    c.tau = taus;
    for (double t : taus) c.eps.push_back(sa(c.params, 0.0, t));
    curves[N] = c.eps;
    try {
      const auto f = fit_sa_exponential(c);
      note(fmt("T_f=0 N=%d  A %.4f  tau* %.4f  window [%g, %g]  R^2 %.5f", N, f.prefactor, f.tau_star, f.window_lo,
               f.window_hi, f.r_squared));
    } catch (const FitError& e) {
      note(fmt("T_f=0 N=%d  no exponential fit: %s", N, e.what()));
      exponential = false;
    }
  }
  // Decay region: below half the tau -> 0 value, above 1e-12.
  const double start = curves[512].front();
  double collapse = 0.0;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const double ref = curves[512][i];
    if (ref > 0.5 * start || ref < 1e-12) continue;
    for (int a : {32, 128})
      collapse = std::max(collapse, std::abs(std::log(curves[a][i]) - std::log(ref)));
    note(fmt("tau %8.3f  eps N=32 %.5e  N=128 %.5e  N=512 %.5e", taus[i], curves[32][i], curves[128][i], ref));
  }
  // T_f = 0.4: adiabatic tail.
  const auto late = log_grid(1e3, 1e4, 4);
  double worst_slope = 0.0, worst_tail = 0.0;
  for (int N : {32, 128, 512}) {
    const ModelParams mp{2, 1.0, N};
    std::vector<double> eps;
    for (double t : late) {
      eps.push_back(sa(mp, 0.4, t));
      const double pred = adiabatic_sa_tail(mp, kTi, 0.4, t).eps;
      worst_tail = std::max(worst_tail, std::abs(eps.back() / pred - 1.0));
      note(fmt("T_f=0.4 N=%d tau %7.0f  eps %.5e  adiabatic %.5e", N, t, eps.back(), pred));
    }
    const double s = slope_loglog(late, eps);
    note(fmt("T_f=0.4 N=%d late slope %.4f", N, s));
    worst_slope = std::max(worst_slope, std::abs(s + 1.0));
  }
  const bool ok = exponential && collapse < 0.1 && worst_slope <= 0.1 && worst_tail <= 0.25;
  return {ok, fmt("T_f=0: max |d log eps| across N = %.3f (< 0.1), exponential fits %s; T_f=0.4: max |slope + 1| = "
                  "%.3f (0.1), max |eps/adiabatic - 1| = %.1f%% (25%%)",
                  collapse, exponential ? "ok" : "failed", worst_slope, 100.0 * worst_tail)};
}

Outcome criterion_11() {
  const std::vector<int> sizes{32, 64, 128, 256, 512};
  std::vector<double> tau_star, size_d, at_1000;
  double worst_prefactor = 0.0;
  bool prefactor_ok = true;
  for (int N : sizes) {
    const ModelParams mp{3, 1.0, N};
    ResidualEnergyCurve c;
    c.params = mp;
    c.driver = Driver::temperature;
    c.tau = log_grid(1.0, 1e3, 8);
    for (double t : c.tau) c.eps.push_back(sa(mp, 0.0, t));
    at_1000.push_back(c.eps.back());
    const auto f = fit_sa_exponential(c);
    note(fmt("N=%d  A %.4f  tau* %.4f  window [%g, %g]  R^2 %.5f  eps(1e3) %.5e", N, f.prefactor, f.tau_star, f.window_lo,
             f.window_hi, f.r_squared, c.eps.back()));
    tau_star.push_back(f.tau_star);
    size_d.push_back(N);
    if (f.prefactor < 0.4 || f.prefactor > 0.6) prefactor_ok = false;
    worst_prefactor = std::max(worst_prefactor, std::abs(f.prefactor - 0.5));
  }
  const double slope = slope_loglog(size_d, tau_star);
  bool monotone = true;
  for (std::size_t i = 1; i < at_1000.size(); ++i) monotone = monotone && at_1000[i] > at_1000[i - 1];
  const bool bounded = *std::max_element(at_1000.begin(), at_1000.end()) <= 0.5;
  const bool slope_ok = std::abs(slope - 0.5) <= 0.1;
  return {prefactor_ok && slope_ok && monotone && bounded,
          fmt("prefactors in [0.4, 0.6]: %s (max |A - 0.5| = %.3f); d log tau* / d log N = %.3f (0.5 +- 0.1); eps(tau=1e3) "
              "increasing in N: %s, %.3e at N=512",
              prefactor_ok ? "yes" : "no", worst_prefactor, slope, monotone && bounded ? "yes" : "no", at_1000.back())};
}

Outcome criterion_12() {
  std::vector<std::string> failed;
  auto check = [&](bool ok, const std::string& what) {
    note(std::string(ok ? "ok   " : "FAIL ") + what);
    if (!ok) failed.push_back(what);
  };

  for (int p : {2, 3}) {
    const ModelParams mp{p, 1.0, 256};
    EvolutionDiagnostics d;
    AnnealingSchedule s{Driver::transverse_field, kGammaI, 0.0, 100.0};
    evolve_rt(initial_quantum_state(mp, kGammaI), s, mp, {}, nullptr, &d);
    check(d.norm_drift < 1e-6, fmt("QA-RT norm drift p=%d N=256 tau=100: %.2e", p, d.norm_drift));
    EvolutionDiagnostics c;
    AnnealingSchedule t{Driver::temperature, kTi, 0.0, 100.0};
    evolve_sa(equilibrium_state(mp, kTi), t, mp, {}, nullptr, &c);
    check(c.norm_drift < 1e-9, fmt("SA probability drift p=%d N=256 tau=100: %.2e", p, c.norm_drift));
  }

  double worst_sum = 0.0, worst_db = 0.0, worst_fd = 0.0;
  for (int p : {2, 3, 4}) {
    for (int N : {16, 128, 1024}) {
      for (double T : {0.2, 0.7, 2.0}) {
        const ModelParams mp{p, 1.0, N};
        const auto G = build_master_generator(mp, T);
        worst_sum = std::max(worst_sum, G.column_sums().cwiseAbs().maxCoeff() / N);
        // Detailed balance of the sector generator: G(k+1,k) P_k = G(k,k+1) P_{k+1}.
        const Eigen::VectorXd P = equilibrium_distribution(mp, T).probabilities;
        for (int k = 0; k < N; ++k) {
          const double a = G.sub(k) * P(k), b = G.super(k) * P(k + 1);
          const double scale = std::max(a, b);
          if (scale > 1e-290) worst_db = std::max(worst_db, std::abs(a - b) / scale);
        }
        if (N <= 128) {
          const double beta = 1.0 / T, h = 1e-6 * beta;
          const Eigen::MatrixXd fd = (build_effective_hamiltonian(mp, 1.0 / (beta + h)).dense() -
                                      build_effective_hamiltonian(mp, 1.0 / (beta - h)).dense()) / (2.0 * h);
          const Eigen::MatrixXd exact = effective_hamiltonian_beta_derivative(mp, T).dense();
          worst_fd = std::max(worst_fd, (fd - exact).norm() / exact.norm());
        }
      }
    }
  }
  check(worst_sum < 1e-12, fmt("generator column sums / N: %.2e", worst_sum));
  check(worst_db < 1e-10, fmt("detailed-balance residual: %.2e", worst_db));
  check(worst_fd < 1e-6, fmt("d H / d beta vs finite differences: %.2e relative", worst_fd));

  const ModelParams mp{2, 1.0, 32};
  const double T_f = 0.4, tau = 1e3;
  const auto tail = adiabatic_sa_tail(mp, kTi, T_f, tau);
  AnnealingSchedule s{Driver::temperature, kTi, T_f, tau};
  const auto P = evolve_sa(equilibrium_state(mp, kTi), s, mp);
  const Eigen::VectorXd root = equilibrium_distribution(mp, T_f).probabilities.cwiseSqrt();
  const Eigen::Map<const Eigen::VectorXd> phi(tail.excited_vector.data(), static_cast<Eigen::Index>(tail.excited_vector.size()));
  const double direct = phi.dot(P.probabilities.cwiseQuotient(root));
  const double rel = std::abs(direct / tail.coefficient - 1.0);
  check(rel <= 0.25, fmt("adiabatic coefficient c_ex %.5e vs projected %.5e (%.1f%%)", tail.coefficient, direct, 100.0 * rel));
  return {failed.empty(), failed.empty() ? std::string("all invariants hold") : "violated: " + failed.front()};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria for the p-spin annealing library"};
  std::vector<int> selected;
  app.add_option("--criterion", selected, "criterion number 1-12 (repeatable; default all)")->check(CLI::Range(1, 12));
  CLI11_PARSE(app, argc, argv);
  if (selected.empty()) {
    selected.resize(12);
    std::iota(selected.begin(), selected.end(), 1);
  }
  const std::vector<std::function<Outcome()>> criteria{criterion_1, criterion_2,  criterion_3,  criterion_4,
                                                       criterion_5, criterion_6,  criterion_7,  criterion_8,
                                                       criterion_9, criterion_10, criterion_11, criterion_12};
  bool all = true;
  for (int c : selected) {
    std::fprintf(stderr, "criterion %d\n", c);
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[static_cast<std::size_t>(c - 1)]();
    } catch (const Error& e) {
      o = {false, std::string("error[") + e.kind() + "]: " + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %2d: %s  %s  [%.0f s]\n", c, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
