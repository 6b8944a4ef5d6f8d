#include "cli/commands.hpp"

#include "pspin/analysis.hpp"
#include "pspin/dynamics.hpp"
#include "pspin/oracle.hpp"
#include "pspin/spectral.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <condition_variable>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace pspin::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

int report_error(const std::exception& e, std::ostream& err) {
  int code = kExitFailure;
  std::string kind = "error";
  if (const auto* pe = dynamic_cast<const Error*>(&e)) {
    kind = pe->kind();
    if (dynamic_cast<const ConfigError*>(pe))
      code = kExitConfig;
    else if (dynamic_cast<const DomainError*>(pe))
      code = kExitDomain;
    else if (dynamic_cast<const ConvergenceError*>(pe) || dynamic_cast<const IntegrationError*>(pe) ||
             dynamic_cast<const FitError*>(pe))
      code = kExitNumerical;
  }
  err << "error[" << kind << "]: " << e.what() << '\n';
  return code;
}

namespace {

IntegratorConfig integrator_from(const Config& c) {
  IntegratorConfig ic;
  const std::string method = c.get_text("integrator.method");
  if (method == "dp5")
    ic.method = IntegrationMethod::adaptive_explicit_rk;
  else if (method == "rk4")
    ic.method = IntegrationMethod::fixed_step_rk4;
  else
    throw ConfigError("config key 'integrator.method': expected dp5 or rk4, got '" + method + "'");
  ic.rtol = c.get_real("integrator.rtol");
  ic.atol = c.get_real("integrator.atol");
  ic.max_step = c.get_real("integrator.max_step");
  const double every = c.get_real("integrator.record_every");
  if (every > 0.0) ic.record_every = every;
  ic.validate();
  return ic;
}

void check_mode(const std::string& mode) {
  if (mode != "qa-rt" && mode != "qa-it" && mode != "sa")
    throw ConfigError("config key 'run.mode': expected qa-rt, qa-it or sa, got '" + mode + "'");
}

bool x_polarized_start(const Config& c) {
  const std::string init = c.get_text("schedule.initial");
  if (init == "ground") return false;
  if (init == "x-polarized") return true;
  throw ConfigError("config key 'schedule.initial': expected ground or x-polarized, got '" + init + "'");
}

ModelParams model_from(const Config& c) {
  ModelParams m{c.get_int("model.p"), c.get_real("model.J"), c.get_int("model.N")};
  m.validate();
  return m;
}

RunPoint point_from(const Config& c) {
  RunPoint pt{c.get_text("run.mode"), model_from(c), c.get_real("schedule.start"), c.get_real("schedule.end"),
              c.get_real("schedule.tau")};
  check_mode(pt.mode);
  return pt;
}

void warn_low_field(const RunPoint& pt, std::ostream& err) {
  if (pt.mode != "sa" && pt.start < pt.params.J)
    err << "warning: initial field " << pt.start << " is below J = " << pt.params.J
        << "; the run may start inside the ordered phase\n";
}

// Writes `t` to `<dir>/<stem>.csv|json`, or to `out` when no directory was given.
void emit(const Table& t, const Options& opt, const std::string& stem, std::ostream& out) {
  auto write = [&](std::ostream& s) {
    if (opt.format == Format::json)
      write_json(s, t);
    else
      write_csv(s, t);
  };
  if (!opt.out_dir) {
    write(out);
    return;
  }
  fs::create_directories(*opt.out_dir);
  const fs::path path = *opt.out_dir / (stem + (opt.format == Format::json ? ".json" : ".csv"));
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path.string());
  write(f);
  out << path.string() << '\n';
}

void write_atomically(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw Error("cannot write " + tmp.string());
    f << content;
  }
  fs::rename(tmp, path);
}

std::vector<double> log_space(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi >= lo) || n < 1) throw DomainError("need 0 < lo <= hi and at least one point");
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = n == 1 ? lo : lo * std::pow(hi / lo, double(i) / (n - 1));
  return v;
}

}  // namespace

RunResult run_point(const RunPoint& point, const Config& config) {
  check_mode(point.mode);
  const auto t0 = std::chrono::steady_clock::now();
  const IntegratorConfig ic = integrator_from(config);
  const ModelParams& m = point.params;
  m.validate();
  RunResult r;
  EvolutionDiagnostics diag;
  Eigen::VectorXd weights;
  if (point.mode == "sa") {
    const AnnealingSchedule s{Driver::temperature, point.start, point.end, point.tau};
    s.validate();
    const ProbabilityVector p = evolve_sa(equilibrium_state(m, point.start), s, m, ic, nullptr, &diag);
    r.eps_res = residual_energy_classical(p, m, point.end);
    weights = p.probabilities;
  } else {
    const AnnealingSchedule s{Driver::transverse_field, point.start, point.end, point.tau};
    s.validate();
    const WaveFunction psi0 = x_polarized_start(config) ? x_polarized_state(m.N) : initial_quantum_state(m, point.start);
    const WaveFunction psi = point.mode == "qa-rt" ? evolve_rt(psi0, s, m, ic, nullptr, &diag)
                                                   : evolve_it(psi0, s, m, ic, nullptr, &diag);
    r.eps_res = residual_energy_quantum(psi, m);
    weights = psi.probabilities();
  }
  std::tie(r.m_mean, r.m2_mean) = magnetization_moments(weights);
  r.drift = diag.norm_drift;
  r.steps = diag.stats.accepted;
  r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

const std::vector<std::string>& record_columns() {
  static const std::vector<std::string> cols = {"p",      "J",      "N",       "mode",    "start",
                                                "end",    "tau",    "eps_res", "m_mean",  "m2_mean",
                                                "drift",  "steps",  "status",  "wall_time_s"};
  return cols;
}

std::vector<Cell> record_row(const RunPoint& pt, const RunResult& r, const std::string& status) {
  return {static_cast<long long>(pt.params.p), pt.params.J, static_cast<long long>(pt.params.N), pt.mode,
          pt.start, pt.end, pt.tau, r.eps_res, r.m_mean, r.m2_mean, r.drift, r.steps, status, r.wall_time_s};
}

std::vector<std::string> output_meta(const std::string& command, const Config& config) {
  std::vector<std::string> meta = {std::string("tool pspin ") + tool_version(), "command " + command,
                                   "config_hash " + config.hash_hex()};
  for (const auto& line : config.canonical_lines()) meta.push_back("config " + line);
  return meta;
}

int cmd_anneal(const Options& opt, std::ostream& out, std::ostream& err) {
  const RunPoint pt = point_from(opt.config);
  warn_low_field(pt, err);
  const RunResult r = run_point(pt, opt.config);
  Table t{output_meta("anneal", opt.config), record_columns(), {}};
  t.add_row(record_row(pt, r, "ok"));
  emit(t, opt, "anneal", out);
  return kExitOk;
}

namespace {

struct SweepPoint {
  RunPoint point;
  std::string status = "pending";
  std::string error;
  json record;
};

json cells_to_json(const std::vector<Cell>& row) {
  json a = json::array();
  for (const auto& c : row) {
    if (const auto* d = std::get_if<double>(&c))
      a.push_back(std::isfinite(*d) ? json(*d) : json(format_real(*d)));
    else if (const auto* i = std::get_if<long long>(&c))
      a.push_back(*i);
    else
      a.push_back(std::get<std::string>(c));
  }
  return a;
}

std::vector<Cell> json_to_cells(const json& a) {
  std::vector<Cell> row;
  for (const auto& v : a) {
    if (v.is_number_integer())
      row.emplace_back(v.get<long long>());
    else if (v.is_number())
      row.emplace_back(v.get<double>());
    else
      row.emplace_back(v.get<std::string>());
  }
  return row;
}

}  // namespace

int cmd_sweep(const Options& opt, std::ostream& out, std::ostream& err) {
  const Config& c = opt.config;
  const std::string mode = c.get_text("run.mode");
  check_mode(mode);
  auto ints_or = [&](const std::string& key, int fallback) {
    auto v = c.get_ints(key);
    return v.empty() ? std::vector<int>{fallback} : v;
  };
  auto reals_or = [&](const std::string& key, double fallback) {
    auto v = c.get_reals(key);
    return v.empty() ? std::vector<double>{fallback} : v;
  };
  const auto ps = ints_or("sweep.p", c.get_int("model.p"));
  const auto Ns = ints_or("sweep.N", c.get_int("model.N"));
  const auto starts = reals_or("sweep.start", c.get_real("schedule.start"));
  const auto ends = reals_or("sweep.end", c.get_real("schedule.end"));
  const auto taus = reals_or("sweep.tau", c.get_real("schedule.tau"));
  integrator_from(c);
  x_polarized_start(c);

  std::vector<SweepPoint> grid;
  for (int p : ps)
    for (int N : Ns)
      for (double a : starts)
        for (double b : ends)
          for (double tau : taus) {
            RunPoint pt{mode, ModelParams{p, c.get_real("model.J"), N}, a, b, tau};
            pt.params.validate();
            if (!(tau > 0.0)) throw DomainError("sweep: tau must be positive");
            grid.push_back(SweepPoint{pt, "pending", {}, {}});
          }
  if (grid.empty()) throw ConfigError("sweep: empty grid");
  warn_low_field(grid.front().point, err);

  const fs::path dir = opt.out_dir.value_or(fs::path("."));
  fs::create_directories(dir);
  const fs::path manifest_path = dir / "manifest.json";
  const fs::path table_path = dir / (opt.format == Format::json ? "sweep.json" : "sweep.csv");

  if (fs::exists(manifest_path)) {
    std::ifstream f(manifest_path);
    json m = json::parse(f);
    if (m.value("config_hash", "") != c.hash_hex() || m.value("version", "") != tool_version())
      throw ConfigError("sweep: " + manifest_path.string() +
                        " belongs to a different config or version; use a fresh --out directory");
    const auto& pts = m.at("points");
    if (pts.size() != grid.size()) throw ConfigError("sweep: manifest grid size mismatch");
    for (std::size_t i = 0; i < grid.size(); ++i) {
      grid[i].status = pts[i].at("status").get<std::string>();
      grid[i].error = pts[i].value("error", "");
      if (pts[i].contains("record")) grid[i].record = pts[i].at("record");
    }
  }

  auto flush = [&] {
    json m;
    m["tool"] = "pspin";
    m["version"] = tool_version();
    m["config_hash"] = c.hash_hex();
    m["axes"] = {{"p", ps}, {"N", Ns}, {"start", starts}, {"end", ends}, {"tau", taus}};
    m["columns"] = record_columns();
    m["points"] = json::array();
    Table t{output_meta("sweep", c), record_columns(), {}};
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto& g = grid[i];
      json e = {{"index", i},          {"p", g.point.params.p}, {"N", g.point.params.N},
                {"start", g.point.start}, {"end", g.point.end},   {"tau", g.point.tau},
                {"status", g.status}};
      if (!g.error.empty()) e["error"] = g.error;
      if (!g.record.is_null()) {
        e["record"] = g.record;
        t.add_row(json_to_cells(g.record));
      }
      m["points"].push_back(std::move(e));
    }
    write_atomically(manifest_path, m.dump(2) + "\n");
    std::ostringstream s;
    if (opt.format == Format::json)
      write_json(s, t);
    else
      write_csv(s, t);
    write_atomically(table_path, s.str());
  };

  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (grid[i].status == "pending") todo.push_back(i);
  if (opt.limit && static_cast<long long>(todo.size()) > *opt.limit) todo.resize(static_cast<std::size_t>(*opt.limit));

  const int workers = std::max(1, std::min<int>(opt.jobs > 0 ? opt.jobs : static_cast<int>(std::thread::hardware_concurrency()),
                                                 static_cast<int>(todo.size())));
  std::mutex mu;
  std::condition_variable cv;
  std::vector<std::optional<std::pair<std::string, json>>> finished(todo.size());
  std::size_t next = 0;
  std::size_t arrived = 0;

  auto worker = [&] {
    for (;;) {
      std::size_t slot;
      {
        std::lock_guard lock(mu);
        if (next >= todo.size()) return;
        slot = next++;
      }
      const RunPoint pt = grid[todo[slot]].point;
      std::pair<std::string, json> res;
      try {
        const RunResult r = run_point(pt, c);
        res = {"done", cells_to_json(record_row(pt, r, "ok"))};
      } catch (const std::exception& e) {
        std::ostringstream msg;
        report_error(e, msg);
        RunResult nan;
        nan.eps_res = nan.m_mean = nan.m2_mean = nan.drift = std::numeric_limits<double>::quiet_NaN();
        const auto* pe = dynamic_cast<const Error*>(&e);
        res = {"failed", cells_to_json(record_row(pt, nan, pe ? pe->kind() : "error"))};
        res.second.push_back(msg.str());
      }
      {
        std::lock_guard lock(mu);
        finished[slot] = std::move(res);
        ++arrived;
      }
      cv.notify_one();
    }
  };

  std::vector<std::thread> pool;
  for (int i = 0; i < workers && !todo.empty(); ++i) pool.emplace_back(worker);

  // Single collector: records every finished point and rewrites the outputs.
  std::size_t handled = 0;
  while (handled < todo.size()) {
    std::vector<std::size_t> ready;
    {
      std::unique_lock lock(mu);
      cv.wait(lock, [&] { return arrived > handled; });
      for (std::size_t s = 0; s < todo.size(); ++s)
        if (finished[s] && grid[todo[s]].status == "pending") ready.push_back(s);
    }
    for (std::size_t s : ready) {
      auto& g = grid[todo[s]];
      g.status = finished[s]->first;
      json rec = finished[s]->second;
      if (g.status == "failed") {
        g.error = rec.back().get<std::string>();
        rec.erase(rec.size() - 1);
        err << "point " << todo[s] << " failed: " << g.error;
      }
      g.record = std::move(rec);
      ++handled;
    }
    flush();
  }
  for (auto& t : pool) t.join();
  if (todo.empty()) flush();

  std::size_t done = 0, failed = 0, pending = 0;
  for (const auto& g : grid) {
    if (g.status == "done") ++done;
    else if (g.status == "failed") ++failed;
    else ++pending;
  }
  out << "sweep: " << done << " done, " << failed << " failed, " << pending << " pending of " << grid.size()
      << " points; " << table_path.string() << '\n';
  if (failed > 0) {
    err << "failed points:";
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (grid[i].status == "failed") err << ' ' << i;
    err << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

int cmd_spectrum(const Options& opt, std::ostream& out, std::ostream&) {
  const Config& c = opt.config;
  const ModelParams m = model_from(c);
  const std::string driver = c.get_text("spectrum.driver");
  if (driver != "field" && driver != "temperature")
    throw ConfigError("config key 'spectrum.driver': expected field or temperature, got '" + driver + "'");
  const int levels = c.get_int("spectrum.levels");
  const int points = c.get_int("spectrum.points");
  const double lo = c.get_real("spectrum.lo"), hi = c.get_real("spectrum.hi");
  if (levels < 1 || levels > m.N + 1) throw DomainError("spectrum: levels must lie in 1..N+1");
  if (points < 1 || !(hi >= lo)) throw DomainError("spectrum: need points >= 1 and hi >= lo");

  Table t{output_meta("spectrum", c), {"control"}, {}};
  for (int i = 0; i < levels; ++i) t.columns.push_back("E" + std::to_string(i));
  t.columns.push_back("dynamical_gap");
  for (int i = 0; i < points; ++i) {
    const double x = points == 1 ? lo : lo + (hi - lo) * i / (points - 1);
    std::vector<Cell> row{x};
    SpectrumSlice s;
    double gap = 0.0;
    if (driver == "field") {
      s = tridiag_lowest_eigs(build_quantum_hamiltonian(m, x), levels, false);
      gap = dynamical_gap(m, x);
    } else {
      s = classical_spectrum(m, x, levels);
      gap = classical_dynamical_gap(m, x);
    }
    for (Eigen::Index k = 0; k < s.values.size(); ++k) row.emplace_back(s.values(k));
    row.emplace_back(gap);
    t.add_row(std::move(row));
  }
  emit(t, opt, "spectrum", out);
  return kExitOk;
}

namespace {

std::vector<LZFit> read_fits(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open fits file " + path.string());
  std::vector<LZFit> fits;
  std::string line;
  int iN = -1, iC = -1, iT = -1;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (iN < 0) {
      for (int i = 0; i < static_cast<int>(cells.size()); ++i) {
        if (cells[i] == "N") iN = i;
        if (cells[i] == "C") iC = i;
        if (cells[i] == "tau_star") iT = i;
      }
      if (iN < 0 || iC < 0 || iT < 0) throw ConfigError("fits file needs columns N, C and tau_star");
      continue;
    }
    const int need = std::max({iN, iC, iT});
    if (static_cast<int>(cells.size()) <= need) throw ConfigError("fits file: short row '" + line + "'");
    LZFit fit;
    try {
      fit.N = std::stoi(cells[iN]);
      fit.C = std::stod(cells[iC]);
      fit.tau_star = std::stod(cells[iT]);
    } catch (const std::exception&) {
      throw ConfigError("fits file: cannot parse row '" + line + "'");
    }
    fits.push_back(fit);
  }
  return fits;
}

}  // namespace

int cmd_envelope(const Options& opt, std::ostream& out, std::ostream&) {
  const Config& c = opt.config;
  const int p = c.get_int("envelope.p");
  if (p < 2) throw DomainError("envelope: p must be >= 2");
  double C = c.get_real("envelope.C"), gamma = c.get_real("envelope.gamma"), expo = c.get_real("envelope.exponent");
  Table t{output_meta("envelope", c), {"tau", "eps_env", "N_tau"}, {}};
  const std::string fits_path = c.get_text("envelope.fits");
  if (!fits_path.empty()) {
    const LZFamily fam = fit_lz_family(read_fits(fits_path), p);
    C = fam.C;
    gamma = fam.gamma;
    expo = fam.exponent;
  }
  t.meta.push_back("family C " + format_real(C));
  t.meta.push_back("family gamma " + format_real(gamma));
  t.meta.push_back(std::string("family ") + (p == 2 ? "z " : "alpha ") + format_real(expo));
  const auto taus = log_space(c.get_real("envelope.tau_lo"), c.get_real("envelope.tau_hi"), c.get_int("envelope.points"));
  const EnvelopeResult env =
      p == 2 ? envelope_closed_form_p2(C, gamma, expo, taus) : envelope_implicit_pge3(C, gamma, expo, taus);
  if (p != 2) t.columns.push_back("eps_asymptotic");
  for (std::size_t i = 0; i < env.tau.size(); ++i) {
    std::vector<Cell> row{env.tau[i], env.eps[i], env.size[i]};
    if (p != 2) row.emplace_back(env.eps_asymptotic[i]);
    t.add_row(std::move(row));
  }
  emit(t, opt, "envelope", out);
  return kExitOk;
}

int cmd_oracle_check(const Options& opt, std::ostream& out, std::ostream&) {
  const Config& c = opt.config;
  const RunPoint pt = point_from(c);
  check_oracle_size(pt.params.N);
  const IntegratorConfig ic = integrator_from(c);
  const double tol = c.get_real("oracle.tolerance");
  const ModelParams& m = pt.params;
  double reduced = 0.0, full = 0.0;
  if (pt.mode == "sa") {
    const AnnealingSchedule s{Driver::temperature, pt.start, pt.end, pt.tau};
    s.validate();
    reduced = residual_energy_classical(evolve_sa(equilibrium_state(m, pt.start), s, m, ic), m, pt.end);
    full = full_residual_energy(full_master_evolve(full_boltzmann_state(m, pt.start), m, s, ic), m, pt.end);
  } else {
    const AnnealingSchedule s{Driver::transverse_field, pt.start, pt.end, pt.tau};
    s.validate();
    const bool x = x_polarized_start(c);
    const bool it = pt.mode == "qa-it";
    const WaveFunction psi0 = x ? x_polarized_state(m.N) : initial_quantum_state(m, pt.start);
    const WaveFunction psi = it ? evolve_it(psi0, s, m, ic) : evolve_rt(psi0, s, m, ic);
    reduced = residual_energy_quantum(psi, m);
    const FullSpaceState f0 = x ? uniform_superposition(m.N) : full_ground_state(m, pt.start);
    full = full_residual_energy(full_quantum_evolve(f0, m, s, it, ic), m);
  }
  const double diff = std::abs(reduced - full);
  const bool pass = diff <= tol;
  Table t{output_meta("oracle-check", c), {"N", "p", "mode", "eps_reduced", "eps_full", "abs_diff", "tolerance", "result"}, {}};
  t.add_row({static_cast<long long>(m.N), static_cast<long long>(m.p), pt.mode, reduced, full, diff, tol,
             std::string(pass ? "pass" : "fail")});
  emit(t, opt, "oracle_check", out);
  return pass ? kExitOk : kExitFailure;
}

}  // namespace pspin::cli
