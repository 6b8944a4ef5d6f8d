#include "cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#ifndef PSPIN_VERSION
#define PSPIN_VERSION "0.0.0"
#endif

namespace pspin::cli {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

bool parse_int(const std::string& s, int& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_real(const std::string& s, double& out) {
  if (s == "inf" || s == "infinity") {
    out = std::numeric_limits<double>::infinity();
    return true;
  }
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end && !std::isnan(out);
}

const KeySpec& spec_of(const std::string& key) {
  const auto& keys = schema();
  const auto it = std::find_if(keys.begin(), keys.end(), [&](const KeySpec& k) { return k.key == key; });
  if (it == keys.end()) throw ConfigError("unknown config key '" + key + "'");
  return *it;
}

void check_value(const KeySpec& spec, const std::string& value) {
  auto bad = [&] { return ConfigError("config key '" + spec.key + "': cannot parse '" + value + "'"); };
  int i = 0;
  double d = 0.0;
  switch (spec.type) {
    case ValueType::integer:
      if (!parse_int(value, i)) throw bad();
      break;
    case ValueType::real:
      if (!parse_real(value, d)) throw bad();
      break;
    case ValueType::text:
      break;
    case ValueType::integer_list:
      for (const auto& item : split_list(value))
        if (!parse_int(item, i)) throw bad();
      break;
    case ValueType::real_list:
      for (const auto& item : split_list(value))
        if (!parse_real(item, d)) throw bad();
      break;
  }
}

}  // namespace

const char* tool_version() { return PSPIN_VERSION; }

const std::vector<KeySpec>& schema() {
  static const std::vector<KeySpec> keys = {
      {"run.mode", ValueType::text, "qa-rt", "dynamics: qa-rt, qa-it or sa"},
      {"model.p", ValueType::integer, "2", "interaction order p >= 2"},
      {"model.J", ValueType::real, "1", "ferromagnetic coupling J > 0"},
      {"model.N", ValueType::integer, "32", "number of spins"},
      {"schedule.start", ValueType::real, "2", "initial field Gamma_i or temperature T_i"},
      {"schedule.end", ValueType::real, "0", "final field Gamma_f or temperature T_f"},
      {"schedule.tau", ValueType::real, "10", "total annealing time"},
      {"schedule.initial", ValueType::text, "ground", "quantum initial state: ground or x-polarized"},
      {"integrator.method", ValueType::text, "dp5", "dp5 (adaptive) or rk4 (fixed step)"},
      {"integrator.rtol", ValueType::real, "1e-10", "relative tolerance"},
      {"integrator.atol", ValueType::real, "1e-12", "absolute tolerance"},
      {"integrator.max_step", ValueType::real, "0", "step cap; 0 uses the stability bound"},
      {"integrator.record_every", ValueType::real, "0", "trajectory sampling interval; 0 disables"},
      {"sweep.p", ValueType::integer_list, "", "grid of p (defaults to model.p)"},
      {"sweep.N", ValueType::integer_list, "", "grid of N (defaults to model.N)"},
      {"sweep.tau", ValueType::real_list, "", "grid of tau (defaults to schedule.tau)"},
      {"sweep.start", ValueType::real_list, "", "grid of Gamma_i or T_i (defaults to schedule.start)"},
      {"sweep.end", ValueType::real_list, "", "grid of Gamma_f or T_f (defaults to schedule.end)"},
      {"spectrum.driver", ValueType::text, "field", "field (quantum H) or temperature (classical generator)"},
      {"spectrum.lo", ValueType::real, "0.5", "lowest control value"},
      {"spectrum.hi", ValueType::real, "1.5", "highest control value"},
      {"spectrum.points", ValueType::integer, "101", "number of control values"},
      {"spectrum.levels", ValueType::integer, "6", "eigenvalues per control value"},
      {"envelope.fits", ValueType::text, "", "CSV with columns N,C,tau_star; overrides C, gamma, exponent"},
      {"envelope.p", ValueType::integer, "2", "family kind: 2 power law, >= 3 exponential"},
      {"envelope.C", ValueType::real, "2", "LZ prefactor C"},
      {"envelope.gamma", ValueType::real, "1", "LZ rate gamma"},
      {"envelope.exponent", ValueType::real, "0.333333333333333333", "z (p = 2) or alpha (p >= 3)"},
      {"envelope.tau_lo", ValueType::real, "10", "first tau"},
      {"envelope.tau_hi", ValueType::real, "1e4", "last tau"},
      {"envelope.points", ValueType::integer, "41", "log-spaced tau samples"},
      {"oracle.tolerance", ValueType::real, "1e-8", "largest accepted |eps_reduced - eps_full|"},
  };
  return keys;
}

Config Config::parse(std::istream& in, const std::string& origin) {
  Config c;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string name = trim(line.substr(0, eq));
    const std::string key = section.empty() ? name : section + "." + name;
    c.set(key, trim(line.substr(eq + 1)));
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse(in, path.string());
}

void Config::set(const std::string& key, const std::string& value) {
  const KeySpec& spec = spec_of(key);
  check_value(spec, value);
  values_[key] = value;
}

void Config::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

std::string Config::raw(const std::string& key) const {
  const KeySpec& spec = spec_of(key);
  const auto it = values_.find(key);
  return it == values_.end() ? spec.default_value : it->second;
}

int Config::get_int(const std::string& key) const {
  int v = 0;
  parse_int(raw(key), v);
  return v;
}

double Config::get_real(const std::string& key) const {
  double v = 0.0;
  parse_real(raw(key), v);
  return v;
}

std::string Config::get_text(const std::string& key) const { return raw(key); }

std::vector<int> Config::get_ints(const std::string& key) const {
  std::vector<int> out;
  for (const auto& item : split_list(raw(key))) {
    int v = 0;
    parse_int(item, v);
    out.push_back(v);
  }
  return out;
}

std::vector<double> Config::get_reals(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split_list(raw(key))) {
    double v = 0.0;
    parse_real(item, v);
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> Config::canonical_lines() const {
  std::vector<std::string> lines;
  for (const auto& spec : schema()) lines.push_back(spec.key + " = " + raw(spec.key));
  std::sort(lines.begin(), lines.end());
  return lines;
}

std::uint64_t Config::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  auto feed = [&](const std::string& s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 1099511628211ull;
    }
    h ^= '\n';
    h *= 1099511628211ull;
  };
  feed(tool_version());
  for (const auto& line : canonical_lines()) feed(line);
  return h;
}

std::string Config::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

}  // namespace pspin::cli
