// Command-line front end: pspin <anneal|sweep|spectrum|envelope|oracle-check> [options]

#include "cli/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

struct Flags {
  std::string config_path;
  std::string out_dir;
  int jobs = 0;
  std::string format = "csv";
  long long seed = 0;
  std::vector<std::string> overrides;
  long long limit = -1;
  int oracle_N = 0;
  int oracle_p = 0;
  std::string oracle_mode;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config_path, "key-value config file");
  sub->add_option("--out", f.out_dir, "output directory (default: stdout, sweep: .)");
  sub->add_option("--jobs", f.jobs, "worker threads for sweeps (default: all cores)")->check(CLI::NonNegativeNumber);
  sub->add_option("--format", f.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--seed", f.seed, "accepted and ignored: every computation is deterministic");
  sub->add_option("--set", f.overrides, "override a config key, section.key=value (repeatable)");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace pspin::cli;
  CLI::App app{"Annealing dynamics of the fully connected p-spin ferromagnet"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tool_version());
  Flags f;
  auto* anneal = app.add_subcommand("anneal", "single annealing run (qa-rt, qa-it or sa)");
  auto* sweep = app.add_subcommand("sweep", "grid of runs over p, N, start, end and tau, resumable");
  auto* spectrum = app.add_subcommand("spectrum", "lowest levels against field or temperature");
  auto* envelope = app.add_subcommand("envelope", "envelope of a Landau-Zener curve family");
  auto* oracle = app.add_subcommand("oracle-check", "compare reduced and full 2^N dynamics");
  auto* keys = app.add_subcommand("keys", "list every config key with its default");
  for (auto* sub : {anneal, sweep, spectrum, envelope, oracle}) add_common(sub, f);
  sweep->add_option("--limit", f.limit, "compute at most this many pending points, then stop");
  oracle->add_option("--N", f.oracle_N, "spin count (<= 12)");
  oracle->add_option("--p", f.oracle_p, "interaction order");
  oracle->add_option("--mode", f.oracle_mode, "qa-rt, qa-it or sa");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (keys->parsed()) {
    for (const auto& k : schema())
      std::cout << k.key << " = " << k.default_value << "    # " << k.doc << '\n';
    return kExitOk;
  }

  try {
    Options opt;
    if (!f.config_path.empty()) opt.config = Config::load(f.config_path);
    for (const auto& o : f.overrides) opt.config.set_assignment(o);
    if (f.oracle_N > 0) opt.config.set("model.N", std::to_string(f.oracle_N));
    if (f.oracle_p > 0) opt.config.set("model.p", std::to_string(f.oracle_p));
    if (!f.oracle_mode.empty()) opt.config.set("run.mode", f.oracle_mode);
    if (!f.out_dir.empty()) opt.out_dir = f.out_dir;
    opt.jobs = f.jobs;
    opt.format = f.format == "json" ? Format::json : Format::csv;
    if (f.limit >= 0) opt.limit = f.limit;

    if (anneal->parsed()) return cmd_anneal(opt, std::cout, std::cerr);
    if (sweep->parsed()) return cmd_sweep(opt, std::cout, std::cerr);
    if (spectrum->parsed()) return cmd_spectrum(opt, std::cout, std::cerr);
    if (envelope->parsed()) return cmd_envelope(opt, std::cout, std::cerr);
    return cmd_oracle_check(opt, std::cout, std::cerr);
  } catch (const std::exception& e) {
    return report_error(e, std::cerr);
  }
}
