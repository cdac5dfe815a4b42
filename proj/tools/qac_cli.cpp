// Command-line front end: run / sweep / attack / bounds / verify.
// Thin wrappers over the library; every artifact written here can be
// reproduced by library calls with the same parameters.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qac/adversary.hpp"
#include "qac/analysis.hpp"
#include "qac/config_io.hpp"
#include "qac/engine.hpp"
#include "qac/serialize.hpp"
#include "qac/sweep.hpp"

namespace fs = std::filesystem;
using namespace qac;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string variant;
  i64 cap = -1;
  bool quiet = false;
};

void add_common(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--config", o.config_path, "path to JSON config file")->required();
  sub->add_option("--out", o.out_dir, "output directory (default: $QAC_OUT_DIR or .)");
  sub->add_option("--seed", o.seed, "override RNG seed")->each([&o](const std::string&) {
    o.seed_set = true;
  });
  sub->add_option("--variant", o.variant, "override protocol variant: alg1 | alg2")
      ->check(CLI::IsMember({"alg1", "alg2"}));
  sub->add_option("--cap", o.cap, "override iteration cap");
  sub->add_flag("--quiet", o.quiet, "suppress progress output");
}

std::string resolve_out_dir(const CommonOpts& o) {
  std::string dir = o.out_dir;
  if (dir.empty()) {
    if (const char* env = std::getenv("QAC_OUT_DIR")) dir = env;
    if (dir.empty()) dir = ".";
  }
  fs::create_directories(dir);
  return dir;
}

/// Loads the config, applies CLI overrides and validates.
/// Exits with code 2 on any validation failure, listing every violation.
std::pair<SimConfig, ConfigExtras> load_and_validate(const CommonOpts& o) {
  auto [cfg, extras] = load_config_file(o.config_path);
  if (o.seed_set) cfg.seed = o.seed;
  if (!o.variant.empty())
    cfg.variant = o.variant == "alg1" ? Variant::alg1 : Variant::alg2;
  if (o.cap >= 0) cfg.cap = o.cap;
  auto [resolved, graph] = resolve_config(cfg);
  const auto bad = validate_config(resolved, graph);
  if (!bad.empty()) {
    std::cerr << "configuration invalid:\n";
    for (const auto& m : bad) std::cerr << "  - " << m << "\n";
    std::exit(2);
  }
  return {cfg, extras};
}

int cmd_run(const CommonOpts& o) {
  auto [cfg, extras] = load_and_validate(o);
  (void)extras;
  const std::string dir = resolve_out_dir(o);
  const RunResult res = run(cfg);
  write_file(dir + "/snapshots.csv", snapshots_to_csv(res));
  write_file(dir + "/events.jsonl", events_to_jsonl(res));
  write_file(dir + "/summary.json", summary_to_json(res));
  write_file(dir + "/plot_qs.csv", plot_qs_csv(res));
  if (!o.quiet)
    std::cout << (res.terminated ? "terminated at k=" : "hit cap at k=")
              << res.k_end << ", q = " << res.q.num << "/" << res.q.den << "\n";
  return res.terminated ? 0 : 1;
}

int cmd_sweep(const CommonOpts& o) {
  auto [cfg, extras] = load_and_validate(o);
  if (extras.sweep_values.empty()) {
    std::cerr << "sweep: config has no 'sweep.values'\n";
    return 2;
  }
  const std::string dir = resolve_out_dir(o);
  const auto rows = sweep(cfg, extras.sweep_param, extras.sweep_values,
                          extras.runs_per_point);
  write_file(dir + "/sweep.csv",
             sweep_to_csv(rows, "mean iterations vs " + extras.sweep_param));
  bool all_terminated = true;
  for (const auto& r : rows) {
    all_terminated = all_terminated && r.terminated == 2 * r.runs;
    if (!o.quiet)
      std::cout << r.param_name << "=" << r.param_value
                << " mean_alg1=" << r.mean_k_alg1
                << " mean_alg2=" << r.mean_k_alg2 << "\n";
  }
  return all_terminated ? 0 : 1;
}

int cmd_attack(const CommonOpts& o) {
  auto [cfg, extras] = load_and_validate(o);
  const std::string dir = resolve_out_dir(o);
  cfg.record_events = true;
  cfg.snapshot_stride = 1;  // the observation-round chooser needs every round
  const RunResult res = run(cfg);
  const int target = extras.attack_target;
  const NodeInit& truth = res.config.inits[target];
  const i64 truth_y = res.config.variant == Variant::alg1
                          ? truth.l + truth.u
                          : truth.l + truth.u;
  i64 bound = extras.attack_bound;
  if (bound <= 0) bound = 4 * std::max<i64>(truth_y, truth.lambda);

  InferenceResult inf;
  i64 k = extras.attack_k;
  if (res.config.variant == Variant::alg1) {
    if (k <= 0) k = choose_attack_round(res, target);
    if (k > 0) inf = infer_initial_state(capture_transcript(res, target, k));
    else inf.indeterminate = true;
  } else {
    inf.indeterminate = true;  // the linear attack targets the plain variant
  }
  const i64 feasible = privacy_feasible_set(res, target, bound);
  write_file(dir + "/attack.json",
             attack_to_json(target, k, inf, truth_y, truth.lambda, feasible));
  if (!o.quiet)
    std::cout << "target " << target << ": feasible_count=" << feasible << "\n";
  return res.terminated ? 0 : 1;
}

int cmd_bounds(const CommonOpts& o) {
  auto [cfg, extras] = load_and_validate(o);
  const std::string dir = resolve_out_dir(o);
  auto [resolved, graph] = resolve_config(cfg);
  const BoundReport rep = convergence_bound(extras.eps1, extras.eps2, graph,
                                            resolved.inits, resolved.private_nodes);
  write_file(dir + "/bounds.json", bounds_to_json(rep));
  if (!o.quiet)
    std::cout << "k0''=" << rep.k0_double_prime
              << " probability=" << rep.probability << "\n";
  return 0;
}

int cmd_verify(const CommonOpts& o) {
  auto [cfg, extras] = load_and_validate(o);
  (void)extras;
  int failures = 0;
  auto check = [&](const std::string& name, bool ok) {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << "\n";
    if (!ok) ++failures;
  };
  // Invariant suite over derived seeds of the provided config.
  bool runs_ok = true, equiv_ok = true;
  for (int r = 0; r < 5; ++r) {
    SimConfig c = cfg;
    c.seed = derive_stream(cfg.seed, 0xC0DE, static_cast<std::uint64_t>(r)).next();
    c.self_check = true;
    try {
      const RunResult res = run(c);
      if (res.terminated)
        for (i64 qs : res.final_qs)
          runs_ok = runs_ok && (qs == res.q.ceil() || qs == res.q.floor());
    } catch (const std::exception& e) {
      std::cerr << "run failed: " << e.what() << "\n";
      runs_ok = false;
    }
    SimConfig ce = cfg;
    ce.seed = derive_stream(cfg.seed, 0xE0, static_cast<std::uint64_t>(r)).next();
    ce.private_nodes.clear();
    ce.private_all = false;
    equiv_ok = equiv_ok && run_pair_equivalence(ce);
  }
  check("per-round invariants and final allocations (5 seeded runs)", runs_ok);
  check("doubled-trajectory equivalence of the two variants (5 seeded runs)", equiv_ok);
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quantized-consensus resource allocation simulator"};
  app.require_subcommand(1);
  CommonOpts o;
  CLI::App* s_run = app.add_subcommand("run", "execute one simulation");
  CLI::App* s_sweep = app.add_subcommand("sweep", "parameter sweep");
  CLI::App* s_attack = app.add_subcommand("attack", "inference attack / privacy check");
  CLI::App* s_bounds = app.add_subcommand("bounds", "theoretical bound report");
  CLI::App* s_verify = app.add_subcommand("verify", "run the invariant suite");
  for (CLI::App* s : {s_run, s_sweep, s_attack, s_bounds, s_verify})
    add_common(s, o);
  CLI11_PARSE(app, argc, argv);
  try {
    if (s_run->parsed()) return cmd_run(o);
    if (s_sweep->parsed()) return cmd_sweep(o);
    if (s_attack->parsed()) return cmd_attack(o);
    if (s_bounds->parsed()) return cmd_bounds(o);
    if (s_verify->parsed()) return cmd_verify(o);
  } catch (const ValidationError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
