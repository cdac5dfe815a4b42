#ifndef QAC_SWEEP_HPP
#define QAC_SWEEP_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qac/engine.hpp"

namespace qac {

/// One grid point of a parameter sweep.  Both protocol variants are run with
/// the same derived seed schedule; `runs` is the number of runs per variant
/// and `terminated` counts terminated runs across both variants (out of
/// 2 * runs).  mean_k / std_k describe the template's own variant.
struct SweepRow {
  std::string param_name;
  double param_value = 0;
  int runs = 0;
  int terminated = 0;
  double mean_k = 0, std_k = 0;
  double mean_k_alg1 = 0, mean_k_alg2 = 0;
  double mean_diff = 0;
};

/// Applies one grid value to a config template.  Supported parameters:
/// "lambda" (equal demand at all nodes), "n", "extra_edge_fraction".
inline void apply_sweep_param(SimConfig& cfg, const std::string& name, double value) {
  if (name == "lambda") {
    if (!cfg.inits.empty())
      for (NodeInit& in : cfg.inits) in.lambda = static_cast<i64>(value);
    cfg.dist.enabled = true;
    cfg.dist.lambda_min = cfg.dist.lambda_max = static_cast<i64>(value);
  } else if (name == "n") {
    cfg.n = static_cast<int>(value);
    cfg.inits.clear();  // sizes change; inits must come from the distribution
  } else if (name == "extra_edge_fraction") {
    cfg.extra_edge_fraction = value;
  } else {
    throw std::invalid_argument("sweep: unknown parameter '" + name + "'");
  }
}

/// Deterministic parameter sweep.  Every run gets an independent seed pair
/// derived from (template seed, point index, run index); capped runs count
/// against the termination rate instead of being dropped.
inline std::vector<SweepRow> sweep(const SimConfig& tmpl, const std::string& param_name,
                                   const std::vector<double>& values,
                                   int runs_per_point) {
  if (values.empty()) throw std::invalid_argument("sweep: empty grid");
  if (runs_per_point < 1) throw std::invalid_argument("sweep: runs_per_point < 1");
  std::vector<SweepRow> rows;
  for (std::size_t p = 0; p < values.size(); ++p) {
    SweepRow row;
    row.param_name = param_name;
    row.param_value = values[p];
    row.runs = runs_per_point;
    double sum1 = 0, sum2 = 0, sum_t = 0, sum_t2 = 0;
    for (int r = 0; r < runs_per_point; ++r) {
      SimConfig cfg = tmpl;
      apply_sweep_param(cfg, param_name, values[p]);
      cfg.seed = derive_stream(tmpl.seed, p, static_cast<std::uint64_t>(r)).next();
      cfg.graph_seed =
          derive_stream(tmpl.seed ^ 0x5eedULL, p, static_cast<std::uint64_t>(r)).next();
      cfg.record_events = false;
      cfg.record_snapshots = false;
      cfg.record_trajectory = false;

      SimConfig c1 = cfg;
      c1.variant = Variant::alg1;
      c1.private_nodes.clear();
      c1.private_all = false;
      const RunResult r1 = run(c1);

      SimConfig c2 = cfg;
      c2.variant = Variant::alg2;
      const RunResult r2 = run(c2);

      if (r1.terminated) ++row.terminated;
      if (r2.terminated) ++row.terminated;
      sum1 += static_cast<double>(r1.k_end);
      sum2 += static_cast<double>(r2.k_end);
      const double own = static_cast<double>(
          tmpl.variant == Variant::alg1 ? r1.k_end : r2.k_end);
      sum_t += own;
      sum_t2 += own * own;
    }
    const double N = runs_per_point;
    row.mean_k_alg1 = sum1 / N;
    row.mean_k_alg2 = sum2 / N;
    row.mean_diff = row.mean_k_alg2 - row.mean_k_alg1;
    row.mean_k = sum_t / N;
    const double var = std::max(0.0, sum_t2 / N - row.mean_k * row.mean_k);
    row.std_k = std::sqrt(var);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace qac

#endif  // QAC_SWEEP_HPP
