#ifndef QAC_CONFIG_IO_HPP
#define QAC_CONFIG_IO_HPP

#include <fstream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qac/engine.hpp"

namespace qac {

/// Optional subcommand-specific sections of a config file.
struct ConfigExtras {
  // sweep
  std::string sweep_param = "lambda";
  std::vector<double> sweep_values;
  int runs_per_point = 10;
  // attack
  int attack_target = 0;
  i64 attack_k = 0;     // 0 = auto-pick
  i64 attack_bound = 0; // 0 = 4x the true magnitude
  // bounds
  double eps1 = 0.5, eps2 = 0.5;
};

/// Parses the structured JSON config document.  Schema documented in the
/// README; unknown keys are rejected to keep experiment configs reviewable.
inline std::pair<SimConfig, ConfigExtras> parse_config_json(const nlohmann::json& j) {
  SimConfig cfg;
  ConfigExtras ex;
  static const std::set<std::string> known = {
      "graph",        "nodes",       "node_distribution", "private_nodes",
      "curious_nodes", "variant",    "seed",              "cap",
      "snapshot_stride", "diameter_bound", "relay_after_flag",
      "sweep",        "attack",      "bounds"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key()))
      throw std::runtime_error("config: unknown key '" + it.key() + "'");

  if (!j.contains("graph")) throw std::runtime_error("config: missing 'graph'");
  const auto& gj = j.at("graph");
  if (gj.contains("edges")) {
    cfg.n = gj.at("n").get<int>();
    for (const auto& e : gj.at("edges"))
      cfg.explicit_edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  } else {
    cfg.n = gj.at("n").get<int>();
    cfg.extra_edge_fraction = gj.value("extra_edge_fraction", 0.0);
    cfg.graph_seed = gj.value("seed", 0ULL);
  }

  if (j.contains("nodes")) {
    for (const auto& nj : j.at("nodes")) {
      NodeInit in;
      in.l = nj.value("l", static_cast<i64>(0));
      in.u = nj.value("u", static_cast<i64>(0));
      if (nj.contains("l_plus_u")) in.l = nj.at("l_plus_u").get<i64>(), in.u = 0;
      in.lambda = nj.value("lambda", static_cast<i64>(1));
      cfg.inits.push_back(in);
    }
  } else if (j.contains("node_distribution")) {
    const auto& dj = j.at("node_distribution");
    cfg.dist.enabled = true;
    cfg.dist.total_min = dj.at("total_min").get<i64>();
    cfg.dist.total_max = dj.at("total_max").get<i64>();
    cfg.dist.lambda_min = dj.at("lambda_min").get<i64>();
    cfg.dist.lambda_max = dj.at("lambda_max").get<i64>();
  } else {
    throw std::runtime_error("config: need 'nodes' or 'node_distribution'");
  }

  if (j.contains("private_nodes")) {
    const auto& pj = j.at("private_nodes");
    if (pj.is_string() && pj.get<std::string>() == "all")
      cfg.private_all = true;
    else
      cfg.private_nodes = pj.get<std::vector<int>>();
  }
  if (j.contains("curious_nodes"))
    cfg.curious_nodes = j.at("curious_nodes").get<std::vector<int>>();

  const std::string variant = j.value("variant", std::string("alg2"));
  if (variant == "alg1")
    cfg.variant = Variant::alg1;
  else if (variant == "alg2")
    cfg.variant = Variant::alg2;
  else
    throw std::runtime_error("config: variant must be alg1 or alg2");

  cfg.seed = j.value("seed", 1ULL);
  cfg.cap = j.value("cap", static_cast<i64>(0));
  cfg.snapshot_stride = j.value("snapshot_stride", 0);
  cfg.diameter_bound = j.value("diameter_bound", 0);
  cfg.relay_after_flag = j.value("relay_after_flag", false);

  if (j.contains("sweep")) {
    const auto& sj = j.at("sweep");
    ex.sweep_param = sj.value("param", std::string("lambda"));
    ex.sweep_values = sj.at("values").get<std::vector<double>>();
    ex.runs_per_point = sj.value("runs_per_point", 10);
  }
  if (j.contains("attack")) {
    const auto& aj = j.at("attack");
    ex.attack_target = aj.value("target", 0);
    ex.attack_k = aj.value("k", static_cast<i64>(0));
    ex.attack_bound = aj.value("bound", static_cast<i64>(0));
  }
  if (j.contains("bounds")) {
    const auto& bj = j.at("bounds");
    ex.eps1 = bj.value("eps1", 0.5);
    ex.eps2 = bj.value("eps2", 0.5);
  }
  return {cfg, ex};
}

inline std::pair<SimConfig, ConfigExtras> load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file " + path);
  nlohmann::json j;
  in >> j;
  return parse_config_json(j);
}

}  // namespace qac

#endif  // QAC_CONFIG_IO_HPP
