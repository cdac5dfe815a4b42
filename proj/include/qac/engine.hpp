#ifndef QAC_ENGINE_HPP
#define QAC_ENGINE_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qac/analysis.hpp"
#include "qac/digraph.hpp"
#include "qac/protocol.hpp"
#include "qac/rng.hpp"

namespace qac {

enum class Variant { alg1, alg2 };

/// Ranged sampling of initial conditions when per-node values are not given.
struct InitDistribution {
  bool enabled = false;
  i64 total_min = 0, total_max = 0;    // range of l + u
  i64 lambda_min = 1, lambda_max = 1;  // range of lambda
};

/// Full description of one simulation.
struct SimConfig {
  // Topology: either generated from (n, extra_edge_fraction, graph_seed) or
  // taken verbatim from explicit_edges.
  int n = 0;
  double extra_edge_fraction = 0.0;
  std::uint64_t graph_seed = 0;
  std::vector<std::pair<int, int>> explicit_edges;

  // Initial conditions: explicit per-node list, or a sampled distribution.
  std::vector<NodeInit> inits;
  InitDistribution dist;

  std::vector<int> private_nodes;
  std::vector<int> curious_nodes;
  bool private_all = false;  // mark every node private (privacy variant)

  int diameter_bound = 0;  // 0 = use the exact diameter
  Variant variant = Variant::alg2;
  std::uint64_t seed = 1;
  i64 cap = 0;             // 0 = default 10 * D * n * (y_init + n)
  int snapshot_stride = 0; // 0 = auto (1 up to n = 200, else 10)
  bool relay_after_flag = false;  // keep relaying max/min after flagging

  // Recording/diagnostic knobs (plumbing, not protocol semantics).
  bool record_events = true;
  bool record_snapshots = true;
  bool record_trajectory = false;
  bool self_check = true;
};

struct Event {
  i64 k = 0;
  std::string kind;  // "token" | "offset" | "term"
  int from = 0, to = 0;
  i64 y = 0, z = 0;
};

struct Snapshot {
  i64 k = 0;
  int node = 0;
  i64 q_s = 0, y_alpha = 0, z_alpha = 0, w_star = 0;
};

struct RunResult {
  bool terminated = false;
  i64 k_end = 0;  // termination round, or last executed round if capped
  std::vector<i64> final_qs;
  std::vector<i64> final_w;
  std::vector<Snapshot> snapshots;
  std::vector<Event> events;
  ExactRatio q;
  std::vector<i64> spread;        // Y[k], index k-1
  i64 last_injection_round = 0;   // 0 if no offsets were injected
  std::vector<i64> pending_clear; // per node: round its offsets finished (0 = none pending ever)
  std::vector<std::vector<std::pair<i64, i64>>> trajectory;  // [k-1][node] = (y_alpha, z_alpha)
  i64 rounds_checked = 0;         // rounds covered by self-checks

  SimConfig config;  // fully resolved (explicit inits, graph params)
  Digraph graph;
};

namespace detail {
inline constexpr std::uint64_t kInitTag = 0xFFFFFFFFFFFFFFF1ULL;
inline constexpr std::uint64_t kDistTag = 0xFFFFFFFFFFFFFFF2ULL;
}  // namespace detail

/// Materializes the graph and per-node inits, fills in derived defaults
/// (diameter, cap, stride, roles).  Does not validate; see validate_config.
inline std::pair<SimConfig, Digraph> resolve_config(const SimConfig& cfg_in) {
  SimConfig cfg = cfg_in;
  Digraph g = cfg.explicit_edges.empty()
                  ? generate_strongly_connected(cfg.n, cfg.extra_edge_fraction,
                                                cfg.graph_seed)
                  : make_digraph(cfg.n, cfg.explicit_edges);
  cfg.n = g.n;
  if (cfg.private_all) {
    cfg.private_nodes.clear();
    for (int j = 0; j < cfg.n; ++j) cfg.private_nodes.push_back(j);
    cfg.private_all = false;
  }
  std::sort(cfg.private_nodes.begin(), cfg.private_nodes.end());
  std::sort(cfg.curious_nodes.begin(), cfg.curious_nodes.end());

  if (cfg.inits.empty() && cfg.dist.enabled) {
    cfg.inits.resize(cfg.n);
    for (int j = 0; j < cfg.n; ++j) {
      RngStream rng = derive_stream(cfg.seed, static_cast<std::uint64_t>(j),
                                    detail::kDistTag);
      const i64 total = rng.uniform_in(cfg.dist.total_min, cfg.dist.total_max);
      const i64 u = rng.uniform_in(0, total);
      i64 lam = rng.uniform_in(cfg.dist.lambda_min, cfg.dist.lambda_max);
      if (lam > total) lam = std::max<i64>(total, 1);
      cfg.inits[j] = NodeInit{total - u, u, lam, Role::neutral};
    }
  }
  // Roles follow the explicit sets.
  for (int j : cfg.private_nodes)
    if (j >= 0 && j < static_cast<int>(cfg.inits.size()))
      cfg.inits[j].role = Role::priv;
  for (int j : cfg.curious_nodes)
    if (j >= 0 && j < static_cast<int>(cfg.inits.size()))
      cfg.inits[j].role = Role::curious;

  if (cfg.diameter_bound <= 0) cfg.diameter_bound = g.diameter;
  if (cfg.snapshot_stride <= 0) cfg.snapshot_stride = cfg.n <= 200 ? 1 : 10;
  if (cfg.cap <= 0 && !cfg.inits.empty()) {
    std::vector<std::pair<i64, i64>> yz;
    for (const NodeInit& in : cfg.inits) yz.emplace_back(in.l + in.u, in.lambda);
    i64 y_init = 0;
    // Skip on configs validation will reject anyway (lambda < 1 somewhere).
    bool demands_ok = true;
    for (const NodeInit& in : cfg.inits) demands_ok = demands_ok && in.lambda >= 1;
    if (demands_ok) y_init = y_init_potential(yz, global_ratio(cfg.inits));
    cfg.cap = 10LL * cfg.diameter_bound * cfg.n * (y_init + cfg.n);
    cfg.cap = std::max<i64>(cfg.cap, 10 * cfg.diameter_bound);
  }
  return {cfg, g};
}

/// Checks every configuration invariant; returns one message per violation
/// (empty = valid).  Expects a resolved config + its graph.
inline std::vector<std::string> validate_config(const SimConfig& cfg,
                                                const Digraph& g) {
  std::vector<std::string> bad;
  if (g.n < 2) bad.push_back("graph: fewer than 2 nodes");
  if (static_cast<int>(cfg.inits.size()) != g.n)
    bad.push_back("nodes: init count " + std::to_string(cfg.inits.size()) +
                  " does not match graph size " + std::to_string(g.n));
  bool any_lambda_gt1 = false;
  for (std::size_t j = 0; j < cfg.inits.size(); ++j) {
    const NodeInit& in = cfg.inits[j];
    if (in.l < 0 || in.u < 0)
      bad.push_back("node " + std::to_string(j) + ": negative resources");
    if (in.lambda < 1)
      bad.push_back("node " + std::to_string(j) +
                    ": lambda < 1 violates the demand assumption (Assumption 3)");
    else if (in.l + in.u < in.lambda)
      bad.push_back("node " + std::to_string(j) +
                    ": l + u < lambda violates the resource assumption (Assumption 3)");
    if (in.lambda > 1) any_lambda_gt1 = true;
  }
  if (!cfg.inits.empty() && !any_lambda_gt1)
    bad.push_back("network: lambda = 1 at every node; no token can ever move");
  std::set<int> priv(cfg.private_nodes.begin(), cfg.private_nodes.end());
  for (int j : cfg.private_nodes) {
    if (j < 0 || j >= g.n) {
      bad.push_back("private node " + std::to_string(j) + " out of range");
      continue;
    }
    if (cfg.variant == Variant::alg2 && j < static_cast<int>(cfg.inits.size()) &&
        cfg.inits[j].lambda < 2)
      bad.push_back("private node " + std::to_string(j) +
                    ": lambda = 1 admits no valid substate split");
  }
  for (int j : cfg.curious_nodes) {
    if (j < 0 || j >= g.n)
      bad.push_back("curious node " + std::to_string(j) + " out of range");
    else if (priv.count(j))
      bad.push_back("node " + std::to_string(j) + " is both private and curious");
  }
  if (cfg.diameter_bound < g.diameter)
    bad.push_back("diameter_bound " + std::to_string(cfg.diameter_bound) +
                  " is below the true diameter " + std::to_string(g.diameter));
  return bad;
}

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::vector<std::string>& msgs)
      : std::runtime_error(join(msgs)), violations(msgs) {}
  std::vector<std::string> violations;

 private:
  static std::string join(const std::vector<std::string>& msgs) {
    std::string s = "invalid configuration:";
    for (const auto& m : msgs) s += "\n  - " + m;
    return s;
  }
};

namespace detail {

inline i64 spread_potential(const std::vector<NodeState>& nodes, i64 qc, i64 qf) {
  i64 y = 0;
  for (const NodeState& st : nodes)
    for (const Token& t : st.recv) {
      if (t.y > qc) y += t.y - qc;
      if (t.y < qf) y += qf - t.y;
    }
  return y;
}

}  // namespace detail

/// Runs one simulation to termination or the iteration cap.
/// Fully deterministic for a fixed config: per-node per-round RNG substreams
/// are derived by hashing (seed, node, round).
inline RunResult run(const SimConfig& cfg_in) {
  auto [cfg, g] = resolve_config(cfg_in);
  if (auto bad = validate_config(cfg, g); !bad.empty()) throw ValidationError(bad);

  const int n = g.n;
  const int D = cfg.diameter_bound;
  const bool privacy = cfg.variant == Variant::alg2;

  RunResult res;
  res.q = global_ratio(cfg.inits);
  res.pending_clear.assign(n, 0);

  std::vector<NodeState> nodes(n);
  std::set<int> priv_set(cfg.private_nodes.begin(), cfg.private_nodes.end());
  for (int j = 0; j < n; ++j) {
    if (privacy) {
      RngStream init_rng =
          derive_stream(cfg.seed, static_cast<std::uint64_t>(j), detail::kInitTag);
      nodes[j] = init_node(cfg.inits[j], g.out_neighbors[j],
                           priv_set.count(j) > 0, init_rng);
    } else {
      nodes[j] = algorithm1_init(cfg.inits[j]);
    }
    nodes[j].node = j;
  }

  // Conservation targets.
  i64 y_total = 0, z_total = 0;
  for (const NodeInit& in : cfg.inits) {
    y_total += in.l + in.u;
    z_total += in.lambda;
  }
  if (privacy) {
    y_total *= 2;
    z_total *= 2;
  }
  const i64 qc = res.q.ceil(), qf = res.q.floor();

  auto self_check = [&](i64 k, bool offsets_done, i64 prev_spread, i64 cur_spread) {
    i64 ya = 0, za = 0;
    for (const NodeState& st : nodes) {
      ya += st.y_alpha + st.y_beta;
      za += st.z_alpha + st.z_beta;
    }
    if (ya != y_total || za != z_total)
      throw std::logic_error("self-check: mass conservation violated at round " +
                             std::to_string(k));
    if (offsets_done && cur_spread > prev_spread)
      throw std::logic_error("self-check: spread potential increased at round " +
                             std::to_string(k));
    for (const NodeState& st : nodes)
      if (st.flag && !st.offsets.pending.empty())
        throw std::logic_error("self-check: node flagged with pending offsets at round " +
                               std::to_string(k));
    ++res.rounds_checked;
  };

  auto snapshot_round = [&](i64 k) {
    if (!cfg.record_snapshots || k % cfg.snapshot_stride != 0) return;
    for (int j = 0; j < n; ++j)
      res.snapshots.push_back({k, j, nodes[j].q_s, nodes[j].y_alpha,
                               nodes[j].z_alpha, nodes[j].flag ? nodes[j].w_star : 0});
  };

  bool all_flagged = false;
  i64 prev_spread = std::numeric_limits<i64>::max();
  bool offsets_done_prev = !privacy || cfg.private_nodes.empty();

  i64 k = 0;
  while (k < cfg.cap && !all_flagged) {
    ++k;

    // Phase 1+2: max/min window reinit, then one exchange hop.
    for (NodeState& st : nodes)
      if (!st.flag) maxmin_reinit(st, k, D);
    std::vector<std::pair<i64, i64>> mm(n);
    for (int j = 0; j < n; ++j) mm[j] = {nodes[j].M, nodes[j].m};
    for (int j = 0; j < n; ++j) {
      if (nodes[j].flag) continue;
      std::vector<std::pair<i64, i64>> nb;
      for (int i : g.in_neighbors[j])
        if (!nodes[i].flag || cfg.relay_after_flag) nb.push_back(mm[i]);
      maxmin_step(nodes[j], k, D, nb);
    }

    // Phase 3: transmit.
    std::vector<std::vector<Delivery>> inbox(n);
    for (int j = 0; j < n; ++j) {
      if (nodes[j].flag) continue;
      RngStream rng = derive_stream(cfg.seed, static_cast<std::uint64_t>(j),
                                    static_cast<std::uint64_t>(k));
      OutboundBatch batch = transmit_round(nodes[j], g.out_neighbors[j], rng, privacy);
      for (const auto& [dest, toks] : batch.tran) {
        const auto sums = batch.sums.at(dest);
        inbox[dest].push_back({toks, sums.first, sums.second});
        if (cfg.record_events)
          for (const Token& t : toks)
            res.events.push_back({k, "token", j, dest, t.y, t.z});
      }
      for (const auto& [dest, xi, zeta] : batch.injected) {
        if (cfg.record_events) res.events.push_back({k, "offset", j, dest, xi, zeta});
        res.last_injection_round = std::max(res.last_injection_round, k);
        if (nodes[j].offsets.pending.empty() && res.pending_clear[j] == 0)
          res.pending_clear[j] = k;
      }
    }

    // Phase 4: aggregate.  Delivery order is deterministic: senders are
    // iterated in ascending node id, so each inbox lists in-neighbors below
    // the receiver, then the receiver's own batch, then the rest.
    for (int j = 0; j < n; ++j) {
      if (nodes[j].flag) continue;
      aggregate_round(nodes[j], inbox[j]);
    }

    if (cfg.record_trajectory) {
      res.trajectory.emplace_back();
      for (const NodeState& st : nodes)
        res.trajectory.back().emplace_back(st.y_alpha, st.z_alpha);
    }
    const i64 spread = detail::spread_potential(nodes, qc, qf);
    res.spread.push_back(spread);

    // Phase 5: termination check at the window boundary.
    if (k % D == 0) {
      bool any = false, all = true;
      for (NodeState& st : nodes) {
        if (st.flag) continue;
        if (st.M - st.m <= 1) {
          apply_termination(st);
          any = true;
          if (cfg.record_events)
            res.events.push_back({k, "term", st.node, st.node, st.q_s, st.w_star});
        } else {
          all = false;
        }
      }
      if (cfg.self_check && any && !all)
        throw std::logic_error(
            "self-check: partial termination inside one window at round " +
            std::to_string(k));
      all_flagged = true;
      for (const NodeState& st : nodes) all_flagged = all_flagged && st.flag;
      if (all_flagged) {
        res.terminated = true;
        res.k_end = k;
      }
    }

    bool offsets_done = true;
    for (const NodeState& st : nodes)
      offsets_done = offsets_done && st.offsets.pending.empty();
    if (cfg.self_check)
      self_check(k, offsets_done_prev, prev_spread, spread);
    prev_spread = spread;
    offsets_done_prev = offsets_done;

    snapshot_round(k);
  }
  if (!res.terminated) res.k_end = k;

  res.final_qs.resize(n);
  res.final_w.resize(n);
  for (int j = 0; j < n; ++j) {
    res.final_qs[j] = nodes[j].q_s;
    res.final_w[j] = nodes[j].w_star;
  }
  res.config = cfg;
  res.graph = std::move(g);
  return res;
}

/// Runs the plain and privacy variants with identical RNG streams on a
/// config with no private nodes, and reports whether the privacy variant's
/// (y_alpha, z_alpha) trajectory equals the plain trajectory doubled,
/// round by round.
inline bool run_pair_equivalence(const SimConfig& cfg_in) {
  SimConfig c1 = cfg_in;
  c1.private_nodes.clear();
  c1.private_all = false;
  c1.variant = Variant::alg1;
  c1.record_trajectory = true;
  c1.record_events = false;
  c1.record_snapshots = false;
  SimConfig c2 = c1;
  c2.variant = Variant::alg2;
  const RunResult r1 = run(c1);
  const RunResult r2 = run(c2);
  if (r1.k_end != r2.k_end || r1.terminated != r2.terminated) return false;
  if (r1.trajectory.size() != r2.trajectory.size()) return false;
  for (std::size_t k = 0; k < r1.trajectory.size(); ++k)
    for (std::size_t j = 0; j < r1.trajectory[k].size(); ++j) {
      if (2 * r1.trajectory[k][j].first != r2.trajectory[k][j].first) return false;
      if (2 * r1.trajectory[k][j].second != r2.trajectory[k][j].second) return false;
    }
  for (std::size_t j = 0; j < r1.final_qs.size(); ++j)
    if (r1.final_qs[j] != r2.final_qs[j]) return false;
  return true;
}

}  // namespace qac

#endif  // QAC_ENGINE_HPP
