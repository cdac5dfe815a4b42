#ifndef QAC_PROTOCOL_HPP
#define QAC_PROTOCOL_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "qac/rng.hpp"

namespace qac {

using i64 = std::int64_t;

inline i64 ceil_div(i64 a, i64 b) { return (a + b - 1) / b; }
inline i64 floor_div(i64 a, i64 b) { return a / b; }

/// The unit of transmitted mass: numerator y, denominator z.
/// Freshly partitioned tokens have z = 1; an injected offset can raise z.
struct Token {
  i64 y = 0;
  i64 z = 1;
  bool operator==(const Token&) const = default;
};

enum class Role { neutral, priv, curious };

/// One node's configured initial condition.
struct NodeInit {
  i64 l = 0;       // stored resources
  i64 u = 0;       // received resources
  i64 lambda = 1;  // local demand
  Role role = Role::neutral;
};

/// A private node's per-out-neighbor offsets and the set of out-neighbors
/// not yet served their first token.
struct OffsetPlan {
  std::map<int, std::pair<i64, i64>> offsets;  // dest -> (xi, zeta)
  std::set<int> pending;
};

/// Full per-node protocol state.
struct NodeState {
  int node = 0;
  bool is_private = false;

  i64 y_alpha = 0, z_alpha = 0;  // circulating mass
  i64 y_beta = 0, z_beta = 0;    // offset reservoir not yet injected
  i64 y_s = 0, z_s = 1, q_s = 0; // state variables, q_s = ceil(y_s / z_s)

  std::vector<Token> recv;       // current token multiset (insertion order)
  OffsetPlan offsets;

  i64 M = 0, m = 0;              // max/min consensus candidates
  bool flag = false;             // terminated
  i64 w_star = 0;                // final allocation once flagged

  i64 lambda = 1, u = 0;         // retained for w* = q_s * lambda - u
};

/// Splits mass (y, z) into exactly z unit tokens: R = y mod z tokens of
/// ceil(y/z) followed by z - R tokens of floor(y/z).
inline std::vector<Token> partition_into_tokens(i64 y, i64 z) {
  if (z == 0) throw std::domain_error("partition_into_tokens: z = 0");
  if (z < 0 || y < 0) throw std::domain_error("partition_into_tokens: negative input");
  const i64 q = y / z, r = y % z;
  std::vector<Token> out;
  out.reserve(static_cast<std::size_t>(z));
  for (i64 i = 0; i < r; ++i) out.push_back({q + 1, 1});
  for (i64 i = r; i < z; ++i) out.push_back({q, 1});
  return out;
}

inline void refresh_state_variables(NodeState& st) {
  if (st.z_alpha >= 1) {
    st.y_s = st.y_alpha;
    st.z_s = st.z_alpha;
    st.q_s = ceil_div(st.y_alpha, st.z_alpha);
  }
}

/// Plain (non-private) initialization: y = l + u, z = lambda, no doubling,
/// no offsets.  Shares transmit/aggregate/maxmin with privacy disabled.
inline NodeState algorithm1_init(const NodeInit& init) {
  NodeState st;
  st.y_alpha = init.l + init.u;
  st.z_alpha = init.lambda;
  st.lambda = init.lambda;
  st.u = init.u;
  st.recv = partition_into_tokens(st.y_alpha, st.z_alpha);
  refresh_state_variables(st);
  return st;
}

/// Privacy-variant initialization.  Non-private nodes double their state
/// (y = 2(l+u), z = 2*lambda).  Private nodes split the doubled state into a
/// circulating part (alpha) and an offset reservoir (beta) with
/// y_alpha != y_beta, z_alpha != z_beta, y_alpha >= z_alpha >= 1 and
/// y_beta >= z_beta, then partition the reservoir into per-out-neighbor
/// offsets with xi >= zeta >= 0 edge-wise.
inline NodeState init_node(const NodeInit& init,
                           const std::vector<int>& out_neighbors, bool privacy,
                           RngStream& rng) {
  if (out_neighbors.empty())
    throw std::invalid_argument("init_node: node has no out-neighbors");
  NodeState st;
  st.lambda = init.lambda;
  st.u = init.u;
  const i64 y2 = 2 * (init.l + init.u);
  const i64 z2 = 2 * init.lambda;
  if (!privacy) {
    st.y_alpha = y2;
    st.z_alpha = z2;
    st.recv = partition_into_tokens(st.y_alpha, st.z_alpha);
    refresh_state_variables(st);
    return st;
  }
  st.is_private = true;
  // Sample z_alpha uniform in [1, 2*lambda - 1], then y_alpha uniform in
  // [z_alpha, 2(l+u) - 1]; reject splits violating the inequality or
  // distinctness constraints; bounded number of attempts.
  bool found = false;
  for (int attempt = 0; attempt < 1000 && !found; ++attempt) {
    const i64 za = rng.uniform_in(1, z2 - 1);
    if (za == init.lambda) continue;                // z_alpha == z_beta
    const i64 ya = rng.uniform_in(za, y2 - 1);
    if (ya == init.l + init.u) continue;            // y_alpha == y_beta
    const i64 yb = y2 - ya, zb = z2 - za;
    if (ya < za || yb < zb) continue;               // substate inequalities
    st.y_alpha = ya;
    st.z_alpha = za;
    st.y_beta = yb;
    st.z_beta = zb;
    found = true;
  }
  if (!found)
    throw std::runtime_error("init_node: no valid private split for node (l+u=" +
                             std::to_string(init.l + init.u) +
                             ", lambda=" + std::to_string(init.lambda) + ")");
  // Offset partition: balanced integer split of z_beta (zeta), then spread
  // y_beta - z_beta on top so every edge keeps xi >= zeta.
  const int d = static_cast<int>(out_neighbors.size());
  const i64 extra = st.y_beta - st.z_beta;
  for (int idx = 0; idx < d; ++idx) {
    const i64 zeta = st.z_beta / d + (idx < st.z_beta % d ? 1 : 0);
    const i64 xi = zeta + extra / d + (idx < extra % d ? 1 : 0);
    st.offsets.offsets[out_neighbors[idx]] = {xi, zeta};
    st.offsets.pending.insert(out_neighbors[idx]);
  }
  st.recv = partition_into_tokens(st.y_alpha, st.z_alpha);
  refresh_state_variables(st);
  return st;
}

/// Tokens grouped per destination for one round, plus declared sums and the
/// offset injections that happened while building the batch.
struct OutboundBatch {
  std::map<int, std::vector<Token>> tran;          // dest -> token list
  std::map<int, std::pair<i64, i64>> sums;         // dest -> (c_y, c_z)
  std::vector<std::tuple<int, i64, i64>> injected; // (dest, xi, zeta)
};

/// One transmit phase for a node.
///
/// Event trigger: with z_alpha <= 1 the whole multiset goes to self and no
/// network message is sent.  Otherwise the maximal-y token (stable tie-break:
/// first inserted) is kept for self and the rest are routed uniformly over
/// out-neighbors plus self.
///
/// Routing granularity: without privacy every remaining token gets its own
/// uniform draw.  With privacy, a node whose offsets are still pending
/// forwards its received tokens verbatim one-per-draw (adding the offset to
/// the first token routed to each pending out-neighbor); once all offsets are
/// out (and for never-private nodes), tokens are routed in consecutive pairs
/// of the descending order, one draw per pair.  Pair granularity makes a
/// privacy-variant run with no private nodes reproduce, draw for draw, the
/// plain run on doubled masses.
inline OutboundBatch transmit_round(NodeState& st,
                                    const std::vector<int>& out_neighbors,
                                    RngStream& rng, bool privacy_enabled) {
  OutboundBatch batch;
  const int self = st.node;
  refresh_state_variables(st);

  auto push = [&batch](int dest, const Token& t) {
    batch.tran[dest].push_back(t);
    auto& s = batch.sums[dest];
    s.first += t.y;
    s.second += t.z;
  };

  if (st.z_alpha <= 1) {
    for (const Token& t : st.recv) push(self, t);
    if (batch.tran.empty()) batch.sums[self] = {0, 0}, batch.tran[self] = {};
    return batch;
  }

  std::vector<Token> toks = st.recv;
  std::stable_sort(toks.begin(), toks.end(),
                   [](const Token& a, const Token& b) { return a.y > b.y; });
  push(self, toks[0]);  // kept token: maximal y, first-inserted tie-break

  const int d = static_cast<int>(out_neighbors.size());
  auto draw_dest = [&]() {
    const std::uint64_t r = rng.uniform(static_cast<std::uint64_t>(d) + 1);
    return r == static_cast<std::uint64_t>(d) ? self
                                              : out_neighbors[static_cast<int>(r)];
  };

  const bool privacy_phase =
      privacy_enabled && st.is_private && !st.offsets.pending.empty();
  std::size_t i = 1;
  if (!privacy_enabled || privacy_phase) {
    // One draw per token.
    for (; i < toks.size(); ++i) {
      const int dest = draw_dest();
      Token t = toks[i];
      if (privacy_phase && dest != self && st.offsets.pending.count(dest)) {
        const auto [xi, zeta] = st.offsets.offsets[dest];
        t.y += xi;
        t.z += zeta;
        st.offsets.pending.erase(dest);
        st.y_beta -= xi;
        st.z_beta -= zeta;
        batch.injected.emplace_back(dest, xi, zeta);
      }
      push(dest, t);
    }
  } else {
    // Pair routing; an odd remainder leaves one extra maximal token at self.
    if ((toks.size() - 1) % 2 == 1) push(self, toks[i++]);
    for (; i + 1 < toks.size(); i += 2) {
      const int dest = draw_dest();
      push(dest, toks[i]);
      push(dest, toks[i + 1]);
    }
  }
  return batch;
}

/// One inbound delivery: the token list addressed to a node plus the sums the
/// sender declared for it.
struct Delivery {
  std::vector<Token> tokens;
  i64 c_y = 0, c_z = 0;
};

/// Aggregation phase: sums inbound mass; while the node's own offsets are
/// pending, token identity is preserved (no re-partition); otherwise the
/// aggregated mass is re-partitioned into fresh ceiling/floor tokens.
inline void aggregate_round(NodeState& st, const std::vector<Delivery>& inbound) {
  i64 y = 0, z = 0;
  for (const Delivery& d : inbound) {
    i64 sy = 0, sz = 0;
    for (const Token& t : d.tokens) {
      sy += t.y;
      sz += t.z;
    }
    if (sy != d.c_y || sz != d.c_z)
      throw std::runtime_error("aggregate_round: declared sums do not match tokens");
    y += d.c_y;
    z += d.c_z;
  }
  st.y_alpha = y;
  st.z_alpha = z;
  if (!st.offsets.pending.empty()) {
    st.recv.clear();
    for (const Delivery& d : inbound)
      st.recv.insert(st.recv.end(), d.tokens.begin(), d.tokens.end());
  } else {
    st.recv = partition_into_tokens(y, z);
  }
}

/// Window reinitialization of the max/min consensus values at k == 1 (mod D):
/// M and m restart from the node's current token numerators; a private node
/// with pending offsets inflates M by 2 so no window can terminate yet.
inline void maxmin_reinit(NodeState& st, i64 k, int D) {
  if ((k - 1) % D != 0) return;
  i64 M = st.recv.empty() ? st.q_s : st.recv[0].y;
  i64 m = M;
  for (const Token& t : st.recv) {
    M = std::max(M, t.y);
    m = std::min(m, t.y);
  }
  if (st.is_private && !st.offsets.pending.empty()) M += 2;
  st.M = M;
  st.m = m;
}

/// One max/min exchange step.  Returns whether the stopping test
/// (window boundary and M - m <= 1) holds after the merge; the caller decides
/// when to act on it (the engine flags nodes after the aggregation phase).
inline bool maxmin_step(NodeState& st, i64 k, int D,
                        const std::vector<std::pair<i64, i64>>& neighbor_M_m) {
  maxmin_reinit(st, k, D);  // idempotent within a round
  for (const auto& [M, m] : neighbor_M_m) {
    st.M = std::max(st.M, M);
    st.m = std::min(st.m, m);
  }
  return k % D == 0 && st.M - st.m <= 1;
}

/// Applies the stopping decision: sets the flag and the final allocation
/// w* = q_s * lambda - u.
inline void apply_termination(NodeState& st) {
  st.flag = true;
  st.w_star = st.q_s * st.lambda - st.u;
}

}  // namespace qac

#endif  // QAC_PROTOCOL_HPP
