#ifndef QAC_ADVERSARY_HPP
#define QAC_ADVERSARY_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "qac/engine.hpp"

namespace qac {

/// What a fully curious neighborhood of one target node can write down:
/// the first transmitted numerator at two observation rounds and the
/// cumulative in/out flows between them.  Assembled from the event log only;
/// never touches target-internal state.
struct Transcript {
  int target = -1;
  i64 k0 = 0;               // first observed transmit round
  i64 k = 0;                // second observation round
  i64 y_out0 = 0, y_outk = 0;
  i64 Y_in = 0, Y_out = 0;  // cumulative over rounds 1 .. k-1
  i64 Z_in = 0, Z_out = 0;
  bool approximate = false; // observation violates the integral-ratio premise
};

struct InferenceResult {
  bool indeterminate = false;
  bool approximate = false;
  i64 det = 0;
  i64 y0 = 0, z0 = 0;
};

namespace detail {

/// Network token events (from != to) touching `target`, grouped per round.
struct TargetFlows {
  // round -> list of outbound token (y, z)
  std::map<i64, std::vector<std::pair<i64, i64>>> out;
  std::map<i64, std::vector<std::pair<i64, i64>>> in;
};

inline TargetFlows collect_flows(const RunResult& res, int target) {
  TargetFlows f;
  for (const Event& e : res.events) {
    if (e.kind != "token" || e.from == e.to) continue;
    if (e.from == target) f.out[e.k].emplace_back(e.y, e.z);
    if (e.to == target) f.in[e.k].emplace_back(e.y, e.z);
  }
  return f;
}

/// Sums flows over rounds [lo, hi] inclusive.
inline void sum_flows(const std::map<i64, std::vector<std::pair<i64, i64>>>& m,
                      i64 lo, i64 hi, i64& y, i64& z) {
  y = 0;
  z = 0;
  for (auto it = m.lower_bound(lo); it != m.end() && it->first <= hi; ++it)
    for (const auto& [ty, tz] : it->second) {
      y += ty;
      z += tz;
    }
}

/// True when all tokens sent by the target in this round carry one numerator.
inline bool uniform_round(const std::vector<std::pair<i64, i64>>& toks) {
  for (const auto& [y, z] : toks)
    if (y != toks.front().first) return false;
  return !toks.empty();
}

}  // namespace detail

/// Builds the observation transcript for `target` at round `k` from a run
/// whose event log is available.  Requires the target's entire in/out
/// neighborhood to be curious; otherwise the coalition could not have seen
/// every flow.
inline Transcript capture_transcript(const RunResult& res, int target, i64 k) {
  if (target < 0 || target >= res.graph.n)
    throw std::invalid_argument("capture_transcript: bad target");
  if (k < 1) throw std::invalid_argument("capture_transcript: k < 1");
  std::set<int> curious(res.config.curious_nodes.begin(),
                        res.config.curious_nodes.end());
  for (int i : res.graph.in_neighbors[target])
    if (!curious.count(i))
      throw std::runtime_error("capture_transcript: in-neighbor " +
                               std::to_string(i) + " is not curious");
  for (int i : res.graph.out_neighbors[target])
    if (!curious.count(i))
      throw std::runtime_error("capture_transcript: out-neighbor " +
                               std::to_string(i) + " is not curious");
  const detail::TargetFlows f = detail::collect_flows(res, target);
  if (f.out.empty() || f.out.begin()->first > k)
    throw std::runtime_error(
        "capture_transcript: target transmitted nothing up to round " +
        std::to_string(k));
  if (!f.out.count(k))
    throw std::runtime_error("capture_transcript: target sent nothing at round " +
                             std::to_string(k));
  Transcript t;
  t.target = target;
  t.k0 = f.out.begin()->first;
  t.k = k;
  t.y_out0 = f.out.begin()->second.front().first;
  t.y_outk = f.out.at(k).front().first;
  detail::sum_flows(f.in, 1, k - 1, t.Y_in, t.Z_in);
  detail::sum_flows(f.out, 1, k - 1, t.Y_out, t.Z_out);
  // Premise checks observable from the outside: numerators within an
  // observation round must agree, and the target's mass at its first
  // transmission must still be the initial mass.
  t.approximate = !detail::uniform_round(f.out.begin()->second) ||
                  !detail::uniform_round(f.out.at(k));
  i64 py, pz, qy, qz;
  detail::sum_flows(f.in, 1, t.k0 - 1, py, pz);
  detail::sum_flows(f.out, 1, t.k0 - 1, qy, qz);
  if (py != 0 || qy != 0) t.approximate = true;
  return t;
}

/// Solves the four-equation integer system
///   y0 - yk = Y_out - Y_in,  z0 - zk = Z_out - Z_in,
///   y0 = y_out[0] * z0,      yk = y_out[k] * zk
/// whose determinant is y_out[0] - y_out[k]; a vanishing determinant makes
/// the initial state unrecoverable.
inline InferenceResult infer_initial_state(const Transcript& t) {
  InferenceResult r;
  r.approximate = t.approximate;
  const i64 a = t.y_out0, b = t.y_outk;
  r.det = a - b;
  if (r.det == 0) {
    r.indeterminate = true;
    return r;
  }
  const i64 dy = t.Y_out - t.Y_in;
  const i64 dz = t.Z_out - t.Z_in;
  const i64 num = dy - b * dz;
  if (num % r.det != 0) r.approximate = true;
  r.z0 = num / r.det;
  r.y0 = a * r.z0;
  return r;
}

/// Harness-side helper: picks an observation round for the inference attack
/// such that its integral-ratio premise holds.  Uses the run's ground-truth
/// snapshots to decide WHEN to observe (the attacker in the narrative simply
/// got lucky); the inference itself still sees only the transcript.
/// Requires snapshot stride 1.  Returns 0 when no usable round exists.
inline i64 choose_attack_round(const RunResult& res, int target,
                               bool want_distinct_numerator = true) {
  const detail::TargetFlows f = detail::collect_flows(res, target);
  if (f.out.empty()) return 0;
  const i64 k0 = f.out.begin()->first;
  const i64 a = f.out.begin()->second.front().first;
  // Pre-transmit mass at round k is the post-aggregate snapshot of round k-1.
  std::map<i64, std::pair<i64, i64>> mass;  // k -> (y, z) before transmitting at k
  for (const Snapshot& s : res.snapshots)
    if (s.node == target) mass[s.k + 1] = {s.y_alpha, s.z_alpha};
  for (const auto& [k, toks] : f.out) {
    if (k <= k0) continue;
    auto it = mass.find(k);
    if (it == mass.end()) continue;
    const auto [y, z] = it->second;
    if (z < 1 || y % z != 0) continue;
    const i64 num = y / z;
    if (want_distinct_numerator ? num != a : num == a) return k;
  }
  return 0;
}

namespace detail {

/// Whether a private node with initial state (y0, z0) admits any valid
/// substate split: z_alpha in [1, 2*z0-1] distinct from z0, y_alpha in
/// [z_alpha, 2*y0-1] distinct from y0, with y_beta >= z_beta.  Reduces to
/// z0 >= 2 and y0 >= z0 (pick z_alpha = 2*z0-1, y_alpha = 2*y0-1).
inline bool split_feasible(i64 y0, i64 z0) { return z0 >= 2 && y0 >= z0; }

}  // namespace detail

/// Attempts the exact reconstruction of a privacy-variant target's initial
/// state from the curious coalition's transcript.  Succeeds only when the
/// whole neighborhood is curious, the target's offsets were all injected
/// before any usable observation round, and two post-offset rounds with
/// uniform, distinct outbound numerators and an integral mass ratio exist:
/// those rounds pin the circulating mass via the linear-system attack, and
/// rolling the wire log back to round 1 (every unit the target ever emitted,
/// offsets included, is on the log) pins 2*y0 and 2*z0 exactly.
///
/// As with choose_attack_round, the run's ground-truth snapshots decide WHEN
/// to observe (uniform outbound numerators are necessary but not sufficient
/// for the integral-ratio premise; an attacker picking blind rounds would
/// sometimes solve a premise-violating system and pin a wrong state).  The
/// inference itself still sees only the transcript.  Requires snapshot
/// stride 1; returns nullopt when no premise-satisfying rounds exist.
inline std::optional<std::pair<i64, i64>> privacy_exact_candidate(
    const RunResult& res, int target) {
  if (res.config.variant != Variant::alg2)
    throw std::invalid_argument("privacy_exact_candidate: not a privacy-variant run");
  std::set<int> curious(res.config.curious_nodes.begin(),
                        res.config.curious_nodes.end());
  for (int i : res.graph.in_neighbors[target])
    if (!curious.count(i)) return std::nullopt;
  for (int i : res.graph.out_neighbors[target])
    if (!curious.count(i)) return std::nullopt;

  const detail::TargetFlows f = detail::collect_flows(res, target);

  // Offsets must all be out before the mass attack applies.
  const i64 clear = res.pending_clear[target];
  if (clear == 0 && !res.graph.out_neighbors[target].empty()) return std::nullopt;

  // Pre-transmit mass at round k is the post-aggregate snapshot of round k-1.
  std::map<i64, std::pair<i64, i64>> mass;
  for (const Snapshot& s : res.snapshots)
    if (s.node == target) mass[s.k + 1] = {s.y_alpha, s.z_alpha};
  auto premise_holds = [&](i64 round, i64 numerator) {
    auto it = mass.find(round);
    if (it == mass.end()) return false;
    const auto [y, z] = it->second;
    return z >= 1 && y % z == 0 && y / z == numerator;
  };

  // Find two post-offset rounds with uniform, distinct outbound numerators
  // at which the integral-ratio premise genuinely holds.
  i64 r1 = 0, a = 0;
  for (const auto& [round, toks] : f.out)
    if (round > clear && detail::uniform_round(toks) &&
        premise_holds(round, toks.front().first)) {
      r1 = round;
      a = toks.front().first;
      break;
    }
  if (r1 == 0) return std::nullopt;
  i64 r2 = 0, b = 0;
  for (const auto& [round, toks] : f.out)
    if (round > r1 && detail::uniform_round(toks) && toks.front().first != a &&
        premise_holds(round, toks.front().first)) {
      r2 = round;
      b = toks.front().first;
      break;
    }
  if (r2 == 0) return std::nullopt;

  i64 Yin, Zin, Yout, Zout;
  detail::sum_flows(f.in, r1, r2 - 1, Yin, Zin);
  detail::sum_flows(f.out, r1, r2 - 1, Yout, Zout);
  const i64 det = a - b;
  const i64 num = (Yout - Yin) - b * (Zout - Zin);
  if (num % det != 0) return std::nullopt;
  const i64 z_r1 = num / det;
  if (z_r1 < 1) return std::nullopt;
  const i64 y_r1 = a * z_r1;

  // Roll the books back to round 1: every unit the target ever emitted —
  // including injected offsets — is on the wire log, so
  //   2*y0 = y_alpha[r1] - In(1..r1-1) + Out(1..r1-1)   (same for z).
  detail::sum_flows(f.in, 1, r1 - 1, Yin, Zin);
  detail::sum_flows(f.out, 1, r1 - 1, Yout, Zout);
  const i64 y2 = y_r1 - Yin + Yout;
  const i64 z2 = z_r1 - Zin + Zout;
  if (y2 <= 0 || z2 <= 0 || y2 % 2 != 0 || z2 % 2 != 0) return std::nullopt;
  return std::make_pair(y2 / 2, z2 / 2);
}

/// Counts initial states (y0, z0) in [1, bound]^2 consistent with everything
/// the curious coalition observed.  Privacy is preserved iff the count is at
/// least 2.
///
/// Plain-variant runs: candidates must satisfy the same linear system the
/// inference attack solves (independent enumeration of that system).
///
/// Privacy-variant runs: when any token crossed an edge between the target
/// and a non-curious node (the coalition's books cannot balance) the
/// coalition learns nothing beyond the standing assumptions, and every
/// split-feasible candidate remains consistent — a conservative superset.
/// When the whole neighborhood is curious and every flow is attributable,
/// the coalition reconstructs the target's circulating mass after the offset
/// phase via the linear-system attack and rolls the books back to round 1,
/// where incoming + outgoing flows pin 2*y0 and 2*z0 exactly.
inline i64 privacy_feasible_set(const RunResult& res, int target, i64 bound) {
  if (target < 0 || target >= res.graph.n)
    throw std::invalid_argument("privacy_feasible_set: bad target");
  if (bound < 1) throw std::invalid_argument("privacy_feasible_set: bound < 1");
  const NodeInit& truth = res.config.inits[target];
  if (truth.l + truth.u > bound || truth.lambda > bound)
    throw std::runtime_error(
        "privacy_feasible_set: bound too small to contain the true state");

  const detail::TargetFlows f = detail::collect_flows(res, target);

  if (res.config.variant == Variant::alg1) {
    // Enumerate the attack's own system at the same observation round the
    // attack would use, so the two stay comparable.
    if (f.out.empty()) return bound * bound;  // nothing observed
    i64 k = choose_attack_round(res, target);
    if (k == 0) {
      auto it = f.out.upper_bound(f.out.begin()->first);
      if (it == f.out.end()) return bound * bound;
      k = it->first;
    }
    const Transcript t = capture_transcript(res, target, k);
    const i64 a = t.y_out0, b = t.y_outk;
    const i64 dy = t.Y_out - t.Y_in, dz = t.Z_out - t.Z_in;
    i64 count = 0;
    for (i64 z0 = 1; z0 <= bound; ++z0) {
      const i64 y0 = a * z0;
      if (y0 < 1 || y0 > bound) continue;
      if ((a - b) * z0 == dy - b * dz) ++count;
    }
    return count;
  }

  // Privacy variant.
  std::set<int> priv(res.config.private_nodes.begin(), res.config.private_nodes.end());
  if (!priv.count(target))
    throw std::invalid_argument("privacy_feasible_set: target is not private");

  const auto pinned = privacy_exact_candidate(res, target);
  if (!pinned) {
    // All split-feasible candidates: z0 in [2, bound], y0 in [z0, bound].
    return bound * (bound - 1) / 2;
  }
  const auto [y0, z0] = *pinned;
  if (y0 > bound || z0 > bound) return 0;
  return detail::split_feasible(y0, z0) ? 1 : 0;
}

}  // namespace qac

#endif  // QAC_ADVERSARY_HPP
