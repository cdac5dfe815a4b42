#ifndef QAC_ANALYSIS_HPP
#define QAC_ANALYSIS_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "qac/digraph.hpp"
#include "qac/protocol.hpp"

namespace qac {

/// Exact reduced fraction; the ground-truth global ratio of resources to
/// demand lives here.
struct ExactRatio {
  i64 num = 0;
  i64 den = 1;

  ExactRatio() = default;
  ExactRatio(i64 n, i64 d) : num(n), den(d) {
    if (den <= 0) throw std::invalid_argument("ExactRatio: denominator <= 0");
    const i64 g = std::gcd(num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }
  i64 ceil() const { return ceil_div(num, den); }
  i64 floor() const { return floor_div(num, den); }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const ExactRatio&) const = default;
};

/// q = (sum of l + u) / (sum of lambda), exact and reduced.
inline ExactRatio global_ratio(const std::vector<NodeInit>& inits) {
  if (inits.empty()) throw std::invalid_argument("global_ratio: empty node list");
  i64 num = 0, den = 0;
  for (const NodeInit& in : inits) {
    num += in.l + in.u;
    den += in.lambda;
  }
  if (den < 1) throw std::invalid_argument("global_ratio: total demand < 1");
  return ExactRatio(num, den);
}

/// Closed-form weighted mean: sum(alpha_i * chi_i) / sum(alpha_i).
inline double closed_form_weighted_mean(const std::vector<double>& alpha,
                                        const std::vector<double>& chi) {
  if (alpha.empty() || alpha.size() != chi.size())
    throw std::invalid_argument("closed_form_weighted_mean: bad input sizes");
  double num = 0, den = 0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (alpha[i] <= 0)
      throw std::invalid_argument("closed_form_weighted_mean: non-positive weight");
    num += alpha[i] * chi[i];
    den += alpha[i];
  }
  return num / den;
}

/// Initial spread potential over per-node ratios:
///   sum over nodes with ceil(y/z) > ceil(q) of (ceil(y/z) - ceil(q))
/// + sum over nodes with floor(y/z) < floor(q) of (floor(q) - floor(y/z)).
inline i64 y_init_potential(const std::vector<std::pair<i64, i64>>& yz,
                            const ExactRatio& q) {
  const i64 qc = q.ceil(), qf = q.floor();
  i64 total = 0;
  for (const auto& [y, z] : yz) {
    if (z < 1) throw std::invalid_argument("y_init_potential: z < 1");
    const i64 c = ceil_div(y, z), f = floor_div(y, z);
    if (c > qc) total += c - qc;
    if (f < qf) total += qf - f;
  }
  return total;
}

/// Number of windows of the given length after which a token has visited a
/// fixed node with probability at least 1 - eps:
///   ceil( log(eps) / log(1 - (1 + d_max)^(-window)) ), clamped to >= 1,
/// with an integer guard against floating-point boundary error.
inline i64 tau_window(double eps, i64 d_max, i64 window) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("tau: eps outside (0,1)");
  if (d_max < 1) throw std::invalid_argument("tau: d_max < 1");
  if (window < 1) throw std::invalid_argument("tau: window < 1");
  const long double le = std::log(static_cast<long double>(eps));
  // p = (1 + d_max)^(-window), computed in log space to survive large windows
  const long double logp =
      -static_cast<long double>(window) * std::log1p(static_cast<long double>(d_max));
  const long double p = std::exp(logp);
  const long double ld = std::log1p(-p);  // log(1 - p) < 0
  if (!(ld < 0.0L)) return std::numeric_limits<i64>::max();  // p underflowed
  long double x = le / ld;
  if (x >= static_cast<long double>(std::numeric_limits<i64>::max() / 4))
    return std::numeric_limits<i64>::max() / 4;
  i64 t = static_cast<i64>(std::ceil(static_cast<double>(x)));
  // Smallest integer t >= 1 with t * log(1-p) <= log(eps).
  while (t > 1 && static_cast<long double>(t - 1) * ld <= le) --t;
  while (static_cast<long double>(t) * ld > le) ++t;
  return std::max<i64>(t, 1);
}

/// Canonical variant: windows of n - 1 rounds.
inline i64 tau(double eps, i64 d_max, i64 n) {
  if (n < 2) throw std::invalid_argument("tau: n < 2");
  return tau_window(eps, d_max, n - 1);
}

/// Alternative variant with (D + 1)-round windows, exposed for comparison.
inline i64 tau_alt(double eps, i64 d_max, i64 D) { return tau_window(eps, d_max, D + 1); }

/// Theoretical convergence/termination bounds.  Reporting values only; they
/// are never used as correctness gates.
struct BoundReport {
  double eps1 = 0, eps2 = 0;
  i64 tau1 = 0, tau2 = 0;
  i64 d_max = 0;
  i64 y_init = 0;
  i64 k0 = 0;             // saturated at int64/4 when the formula explodes
  i64 k0_prime = 0;
  i64 k0_double_prime = 0;
  double probability = 0; // overall lower bound, clamped into (0, 1]
  double privacy_product = 1.0;
};

inline i64 sat_from(long double x) {
  const long double cap = static_cast<long double>(std::numeric_limits<i64>::max() / 4);
  if (x >= cap) return std::numeric_limits<i64>::max() / 4;
  return static_cast<i64>(x);
}

/// k0  = ceil(tau2 * (n-1) * (y_init + n) / D) * D + D
/// k0' = max(|S| * (tau1 * (n-1) + 1), 1) with
///       S = private nodes whose initial circulating token count can be at
///       most their out-degree (2*lambda_j <= d_j+ is used as the
///       deterministic proxy for the randomized split).
/// probability >= (1-eps2)^(y_init+n) * prod over private j of
///       (1-eps1)^(d_j+) * (1+d_j+)^(-d_j+).
inline BoundReport convergence_bound(double eps1, double eps2, const Digraph& g,
                                     const std::vector<NodeInit>& inits,
                                     const std::vector<int>& private_nodes) {
  if (static_cast<int>(inits.size()) != g.n)
    throw std::invalid_argument("convergence_bound: inits size != n");
  BoundReport r;
  r.eps1 = eps1;
  r.eps2 = eps2;
  for (int j = 0; j < g.n; ++j)
    r.d_max = std::max<i64>(r.d_max, static_cast<i64>(g.out_neighbors[j].size()));
  r.tau1 = tau(eps1, r.d_max, g.n);
  r.tau2 = tau(eps2, r.d_max, g.n);
  std::vector<std::pair<i64, i64>> yz;
  yz.reserve(inits.size());
  for (const NodeInit& in : inits) yz.emplace_back(in.l + in.u, in.lambda);
  const ExactRatio q = global_ratio(inits);
  r.y_init = y_init_potential(yz, q);

  const long double n = g.n, D = g.diameter;
  const long double k0raw =
      std::ceil(static_cast<long double>(r.tau2) * (n - 1) *
                (static_cast<long double>(r.y_init) + n) / D) * D + D;
  r.k0 = sat_from(k0raw);

  i64 s_count = 0;
  long double log_prod = 0.0L;
  for (int j : private_nodes) {
    const i64 dj = static_cast<i64>(g.out_neighbors[j].size());
    if (2 * inits[j].lambda <= dj) ++s_count;
    log_prod += static_cast<long double>(dj) * std::log1p(-static_cast<long double>(eps1));
    log_prod -= static_cast<long double>(dj) * std::log1p(static_cast<long double>(dj));
  }
  const long double k0p = std::max<long double>(
      static_cast<long double>(s_count) *
          (static_cast<long double>(r.tau1) * (n - 1) + 1),
      1.0L);
  r.k0_prime = sat_from(k0p);
  r.k0_double_prime = sat_from(k0raw + k0p);

  r.privacy_product = static_cast<double>(std::exp(log_prod));
  const long double log_total =
      (static_cast<long double>(r.y_init) + n) *
          std::log1p(-static_cast<long double>(eps2)) + log_prod;
  long double prob = std::exp(log_total);
  // Clamp into the positive double range; the bound is a lower bound, so
  // rounding an underflowed value up to the smallest double is conservative
  // only in the representation, not in the claim.
  if (!(prob >= static_cast<long double>(std::numeric_limits<double>::min())))
    prob = std::numeric_limits<double>::min();
  if (prob > 1.0L) prob = 1.0L;
  r.probability = static_cast<double>(prob);
  return r;
}

}  // namespace qac

#endif  // QAC_ANALYSIS_HPP
