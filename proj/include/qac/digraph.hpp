#ifndef QAC_DIGRAPH_HPP
#define QAC_DIGRAPH_HPP

#include <algorithm>
#include <cstdint>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qac/rng.hpp"

namespace qac {

/// Directed graph over dense node ids 0..n-1.  Edge (j, l) means node j can
/// transmit to node l.  Self-edges are never stored: the protocol's virtual
/// self-edge is handled in the protocol layer.  Immutable after construction.
struct Digraph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;           // sorted, unique
  std::vector<std::vector<int>> out_neighbors;      // ascending per node
  std::vector<std::vector<int>> in_neighbors;       // ascending per node
  int diameter = 0;                                 // exact, all-pairs BFS
};

inline int compute_diameter(const Digraph& g);

/// Builds neighbor maps and the exact diameter from an edge list.
/// Throws if the graph is not strongly connected.
inline Digraph make_digraph(int n, std::vector<std::pair<int, int>> edges) {
  if (n < 2) throw std::invalid_argument("digraph: n must be >= 2");
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  Digraph g;
  g.n = n;
  g.out_neighbors.assign(n, {});
  g.in_neighbors.assign(n, {});
  for (auto [a, b] : edges) {
    if (a < 0 || a >= n || b < 0 || b >= n)
      throw std::invalid_argument("digraph: edge endpoint out of range");
    if (a == b) continue;  // self-edges are implicit, never stored
    g.edges.emplace_back(a, b);
    g.out_neighbors[a].push_back(b);
    g.in_neighbors[b].push_back(a);
  }
  g.diameter = compute_diameter(g);  // throws on unreachable pairs
  return g;
}

/// Exact diameter by BFS from every node over out-edges.
/// Throws if some ordered pair is unreachable (not strongly connected).
inline int compute_diameter(const Digraph& g) {
  int diameter = 0;
  std::vector<int> dist(g.n);
  for (int s = 0; s < g.n; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    dist[s] = 0;
    std::queue<int> q;
    q.push(s);
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      for (int w : g.out_neighbors[v]) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          q.push(w);
        }
      }
    }
    for (int t = 0; t < g.n; ++t) {
      if (dist[t] < 0)
        throw std::runtime_error("digraph: unreachable pair (" +
                                 std::to_string(s) + " -> " +
                                 std::to_string(t) + "); not strongly connected");
      diameter = std::max(diameter, dist[t]);
    }
  }
  return diameter;
}

/// Random strongly connected digraph: a directed Hamiltonian cycle over a
/// seeded permutation guarantees strong connectivity; extra_edge_fraction *
/// n*(n-1) additional distinct random directed edges densify it.
/// Pure function of (n, fraction, seed).
inline Digraph generate_strongly_connected(int n, double extra_edge_fraction,
                                           std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("generate_strongly_connected: n < 2");
  if (extra_edge_fraction < 0.0 || extra_edge_fraction > 1.0)
    throw std::invalid_argument(
        "generate_strongly_connected: extra_edge_fraction outside [0,1]");
  RngStream rng = derive_stream(seed, 0xD1A6u, 0);

  // Seeded permutation (Fisher–Yates), then the cycle along it.
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  for (int i = n - 1; i > 0; --i) {
    int j = static_cast<int>(rng.uniform(static_cast<std::uint64_t>(i + 1)));
    std::swap(perm[i], perm[j]);
  }
  std::set<std::pair<int, int>> edge_set;
  for (int i = 0; i < n; ++i)
    edge_set.emplace(perm[i], perm[(i + 1) % n]);

  const long long all = static_cast<long long>(n) * (n - 1);
  long long want = static_cast<long long>(extra_edge_fraction * static_cast<double>(all));
  want = std::min(want, all - static_cast<long long>(edge_set.size()));
  long long added = 0;
  while (added < want) {
    int a = static_cast<int>(rng.uniform(static_cast<std::uint64_t>(n)));
    int b = static_cast<int>(rng.uniform(static_cast<std::uint64_t>(n)));
    if (a == b) continue;
    if (edge_set.emplace(a, b).second) ++added;
  }
  return make_digraph(n, {edge_set.begin(), edge_set.end()});
}

/// Adjacency-list dump for debugging: one line per node, "j: l1 l2 ...".
inline std::string dump_adjacency(const Digraph& g) {
  std::ostringstream os;
  for (int j = 0; j < g.n; ++j) {
    os << j << ':';
    for (int l : g.out_neighbors[j]) os << ' ' << l;
    os << '\n';
  }
  return os.str();
}

}  // namespace qac

#endif  // QAC_DIGRAPH_HPP
