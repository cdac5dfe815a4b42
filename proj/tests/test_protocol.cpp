#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>
#include <vector>

#include "qac/protocol.hpp"
#include "qac/rng.hpp"

using namespace qac;

namespace {

std::vector<i64> ys(const std::vector<Token>& toks) {
  std::vector<i64> v;
  for (const Token& t : toks) v.push_back(t.y);
  return v;
}

}  // namespace

TEST_CASE("partition_into_tokens: ceiling/floor structure") {
  REQUIRE(ys(partition_into_tokens(7, 3)) == std::vector<i64>{3, 2, 2});
  REQUIRE(ys(partition_into_tokens(8, 4)) == std::vector<i64>{2, 2, 2, 2});
  REQUIRE(ys(partition_into_tokens(0, 2)) == std::vector<i64>{0, 0});
  REQUIRE_THROWS_AS(partition_into_tokens(5, 0), std::domain_error);
  REQUIRE_THROWS_AS(partition_into_tokens(-1, 2), std::domain_error);
}

TEST_CASE("partition_into_tokens: property over 1000 random pairs") {
  RngStream rng = derive_stream(2024, 0, 0);
  for (int i = 0; i < 1000; ++i) {
    const i64 z = rng.uniform_in(1, 64);
    const i64 y = rng.uniform_in(z, 100000);
    const auto toks = partition_into_tokens(y, z);
    REQUIRE(static_cast<i64>(toks.size()) == z);
    i64 sum = 0, mx = toks[0].y, mn = toks[0].y;
    for (const Token& t : toks) {
      REQUIRE(t.z == 1);
      sum += t.y;
      mx = std::max(mx, t.y);
      mn = std::min(mn, t.y);
    }
    REQUIRE(sum == y);
    REQUIRE(mx - mn <= 1);
  }
}

TEST_CASE("algorithm1_init: plain single state") {
  NodeState a = algorithm1_init({2, 2, 2, Role::neutral});  // l+u=4, lambda=2
  REQUIRE(a.y_alpha == 4);
  REQUIRE(a.z_alpha == 2);
  REQUIRE(ys(a.recv) == std::vector<i64>{2, 2});
  REQUIRE(a.q_s == 2);

  NodeState b = algorithm1_init({7, 0, 3, Role::neutral});
  REQUIRE(ys(b.recv) == std::vector<i64>{3, 2, 2});
  REQUIRE(b.q_s == 3);
}

TEST_CASE("init_node: non-private doubling") {
  RngStream rng = derive_stream(1, 0, 0);
  NodeState a = init_node({10, 0, 2, Role::neutral}, {1, 2}, false, rng);
  REQUIRE(a.y_alpha == 20);
  REQUIRE(a.z_alpha == 4);
  REQUIRE(ys(a.recv) == std::vector<i64>{5, 5, 5, 5});
  REQUIRE(a.y_beta == 0);
  REQUIRE(a.offsets.pending.empty());

  NodeState b = init_node({3, 0, 3, Role::neutral}, {1}, false, rng);
  REQUIRE(ys(b.recv) == std::vector<i64>{1, 1, 1, 1, 1, 1});
}

TEST_CASE("init_node: private split satisfies all sum identities") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    RngStream rng = derive_stream(seed, 0, 0);
    const NodeInit in{10, 0, 2, Role::priv};
    NodeState st = init_node(in, {1, 2}, true, rng);
    REQUIRE(st.is_private);
    REQUIRE(st.y_alpha + st.y_beta == 20);
    REQUIRE(st.z_alpha + st.z_beta == 4);
    REQUIRE(st.y_alpha != st.y_beta);
    REQUIRE(st.z_alpha != st.z_beta);
    REQUIRE(st.y_alpha >= st.z_alpha);
    REQUIRE(st.z_alpha >= 1);
    REQUIRE(st.y_beta >= st.z_beta);
    i64 xi_sum = 0, zeta_sum = 0;
    for (const auto& [dest, xz] : st.offsets.offsets) {
      REQUIRE((dest == 1 || dest == 2));
      REQUIRE(xz.first >= xz.second);
      REQUIRE(xz.second >= 0);
      xi_sum += xz.first;
      zeta_sum += xz.second;
    }
    REQUIRE(xi_sum == st.y_beta);
    REQUIRE(zeta_sum == st.z_beta);
    REQUIRE(st.offsets.pending == std::set<int>{1, 2});
  }
}

TEST_CASE("init_node: rejects a node with no out-neighbors") {
  RngStream rng = derive_stream(1, 0, 0);
  REQUIRE_THROWS_AS(init_node({4, 0, 2, Role::neutral}, {}, false, rng),
                    std::invalid_argument);
}

TEST_CASE("transmit_round: event trigger keeps everything at self") {
  NodeState st = algorithm1_init({5, 0, 1, Role::neutral});
  st.node = 0;
  RngStream rng = derive_stream(3, 0, 0);
  OutboundBatch b = transmit_round(st, {1}, rng, false);
  REQUIRE(b.tran.size() == 1);
  REQUIRE(b.tran.count(0) == 1);
  REQUIRE(ys(b.tran.at(0)) == std::vector<i64>{5});
  REQUIRE(b.sums.at(0) == std::pair<i64, i64>{5, 1});
}

TEST_CASE("transmit_round: kept token stays, the rest carry declared sums") {
  // recv = {5,5,5}; find a seed that routes both movable tokens to the only
  // out-neighbor, then check the declared sums c = (10, 2).
  bool found = false;
  for (std::uint64_t seed = 0; seed < 200 && !found; ++seed) {
    NodeState st = algorithm1_init({15, 0, 3, Role::neutral});
    st.node = 0;
    RngStream rng = derive_stream(seed, 0, 0);
    OutboundBatch b = transmit_round(st, {1}, rng, false);
    if (b.tran.count(1) && b.tran.at(1).size() == 2) {
      REQUIRE(b.sums.at(1) == std::pair<i64, i64>{10, 2});
      REQUIRE(ys(b.tran.at(0)) == std::vector<i64>{5});  // kept token
      found = true;
    }
  }
  REQUIRE(found);
}

TEST_CASE("transmit_round: total outbound mass always equals the held mass") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    NodeState st = algorithm1_init({23, 0, 5, Role::neutral});
    st.node = 0;
    RngStream rng = derive_stream(seed, 1, 1);
    OutboundBatch b = transmit_round(st, {1, 2, 3}, rng, false);
    i64 y = 0, z = 0;
    for (const auto& [dest, s] : b.sums) {
      y += s.first;
      z += s.second;
    }
    REQUIRE(y == 23);
    REQUIRE(z == 5);
  }
}

TEST_CASE("transmit_round: offset injection adds (xi, zeta) to the first token") {
  bool found = false;
  for (std::uint64_t seed = 0; seed < 300 && !found; ++seed) {
    NodeState st;
    st.node = 0;
    st.is_private = true;
    st.recv = {{9, 1}, {4, 1}};
    st.y_alpha = 13;
    st.z_alpha = 2;
    st.y_beta = 3;
    st.z_beta = 1;
    st.offsets.offsets[1] = {3, 1};
    st.offsets.pending = {1};
    RngStream rng = derive_stream(seed, 0, 0);
    OutboundBatch b = transmit_round(st, {1}, rng, true);
    if (!b.tran.count(1)) continue;  // movable token went to self this seed
    found = true;
    REQUIRE(b.tran.at(1) == std::vector<Token>{{7, 2}});
    REQUIRE(b.sums.at(1) == std::pair<i64, i64>{7, 2});
    REQUIRE(st.offsets.pending.empty());
    REQUIRE(st.y_beta == 0);
    REQUIRE(st.z_beta == 0);
    REQUIRE(b.injected ==
            std::vector<std::tuple<int, i64, i64>>{{1, 3, 1}});
    // Kept token is the maximal one.
    REQUIRE(ys(b.tran.at(0)) == std::vector<i64>{9});
  }
  REQUIRE(found);
}

TEST_CASE("aggregate_round: sums, re-partition, and the privacy branch") {
  NodeState st;
  std::vector<Delivery> inbound;
  inbound.push_back({{{5, 1}, {5, 1}}, 10, 2});
  inbound.push_back({{{7, 1}}, 7, 1});
  aggregate_round(st, inbound);
  REQUIRE(st.y_alpha == 17);
  REQUIRE(st.z_alpha == 3);
  REQUIRE(ys(st.recv) == std::vector<i64>{6, 6, 5});

  // Pending offsets preserve token identity (no re-partition).
  NodeState pr;
  pr.offsets.pending = {2};
  std::vector<Delivery> inb2;
  inb2.push_back({{{7, 2}}, 7, 2});
  inb2.push_back({{{4, 1}}, 4, 1});
  aggregate_round(pr, inb2);
  REQUIRE(pr.recv == std::vector<Token>{{7, 2}, {4, 1}});
  REQUIRE(pr.y_alpha == 11);
  REQUIRE(pr.z_alpha == 3);
}

TEST_CASE("aggregate_round: inconsistent declared sums are a protocol violation") {
  NodeState st;
  std::vector<Delivery> inbound;
  inbound.push_back({{{5, 1}}, 6, 1});
  REQUIRE_THROWS_WITH(aggregate_round(st, inbound),
                      Catch::Matchers::ContainsSubstring("declared sums"));
}

TEST_CASE("maxmin: window reinit, exchange, stopping test") {
  NodeState st;
  st.recv = {{5, 1}, {5, 1}};
  st.q_s = 5;
  const int D = 3;
  REQUIRE_FALSE(maxmin_step(st, 1, D, {}));  // k=1: reinit, not a boundary
  REQUIRE(st.M == 5);
  REQUIRE(st.m == 5);
  REQUIRE_FALSE(maxmin_step(st, 2, D, {{5, 5}}));
  REQUIRE(maxmin_step(st, 3, D, {{5, 5}}));  // boundary, M - m = 0

  // Mixed ceiling/floor values still stop: M - m = 1.
  NodeState mixed;
  mixed.recv = {{6, 1}, {5, 1}};
  maxmin_reinit(mixed, 1, 3);
  REQUIRE(mixed.M == 6);
  REQUIRE(mixed.m == 5);
  REQUIRE(maxmin_step(mixed, 3, 3, {{6, 5}}));

  // A private node with pending offsets inflates M by 2: the window cannot
  // close once that value propagates.
  NodeState priv;
  priv.is_private = true;
  priv.offsets.pending = {1};
  priv.recv = {{5, 1}};
  maxmin_reinit(priv, 1, 3);
  REQUIRE(priv.M == 7);
  NodeState other;
  other.recv = {{5, 1}};
  maxmin_reinit(other, 1, 3);
  REQUIRE_FALSE(maxmin_step(other, 3, 3, {{priv.M, priv.m}}));
}

TEST_CASE("apply_termination: w* = q_s * lambda - u") {
  NodeState st;
  st.q_s = 3;
  st.lambda = 1000;
  st.u = 400;
  apply_termination(st);
  REQUIRE(st.flag);
  REQUIRE(st.w_star == 2600);
}
