#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>
#include <vector>

#include "qac/engine.hpp"

using namespace qac;

namespace {

SimConfig two_cycle_config() {
  SimConfig cfg;
  cfg.n = 2;
  cfg.explicit_edges = {{0, 1}, {1, 0}};
  cfg.inits = {{2, 2, 2, Role::neutral}, {4, 0, 2, Role::neutral}};
  cfg.variant = Variant::alg1;
  cfg.seed = 5;
  return cfg;
}

bool events_equal(const std::vector<Event>& a, const std::vector<Event>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Event &x = a[i], &y = b[i];
    if (x.k != y.k || x.kind != y.kind || x.from != y.from || x.to != y.to ||
        x.y != y.y || x.z != y.z)
      return false;
  }
  return true;
}

}  // namespace

TEST_CASE("already-balanced 2-node network stops at the first window") {
  const RunResult res = run(two_cycle_config());
  REQUIRE(res.terminated);
  REQUIRE(res.q == ExactRatio(2, 1));
  REQUIRE(res.k_end == res.graph.diameter);  // first window boundary
  REQUIRE(res.final_qs == std::vector<i64>{2, 2});
  // w* = q_s * lambda - u
  REQUIRE(res.final_w == std::vector<i64>{2, 4});
}

TEST_CASE("five regions sharing 15000 units over 5000 demands settle at q = 3") {
  SimConfig cfg;
  cfg.n = 5;
  cfg.explicit_edges = {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0},
                        {1, 0}, {2, 1}, {3, 2}, {4, 3}, {0, 4}};
  cfg.inits = {{3000, 0, 1000, Role::neutral},
               {4500, 0, 1500, Role::neutral},
               {2250, 0, 750, Role::neutral},
               {2250, 0, 750, Role::neutral},
               {2600, 400, 1000, Role::neutral}};
  cfg.variant = Variant::alg1;
  cfg.seed = 11;
  const RunResult res = run(cfg);
  REQUIRE(res.terminated);
  REQUIRE(res.q == ExactRatio(3, 1));
  for (int j = 0; j < 5; ++j) {
    REQUIRE(res.final_qs[j] == 3);
    REQUIRE(res.final_w[j] == 3 * cfg.inits[j].lambda - cfg.inits[j].u);
  }
  // Same totals under the privacy variant.
  cfg.variant = Variant::alg2;
  cfg.private_nodes = {0, 2};
  const RunResult res2 = run(cfg);
  REQUIRE(res2.terminated);
  for (int j = 0; j < 5; ++j) REQUIRE(res2.final_qs[j] == 3);
}

TEST_CASE("privacy variant with 3 private nodes terminates on the exact ratio") {
  SimConfig cfg;
  cfg.n = 10;
  cfg.extra_edge_fraction = 0.3;
  cfg.graph_seed = 9;
  cfg.dist.enabled = true;
  cfg.dist.total_min = 100;
  cfg.dist.total_max = 900;
  cfg.dist.lambda_min = 2;
  cfg.dist.lambda_max = 20;
  cfg.private_nodes = {1, 4, 7};
  cfg.variant = Variant::alg2;
  cfg.seed = 123;
  const RunResult res = run(cfg);
  REQUIRE(res.terminated);
  const ExactRatio q = global_ratio(res.config.inits);
  for (int j = 0; j < 10; ++j) {
    REQUIRE((res.final_qs[j] == q.ceil() || res.final_qs[j] == q.floor()));
    REQUIRE(res.final_w[j] ==
            res.final_qs[j] * res.config.inits[j].lambda - res.config.inits[j].u);
  }
  REQUIRE(res.spread.back() == 0);
  REQUIRE(res.rounds_checked == res.k_end);  // per-round invariants were active
}

TEST_CASE("no termination happens while any offset is pending") {
  SimConfig cfg;
  cfg.n = 8;
  cfg.extra_edge_fraction = 0.2;
  cfg.graph_seed = 17;
  cfg.dist.enabled = true;
  cfg.dist.total_min = 50;
  cfg.dist.total_max = 300;
  cfg.dist.lambda_min = 2;
  cfg.dist.lambda_max = 8;
  cfg.private_nodes = {0, 3};
  cfg.variant = Variant::alg2;
  cfg.seed = 77;
  const RunResult res = run(cfg);
  REQUIRE(res.terminated);
  REQUIRE(res.last_injection_round > 0);
  i64 first_term = 0;
  for (const Event& e : res.events)
    if (e.kind == "term") {
      first_term = e.k;
      break;
    }
  REQUIRE(first_term > res.last_injection_round);
}

TEST_CASE("runs are deterministic: identical configs give identical event logs") {
  SimConfig cfg;
  cfg.n = 6;
  cfg.extra_edge_fraction = 0.4;
  cfg.graph_seed = 2;
  cfg.dist.enabled = true;
  cfg.dist.total_min = 30;
  cfg.dist.total_max = 120;
  cfg.dist.lambda_min = 2;
  cfg.dist.lambda_max = 6;
  cfg.private_nodes = {2};
  cfg.variant = Variant::alg2;
  cfg.seed = 31;
  const RunResult a = run(cfg);
  const RunResult b = run(cfg);
  REQUIRE(a.k_end == b.k_end);
  REQUIRE(events_equal(a.events, b.events));
  REQUIRE(a.final_qs == b.final_qs);
}

TEST_CASE("privacy variant with no private nodes doubles the plain trajectory") {
  for (std::uint64_t s = 1; s <= 20; ++s) {
    SimConfig cfg;
    cfg.n = static_cast<int>(4 + (s % 17));  // n in [4, 20]
    cfg.extra_edge_fraction = 0.25;
    cfg.graph_seed = s * 13;
    cfg.dist.enabled = true;
    cfg.dist.total_min = 20;
    cfg.dist.total_max = 250;
    cfg.dist.lambda_min = 2;
    cfg.dist.lambda_max = 9;
    cfg.seed = s;
    REQUIRE(run_pair_equivalence(cfg));
  }
}

TEST_CASE("validation rejects broken configurations with named violations") {
  SimConfig bad = two_cycle_config();
  bad.inits[0].lambda = 0;
  auto [r1, g1] = resolve_config(bad);
  auto msgs = validate_config(r1, g1);
  REQUIRE_FALSE(msgs.empty());
  bool named = false;
  for (const auto& m : msgs) named = named || m.find("Assumption 3") != std::string::npos;
  REQUIRE(named);

  SimConfig all_one = two_cycle_config();
  all_one.inits[0].lambda = all_one.inits[1].lambda = 1;
  all_one.inits[0].l = all_one.inits[1].l = 5;
  auto [r2, g2] = resolve_config(all_one);
  REQUIRE_FALSE(validate_config(r2, g2).empty());

  SimConfig clash = two_cycle_config();
  clash.private_nodes = {0};
  clash.curious_nodes = {0};
  auto [r3, g3] = resolve_config(clash);
  REQUIRE_FALSE(validate_config(r3, g3).empty());

  SimConfig shallow = two_cycle_config();
  shallow.diameter_bound = 1;  // true diameter is 1, so this is fine
  auto [r4, g4] = resolve_config(shallow);
  REQUIRE(validate_config(r4, g4).empty());
  REQUIRE_THROWS_AS([&] {
    SimConfig c = two_cycle_config();
    c.inits[0].l = 0;
    c.inits[0].u = 1;  // l + u < lambda
    run(c);
  }(), ValidationError);
}

TEST_CASE("a diameter upper bound larger than the true diameter is accepted") {
  SimConfig cfg = two_cycle_config();
  cfg.diameter_bound = 4;
  const RunResult res = run(cfg);
  REQUIRE(res.terminated);
  REQUIRE(res.k_end % 4 == 0);  // windows follow the configured bound
  for (i64 qs : res.final_qs) REQUIRE(qs == 2);
}
