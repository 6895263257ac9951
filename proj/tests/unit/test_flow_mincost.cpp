#include <doctest.h>

#include <set>

#include "matchforge/error.hpp"
#include "matchforge/flow_mincost.hpp"
#include "test_support.hpp"

using namespace matchforge;

namespace {

// 2x2 complete graph carrying the perfect matching T1-C1, T2-C2.
FlowNetwork diagonal_flow(const BipartiteGraph& g) {
  FlowNetwork net = build_flow_network(g);
  for (Index i = 0; i < 2; ++i) {
    net.set_flow(net.source_arc(i), 1);
    net.set_flow(net.sink_arc(i), 1);
  }
  net.set_flow(net.pair_arc(0), 1);  // (T1, C1)
  net.set_flow(net.pair_arc(3), 1);  // (T2, C2)
  return net;
}

BipartiteGraph two_by_two(double w11, double w12, double w21, double w22) {
  return testing::complete_from({{w11, w12}, {w21, w22}});
}

const CostedResidualEdge* find_edge(const CostedResidualGraph& g, NodeId from, NodeId to) {
  for (const auto& e : g.edges)
    if (e.from == from && e.to == to) return &e;
  return nullptr;
}

bool closes_up(const NegativeCycle& c) {
  std::int64_t sum = 0;
  for (std::size_t k = 0; k < c.edges.size(); ++k) {
    sum += c.edges[k].cost;
    if (c.edges[k].to != c.edges[(k + 1) % c.edges.size()].from) return false;
  }
  return sum == c.cost;
}

}  // namespace

TEST_CASE("build_costed_residual") {
  SUBCASE("perfect matching on 2x2") {
    auto g = two_by_two(5, 1, 2, 4);
    auto net = diagonal_flow(g);
    auto r = build_costed_residual(net);
    const NodeId t1 = net.treated_node(0), t2 = net.treated_node(1);
    const NodeId c1 = net.control_node(0), c2 = net.control_node(1);
    REQUIRE(find_edge(r, c1, t1));
    CHECK(find_edge(r, c1, t1)->cost == -5);
    CHECK(find_edge(r, c2, t2)->cost == -4);
    CHECK(find_edge(r, t1, c2)->cost == 1);
    CHECK(find_edge(r, t2, c1)->cost == 2);
    CHECK_FALSE(find_edge(r, t1, c1));
    CHECK(find_edge(r, t1, net.source())->cost == -1);
    CHECK(r.edges.size() == 8);
  }
  SUBCASE("zero flow has only forward edges") {
    auto g = two_by_two(5, 1, 2, 4);
    auto net = build_flow_network(g);
    auto r = build_costed_residual(net);
    CHECK(r.edges.size() == net.num_arcs());
    for (const auto& e : r.edges) CHECK(e.edge.forward);
    CHECK(find_edge(r, net.treated_node(0), net.control_node(0))->cost == 5);
    CHECK_FALSE(find_negative_cycle(r));
  }
  SUBCASE("saturated 1x1 has only backward edges") {
    auto g = BipartiteGraph::with_default_ids(1, 1, {{0, 0, 3}});
    auto net = build_flow_network(g);
    for (ArcId a = 0; a < net.num_arcs(); ++a) net.set_flow(a, 1);
    auto r = build_costed_residual(net);
    CHECK(r.edges.size() == 3);
    for (const auto& e : r.edges) CHECK_FALSE(e.edge.forward);
  }
  SUBCASE("broken conservation and float costs are rejected") {
    auto g = two_by_two(5, 1, 2, 4);
    auto net = build_flow_network(g);
    net.set_flow(net.source_arc(0), 1);
    CHECK_THROWS_AS(build_costed_residual(net), InvalidInput);
    auto f = build_flow_network(two_by_two(0.5, 1, 2, 4));
    CHECK_THROWS_AS(build_costed_residual(f), InvalidInput);
  }
}

TEST_CASE("negative cycle on the swapped 2x2") {
  auto g = two_by_two(5, 1, 2, 4);
  auto net = diagonal_flow(g);
  CHECK(matching_cost(net) == 9);
  auto cycle = find_negative_cycle(build_costed_residual(net));
  REQUIRE(cycle);
  CHECK(cycle->cost == -6);
  CHECK(cycle->edges.size() == 4);
  CHECK(closes_up(*cycle));
  std::set<NodeId> nodes;
  for (const auto& e : cycle->edges) nodes.insert(e.from);
  CHECK(nodes == std::set<NodeId>{net.treated_node(0), net.treated_node(1),
                                  net.control_node(0), net.control_node(1)});

  cancel_cycle(net, *cycle);
  CHECK(matching_cost(net) == 3);
  auto m = net.induced_matching();
  m.sort();
  CHECK(m.pairs == std::vector<Pair>{{0, 1}, {1, 0}});
  CHECK_FALSE(find_negative_cycle(build_costed_residual(net)));
}

TEST_CASE("no negative cycle when the diagonal is already optimal") {
  auto net = diagonal_flow(two_by_two(1, 5, 4, 2));
  CHECK_FALSE(find_negative_cycle(build_costed_residual(net)));
  CHECK(find_negative_cycles(build_costed_residual(net)).empty());
}

TEST_CASE("canceling a -1 cycle lowers the cost by exactly 1") {
  auto net = diagonal_flow(two_by_two(2, 1, 2, 2));
  const auto before = matching_cost(net);
  auto cycle = find_negative_cycle(build_costed_residual(net));
  REQUIRE(cycle);
  CHECK(cycle->cost == -1);
  cancel_cycle(net, *cycle);
  CHECK(matching_cost(net) == before - 1);
}

TEST_CASE("cancel_cycle rejects a cycle without capacity") {
  auto g = two_by_two(5, 1, 2, 4);
  auto net = diagonal_flow(g);
  auto cycle = find_negative_cycle(build_costed_residual(net));
  REQUIRE(cycle);
  cancel_cycle(net, *cycle);
  CHECK_THROWS_AS(cancel_cycle(net, *cycle), std::logic_error);
}

TEST_CASE("min_cost_matching examples") {
  auto r = min_cost_matching(two_by_two(5, 1, 2, 4), 2);
  r.matching.sort();
  CHECK(r.matching.pairs == std::vector<Pair>{{0, 1}, {1, 0}});
  CHECK(r.total_cost == 3);

  auto empty = min_cost_matching(two_by_two(5, 1, 2, 4), 0);
  CHECK(empty.matching.size() == 0);
  CHECK(empty.total_cost == 0);

  auto three = min_cost_matching(testing::complete_from({{4, 1, 3}, {2, 0, 5}, {3, 2, 2}}), 3);
  CHECK(three.total_cost == 5);

  CHECK_THROWS_AS(min_cost_matching(BipartiteGraph::with_default_ids(2, 1, {{0, 0, 1}, {1, 0, 1}}), 2),
                  Infeasible);
  CHECK_THROWS_AS(min_cost_matching(two_by_two(0.5, 1, 1, 1), 2), InvalidInput);
}

TEST_CASE("cycle canceling properties on random graphs") {
  testing::Rng rng(91);
  for (int rep = 0; rep < 250; ++rep) {
    const auto nt = 1 + testing::uniform_int(rng, 0, 6);
    const auto nc = 1 + testing::uniform_int(rng, 0, 6);
    auto g = testing::random_graph(rng, nt, nc, 0.3 + 0.7 * testing::uniform_real(rng));
    const auto best = testing::min_cost_by_size(g);
    const std::size_t mdag = testing::max_matching_size(g);
    const std::size_t m = testing::uniform_int(rng, 0, mdag);
    INFO(testing::describe(g), " m=", m);

    MinCostOptions opts;
    std::int64_t running = -1;
    std::size_t events = 0;
    opts.on_cancel = [&](const CancelEvent& ev) {
      ++events;
      CHECK(ev.cycle_cost < 0);
      CHECK(ev.cardinality == m);
      CHECK(ev.network->value() == m);
      CHECK_FALSE(ev.network->check_invariants());
      CHECK(matching_cost(*ev.network) == ev.total_cost);
      if (running >= 0) CHECK(ev.total_cost < running);
      running = ev.total_cost;
    };
    auto r = min_cost_matching(g, m, opts);
    CHECK(r.cardinality == m);
    CHECK(r.max_cardinality == mdag);
    CHECK(static_cast<double>(r.total_cost) == *best[m]);
    CHECK(validate_matching(g, r.matching).empty());
    CHECK(events == r.cycles_canceled);
    CHECK(r.cycles_canceled <= static_cast<std::size_t>(r.initial_cost - r.total_cost));
    CHECK_FALSE(testing::has_negative_cycle(build_costed_residual(r.network, 1)));
    CHECK_FALSE(testing::has_negative_cycle(build_costed_residual(r.network, 0)));

    MinCostOptions zero;
    zero.source_sink_cost = 0;
    auto z = min_cost_matching(g, m, zero);
    CHECK(z.total_cost == r.total_cost);
    if (testing::count_optimal(g, m, *best[m]) == 1) {
      auto a = r.matching, b = z.matching;
      a.sort();
      b.sort();
      CHECK(a == b);
    }
  }
}

TEST_CASE("every cycle from one scan is disjoint and negative") {
  testing::Rng rng(92);
  for (int rep = 0; rep < 100; ++rep) {
    auto g = testing::random_graph(rng, 6, 6, 0.8);
    auto mc = max_cardinality(g);
    auto cycles = find_negative_cycles(build_costed_residual(mc.network));
    std::set<NodeId> seen;
    for (const auto& c : cycles) {
      CHECK(c.cost < 0);
      CHECK(closes_up(c));
      for (const auto& e : c.edges) CHECK(seen.insert(e.from).second);
    }
    CHECK(cycles.empty() == !testing::has_negative_cycle(build_costed_residual(mc.network)));
  }
}

TEST_CASE("greedy warm start reaches the same optimum as the zero-flow start") {
  testing::Rng rng(93);
  for (int rep = 0; rep < 150; ++rep) {
    const auto nt = 1 + testing::uniform_int(rng, 0, 8);
    const auto nc = 1 + testing::uniform_int(rng, 0, 8);
    auto g = testing::random_graph(rng, nt, nc, 0.2 + 0.8 * testing::uniform_real(rng), 50);
    INFO(testing::describe(g));
    const std::size_t mdag = testing::max_matching_size(g);
    MinCostOptions cold;
    cold.greedy_start = false;
    for (std::size_t m : {mdag, mdag / 2}) {
      auto warm = min_cost_matching(g, m);
      auto plain = min_cost_matching(g, m, cold);
      CHECK(warm.total_cost == plain.total_cost);
      CHECK(warm.cardinality == m);
      CHECK(warm.max_cardinality == mdag);
      CHECK(plain.augmentations == mdag);
      CHECK(warm.augmentations <= plain.augmentations);
      CHECK(validate_matching(g, warm.matching).empty());
    }
  }
}
