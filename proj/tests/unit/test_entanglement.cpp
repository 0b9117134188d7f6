#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "ket/entanglement.hpp"

#include "../common/oracle.hpp"

using namespace ket;
using ket_test::OracleGraph;

namespace {

// Triangle on {1,2,3} with weights 1,2,3 plus an isolated node 4.
DomainGraph triangle_graph() {
    std::vector<Entity> entities = {
        {1, "a", {"a"}, EntityCategory::Character, 5},
        {2, "b", {"b"}, EntityCategory::Character, 3},
        {3, "c", {"c"}, EntityCategory::Location, 2},
        {4, "d", {"d"}, EntityCategory::Object, 7},
    };
    std::vector<WeightedEdge> edges = {{1, 2, 1.0}, {1, 3, 2.0}, {2, 3, 3.0}};
    return DomainGraph(entities, edges, {});
}

// Path a(3) - b(4) - c(5), all unit weights.
DomainGraph path_graph() {
    std::vector<Entity> entities = {
        {1, "a", {"a"}, EntityCategory::Character, 3},
        {2, "b", {"b"}, EntityCategory::Character, 4},
        {3, "c", {"c"}, EntityCategory::Character, 5},
    };
    std::vector<WeightedEdge> edges = {{1, 2, 1.0}, {2, 3, 1.0}};
    return DomainGraph(entities, edges, {});
}

OracleGraph random_graph(std::mt19937& rng, int n) {
    OracleGraph g;
    g.n = n;
    std::uniform_real_distribution<double> weight(0.5, 9.5);
    std::uniform_int_distribution<int> freq(0, 12);
    for (int v = 0; v < n; ++v) g.freqs.push_back(freq(rng));
    for (int u = 0; u < n; ++u) {
        for (int v = u + 1; v < n; ++v) {
            if (rng() % 3 == 0) {
                g.edges.push_back({u, v});
                g.weights.push_back(std::round(weight(rng)));
            }
        }
    }
    return g;
}

std::set<int> random_subset(std::mt19937& rng, int n, int min_size) {
    std::set<int> sub;
    while (int(sub.size()) < min_size) {
        for (int v = 0; v < n; ++v) {
            if (rng() % 2 == 0) sub.insert(v);
        }
    }
    return sub;
}

}  // namespace

TEST_CASE("connection metrics on the triangle") {
    auto g = triangle_graph();
    auto sub = induce_subgraph(g, {1, 2, 3});
    auto cm = connection_metrics(sub);
    CHECK(cm.ews == doctest::Approx(6.0));
    CHECK(cm.ece == doctest::Approx(2.0));   // 6 / 3 nodes
    CHECK(cm.aews == doctest::Approx(2.0));  // 6 / 3 edges
    CHECK_FALSE(cm.no_edges);
}

TEST_CASE("node metrics use the parent graph") {
    auto g = triangle_graph();
    // Subgraph {1,4}: no internal edges, but node 1 still has parent degree 2.
    auto sub = induce_subgraph(g, {1, 4});
    auto nm = node_metrics(sub);
    CHECK(nm.wnr == doctest::Approx((5.0 + 7.0) / 2.0));
    CHECK(nm.ande == doctest::Approx((2.0 + 0.0) / 2.0));
}

TEST_CASE("topology metrics on a three-node path") {
    auto g = path_graph();
    auto sub = induce_subgraph(g, {1, 2, 3});
    auto tm = topology_metrics(sub);
    CHECK(tm.sgd == doctest::Approx(2.0 / 3.0));
    // Ordered reachable pairs: 1,1,1,1,2,2 hops -> 8/6.
    CHECK(tm.msp == doctest::Approx(4.0 / 3.0));
    CHECK(tm.rr == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("degenerate subgraphs yield zeros with flags, not errors") {
    auto g = triangle_graph();

    SUBCASE("no internal edges") {
        auto vec = entanglement_vector(g, "p", {1, 4}, {{1}, 0.5});
        CHECK(vec.m[0] == 0.0);
        CHECK(vec.m[1] == 0.0);
        CHECK(vec.m[2] == 0.0);
        CHECK(vec.flags.count(MetricFlag::NoEdges) == 1);
        CHECK(vec.flags.count(MetricFlag::NoReachablePairs) == 1);
    }

    SUBCASE("single node") {
        auto vec = entanglement_vector(g, "p", {4}, {{1}, 0.5});
        CHECK(vec.m[5] == 0.0);
        CHECK(vec.m[6] == 0.0);
        CHECK(vec.flags.count(MetricFlag::NoReachablePairs) == 1);
    }

    SUBCASE("empty entity list throws") {
        CHECK_THROWS_AS(entanglement_vector(g, "p", {}, {{1}, 0.5}),
                        EmptySubgraph);
    }
}

TEST_CASE("dwis decays with parent-graph hops") {
    auto g = path_graph();
    auto sub = induce_subgraph(g, {1, 2, 3});

    // Reference {1}: 3*0.5^0 + 4*0.5^1 + 5*0.5^2 = 6.25.
    CHECK(dwis(sub, {{1}, 0.5}) == doctest::Approx(6.25));
    // Reference {2}: 3*0.5 + 4 + 5*0.5 = 8.
    CHECK(dwis(sub, {{2}, 0.5}) == doctest::Approx(8.0));
    // Nearest reference wins: {1,3} -> 3 + 4*0.5 + 5 = 10.
    CHECK(dwis(sub, {{1, 3}, 0.5}) == doctest::Approx(10.0));

    SUBCASE("node at distance two contributes freq * delta^2") {
        auto only_c = induce_subgraph(g, {3});
        CHECK(dwis(only_c, {{1}, 0.5}) == doctest::Approx(5.0 * 0.25));
    }

    SUBCASE("unreachable nodes contribute zero") {
        auto tri = triangle_graph();  // node 4 isolated
        auto isolated = induce_subgraph(tri, {4});
        CHECK(dwis(isolated, {{1}, 0.5}) == 0.0);
    }

    SUBCASE("hops measured in the parent graph, not the subgraph") {
        // Subgraph {1,3} has no internal edges, but node 3 is still two
        // parent-graph hops from the reference.
        auto ends = induce_subgraph(g, {1, 3});
        CHECK(dwis(ends, {{1}, 0.5}) == doctest::Approx(3.0 + 5.0 * 0.25));
    }

    CHECK_THROWS_AS(dwis(sub, {{}, 0.5}), EmptyReferenceSet);
    CHECK_THROWS_AS(dwis(sub, {{1}, 0.0}), ConfigError);
    CHECK_THROWS_AS(dwis(sub, {{1}, 1.0}), ConfigError);
}

TEST_CASE("all nine metrics match a brute-force oracle on random graphs") {
    std::mt19937 rng(20240817);
    for (int trial = 0; trial < 200; ++trial) {
        int n = 2 + int(rng() % 9);
        auto og = random_graph(rng, n);
        auto dg = ket_test::to_domain_graph(og);

        auto sub_nodes = random_subset(rng, n, 1);
        std::set<int> refs = {int(rng() % n)};
        double delta = 0.25 + 0.5 * (rng() % 3) / 2.0;  // 0.25, 0.5, 0.75

        auto expected = ket_test::oracle_metrics(og, sub_nodes, refs, delta);
        auto got = entanglement_vector(dg, "t", ket_test::to_ids(sub_nodes),
                                       {ket_test::to_ids(refs), delta});
        for (int k = 0; k < 9; ++k) {
            INFO("trial ", trial, " metric m", k + 1);
            CHECK(got.m[k] == doctest::Approx(expected.m[k]).epsilon(1e-12));
        }
    }
}

TEST_CASE("adding an internal edge never decreases EWS, SGD, or RR") {
    std::mt19937 rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        int n = 3 + int(rng() % 5);
        auto og = random_graph(rng, n);

        // Find a missing pair to add.
        std::set<std::pair<int, int>> present;
        for (const auto& e : og.edges) present.insert({e[0], e[1]});
        std::vector<std::pair<int, int>> missing;
        for (int u = 0; u < n; ++u)
            for (int v = u + 1; v < n; ++v)
                if (!present.count({u, v})) missing.push_back({u, v});
        if (missing.empty()) continue;
        auto pick = missing[rng() % missing.size()];

        std::set<int> all;
        for (int v = 0; v < n; ++v) all.insert(v);
        auto ids = ket_test::to_ids(all);

        auto before = entanglement_vector(ket_test::to_domain_graph(og), "t",
                                          ids, {{1}, 0.5});
        og.edges.push_back({pick.first, pick.second});
        og.weights.push_back(2.0);
        auto after = entanglement_vector(ket_test::to_domain_graph(og), "t",
                                         ids, {{1}, 0.5});

        CHECK(after.m[1] >= before.m[1]);  // EWS
        CHECK(after.m[5] >= before.m[5]);  // SGD
        CHECK(after.m[7] >= before.m[7]);  // RR
    }
}

TEST_CASE("dwis is monotone in delta and in the reference set") {
    std::mt19937 rng(123);
    for (int trial = 0; trial < 50; ++trial) {
        int n = 3 + int(rng() % 6);
        auto og = random_graph(rng, n);
        auto dg = ket_test::to_domain_graph(og);
        auto sub = induce_subgraph(dg, ket_test::to_ids(random_subset(rng, n, 1)));

        std::vector<EntityId> small_refs = {EntityId(rng() % n) + 1};
        auto big_refs = small_refs;
        big_refs.push_back(EntityId(rng() % n) + 1);

        CHECK(dwis(sub, {small_refs, 0.7}) >= dwis(sub, {small_refs, 0.3}));
        CHECK(dwis(sub, {big_refs, 0.5}) >= dwis(sub, {small_refs, 0.5}));
    }
}

TEST_CASE("scaling edge weights by c scales exactly m1, m2, m3") {
    std::mt19937 rng(4242);
    const double c = 3.5;
    for (int trial = 0; trial < 30; ++trial) {
        int n = 3 + int(rng() % 5);
        auto og = random_graph(rng, n);
        if (og.edges.empty()) continue;
        auto sub_nodes = random_subset(rng, n, 2);
        auto ids = ket_test::to_ids(sub_nodes);

        auto base = entanglement_vector(ket_test::to_domain_graph(og), "t",
                                        ids, {{1}, 0.5});
        for (auto& w : og.weights) w *= c;
        auto scaled = entanglement_vector(ket_test::to_domain_graph(og), "t",
                                          ids, {{1}, 0.5});

        for (int k : {0, 1, 2}) {
            CHECK(scaled.m[k] == doctest::Approx(base.m[k] * c));
        }
        for (int k : {3, 4, 5, 6, 7, 8}) {
            CHECK(scaled.m[k] == doctest::Approx(base.m[k]));
        }
    }
}

TEST_CASE("normalization maps each metric to [0,100] and keeps ordering") {
    std::mt19937 rng(7);
    std::vector<EntanglementVector> vectors;
    for (int i = 0; i < 12; ++i) {
        EntanglementVector v;
        v.prompt_id = "p" + std::to_string(i);
        for (int k = 0; k < 9; ++k) {
            v.m[k] = (k == 4) ? 3.0 : double(rng() % 100) / 7.0;  // m5 constant
        }
        vectors.push_back(v);
    }
    auto norm = normalize_scores(vectors);
    REQUIRE(norm.values.size() == vectors.size());

    for (int k = 0; k < 9; ++k) {
        double lo = 1e18, hi = -1e18;
        std::size_t arg_raw = 0, arg_norm = 0;
        for (std::size_t i = 0; i < vectors.size(); ++i) {
            double nv = norm.values[i][k];
            CHECK(nv >= 0.0);
            CHECK(nv <= 100.0);
            lo = std::min(lo, nv);
            hi = std::max(hi, nv);
            if (vectors[i].m[k] > vectors[arg_raw].m[k]) arg_raw = i;
            if (norm.values[i][k] > norm.values[arg_norm][k]) arg_norm = i;
        }
        if (k == 4) {
            CHECK(norm.constant_metric[k]);
            CHECK(hi == 0.0);  // constant metric pinned to 0
        } else {
            CHECK_FALSE(norm.constant_metric[k]);
            CHECK(lo == doctest::Approx(0.0));
            CHECK(hi == doctest::Approx(100.0));
            CHECK(arg_raw == arg_norm);  // min-max scaling is order-preserving
        }
    }
}

TEST_CASE("induce_subgraph sorts, deduplicates, and validates") {
    auto g = triangle_graph();
    auto sub = induce_subgraph(g, {3, 1, 3, 2});
    CHECK(sub.nodes == std::vector<EntityId>{1, 2, 3});
    CHECK(sub.edges.size() == 3);
    CHECK_THROWS_AS(induce_subgraph(g, {1, 42}), UnknownEntity);
}
