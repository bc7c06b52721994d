#include "causalkit/graph.hpp"

#include <algorithm>

#include "causalkit/harness.hpp"
#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace causalkit;

namespace {

Dag random_dag(int p, double density, Rng& rng) {
    InstanceConfig cfg;
    cfg.p = p;
    cfg.edge_density = density;
    return random_sem(cfg, rng).dag();
}

}  // namespace

TEST_CASE("dag invariants are enforced at construction") {
    Dag g({"A", "B", "C"});
    g.add_edge("A", "B");
    CHECK_THROWS_AS(g.add_edge("A", "A"), invalid_input);
    CHECK_THROWS_AS(g.add_edge("A", "B"), invalid_input);
    CHECK_THROWS_AS(g.add_edge("B", "A"), invalid_input);
    g.add_edge("B", "C");
    CHECK_THROWS_AS(g.add_edge("C", "A"), invalid_input);  // would close a cycle
    CHECK_THROWS_AS(g.add_edge("C", "D"), invalid_input);  // unknown label
    CHECK_THROWS_AS(Dag({"A", "A"}), invalid_input);
}

TEST_CASE("parents") {
    const Dag g = fixtures::four_node_dag();
    CHECK(parents(g, "X3") == NodeSet{"X2", "X4"});
    CHECK(parents(g, "X4") == NodeSet{});
    CHECK_THROWS_AS(parents(g, "X9"), invalid_input);

    Dag single({"A"});
    CHECK(parents(single, "A") == NodeSet{});

    // undirected neighbors are not parents
    Pdag p({"A", "B", "C"});
    p.add_directed_edge("A", "B");
    p.add_undirected_edge("C", "B");
    CHECK(parents(p, "B") == NodeSet{"A"});
}

TEST_CASE("skeleton") {
    const Pdag s = skeleton(fixtures::four_node_dag());
    CHECK(s.num_directed_edges() == 0);
    const std::vector<std::pair<std::string, std::string>> expected{
        {"X1", "X2"}, {"X1", "X4"}, {"X2", "X3"}, {"X3", "X4"}};
    CHECK(s.undirected_edges() == expected);

    CHECK(skeleton(Dag({"A", "B"})).num_adjacencies() == 0);

    Dag complete({"A", "B", "C"});
    complete.add_edge("A", "B");
    complete.add_edge("A", "C");
    complete.add_edge("B", "C");
    CHECK(skeleton(complete).num_undirected_edges() == 3);
}

TEST_CASE("d-separation on the worked examples") {
    const Dag g = fixtures::mediation_dag();
    CHECK(is_d_separated(g, {"M"}, {"S"}, {"P"}));
    CHECK_FALSE(is_d_separated(g, {"P"}, {"R"}, {}));  // P -> S -> R is open

    Dag isolated({"X", "Y"});
    CHECK(is_d_separated(isolated, {"X"}, {"Y"}, {}));

    CHECK_THROWS_AS(is_d_separated(g, {"M"}, {"M"}, {}), invalid_input);
    CHECK_THROWS_AS(is_d_separated(g, {"M"}, {"S"}, {"M"}), invalid_input);
    CHECK_THROWS_AS(is_d_separated(g, {}, {"S"}, {}), invalid_input);
}

TEST_CASE("d-separation agrees with path enumeration on random DAGs") {
    Rng rng(20240811);
    for (int trial = 0; trial < 25; ++trial) {
        const int p = 3 + static_cast<int>(rng.below(4));  // up to 6 nodes
        const Dag g = random_dag(p, 0.4, rng);
        const auto& nodes = g.nodes();
        for (int i = 0; i < p; ++i)
            for (int j = i + 1; j < p; ++j) {
                std::vector<int> rest;
                for (int t = 0; t < p; ++t)
                    if (t != i && t != j) rest.push_back(t);
                for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << rest.size()); ++mask) {
                    NodeSet s;
                    for (std::size_t t = 0; t < rest.size(); ++t)
                        if (mask >> t & 1) s.insert(nodes[rest[t]]);
                    const bool fast = is_d_separated(g, {nodes[i]}, {nodes[j]}, s);
                    const bool slow =
                        oracles::dsep_by_path_enumeration(g, {nodes[i]}, {nodes[j]}, s);
                    REQUIRE(fast == slow);
                }
            }
    }
}

TEST_CASE("d-separation of sets agrees with path enumeration") {
    Rng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const Dag g = random_dag(6, 0.35, rng);
        const auto& nodes = g.nodes();
        int checked = 0;
        // every assignment of the 6 nodes to A/B/S/none
        for (int assignment = 0; assignment < 4 * 4 * 4 * 4 * 4 * 4; ++assignment) {
            NodeSet a, b, s;
            int code = assignment;
            for (const auto& node : nodes) {
                switch (code % 4) {
                    case 1: a.insert(node); break;
                    case 2: b.insert(node); break;
                    case 3: s.insert(node); break;
                    default: break;
                }
                code /= 4;
            }
            if (a.empty() || b.empty()) continue;
            ++checked;
            REQUIRE(is_d_separated(g, a, b, s) ==
                    oracles::dsep_by_path_enumeration(g, a, b, s));
        }
        CHECK(checked > 0);
    }
}

TEST_CASE("unshielded colliders") {
    CHECK(unshielded_colliders(fixtures::four_node_dag()) ==
          std::vector<std::array<std::string, 3>>{{"X2", "X3", "X4"}});

    Dag chain({"X", "Y", "Z"});
    chain.add_edge("X", "Y");
    chain.add_edge("Y", "Z");
    CHECK(unshielded_colliders(chain).empty());

    Dag shielded({"W", "X", "Z"});
    shielded.add_edge("W", "X");
    shielded.add_edge("Z", "X");
    shielded.add_edge("W", "Z");
    CHECK(unshielded_colliders(shielded).empty());
}

TEST_CASE("unshielded colliders are invariant under relabeling") {
    Rng rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        const Dag g = random_dag(6, 0.4, rng);
        std::vector<std::string> fresh{"n0", "n1", "n2", "n3", "n4", "n5"};
        rng.shuffle(fresh);
        std::map<std::string, std::string> fwd, back;
        for (int i = 0; i < 6; ++i) {
            fwd[g.nodes()[i]] = fresh[i];
            back[fresh[i]] = g.nodes()[i];
        }
        Dag relabeled(fresh);
        for (const auto& [from, to] : g.edges()) relabeled.add_edge(fwd[from], fwd[to]);

        auto mapped = unshielded_colliders(relabeled);
        std::vector<std::array<std::string, 3>> restored;
        for (const auto& [w, x, z] : mapped) {
            auto lo = std::min(back[w], back[z]);
            auto hi = std::max(back[w], back[z]);
            restored.push_back({lo, back[x], hi});
        }
        std::sort(restored.begin(), restored.end());
        CHECK(restored == unshielded_colliders(g));
    }
}

TEST_CASE("dag_to_cpdag on the worked example") {
    CHECK(dag_to_cpdag(fixtures::four_node_dag()) == fixtures::four_node_cpdag());

    Dag single({"X", "Y"});
    single.add_edge("X", "Y");
    const Pdag c = dag_to_cpdag(single);
    CHECK(c.num_directed_edges() == 0);
    CHECK(c.has_undirected_edge("X", "Y"));

    Dag collider({"X", "Y", "Z"});
    collider.add_edge("X", "Z");
    collider.add_edge("Y", "Z");
    const Pdag cc = dag_to_cpdag(collider);
    CHECK(cc.has_directed_edge("X", "Z"));
    CHECK(cc.has_directed_edge("Y", "Z"));
    CHECK(cc.num_undirected_edges() == 0);
}

TEST_CASE("dag_to_cpdag matches the brute-force definition on random DAGs") {
    Rng rng(2024);
    for (int trial = 0; trial < 60; ++trial) {
        const int p = 3 + static_cast<int>(rng.below(4));  // up to 6 nodes
        const Dag g = random_dag(p, 0.45, rng);
        REQUIRE(dag_to_cpdag(g) == oracles::cpdag_by_brute_force(g));
    }
}

TEST_CASE("enumerate_dags_in_class on the worked example") {
    const auto dags = enumerate_dags_in_class(fixtures::four_node_cpdag());
    REQUIRE(dags.size() == 3);
    for (const auto& d : dags) {
        CHECK(d.has_edge("X2", "X3"));
        CHECK(d.has_edge("X4", "X3"));
        CHECK(dag_to_cpdag(d) == fixtures::four_node_cpdag());
    }
    // the rejected orientation X2 -> X1 <- X4 would be a new collider
    int with_x1_collider = 0;
    for (const auto& d : dags)
        if (d.has_edge("X2", "X1") && d.has_edge("X4", "X1")) ++with_x1_collider;
    CHECK(with_x1_collider == 0);
}

TEST_CASE("enumerate_dags_in_class edge cases") {
    Dag collider({"X", "Y", "Z"});
    collider.add_edge("X", "Z");
    collider.add_edge("Y", "Z");
    const Pdag c = dag_to_cpdag(collider);
    const auto dags = enumerate_dags_in_class(c);
    REQUIRE(dags.size() == 1);
    CHECK(dags[0] == collider);

    Pdag chain({"X", "Y", "Z"});
    chain.add_undirected_edge("X", "Y");
    chain.add_undirected_edge("Y", "Z");
    CHECK(enumerate_dags_in_class(chain).size() == 3);

    // not a CPDAG: R1 would orient Y - Z, so no member maps back
    Pdag bad({"X", "Y", "Z"});
    bad.add_directed_edge("X", "Y");
    bad.add_undirected_edge("Y", "Z");
    CHECK_THROWS_AS(enumerate_dags_in_class(bad), invalid_input);

    CHECK_THROWS_AS(
        [] {
            std::vector<std::string> labels;
            for (int i = 0; i < 22; ++i) labels.push_back("n" + std::to_string(i));
            Pdag wide(labels);
            for (int i = 1; i < 22; ++i)
                wide.add_undirected_edge("n0", "n" + std::to_string(i));
            enumerate_dags_in_class(wide);
        }(),
        budget_exceeded);
}

TEST_CASE("every class member maps back to its CPDAG") {
    Rng rng(31);
    for (int trial = 0; trial < 25; ++trial) {
        const Dag g = random_dag(5, 0.4, rng);
        const Pdag c = dag_to_cpdag(g);
        const auto members = enumerate_dags_in_class(c);
        REQUIRE(!members.empty());
        bool found_original = false;
        for (const auto& d : members) {
            CHECK(skeleton(d) == skeleton(c));
            CHECK(dag_to_cpdag(d) == c);
            if (d == g) found_original = true;
        }
        CHECK(found_original);
        CHECK(members.size() == oracles::equivalence_class_by_brute_force(g).size());
    }
}

TEST_CASE("consistent_extension returns a class member") {
    Rng rng(77);
    for (int trial = 0; trial < 25; ++trial) {
        const Dag g = random_dag(6, 0.4, rng);
        const Pdag c = dag_to_cpdag(g);
        const Dag rep = consistent_extension(c);
        CHECK(dag_to_cpdag(rep) == c);
    }
}

TEST_CASE("topological order") {
    CHECK(topological_order(fixtures::four_node_dag()) ==
          std::vector<std::string>{"X4", "X1", "X2", "X3"});
    CHECK(topological_order(Dag({"B", "A"})) == std::vector<std::string>{"A", "B"});

    Dag chain({"X", "Y", "Z"});
    chain.add_edge("Z", "Y");
    chain.add_edge("Y", "X");
    CHECK(topological_order(chain) == std::vector<std::string>{"Z", "Y", "X"});

    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const Dag g = random_dag(7, 0.4, rng);
        const auto order = topological_order(g);
        std::map<std::string, int> pos;
        for (int t = 0; t < static_cast<int>(order.size()); ++t) pos[order[t]] = t;
        for (const auto& [from, to] : g.edges()) CHECK(pos[from] < pos[to]);
    }
}
