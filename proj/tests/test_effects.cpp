#include "causalkit/effects.hpp"

#include <algorithm>
#include <cmath>

#include "causalkit/harness.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace causalkit;

namespace {

LinearSem random_faithful_sem(InstanceConfig cfg, Rng& rng) {
    for (int attempt = 0; attempt < 50; ++attempt) {
        LinearSem sem = random_sem(cfg, rng);
        const CiDecider oracle = CiDecider::oracle(sem.true_covariance());
        const auto& nodes = sem.dag().nodes();
        const int p = static_cast<int>(nodes.size());
        bool ok = true;
        for (int i = 0; i < p && ok; ++i)
            for (int j = i + 1; j < p && ok; ++j) {
                std::vector<int> rest;
                for (int t = 0; t < p; ++t)
                    if (t != i && t != j) rest.push_back(t);
                for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << rest.size()); ++mask) {
                    NodeSet s;
                    for (std::size_t t = 0; t < rest.size(); ++t)
                        if (mask >> t & 1) s.insert(nodes[rest[t]]);
                    if (oracle.decide(nodes[i], nodes[j], s) !=
                        is_d_separated(sem.dag(), {nodes[i]}, {nodes[j]}, s)) {
                        ok = false;
                        break;
                    }
                }
            }
        if (ok) return sem;
    }
    throw std::runtime_error("no faithful instance found");
}

std::vector<double> sorted_scalars(const EffectMultiset& m) {
    auto v = m.scalar_values();
    std::sort(v.begin(), v.end());
    return v;
}

// distinct scalar values on the 1e-9 comparison grid
std::vector<long long> sorted_distinct(const EffectMultiset& m) {
    std::vector<long long> out;
    for (const auto& [values, mult] : m.distinct_values()) out.push_back(std::llround(values[0] * 1e9));
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

TEST_CASE("ida_local on the worked example") {
    const Covariance cov = fixtures::four_node_sem().true_covariance();
    const EffectMultiset m = ida_local(fixtures::four_node_cpdag(), cov, "X1", "X3");
    CHECK(m.provenance == Provenance::Local);
    // candidates: {}, {X2}, {X4}; {X2, X4} is not locally valid
    REQUIRE(m.entries.size() == 3);
    const auto distinct = sorted_distinct(m);
    REQUIRE(distinct.size() == 3);
    CHECK(distinct[0] == 400000000);   // adjust for X2: 0.4
    CHECK(distinct[1] == 6000000000);  // adjust for X4 (truth): 6
    CHECK(distinct[2] == 6400000000);  // no adjustment: 6.4
}

TEST_CASE("ida_local edge cases") {
    const Covariance cov = fixtures::four_node_sem().true_covariance();

    // fully directed CPDAG: single candidate, the definite parent set
    Dag collider({"X", "Y", "Z"});
    collider.add_edge("X", "Z");
    collider.add_edge("Y", "Z");
    const LinearSem csem(collider, {{"X", "Z", 1.5}, {"Y", "Z", -1.0}},
                         {{"X", 1.0}, {"Y", 1.0}, {"Z", 1.0}});
    const EffectMultiset single =
        ida_local(dag_to_cpdag(collider), csem.true_covariance(), "X", "Z");
    REQUIRE(single.entries.size() == 1);
    CHECK(single.entries[0].values[0] == doctest::Approx(1.5).epsilon(1e-12));

    // y an undirected neighbor of x: the candidates containing y contribute 0
    const EffectMultiset with_y = ida_local(fixtures::four_node_cpdag(), cov, "X1", "X2");
    bool has_zero = false;
    for (const auto& e : with_y.entries)
        if (e.parent_sets.at("X1").count("X2")) {
            CHECK(e.values[0] == 0.0);
            has_zero = true;
        }
    CHECK(has_zero);

    CHECK_THROWS_AS(ida_local(fixtures::four_node_cpdag(), cov, "X1", "X1"), invalid_input);
    CHECK_THROWS_AS(ida_local(fixtures::four_node_cpdag(), cov, "X9", "X3"), invalid_input);
}

TEST_CASE("ida_global on the worked example") {
    const Covariance cov = fixtures::four_node_sem().true_covariance();
    const EffectMultiset m = ida_global(fixtures::four_node_cpdag(), cov, "X1", "X3");
    CHECK(m.provenance == Provenance::Enumeration);
    REQUIRE(m.entries.size() == 3);  // one value per member DAG
    const auto values = sorted_scalars(m);
    CHECK(values[0] == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(values[1] == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(values[2] == doctest::Approx(6.4).epsilon(1e-12));
}

TEST_CASE("local and enumeration multisets share distinct values") {
    Rng rng(424242);
    InstanceConfig cfg;
    cfg.p = 7;
    cfg.expected_degree = 2.5;
    int done = 0;
    while (done < 25) {
        const LinearSem sem = random_faithful_sem(cfg, rng);
        const Pdag c = dag_to_cpdag(sem.dag());
        const Covariance cov = sem.true_covariance();
        const auto& nodes = sem.dag().nodes();
        const std::string x = nodes[rng.below(nodes.size())];
        std::string y = nodes[rng.below(nodes.size())];
        while (y == x) y = nodes[rng.below(nodes.size())];

        const EffectMultiset local = ida_local(c, cov, x, y);
        const EffectMultiset global = ida_global(c, cov, x, y);
        REQUIRE(sorted_distinct(local) == sorted_distinct(global));

        // the true effect is always a member when CPDAG and covariance are exact
        const double truth = sem.total_effect_paths(x, y);
        bool found = false;
        for (double v : global.scalar_values())
            if (std::abs(v - truth) < 1e-8) found = true;
        REQUIRE(found);
        ++done;
    }
}

TEST_CASE("locally valid candidates never create a new collider at x") {
    Rng rng(5757);
    InstanceConfig cfg;
    cfg.p = 7;
    cfg.expected_degree = 2.5;
    for (int trial = 0; trial < 10; ++trial) {
        const LinearSem sem = random_sem(cfg, rng);
        const Pdag c = dag_to_cpdag(sem.dag());
        const Covariance cov = sem.true_covariance();
        const auto& nodes = sem.dag().nodes();
        for (const auto& x : nodes) {
            const auto& y = x == nodes.front() ? nodes.back() : nodes.front();
            if (x == y) continue;
            const NodeSet definite = c.directed_parents(x);
            for (const auto& e : ida_local(c, cov, x, y).entries) {
                const NodeSet& candidate = e.parent_sets.at(x);
                for (const auto& a : candidate)
                    for (const auto& b : candidate) {
                        if (a >= b) continue;
                        // a new unshielded collider needs a nonadjacent pair
                        // with at least one newly oriented member
                        if (definite.count(a) && definite.count(b)) continue;
                        REQUIRE(c.adjacent(a, b));
                    }
            }
        }
    }
}

TEST_CASE("joint effect per dag on the worked example") {
    const LinearSem sem = fixtures::four_node_sem();
    const Eigen::VectorXd both = joint_effect_per_dag(sem, {"X1", "X2"}, "X3");
    CHECK(both(0) == doctest::Approx(0.0).scale(1.0));  // X1's path is cut at X2
    CHECK(both(1) == doctest::Approx(2.0).epsilon(1e-12));

    const Eigen::VectorXd single = joint_effect_per_dag(sem, {"X1"}, "X3");
    CHECK(single(0) == doctest::Approx(sem.total_effect_paths("X1", "X3")).epsilon(1e-12));

    const Eigen::VectorXd none = joint_effect_per_dag(sem, {"X3", "X2"}, "X4");
    CHECK(none.cwiseAbs().maxCoeff() == 0.0);

    // covariance route recovers the weights first
    const Eigen::VectorXd from_cov =
        joint_effect_per_dag(sem.dag(), sem.true_covariance(), {"X1", "X2"}, "X3");
    CHECK(from_cov(0) == doctest::Approx(0.0).scale(1.0));
    CHECK(from_cov(1) == doctest::Approx(2.0).epsilon(1e-10));

    CHECK_THROWS_AS(joint_effect_per_dag(sem, {"X1", "X3"}, "X3"), invalid_input);
}

TEST_CASE("jointida mcd and rrc match the truncated-graph oracle") {
    const LinearSem sem = fixtures::four_node_sem();
    const Pdag c = fixtures::four_node_cpdag();
    const Covariance cov = sem.true_covariance();

    const EffectMultiset mcd = jointida_mcd(c, cov, {"X1", "X2"}, "X3");
    const EffectMultiset rrc = jointida_rrc(c, cov, {"X1", "X2"}, "X3");
    REQUIRE(mcd.entries.size() == 3);
    REQUIRE(rrc.entries.size() == 3);

    // the truth DAG's entry is (0, 2)
    bool found = false;
    for (const auto& e : mcd.entries)
        if (std::abs(e.values[0]) < 1e-9 && std::abs(e.values[1] - 2.0) < 1e-9) found = true;
    CHECK(found);

    for (std::size_t k = 0; k < mcd.entries.size(); ++k)
        for (int t = 0; t < 2; ++t)
            CHECK(mcd.entries[k].values[t] ==
                  doctest::Approx(rrc.entries[k].values[t]).epsilon(1e-9).scale(1.0));
}

TEST_CASE("three-way agreement on random instances") {
    Rng rng(86420);
    InstanceConfig cfg;
    cfg.p = 7;
    cfg.expected_degree = 2.5;
    int done = 0;
    while (done < 20) {
        const LinearSem sem = random_faithful_sem(cfg, rng);
        const Pdag c = dag_to_cpdag(sem.dag());
        const Covariance cov = sem.true_covariance();
        const auto& nodes = sem.dag().nodes();

        std::vector<std::string> pool = nodes;
        rng.shuffle(pool);
        const int k = 2 + static_cast<int>(rng.below(2));  // 2 or 3 targets
        std::vector<std::string> targets(pool.begin(), pool.begin() + k);
        const std::string y = pool[k];

        const EffectMultiset mcd = jointida_mcd(c, cov, targets, y);
        const EffectMultiset rrc = jointida_rrc(c, cov, targets, y);
        const auto members = enumerate_dags_in_class(c);
        REQUIRE(mcd.entries.size() == members.size());
        REQUIRE(rrc.entries.size() == members.size());
        for (std::size_t m = 0; m < members.size(); ++m) {
            const Eigen::VectorXd oracle = joint_effect_per_dag(members[m], cov, targets, y);
            for (int t = 0; t < k; ++t) {
                REQUIRE(mcd.entries[m].values[t] ==
                        doctest::Approx(oracle(t)).epsilon(1e-6).scale(1.0));
                REQUIRE(rrc.entries[m].values[t] ==
                        doctest::Approx(oracle(t)).epsilon(1e-6).scale(1.0));
            }
        }
        ++done;
    }
}

TEST_CASE("single-target jointida reduces to ida_global") {
    const LinearSem sem = fixtures::four_node_sem();
    const Pdag c = fixtures::four_node_cpdag();
    const Covariance cov = sem.true_covariance();

    const EffectMultiset global = ida_global(c, cov, "X1", "X3");
    const EffectMultiset mcd = jointida_mcd(c, cov, {"X1"}, "X3");
    const EffectMultiset rrc = jointida_rrc(c, cov, {"X1"}, "X3");
    for (const auto* m : {&mcd, &rrc}) {
        REQUIRE(m->entries.size() == global.entries.size());
        for (std::size_t k = 0; k < m->entries.size(); ++k)
            CHECK(m->entries[k].values[0] ==
                  doctest::Approx(global.entries[k].values[0]).epsilon(1e-9).scale(1.0));
    }
}

TEST_CASE("intervening on a source equals the single-intervention effects") {
    // X and W are sources with no inter-target paths
    Dag g({"W", "X", "Y", "Z"});
    g.add_edge("X", "Y");
    g.add_edge("W", "Y");
    g.add_edge("Y", "Z");
    const LinearSem sem(g, {{"X", "Y", 1.2}, {"W", "Y", -0.8}, {"Y", "Z", 2.0}},
                        {{"W", 1.0}, {"X", 1.0}, {"Y", 1.0}, {"Z", 1.0}});
    const Eigen::VectorXd joint = joint_effect_per_dag(sem, {"W", "X"}, "Z");
    CHECK(joint(0) == doctest::Approx(sem.total_effect_paths("W", "Z")).epsilon(1e-12));
    CHECK(joint(1) == doctest::Approx(sem.total_effect_paths("X", "Z")).epsilon(1e-12));

    const Pdag c = dag_to_cpdag(g);
    const Covariance cov = sem.true_covariance();
    for (const auto& e : jointida_rrc(c, cov, {"W", "X"}, "Z").entries)
        for (int t = 0; t < 2; ++t) CHECK(std::isfinite(e.values[t]));
}

TEST_CASE("distinct values round at 1e-9") {
    EffectMultiset m{{"X"}, "Y", Provenance::Local, {}};
    m.entries.push_back({{}, {1.0}});
    m.entries.push_back({{}, {1.0 + 1e-13}});
    m.entries.push_back({{}, {2.0}});
    const auto distinct = m.distinct_values();
    REQUIRE(distinct.size() == 2);
    CHECK(distinct[0].second == 2);
    CHECK(distinct[1].second == 1);
}
