#include "causalkit/io.hpp"

#include <nlohmann/json.hpp>

#include "causalkit/harness.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace causalkit;

TEST_CASE("graph json round trip") {
    const Pdag c = fixtures::four_node_cpdag();
    CHECK(pdag_from_json(graph_to_json(c)) == c);

    const Dag g = fixtures::four_node_dag();
    CHECK(dag_from_json(graph_to_json(Pdag::from_dag(g))) == g);
    CHECK_THROWS_AS(dag_from_json(graph_to_json(c)), invalid_input);  // undirected edges

    nlohmann::json bad = graph_to_json(c);
    bad["edges"][0]["type"] = "dashed";
    CHECK_THROWS_AS(pdag_from_json(bad), invalid_input);
    CHECK_THROWS_AS(pdag_from_json(nlohmann::json{{"nodes", {"A"}}}), invalid_input);
}

TEST_CASE("sem json round trip") {
    const LinearSem sem = fixtures::four_node_sem();
    const LinearSem back = sem_from_json(sem_to_json(sem));
    CHECK(back.dag() == sem.dag());
    CHECK(back.weight("X4", "X1") == 2.0);
    CHECK(back.noise_variance("X3") == 1.0);
}

TEST_CASE("data csv round trip is exact") {
    Rng rng(515151);
    InstanceConfig cfg;
    cfg.p = 4;
    cfg.edge_density = 0.5;
    const LinearSem sem = random_sem(cfg, rng);
    const DataMatrix data = sem.simulate(37, 9);
    const DataMatrix back = data_from_csv(data_to_csv(data));
    CHECK(back.labels == data.labels);
    REQUIRE(back.n() == data.n());
    CHECK((back.values.array() == data.values.array()).all());  // %.17g round-trips

    CHECK_THROWS_AS(data_from_csv("a,b\n1.0\n"), invalid_input);   // ragged row
    CHECK_THROWS_AS(data_from_csv("a,b\n1.0,x\n"), invalid_input); // not a number
    CHECK_THROWS_AS(data_from_csv("a,b\n"), invalid_input);        // no rows
}

TEST_CASE("covariance csv") {
    const Covariance cov = fixtures::four_node_sem().true_covariance();
    const Covariance back = covariance_from_csv(covariance_to_csv(cov));
    CHECK(back.labels == cov.labels);
    CHECK((back.mat.array() == cov.mat.array()).all());
    CHECK_THROWS_AS(covariance_from_csv("a,b\n1.0,0.0\n"), invalid_input);  // not square
}

TEST_CASE("effects json carries candidates and multiplicities") {
    const LinearSem sem = fixtures::four_node_sem();
    const EffectMultiset m =
        ida_global(fixtures::four_node_cpdag(), sem.true_covariance(), "X1", "X3");
    const nlohmann::json j = effects_to_json(m, "ida-global");
    CHECK(j.at("provenance") == "enumeration");
    CHECK(j.at("candidates").size() == 3);
    CHECK(j.at("distinct").size() == 3);
    CHECK(j.at("y") == "X3");
}
