#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "causalkit/sem.hpp"

namespace causalkit {

// One candidate in an effect multiset: the parent set assumed for each
// intervention node and the resulting effect value(s).
struct EffectEntry {
    std::map<std::string, NodeSet> parent_sets;  // per intervention node
    std::vector<double> values;                  // one entry per intervention node
};

enum class Provenance { Local, Enumeration };

// Multiset of possible total effects of an intervention (vector-valued for
// joint interventions), one entry per candidate parent set or member DAG.
struct EffectMultiset {
    std::vector<std::string> targets;
    std::string response;
    Provenance provenance = Provenance::Local;
    std::vector<EffectEntry> entries;

    // Values rounded to 1e-9 before grouping.
    std::vector<std::pair<std::vector<double>, int>> distinct_values() const;
    std::vector<double> scalar_values() const;  // requires single-target entries
};

// Theta^L: one effect per locally valid parent set of x. A candidate subset of
// the undirected neighbors of x is locally valid iff orienting it into x
// creates no new unshielded collider at x.
EffectMultiset ida_local(const Pdag& c, const Covariance& cov, const std::string& x,
                         const std::string& y);

// Theta: one effect per DAG in the equivalence class, adjusting for that DAG's
// parents of x. Desk scale only.
EffectMultiset ida_global(const Pdag& c, const Covariance& cov, const std::string& x,
                          const std::string& y, int max_undirected_edges = 20);

// Truncated-graph oracle: entry k is the sum of directed-path weight products
// from target k to y avoiding the other targets.
Eigen::VectorXd joint_effect_per_dag(const LinearSem& sem, const std::vector<std::string>& targets,
                                     const std::string& y);
// Same, with edge weights recovered from the covariance by per-node
// regression on the DAG's parent sets.
Eigen::VectorXd joint_effect_per_dag(const Dag& dag, const Covariance& cov,
                                     const std::vector<std::string>& targets,
                                     const std::string& y);

// Modifying-Cholesky-decompositions estimator: factor the covariance along a
// topological order, zero each target's dependence on its predecessors, and
// read the joint effects off the recomposed interventional covariance.
EffectMultiset jointida_mcd(const Pdag& c, const Covariance& cov,
                            const std::vector<std::string>& targets, const std::string& y,
                            int max_undirected_edges = 20);

// Recursive regression composition: joint effects assembled from
// single-intervention effects via
//   f_{S+c}(a -> b) = f_S(a -> b) - f_S(a -> c) f_S(c -> b).
EffectMultiset jointida_rrc(const Pdag& c, const Covariance& cov,
                            const std::vector<std::string>& targets, const std::string& y,
                            int max_undirected_edges = 20);

}  // namespace causalkit
