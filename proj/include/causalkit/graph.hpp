#pragma once

#include <array>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "causalkit/common.hpp"

namespace causalkit {

using NodeSet = std::set<std::string>;

// Directed acyclic graph over labeled nodes. Immutable once built (builders
// aside); all label orders and tie-breaks are lexicographic so results are
// identical across runs and platforms.
class Dag {
public:
    Dag() = default;
    explicit Dag(std::vector<std::string> nodes);

    const std::vector<std::string>& nodes() const { return nodes_; }
    int num_nodes() const { return static_cast<int>(nodes_.size()); }
    bool has_node(const std::string& label) const;
    int index_of(const std::string& label) const;  // throws on unknown label

    // Keeps the invariants: no self-loop, at most one edge per pair, acyclic.
    void add_edge(const std::string& from, const std::string& to);

    bool has_edge(const std::string& from, const std::string& to) const;
    bool adjacent(const std::string& a, const std::string& b) const;
    int num_edges() const { return num_edges_; }

    // Sorted (from, to) label pairs.
    std::vector<std::pair<std::string, std::string>> edges() const;

    // Index-based adjacency for algorithm internals.
    const std::set<int>& parents_of(int v) const { return par_[v]; }
    const std::set<int>& children_of(int v) const { return ch_[v]; }

    bool operator==(const Dag& other) const;

private:
    std::vector<std::string> nodes_;
    std::map<std::string, int> index_;
    std::vector<std::set<int>> par_, ch_;
    int num_edges_ = 0;

    bool reachable(int from, int to) const;
};

// Partially directed graph: disjoint directed and undirected edge sets over
// one skeleton. A CPDAG is a Pdag whose consistent extensions all map back to
// it under dag_to_cpdag.
class Pdag {
public:
    Pdag() = default;
    explicit Pdag(std::vector<std::string> nodes);

    static Pdag from_dag(const Dag& g);                              // all edges directed
    static Pdag complete_undirected(std::vector<std::string> nodes);

    const std::vector<std::string>& nodes() const { return nodes_; }
    int num_nodes() const { return static_cast<int>(nodes_.size()); }
    bool has_node(const std::string& label) const;
    int index_of(const std::string& label) const;

    void add_directed_edge(const std::string& from, const std::string& to);
    void add_undirected_edge(const std::string& a, const std::string& b);
    void remove_adjacency(const std::string& a, const std::string& b);
    // Turns the undirected edge from-to into a directed one.
    void orient(const std::string& from, const std::string& to);

    bool has_directed_edge(const std::string& from, const std::string& to) const;
    bool has_undirected_edge(const std::string& a, const std::string& b) const;
    bool adjacent(const std::string& a, const std::string& b) const;

    int num_directed_edges() const;
    int num_undirected_edges() const;
    int num_adjacencies() const { return num_directed_edges() + num_undirected_edges(); }

    std::vector<std::pair<std::string, std::string>> directed_edges() const;    // sorted
    std::vector<std::pair<std::string, std::string>> undirected_edges() const;  // sorted, a < b

    NodeSet directed_parents(const std::string& v) const;
    NodeSet undirected_neighbors(const std::string& v) const;
    NodeSet adjacencies(const std::string& v) const;

    bool fully_directed() const { return num_undirected_edges() == 0; }
    Dag to_dag() const;  // throws if undirected edges remain

    // Index-based internals.
    const std::set<int>& dpar(int v) const { return dpar_[v]; }
    const std::set<int>& dch(int v) const { return dch_[v]; }
    const std::set<int>& und(int v) const { return und_[v]; }
    bool adjacent_ix(int a, int b) const;

    bool operator==(const Pdag& other) const;

private:
    std::vector<std::string> nodes_;
    std::map<std::string, int> index_;
    std::vector<std::set<int>> dpar_, dch_, und_;

    void check_new_pair(int a, int b) const;
};

// Sources of directed edges into v; undirected neighbors excluded.
NodeSet parents(const Dag& g, const std::string& v);
NodeSet parents(const Pdag& g, const std::string& v);

Pdag skeleton(const Dag& g);
Pdag skeleton(const Pdag& g);

// Global Markov check: true iff every path between a and b is blocked by s.
// Implemented by an ancestor-aware reachability walk; the path-enumeration
// oracle lives in the test suite.
bool is_d_separated(const Dag& g, const NodeSet& a, const NodeSet& b, const NodeSet& s);

// All triples (w, x, z) with w->x<-z, w and z nonadjacent, w < z.
std::vector<std::array<std::string, 3>> unshielded_colliders(const Dag& g);
std::vector<std::array<std::string, 3>> unshielded_colliders(const Pdag& g);

// Completed PDAG of g's Markov equivalence class: skeleton kept, an edge
// directed iff it has that orientation in every Markov-equivalent DAG.
Pdag dag_to_cpdag(const Dag& g);

// Exactly the DAGs d with dag_to_cpdag(d) == c, ordered lexicographically by
// orientation vector over the sorted undirected edges. Desk scale only.
std::vector<Dag> enumerate_dags_in_class(const Pdag& c, int max_undirected_edges = 20);

// One member of the class of c (Dor-Tarsi consistent extension), chosen
// deterministically. Throws invalid_input if no consistent extension exists.
Dag consistent_extension(const Pdag& c);

// Nodes ordered so every edge points forward; ties broken by label.
std::vector<std::string> topological_order(const Dag& g);

}  // namespace causalkit
