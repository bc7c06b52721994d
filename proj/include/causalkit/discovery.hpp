#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "causalkit/indep.hpp"

namespace causalkit {

// First separating set found for each pair whose edge was removed during
// skeleton search. Keys are unordered pairs.
class SepsetMap {
public:
    void set(const std::string& a, const std::string& b, NodeSet s);
    bool has(const std::string& a, const std::string& b) const;
    std::optional<NodeSet> get(const std::string& a, const std::string& b) const;
    std::size_t size() const { return map_.size(); }

private:
    static std::pair<std::string, std::string> key(const std::string& a, const std::string& b);
    std::map<std::pair<std::string, std::string>, NodeSet> map_;
};

struct SkeletonOptions {
    int max_cond = -1;           // cap on conditioning-set size, -1 = unlimited
    bool record_levels = false;  // keep a graph snapshot after each level
};

struct SkeletonReport {
    long ci_tests = 0;
    int levels = 0;  // highest conditioning-set size reached
    bool max_cond_hit = false;
    std::vector<Pdag> level_snapshots;  // filled only when record_levels is set
};

struct SkeletonResult {
    Pdag graph;  // undirected
    SepsetMap sepsets;
    SkeletonReport report;
};

// Brute-force baseline: tests every subset of the remaining nodes. Exponential;
// capped at 12 nodes.
SkeletonResult sgs_skeleton(const CiDecider& d, const std::vector<std::string>& nodes);

// Classic PC skeleton phase. Pairs and conditioning subsets are visited in the
// given node order; edges are removed immediately, so the output depends on
// the order on finite noisy data.
SkeletonResult pc_skeleton(const CiDecider& d, const std::vector<std::string>& nodes,
                           const std::vector<std::string>& order,
                           const SkeletonOptions& opts = {});

// PC-stable: adjacency sets are frozen at the start of each level and removals
// apply at the level's end, so the output is order-independent.
SkeletonResult pc_stable_skeleton(const CiDecider& d, const std::vector<std::string>& nodes,
                                  const SkeletonOptions& opts = {});

// Orients every unshielded triple i-k-j with k not in sepset(i, j) as a
// collider. A later orientation never overwrites an earlier directed edge;
// such conflicts are counted.
Pdag orient_colliders(const Pdag& skel, const SepsetMap& seps, int* conflicts = nullptr);

// Orientation rules R1-R3 applied to a fixed point. Only undirected edges are
// ever oriented, never re-oriented.
Pdag meek_closure(const Pdag& g);

enum class PcVariant { Classic, Stable };

struct RunReport {
    std::string algo;
    long ci_tests = 0;
    int levels = 0;
    int collider_conflicts = 0;
    bool max_cond_hit = false;
    int ges_forward_moves = 0;
    int ges_backward_moves = 0;
    int ges_turning_moves = 0;
    double ges_final_score = 0.0;
};

struct PcResult {
    Pdag cpdag;
    SepsetMap sepsets;
    RunReport report;
};

// skeleton -> orient_colliders -> meek_closure. The order argument is ignored
// by the stable variant. Empty order means "nodes as given".
PcResult pc(const CiDecider& d, const std::vector<std::string>& nodes, PcVariant variant,
            const std::vector<std::string>& order = {}, const SkeletonOptions& opts = {});

// Decomposable Gaussian BIC: log-likelihood of each node given its parents
// minus lambda * (|parents| + 1) * log(n) / 2. Every DAG in a Markov
// equivalence class gets the same total score.
class GaussianBic {
public:
    GaussianBic(const DataMatrix& data, double lambda = 1.0);
    GaussianBic(Covariance cov_mle, int n, double lambda = 1.0);

    double local_score(const std::string& v, const NodeSet& parents) const;
    double local_score_ix(int v, const std::vector<int>& parents) const;
    double total_score(const Dag& g) const;

    const std::vector<std::string>& labels() const { return cov_.labels; }
    int n() const { return n_; }

private:
    Covariance cov_;
    int n_;
    double lambda_;
};

struct GesMove {
    char op;  // '+' insertion, '-' deletion, '~' reversal
    std::string from, to;
    double gain;
    double total_score;
};

struct GesResult {
    Pdag cpdag;
    RunReport report;
    std::vector<GesMove> moves;
};

// Greedy equivalence search with the given decomposable score: a forward
// insertion phase and a backward deletion phase over class-level single-edge
// operators on the CPDAG (Insert(x, y, T) / Delete(x, y, H) with the clique
// and blocked-path validity conditions), plus a desk-scale turning phase
// (single-edge reversals over class members) to escape insert/delete local
// optima. Phases alternate until none improves; the graph is re-completed to
// a CPDAG after every accepted move and ties break lexicographically.
GesResult ges(const GaussianBic& score, const std::vector<std::string>& nodes);

}  // namespace causalkit
