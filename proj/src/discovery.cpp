#include "causalkit/discovery.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>

namespace causalkit {

std::pair<std::string, std::string> SepsetMap::key(const std::string& a, const std::string& b) {
    return {std::min(a, b), std::max(a, b)};
}

void SepsetMap::set(const std::string& a, const std::string& b, NodeSet s) {
    map_[key(a, b)] = std::move(s);
}

bool SepsetMap::has(const std::string& a, const std::string& b) const {
    return map_.count(key(a, b)) > 0;
}

std::optional<NodeSet> SepsetMap::get(const std::string& a, const std::string& b) const {
    auto it = map_.find(key(a, b));
    if (it == map_.end()) return std::nullopt;
    return it->second;
}

namespace {

// Lexicographic k-subsets of pool; callback returns true to stop.
bool for_each_subset(const std::vector<int>& pool, int k,
                     const std::function<bool(const std::vector<int>&)>& fn) {
    const int m = static_cast<int>(pool.size());
    if (k > m) return false;
    std::vector<int> pick(k);
    std::function<bool(int, int)> rec = [&](int start, int depth) {
        if (depth == k) return fn(pick);
        for (int t = start; t <= m - (k - depth); ++t) {
            pick[depth] = pool[t];
            if (rec(t + 1, depth + 1)) return true;
        }
        return false;
    };
    return rec(0, 0);
}

NodeSet labels_of(const std::vector<std::string>& nodes, const std::vector<int>& ix) {
    NodeSet out;
    for (int v : ix) out.insert(nodes[v]);
    return out;
}

}  // namespace

SkeletonResult sgs_skeleton(const CiDecider& d, const std::vector<std::string>& nodes) {
    const int p = static_cast<int>(nodes.size());
    if (p > 12)
        throw budget_exceeded("sgs_skeleton is exponential; node budget is 12, got " +
                              std::to_string(p));
    SkeletonResult res{Pdag::complete_undirected(nodes), {}, {}};
    std::vector<int> ix(p);
    for (int v = 0; v < p; ++v) ix[v] = d.index_of(nodes[v]);

    for (int a = 0; a < p; ++a) {
        for (int b = a + 1; b < p; ++b) {
            std::vector<int> rest;
            for (int t = 0; t < p; ++t)
                if (t != a && t != b) rest.push_back(t);
            bool removed = false;
            for (int k = 0; k <= static_cast<int>(rest.size()) && !removed; ++k) {
                for_each_subset(rest, k, [&](const std::vector<int>& sub) {
                    std::vector<int> cond;
                    for (int t : sub) cond.push_back(ix[t]);
                    ++res.report.ci_tests;
                    if (d.decide_ix(ix[a], ix[b], cond)) {
                        res.graph.remove_adjacency(nodes[a], nodes[b]);
                        res.sepsets.set(nodes[a], nodes[b], labels_of(nodes, sub));
                        removed = true;
                    }
                    return removed;
                });
            }
        }
    }
    return res;
}

namespace {

struct PairSchedule {
    std::vector<std::string> order;                       // visit order of nodes
    std::map<std::string, int> pos;                       // node -> position in order
};

PairSchedule make_schedule(const std::vector<std::string>& order) {
    PairSchedule s{order, {}};
    for (int t = 0; t < static_cast<int>(order.size()); ++t) s.pos[order[t]] = t;
    return s;
}

// Adjacency of v (minus excluded node) sorted by schedule position.
std::vector<std::string> sorted_adjacency(const Pdag& g, const PairSchedule& s,
                                          const std::string& v, const std::string& excluded) {
    std::vector<std::string> adj;
    for (const auto& u : g.adjacencies(v))
        if (u != excluded) adj.push_back(u);
    std::sort(adj.begin(), adj.end(),
              [&](const std::string& a, const std::string& b) {
                  return s.pos.at(a) < s.pos.at(b);
              });
    return adj;
}

// Searches the two adjacency sides of pair (i, j) for a separating set of
// size level. Returns the first one found in schedule order.
std::optional<NodeSet> find_sepset(const CiDecider& d, const Pdag& g, const PairSchedule& s,
                                   const std::string& i, const std::string& j, int level,
                                   long& ci_tests) {
    std::optional<NodeSet> found;
    for (int side = 0; side < 2 && !found; ++side) {
        if (side == 1 && level == 0) continue;  // the empty set was already tested
        const auto& from = side == 0 ? i : j;
        const auto& other = side == 0 ? j : i;
        auto adj = sorted_adjacency(g, s, from, other);
        if (static_cast<int>(adj.size()) < level) continue;
        std::vector<int> pool(adj.size());
        for (int t = 0; t < static_cast<int>(adj.size()); ++t) pool[t] = t;
        for_each_subset(pool, level, [&](const std::vector<int>& sub) {
            NodeSet cond;
            for (int t : sub) cond.insert(adj[t]);
            ++ci_tests;
            if (d.decide(i, j, cond)) {
                found = cond;
                return true;
            }
            return false;
        });
    }
    return found;
}

}  // namespace

SkeletonResult pc_skeleton(const CiDecider& d, const std::vector<std::string>& nodes,
                           const std::vector<std::string>& order, const SkeletonOptions& opts) {
    std::vector<std::string> visit = order.empty() ? nodes : order;
    {
        auto a = visit, b = nodes;
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        if (a != b) throw invalid_input("order must be a permutation of the node labels");
    }
    auto sched = make_schedule(visit);
    SkeletonResult res{Pdag::complete_undirected(nodes), {}, {}};

    for (int level = 0;; ++level) {
        bool any_testable = false;
        for (const auto& [i, j] : res.graph.undirected_edges()) {
            if (static_cast<int>(res.graph.adjacencies(i).size()) - 1 >= level ||
                static_cast<int>(res.graph.adjacencies(j).size()) - 1 >= level) {
                any_testable = true;
                break;
            }
        }
        if (!any_testable) break;
        if (opts.max_cond >= 0 && level > opts.max_cond) {
            res.report.max_cond_hit = true;
            break;
        }
        res.report.levels = level;

        // visit pairs in schedule order, removing edges immediately
        for (int a = 0; a < static_cast<int>(visit.size()); ++a) {
            for (int b = a + 1; b < static_cast<int>(visit.size()); ++b) {
                const auto& i = visit[a];
                const auto& j = visit[b];
                if (!res.graph.adjacent(i, j)) continue;
                auto sep = find_sepset(d, res.graph, sched, i, j, level, res.report.ci_tests);
                if (sep) {
                    res.graph.remove_adjacency(i, j);
                    res.sepsets.set(i, j, *sep);
                }
            }
        }
        if (opts.record_levels) res.report.level_snapshots.push_back(res.graph);
    }
    return res;
}

SkeletonResult pc_stable_skeleton(const CiDecider& d, const std::vector<std::string>& nodes,
                                  const SkeletonOptions& opts) {
    // Canonical label order; the output does not depend on it because
    // adjacency sets are frozen per level and removals land at level end.
    std::vector<std::string> canonical = nodes;
    std::sort(canonical.begin(), canonical.end());
    auto sched = make_schedule(canonical);
    SkeletonResult res{Pdag::complete_undirected(nodes), {}, {}};

    for (int level = 0;; ++level) {
        bool any_testable = false;
        for (const auto& [i, j] : res.graph.undirected_edges()) {
            if (static_cast<int>(res.graph.adjacencies(i).size()) - 1 >= level ||
                static_cast<int>(res.graph.adjacencies(j).size()) - 1 >= level) {
                any_testable = true;
                break;
            }
        }
        if (!any_testable) break;
        if (opts.max_cond >= 0 && level > opts.max_cond) {
            res.report.max_cond_hit = true;
            break;
        }
        res.report.levels = level;

        const Pdag frozen = res.graph;  // adjacency sets fixed for the level
        std::vector<std::pair<std::pair<std::string, std::string>, NodeSet>> removals;
        for (const auto& [i, j] : frozen.undirected_edges()) {
            auto sep = find_sepset(d, frozen, sched, i, j, level, res.report.ci_tests);
            if (sep) removals.push_back({{i, j}, *sep});
        }
        for (const auto& [pair, sep] : removals) {
            res.graph.remove_adjacency(pair.first, pair.second);
            res.sepsets.set(pair.first, pair.second, sep);
        }
        if (opts.record_levels) res.report.level_snapshots.push_back(res.graph);
    }
    return res;
}

Pdag orient_colliders(const Pdag& skel, const SepsetMap& seps, int* conflicts) {
    Pdag g = skel;
    int conflict_count = 0;

    std::vector<std::array<std::string, 3>> triples;  // (i, k, j), i < j
    for (const auto& k : g.nodes()) {
        auto adj = g.adjacencies(k);
        for (auto i = adj.begin(); i != adj.end(); ++i)
            for (auto j = std::next(i); j != adj.end(); ++j)
                if (!g.adjacent(*i, *j)) triples.push_back({*i, k, *j});
    }
    std::sort(triples.begin(), triples.end());

    auto orient_into = [&](const std::string& from, const std::string& to) {
        if (g.has_undirected_edge(from, to)) {
            g.orient(from, to);
        } else if (g.has_directed_edge(to, from)) {
            ++conflict_count;  // an earlier orientation wins
        }
    };
    for (const auto& [i, k, j] : triples) {
        auto sep = seps.get(i, j);
        if (!sep || sep->count(k)) continue;
        orient_into(i, k);
        orient_into(j, k);
    }
    if (conflicts) *conflicts = conflict_count;
    return g;
}

Pdag meek_closure(const Pdag& g) {
    Pdag out = g;
    bool changed = true;
    while (changed) {
        changed = false;
        auto orient = [&](const std::string& from, const std::string& to) {
            out.orient(from, to);
            changed = true;
        };
        // R1: a -> b, b - c, a and c nonadjacent  =>  b -> c
        for (const auto& [a, b] : out.directed_edges()) {
            for (const auto& c : out.undirected_neighbors(b))
                if (c != a && !out.adjacent(a, c)) orient(b, c);
        }
        // R2: a -> b -> c and a - c  =>  a -> c
        for (const auto& [a, c] : out.undirected_edges()) {
            bool a_to_c = false, c_to_a = false;
            for (const auto& b : out.nodes()) {
                if (out.has_directed_edge(a, b) && out.has_directed_edge(b, c)) a_to_c = true;
                if (out.has_directed_edge(c, b) && out.has_directed_edge(b, a)) c_to_a = true;
            }
            if (a_to_c && !out.has_undirected_edge(a, c)) continue;  // oriented meanwhile
            if (a_to_c)
                orient(a, c);
            else if (c_to_a && out.has_undirected_edge(a, c))
                orient(c, a);
        }
        // R3: a - b, a - c, a - d, c -> b, d -> b, c and d nonadjacent  =>  a -> b
        for (const auto& [x, y] : out.undirected_edges()) {
            for (int role = 0; role < 2; ++role) {
                const auto& a = role == 0 ? x : y;
                const auto& b = role == 0 ? y : x;
                if (!out.has_undirected_edge(a, b)) break;  // oriented meanwhile
                std::vector<std::string> candidates;
                for (const auto& c : out.undirected_neighbors(a))
                    if (c != b && out.has_directed_edge(c, b)) candidates.push_back(c);
                bool fired = false;
                for (std::size_t s = 0; s < candidates.size() && !fired; ++s)
                    for (std::size_t t = s + 1; t < candidates.size() && !fired; ++t)
                        if (!out.adjacent(candidates[s], candidates[t])) {
                            orient(a, b);
                            fired = true;
                        }
                if (fired) break;
            }
        }
    }
    return out;
}

PcResult pc(const CiDecider& d, const std::vector<std::string>& nodes, PcVariant variant,
            const std::vector<std::string>& order, const SkeletonOptions& opts) {
    SkeletonResult skel = variant == PcVariant::Stable
                              ? pc_stable_skeleton(d, nodes, opts)
                              : pc_skeleton(d, nodes, order, opts);
    int conflicts = 0;
    Pdag oriented = orient_colliders(skel.graph, skel.sepsets, &conflicts);
    PcResult res{meek_closure(oriented), std::move(skel.sepsets), {}};
    res.report.algo = variant == PcVariant::Stable ? "pc-stable" : "pc";
    res.report.ci_tests = skel.report.ci_tests;
    res.report.levels = skel.report.levels;
    res.report.max_cond_hit = skel.report.max_cond_hit;
    res.report.collider_conflicts = conflicts;
    return res;
}

GaussianBic::GaussianBic(const DataMatrix& data, double lambda)
    : GaussianBic(Covariance{data.labels, data.sample_covariance()}, data.n(), lambda) {}

GaussianBic::GaussianBic(Covariance cov_mle, int n, double lambda)
    : cov_(std::move(cov_mle)), n_(n), lambda_(lambda) {
    if (n_ <= static_cast<int>(cov_.labels.size()))
        throw invalid_input("BIC score needs n > number of variables");
    if (!(lambda_ > 0.0)) throw invalid_input("penalty multiplier must be positive");
}

double GaussianBic::local_score_ix(int v, const std::vector<int>& parents) const {
    for (int u : parents)
        if (u == v) throw invalid_input("node cannot be its own parent");

    double resid = cov_.mat(v, v);
    if (!parents.empty()) {
        const int k = static_cast<int>(parents.size());
        Eigen::MatrixXd spp(k, k);
        Eigen::VectorXd spv(k);
        for (int a = 0; a < k; ++a) {
            spv(a) = cov_.mat(parents[a], v);
            for (int b = 0; b < k; ++b) spp(a, b) = cov_.mat(parents[a], parents[b]);
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(spp);
        if (!lu.isInvertible()) throw invalid_input("singular parent covariance submatrix");
        resid -= spv.dot(lu.solve(spv));
    }
    if (resid < 1e-12) resid = 1e-12;

    constexpr double log_two_pi = 1.8378770664093454836;
    const double loglik = -0.5 * n_ * (log_two_pi + std::log(resid) + 1.0);
    const double penalty =
        lambda_ * (static_cast<double>(parents.size()) + 1.0) * std::log(n_) / 2.0;
    return loglik - penalty;
}

double GaussianBic::local_score(const std::string& v, const NodeSet& parents) const {
    std::vector<int> pix;
    pix.reserve(parents.size());
    for (const auto& label : parents) pix.push_back(cov_.index_of(label));
    return local_score_ix(cov_.index_of(v), pix);
}

double GaussianBic::total_score(const Dag& g) const {
    double total = 0.0;
    for (const auto& v : g.nodes()) total += local_score(v, parents(g, v));
    return total;
}

namespace {

// Neighbors of y (undirected) that are adjacent to x.
NodeSet na_set(const Pdag& p, const std::string& y, const std::string& x) {
    NodeSet out;
    for (const auto& n : p.undirected_neighbors(y))
        if (p.adjacent(n, x)) out.insert(n);
    return out;
}

bool is_clique(const Pdag& p, const NodeSet& s) {
    for (auto a = s.begin(); a != s.end(); ++a)
        for (auto b = std::next(a); b != s.end(); ++b)
            if (!p.adjacent(*a, *b)) return false;
    return true;
}

// Is there a semi-directed path (undirected edges or edges along the walk
// direction) from `from` to `to` that avoids `blocked`?
bool semi_directed_path_avoiding(const Pdag& p, const std::string& from, const std::string& to,
                                 const NodeSet& blocked) {
    const int s = p.index_of(from), t = p.index_of(to);
    std::vector<char> block(p.num_nodes(), 0);
    for (const auto& label : blocked) block[p.index_of(label)] = 1;
    if (block[s] || block[t]) return false;
    std::deque<int> queue{s};
    std::vector<char> seen(p.num_nodes(), 0);
    seen[s] = 1;
    while (!queue.empty()) {
        const int v = queue.front();
        queue.pop_front();
        if (v == t) return true;
        auto push = [&](int w) {
            if (!seen[w] && !block[w]) {
                seen[w] = 1;
                queue.push_back(w);
            }
        };
        for (int w : p.dch(v)) push(w);
        for (int w : p.und(v)) push(w);
    }
    return false;
}

std::vector<std::string> sorted_labels(const NodeSet& s) {
    return {s.begin(), s.end()};
}

Pdag recomplete(const Pdag& pdag) { return dag_to_cpdag(consistent_extension(pdag)); }

}  // namespace

// Greedy equivalence search with the class-level Insert(x, y, T) and
// Delete(x, y, H) operators; the graph is re-completed to a CPDAG after every
// applied operator.
GesResult ges(const GaussianBic& score, const std::vector<std::string>& nodes) {
    constexpr double min_gain = 1e-10;  // stop threshold against float churn
    std::vector<std::string> sorted_nodes = nodes;
    std::sort(sorted_nodes.begin(), sorted_nodes.end());

    Pdag cpdag(nodes);
    double total = 0.0;
    for (const auto& v : sorted_nodes) total += score.local_score(v, {});

    GesResult res;
    res.report.algo = "ges";
    const int max_moves = nodes.empty() ? 1 : static_cast<int>(nodes.size() * nodes.size());

    struct Candidate {
        double gain = 0.0;
        std::string x, y;
        std::vector<std::string> extras;  // T for inserts, H for deletes
        bool valid = false;
    };

    auto best_insert = [&]() {
        Candidate best;
        best.gain = min_gain;
        for (const auto& x : sorted_nodes) {
            for (const auto& y : sorted_nodes) {
                if (x == y || cpdag.adjacent(x, y)) continue;
                const NodeSet na = na_set(cpdag, y, x);
                const NodeSet pa_y = cpdag.directed_parents(y);
                std::vector<std::string> pool;
                for (const auto& n : cpdag.undirected_neighbors(y))
                    if (!cpdag.adjacent(n, x)) pool.push_back(n);
                for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << pool.size()); ++mask) {
                    NodeSet t;
                    for (std::size_t i = 0; i < pool.size(); ++i)
                        if (mask >> i & 1) t.insert(pool[i]);
                    NodeSet na_t = na;
                    na_t.insert(t.begin(), t.end());
                    if (!is_clique(cpdag, na_t)) continue;
                    if (semi_directed_path_avoiding(cpdag, y, x, na_t)) continue;
                    NodeSet base = na_t;
                    base.insert(pa_y.begin(), pa_y.end());
                    NodeSet with_x = base;
                    with_x.insert(x);
                    const double gain = score.local_score(y, with_x) - score.local_score(y, base);
                    if (gain > best.gain) {
                        best = {gain, x, y, sorted_labels(t), true};
                    }
                }
            }
        }
        return best;
    };

    auto best_delete = [&]() {
        Candidate best;
        best.gain = min_gain;
        for (const auto& x : sorted_nodes) {
            for (const auto& y : sorted_nodes) {
                if (x == y) continue;
                if (!cpdag.has_directed_edge(x, y) && !cpdag.has_undirected_edge(x, y)) continue;
                const NodeSet na = na_set(cpdag, y, x);
                const NodeSet pa_y = cpdag.directed_parents(y);
                std::vector<std::string> pool(na.begin(), na.end());
                for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << pool.size()); ++mask) {
                    NodeSet keep = na;
                    std::vector<std::string> h;
                    for (std::size_t i = 0; i < pool.size(); ++i)
                        if (mask >> i & 1) {
                            keep.erase(pool[i]);
                            h.push_back(pool[i]);
                        }
                    if (!is_clique(cpdag, keep)) continue;
                    NodeSet without_x = keep;
                    without_x.insert(pa_y.begin(), pa_y.end());
                    without_x.erase(x);
                    NodeSet with_x = without_x;
                    with_x.insert(x);
                    const double gain =
                        score.local_score(y, without_x) - score.local_score(y, with_x);
                    if (gain > best.gain) {
                        best = {gain, x, y, h, true};
                    }
                }
            }
        }
        return best;
    };

    auto forward_phase = [&]() {
        int accepted = 0;
        for (int moves = 0; moves <= max_moves; ++moves) {
            const Candidate best = best_insert();
            if (!best.valid) break;
            Pdag next = cpdag;
            next.add_directed_edge(best.x, best.y);
            for (const auto& t : best.extras) next.orient(t, best.y);
            cpdag = recomplete(next);
            total += best.gain;
            res.moves.push_back({'+', best.x, best.y, best.gain, total});
            ++res.report.ges_forward_moves;
            ++accepted;
        }
        return accepted;
    };

    auto backward_phase = [&]() {
        int accepted = 0;
        for (int moves = 0; moves <= max_moves; ++moves) {
            const Candidate best = best_delete();
            if (!best.valid) break;
            Pdag next = cpdag;
            next.remove_adjacency(best.x, best.y);
            for (const auto& h : best.extras) {
                if (next.has_undirected_edge(best.y, h)) next.orient(best.y, h);
                if (next.has_undirected_edge(best.x, h)) next.orient(best.x, h);
            }
            cpdag = recomplete(next);
            total += best.gain;
            res.moves.push_back({'-', best.x, best.y, best.gain, total});
            ++res.report.ges_backward_moves;
            ++accepted;
        }
        return accepted;
    };

    // Turning phase: best single-edge reversal over the members of the
    // current class. Escapes the insert/delete local optima that remain after
    // the two main phases; skipped when the class is too large to enumerate.
    auto turning_phase = [&]() {
        int accepted = 0;
        for (int moves = 0; moves <= max_moves; ++moves) {
            std::vector<Dag> members;
            try {
                members = enumerate_dags_in_class(cpdag);
            } catch (const budget_exceeded&) {
                return accepted;
            }
            double best_gain = min_gain;
            Dag best_dag;
            std::pair<std::string, std::string> best_edge;
            for (const Dag& d : members) {
                for (const auto& [u, v] : d.edges()) {
                    Dag cand(d.nodes());
                    bool acyclic = true;
                    try {
                        for (const auto& [a, b] : d.edges())
                            if (!(a == u && b == v)) cand.add_edge(a, b);
                        cand.add_edge(v, u);
                    } catch (const invalid_input&) {
                        acyclic = false;
                    }
                    if (!acyclic) continue;
                    NodeSet pa_v = parents(d, v), pa_u = parents(d, u);
                    NodeSet pa_v_new = pa_v, pa_u_new = pa_u;
                    pa_v_new.erase(u);
                    pa_u_new.insert(v);
                    const double gain =
                        score.local_score(v, pa_v_new) + score.local_score(u, pa_u_new) -
                        score.local_score(v, pa_v) - score.local_score(u, pa_u);
                    if (gain > best_gain) {
                        best_gain = gain;
                        best_dag = std::move(cand);
                        best_edge = {v, u};
                    }
                }
            }
            if (best_edge.first.empty()) break;
            cpdag = dag_to_cpdag(best_dag);
            total += best_gain;
            res.moves.push_back({'~', best_edge.first, best_edge.second, best_gain, total});
            ++res.report.ges_turning_moves;
            ++accepted;
        }
        return accepted;
    };

    // forward, backward, then turning; alternate until no phase improves.
    // Every accepted move raises the score by > min_gain, so this terminates.
    for (int cycle = 0; cycle <= max_moves; ++cycle) {
        const int accepted = forward_phase() + backward_phase() + turning_phase();
        if (accepted == 0) break;
    }

    res.report.ges_final_score = total;
    res.cpdag = cpdag;
    return res;
}

}  // namespace causalkit
