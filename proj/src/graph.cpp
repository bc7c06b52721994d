#include "causalkit/graph.hpp"

#include <algorithm>
#include <deque>
#include <functional>

#include "causalkit/discovery.hpp"

namespace causalkit {

namespace {

std::map<std::string, int> build_index(const std::vector<std::string>& nodes) {
    std::map<std::string, int> index;
    for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
        if (nodes[i].empty()) throw invalid_input("empty node label");
        if (!index.emplace(nodes[i], i).second)
            throw invalid_input("duplicate node label: " + nodes[i]);
    }
    return index;
}

}  // namespace

Dag::Dag(std::vector<std::string> nodes) : nodes_(std::move(nodes)) {
    index_ = build_index(nodes_);
    par_.resize(nodes_.size());
    ch_.resize(nodes_.size());
}

bool Dag::has_node(const std::string& label) const { return index_.count(label) > 0; }

int Dag::index_of(const std::string& label) const {
    auto it = index_.find(label);
    if (it == index_.end()) throw invalid_input("unknown node label: " + label);
    return it->second;
}

bool Dag::reachable(int from, int to) const {
    if (from == to) return true;
    std::vector<char> seen(nodes_.size(), 0);
    std::deque<int> queue{from};
    seen[from] = 1;
    while (!queue.empty()) {
        int v = queue.front();
        queue.pop_front();
        for (int c : ch_[v]) {
            if (c == to) return true;
            if (!seen[c]) {
                seen[c] = 1;
                queue.push_back(c);
            }
        }
    }
    return false;
}

void Dag::add_edge(const std::string& from, const std::string& to) {
    const int u = index_of(from), v = index_of(to);
    if (u == v) throw invalid_input("self-loop at " + from);
    if (ch_[u].count(v) || ch_[v].count(u))
        throw invalid_input("edge already present between " + from + " and " + to);
    if (reachable(v, u))
        throw invalid_input("edge " + from + " -> " + to + " would create a directed cycle");
    ch_[u].insert(v);
    par_[v].insert(u);
    ++num_edges_;
}

bool Dag::has_edge(const std::string& from, const std::string& to) const {
    return ch_[index_of(from)].count(index_of(to)) > 0;
}

bool Dag::adjacent(const std::string& a, const std::string& b) const {
    const int u = index_of(a), v = index_of(b);
    return ch_[u].count(v) > 0 || ch_[v].count(u) > 0;
}

std::vector<std::pair<std::string, std::string>> Dag::edges() const {
    std::vector<std::pair<std::string, std::string>> out;
    out.reserve(num_edges_);
    for (int u = 0; u < num_nodes(); ++u)
        for (int v : ch_[u]) out.emplace_back(nodes_[u], nodes_[v]);
    std::sort(out.begin(), out.end());
    return out;
}

bool Dag::operator==(const Dag& other) const {
    // label-based: node order is presentation, not structure
    auto a = nodes_, b = other.nodes_;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return a == b && edges() == other.edges();
}

Pdag::Pdag(std::vector<std::string> nodes) : nodes_(std::move(nodes)) {
    index_ = build_index(nodes_);
    dpar_.resize(nodes_.size());
    dch_.resize(nodes_.size());
    und_.resize(nodes_.size());
}

Pdag Pdag::from_dag(const Dag& g) {
    Pdag p(g.nodes());
    for (const auto& [from, to] : g.edges()) p.add_directed_edge(from, to);
    return p;
}

Pdag Pdag::complete_undirected(std::vector<std::string> nodes) {
    Pdag p(std::move(nodes));
    for (int a = 0; a < p.num_nodes(); ++a)
        for (int b = a + 1; b < p.num_nodes(); ++b) {
            p.und_[a].insert(b);
            p.und_[b].insert(a);
        }
    return p;
}

bool Pdag::has_node(const std::string& label) const { return index_.count(label) > 0; }

int Pdag::index_of(const std::string& label) const {
    auto it = index_.find(label);
    if (it == index_.end()) throw invalid_input("unknown node label: " + label);
    return it->second;
}

void Pdag::check_new_pair(int a, int b) const {
    if (a == b) throw invalid_input("self-loop at " + nodes_[a]);
    if (adjacent_ix(a, b))
        throw invalid_input("edge already present between " + nodes_[a] + " and " + nodes_[b]);
}

void Pdag::add_directed_edge(const std::string& from, const std::string& to) {
    const int u = index_of(from), v = index_of(to);
    check_new_pair(u, v);
    dch_[u].insert(v);
    dpar_[v].insert(u);
}

void Pdag::add_undirected_edge(const std::string& a, const std::string& b) {
    const int u = index_of(a), v = index_of(b);
    check_new_pair(u, v);
    und_[u].insert(v);
    und_[v].insert(u);
}

void Pdag::remove_adjacency(const std::string& a, const std::string& b) {
    const int u = index_of(a), v = index_of(b);
    dch_[u].erase(v);
    dpar_[v].erase(u);
    dch_[v].erase(u);
    dpar_[u].erase(v);
    und_[u].erase(v);
    und_[v].erase(u);
}

void Pdag::orient(const std::string& from, const std::string& to) {
    const int u = index_of(from), v = index_of(to);
    if (!und_[u].count(v))
        throw invalid_input("no undirected edge between " + from + " and " + to);
    und_[u].erase(v);
    und_[v].erase(u);
    dch_[u].insert(v);
    dpar_[v].insert(u);
}

bool Pdag::has_directed_edge(const std::string& from, const std::string& to) const {
    return dch_[index_of(from)].count(index_of(to)) > 0;
}

bool Pdag::has_undirected_edge(const std::string& a, const std::string& b) const {
    return und_[index_of(a)].count(index_of(b)) > 0;
}

bool Pdag::adjacent_ix(int a, int b) const {
    return dch_[a].count(b) > 0 || dch_[b].count(a) > 0 || und_[a].count(b) > 0;
}

bool Pdag::adjacent(const std::string& a, const std::string& b) const {
    return adjacent_ix(index_of(a), index_of(b));
}

int Pdag::num_directed_edges() const {
    int n = 0;
    for (const auto& s : dch_) n += static_cast<int>(s.size());
    return n;
}

int Pdag::num_undirected_edges() const {
    int n = 0;
    for (const auto& s : und_) n += static_cast<int>(s.size());
    return n / 2;
}

std::vector<std::pair<std::string, std::string>> Pdag::directed_edges() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (int u = 0; u < num_nodes(); ++u)
        for (int v : dch_[u]) out.emplace_back(nodes_[u], nodes_[v]);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::pair<std::string, std::string>> Pdag::undirected_edges() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (int u = 0; u < num_nodes(); ++u)
        for (int v : und_[u]) {
            auto a = std::min(nodes_[u], nodes_[v]);
            auto b = std::max(nodes_[u], nodes_[v]);
            if (nodes_[u] == a) out.emplace_back(a, b);
        }
    std::sort(out.begin(), out.end());
    return out;
}

NodeSet Pdag::directed_parents(const std::string& v) const {
    NodeSet out;
    for (int p : dpar_[index_of(v)]) out.insert(nodes_[p]);
    return out;
}

NodeSet Pdag::undirected_neighbors(const std::string& v) const {
    NodeSet out;
    for (int u : und_[index_of(v)]) out.insert(nodes_[u]);
    return out;
}

NodeSet Pdag::adjacencies(const std::string& v) const {
    const int i = index_of(v);
    NodeSet out;
    for (int u : dpar_[i]) out.insert(nodes_[u]);
    for (int u : dch_[i]) out.insert(nodes_[u]);
    for (int u : und_[i]) out.insert(nodes_[u]);
    return out;
}

Dag Pdag::to_dag() const {
    if (!fully_directed()) throw invalid_input("graph still has undirected edges");
    Dag d(nodes_);
    for (const auto& [from, to] : directed_edges()) d.add_edge(from, to);
    return d;
}

bool Pdag::operator==(const Pdag& other) const {
    auto a = nodes_, b = other.nodes_;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return a == b && directed_edges() == other.directed_edges() &&
           undirected_edges() == other.undirected_edges();
}

NodeSet parents(const Dag& g, const std::string& v) {
    NodeSet out;
    for (int p : g.parents_of(g.index_of(v))) out.insert(g.nodes()[p]);
    return out;
}

NodeSet parents(const Pdag& g, const std::string& v) { return g.directed_parents(v); }

Pdag skeleton(const Dag& g) {
    Pdag p(g.nodes());
    for (const auto& [from, to] : g.edges()) p.add_undirected_edge(from, to);
    return p;
}

Pdag skeleton(const Pdag& g) {
    Pdag p(g.nodes());
    for (const auto& [from, to] : g.directed_edges()) p.add_undirected_edge(from, to);
    for (const auto& [a, b] : g.undirected_edges()) p.add_undirected_edge(a, b);
    return p;
}

namespace {

std::vector<int> to_indices(const Dag& g, const NodeSet& s) {
    std::vector<int> out;
    out.reserve(s.size());
    for (const auto& label : s) out.push_back(g.index_of(label));
    return out;
}

}  // namespace

bool is_d_separated(const Dag& g, const NodeSet& a, const NodeSet& b, const NodeSet& s) {
    if (a.empty() || b.empty()) throw invalid_input("d-separation needs nonempty node sets");
    for (const auto& x : a)
        if (b.count(x) || s.count(x)) throw invalid_input("sets overlap at " + x);
    for (const auto& x : b)
        if (s.count(x)) throw invalid_input("sets overlap at " + x);

    const auto ai = to_indices(g, a);
    const auto bi = to_indices(g, b);
    const auto si = to_indices(g, s);
    const int p = g.num_nodes();

    std::vector<char> in_s(p, 0), in_b(p, 0);
    for (int v : si) in_s[v] = 1;
    for (int v : bi) in_b[v] = 1;

    // Nodes in s or with a descendant in s: open colliders.
    std::vector<char> anc_s(p, 0);
    {
        std::deque<int> queue(si.begin(), si.end());
        for (int v : si) anc_s[v] = 1;
        while (!queue.empty()) {
            int v = queue.front();
            queue.pop_front();
            for (int u : g.parents_of(v))
                if (!anc_s[u]) {
                    anc_s[u] = 1;
                    queue.push_back(u);
                }
        }
    }

    // Reachability walk over (node, arrival direction) states.
    // Direction 0: trail arrives from a child (or is a start node).
    // Direction 1: trail arrives from a parent.
    std::vector<std::array<char, 2>> seen(p, {0, 0});
    std::deque<std::pair<int, int>> queue;
    for (int v : ai) {
        queue.emplace_back(v, 0);
        seen[v][0] = 1;
    }
    while (!queue.empty()) {
        auto [v, dir] = queue.front();
        queue.pop_front();
        if (in_b[v]) return false;
        auto push = [&](int u, int d) {
            if (!seen[u][d]) {
                seen[u][d] = 1;
                queue.emplace_back(u, d);
            }
        };
        if (dir == 0) {
            if (!in_s[v]) {
                for (int u : g.parents_of(v)) push(u, 0);
                for (int u : g.children_of(v)) push(u, 1);
            }
        } else {
            if (!in_s[v])
                for (int u : g.children_of(v)) push(u, 1);
            if (anc_s[v])
                for (int u : g.parents_of(v)) push(u, 0);
        }
    }
    return true;
}

namespace {

template <class Parents, class Adjacent>
std::vector<std::array<std::string, 3>> colliders_impl(const std::vector<std::string>& nodes,
                                                       Parents parents_of, Adjacent adjacent) {
    std::vector<std::array<std::string, 3>> out;
    for (int x = 0; x < static_cast<int>(nodes.size()); ++x) {
        const auto& par = parents_of(x);
        for (auto w = par.begin(); w != par.end(); ++w)
            for (auto z = std::next(w); z != par.end(); ++z)
                if (!adjacent(*w, *z)) {
                    auto lo = std::min(nodes[*w], nodes[*z]);
                    auto hi = std::max(nodes[*w], nodes[*z]);
                    out.push_back({lo, nodes[x], hi});
                }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

std::vector<std::array<std::string, 3>> unshielded_colliders(const Dag& g) {
    return colliders_impl(
        g.nodes(), [&](int x) -> const std::set<int>& { return g.parents_of(x); },
        [&](int a, int b) {
            return g.parents_of(a).count(b) > 0 || g.parents_of(b).count(a) > 0;
        });
}

std::vector<std::array<std::string, 3>> unshielded_colliders(const Pdag& g) {
    return colliders_impl(
        g.nodes(), [&](int x) -> const std::set<int>& { return g.dpar(x); },
        [&](int a, int b) { return g.adjacent_ix(a, b); });
}

Pdag dag_to_cpdag(const Dag& g) {
    Pdag p = skeleton(g);
    for (const auto& [w, x, z] : unshielded_colliders(g)) {
        if (!p.has_directed_edge(w, x)) p.orient(w, x);
        if (!p.has_directed_edge(z, x)) p.orient(z, x);
    }
    return meek_closure(p);
}

namespace {

// Cycle check over a fixed directed adjacency given as child lists.
bool has_directed_cycle(const std::vector<std::set<int>>& ch) {
    const int p = static_cast<int>(ch.size());
    std::vector<int> indeg(p, 0);
    for (int u = 0; u < p; ++u)
        for (int v : ch[u]) ++indeg[v];
    std::deque<int> queue;
    for (int v = 0; v < p; ++v)
        if (indeg[v] == 0) queue.push_back(v);
    int seen = 0;
    while (!queue.empty()) {
        int v = queue.front();
        queue.pop_front();
        ++seen;
        for (int u : ch[v])
            if (--indeg[u] == 0) queue.push_back(u);
    }
    return seen != p;
}

}  // namespace

std::vector<Dag> enumerate_dags_in_class(const Pdag& c, int max_undirected_edges) {
    const auto und = c.undirected_edges();
    if (static_cast<int>(und.size()) > max_undirected_edges)
        throw budget_exceeded("equivalence class has " + std::to_string(und.size()) +
                              " undirected edges, budget is " +
                              std::to_string(max_undirected_edges));

    const int p = c.num_nodes();
    std::vector<std::set<int>> ch(p), pa(p);
    for (const auto& [from, to] : c.directed_edges()) {
        ch[c.index_of(from)].insert(c.index_of(to));
        pa[c.index_of(to)].insert(c.index_of(from));
    }
    std::vector<Dag> found;
    if (has_directed_cycle(ch)) throw invalid_input("not a valid CPDAG: directed part is cyclic");

    std::vector<std::pair<int, int>> und_ix;
    und_ix.reserve(und.size());
    for (const auto& [a, b] : und) und_ix.emplace_back(c.index_of(a), c.index_of(b));

    // path to -> from over currently directed edges?
    std::function<bool(int, int, std::vector<char>&)> reachable = [&](int from, int to,
                                                                      std::vector<char>& seen) {
        if (from == to) return true;
        seen[from] = 1;
        for (int v : ch[from])
            if (!seen[v] && reachable(v, to, seen)) return true;
        return false;
    };
    auto creates_cycle = [&](int u, int v) {
        std::vector<char> seen(p, 0);
        return reachable(v, u, seen);
    };
    // A collider at v through the new arrow u->v is always new, since u-v was
    // undirected in c.
    auto creates_new_collider = [&](int u, int v) {
        for (int w : pa[v])
            if (w != u && !c.adjacent_ix(w, u)) return true;
        return false;
    };

    std::function<void(std::size_t)> assign = [&](std::size_t k) {
        if (k == und_ix.size()) {
            Dag d(c.nodes());
            for (int u = 0; u < p; ++u)
                for (int v : ch[u]) d.add_edge(c.nodes()[u], c.nodes()[v]);
            if (dag_to_cpdag(d) == c) found.push_back(std::move(d));
            return;
        }
        const auto [a, b] = und_ix[k];
        // orientation 0: a->b, orientation 1: b->a (lexicographic order).
        for (int o = 0; o < 2; ++o) {
            const int u = o == 0 ? a : b;
            const int v = o == 0 ? b : a;
            if (creates_cycle(u, v) || creates_new_collider(u, v)) continue;
            ch[u].insert(v);
            pa[v].insert(u);
            assign(k + 1);
            ch[u].erase(v);
            pa[v].erase(u);
        }
    };
    assign(0);
    if (found.empty())
        throw invalid_input("not a valid CPDAG: no member DAG maps back to the input");
    return found;
}

Dag consistent_extension(const Pdag& c) {
    const int p = c.num_nodes();
    std::vector<std::set<int>> ch(p), pa(p), und(p);
    for (int v = 0; v < p; ++v) {
        ch[v] = c.dch(v);
        pa[v] = c.dpar(v);
        und[v] = c.und(v);
    }
    Dag d(c.nodes());
    for (const auto& [from, to] : c.directed_edges()) d.add_edge(from, to);

    std::vector<char> removed(p, 0);
    auto adjacent = [&](int a, int b) {
        return ch[a].count(b) || ch[b].count(a) || und[a].count(b);
    };
    for (int round = 0; round < p; ++round) {
        int sink = -1;
        for (int v = 0; v < p && sink < 0; ++v) {
            if (removed[v] || !ch[v].empty()) continue;
            bool ok = true;
            for (int u : und[v]) {
                for (int w : pa[v])
                    if (w != u && !adjacent(u, w)) ok = false;
                for (int w : und[v])
                    if (w != u && !adjacent(u, w)) ok = false;
                if (!ok) break;
            }
            if (ok) sink = v;
        }
        if (sink < 0) throw invalid_input("PDAG admits no consistent extension");
        for (int u : und[sink]) {
            d.add_edge(c.nodes()[u], c.nodes()[sink]);
            und[u].erase(sink);
        }
        und[sink].clear();
        for (int u : pa[sink]) ch[u].erase(sink);
        pa[sink].clear();
        removed[sink] = 1;
    }
    return d;
}

std::vector<std::string> topological_order(const Dag& g) {
    const int p = g.num_nodes();
    std::vector<int> indeg(p, 0);
    for (int v = 0; v < p; ++v) indeg[v] = static_cast<int>(g.parents_of(v).size());

    // min-heap on label for deterministic tie-breaking
    std::set<std::pair<std::string, int>> ready;
    for (int v = 0; v < p; ++v)
        if (indeg[v] == 0) ready.emplace(g.nodes()[v], v);

    std::vector<std::string> order;
    order.reserve(p);
    while (!ready.empty()) {
        auto [label, v] = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(label);
        for (int u : g.children_of(v))
            if (--indeg[u] == 0) ready.emplace(g.nodes()[u], u);
    }
    if (static_cast<int>(order.size()) != p) throw invalid_input("cycle detected");
    return order;
}

}  // namespace causalkit
