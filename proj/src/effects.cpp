#include "causalkit/effects.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <tuple>

namespace causalkit {

namespace {

std::int64_t quantize(double v) {
    // 1e-9 grid for float-stable multiset semantics
    return static_cast<std::int64_t>(std::llround(v * 1e9));
}

void validate_query(const Pdag& c, const std::vector<std::string>& targets,
                    const std::string& y) {
    if (targets.empty()) throw invalid_input("at least one intervention node is required");
    std::set<std::string> seen;
    for (const auto& t : targets) {
        c.index_of(t);
        if (!seen.insert(t).second) throw invalid_input("duplicate intervention node: " + t);
        if (t == y) throw invalid_input("response must differ from the intervention nodes");
    }
    c.index_of(y);
    // cheap sanity: the directed part of a CPDAG is acyclic
    Dag check(c.nodes());
    for (const auto& [from, to] : c.directed_edges()) check.add_edge(from, to);
}

}  // namespace

std::vector<std::pair<std::vector<double>, int>> EffectMultiset::distinct_values() const {
    std::map<std::vector<std::int64_t>, std::pair<std::vector<double>, int>> grouped;
    for (const auto& e : entries) {
        std::vector<std::int64_t> key;
        key.reserve(e.values.size());
        for (double v : e.values) key.push_back(quantize(v));
        auto it = grouped.find(key);
        if (it == grouped.end())
            grouped.emplace(std::move(key), std::make_pair(e.values, 1));
        else
            ++it->second.second;
    }
    std::vector<std::pair<std::vector<double>, int>> out;
    out.reserve(grouped.size());
    for (auto& [key, value] : grouped) out.push_back(value);
    return out;
}

std::vector<double> EffectMultiset::scalar_values() const {
    std::vector<double> out;
    out.reserve(entries.size());
    for (const auto& e : entries) {
        if (e.values.size() != 1)
            throw invalid_input("multiset holds joint-effect vectors, not scalars");
        out.push_back(e.values[0]);
    }
    return out;
}

EffectMultiset ida_local(const Pdag& c, const Covariance& cov, const std::string& x,
                         const std::string& y) {
    validate_query(c, {x}, y);
    const NodeSet definite = c.directed_parents(x);
    std::vector<std::string> sibs;
    for (const auto& s : c.undirected_neighbors(x)) sibs.push_back(s);

    EffectMultiset out{{x}, y, Provenance::Local, {}};
    const std::size_t m = sibs.size();
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
        std::vector<std::string> chosen;
        for (std::size_t t = 0; t < m; ++t)
            if (mask >> t & 1) chosen.push_back(sibs[t]);
        // Locally valid iff orienting `chosen` into x creates no new
        // unshielded collider at x, i.e. all pairs inside it are adjacent.
        // Pairs against definite parents need no check: in a CPDAG an
        // undirected s-x next to p->x forces s and p adjacent.
        bool valid = true;
        for (std::size_t a = 0; a < chosen.size() && valid; ++a)
            for (std::size_t b = a + 1; b < chosen.size() && valid; ++b)
                if (!c.adjacent(chosen[a], chosen[b])) valid = false;
        if (!valid) continue;

        NodeSet candidate = definite;
        candidate.insert(chosen.begin(), chosen.end());
        const bool y_is_parent = candidate.count(y) > 0;
        NodeSet adjust = candidate;
        adjust.erase(y);
        const double value = total_effect_adjusted(cov, x, y, adjust, y_is_parent);
        out.entries.push_back({{{x, candidate}}, {value}});
    }
    return out;
}

EffectMultiset ida_global(const Pdag& c, const Covariance& cov, const std::string& x,
                          const std::string& y, int max_undirected_edges) {
    validate_query(c, {x}, y);
    EffectMultiset out{{x}, y, Provenance::Enumeration, {}};
    for (const Dag& d : enumerate_dags_in_class(c, max_undirected_edges)) {
        NodeSet pa = parents(d, x);
        const bool y_is_parent = pa.count(y) > 0;
        NodeSet adjust = pa;
        adjust.erase(y);
        const double value = total_effect_adjusted(cov, x, y, adjust, y_is_parent);
        out.entries.push_back({{{x, pa}}, {value}});
    }
    return out;
}

Eigen::VectorXd joint_effect_per_dag(const LinearSem& sem, const std::vector<std::string>& targets,
                                     const std::string& y) {
    if (targets.empty()) throw invalid_input("at least one intervention node is required");
    Eigen::VectorXd out(static_cast<int>(targets.size()));
    for (std::size_t k = 0; k < targets.size(); ++k) {
        if (targets[k] == y) throw invalid_input("response must differ from intervention nodes");
        NodeSet blocked;
        for (std::size_t t = 0; t < targets.size(); ++t)
            if (t != k) blocked.insert(targets[t]);
        out(static_cast<int>(k)) = sem.total_effect_paths(targets[k], y, blocked);
    }
    return out;
}

namespace {

// Edge weights of `dag` recovered from the covariance: each node regressed on
// its parents.
LinearSem sem_from_covariance(const Dag& dag, const Covariance& cov) {
    std::vector<std::tuple<std::string, std::string, double>> weights;
    std::map<std::string, double> noise;
    for (const auto& v : dag.nodes()) {
        NodeSet pa = parents(dag, v);
        const int vi = cov.index_of(v);
        double resid = cov.mat(vi, vi);
        if (!pa.empty()) {
            std::vector<int> pix;
            std::vector<std::string> plabels;
            for (const auto& p : pa) {
                pix.push_back(cov.index_of(p));
                plabels.push_back(p);
            }
            const int k = static_cast<int>(pix.size());
            Eigen::MatrixXd spp(k, k);
            Eigen::VectorXd spv(k);
            for (int a = 0; a < k; ++a) {
                spv(a) = cov.mat(pix[a], vi);
                for (int b = 0; b < k; ++b) spp(a, b) = cov.mat(pix[a], pix[b]);
            }
            Eigen::FullPivLU<Eigen::MatrixXd> lu(spp);
            if (!lu.isInvertible())
                throw invalid_input("weight recovery failed: singular parent submatrix");
            Eigen::VectorXd beta = lu.solve(spv);
            for (int a = 0; a < k; ++a) weights.emplace_back(plabels[a], v, beta(a));
            resid -= spv.dot(beta);
        }
        if (resid < 1e-12) resid = 1e-12;
        noise[v] = resid;
    }
    return LinearSem(dag, weights, noise);
}

}  // namespace

Eigen::VectorXd joint_effect_per_dag(const Dag& dag, const Covariance& cov,
                                     const std::vector<std::string>& targets,
                                     const std::string& y) {
    return joint_effect_per_dag(sem_from_covariance(dag, cov), targets, y);
}

namespace {

std::map<std::string, NodeSet> target_parent_sets(const Dag& d,
                                                  const std::vector<std::string>& targets) {
    std::map<std::string, NodeSet> out;
    for (const auto& t : targets) out[t] = parents(d, t);
    return out;
}

// Unpivoted LDL^T factorization: sigma = L D L^T with unit lower-triangular L.
void ldl_unpivoted(const Eigen::MatrixXd& sigma, Eigen::MatrixXd& l, Eigen::VectorXd& d) {
    const int p = static_cast<int>(sigma.rows());
    l = Eigen::MatrixXd::Identity(p, p);
    d = Eigen::VectorXd::Zero(p);
    for (int j = 0; j < p; ++j) {
        double dj = sigma(j, j);
        for (int k = 0; k < j; ++k) dj -= l(j, k) * l(j, k) * d(k);
        if (!(dj > 1e-12)) throw invalid_input("covariance factorization failed");
        d(j) = dj;
        for (int i = j + 1; i < p; ++i) {
            double v = sigma(i, j);
            for (int k = 0; k < j; ++k) v -= l(i, k) * l(j, k) * d(k);
            l(i, j) = v / dj;
        }
    }
}

Eigen::VectorXd mcd_effect(const Dag& d, const Covariance& cov,
                           const std::vector<std::string>& targets, const std::string& y) {
    const auto order = topological_order(d);
    const int p = static_cast<int>(order.size());
    std::map<std::string, int> pos;
    for (int t = 0; t < p; ++t) pos[order[t]] = t;

    Eigen::MatrixXd sigma(p, p);
    for (int a = 0; a < p; ++a)
        for (int b = 0; b < p; ++b) sigma(a, b) = cov.mat(cov.index_of(order[a]), cov.index_of(order[b]));

    // one modification per target, applied iteratively
    for (const auto& t : targets) {
        Eigen::MatrixXd l;
        Eigen::VectorXd resid;
        ldl_unpivoted(sigma, l, resid);
        // regression coefficients on predecessors: B = I - L^{-1}
        Eigen::MatrixXd b = Eigen::MatrixXd::Identity(p, p) -
                            l.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(p, p));
        b.row(pos.at(t)).setZero();
        Eigen::MatrixXd a = (Eigen::MatrixXd::Identity(p, p) - b)
                                .triangularView<Eigen::Lower>()
                                .solve(Eigen::MatrixXd::Identity(p, p));
        sigma = a * resid.asDiagonal() * a.transpose();
    }

    const int k = static_cast<int>(targets.size());
    Eigen::MatrixXd stt(k, k);
    Eigen::VectorXd sty(k);
    for (int a = 0; a < k; ++a) {
        sty(a) = sigma(pos.at(targets[a]), pos.at(y));
        for (int b = 0; b < k; ++b) stt(a, b) = sigma(pos.at(targets[a]), pos.at(targets[b]));
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(stt);
    if (!lu.isInvertible()) throw invalid_input("singular interventional covariance block");
    return lu.solve(sty);
}

Eigen::VectorXd rrc_effect(const Dag& d, const Covariance& cov,
                           const std::vector<std::string>& targets, const std::string& y) {
    // endpoints: targets then y
    std::vector<std::string> points = targets;
    points.push_back(y);
    const int m = static_cast<int>(points.size());
    const int k = static_cast<int>(targets.size());

    // single-intervention effects between all endpoint pairs
    Eigen::MatrixXd single = Eigen::MatrixXd::Zero(m, m);
    for (int a = 0; a < k; ++a) {
        NodeSet pa = parents(d, points[a]);
        for (int b = 0; b < m; ++b) {
            if (a == b) continue;
            const bool b_is_parent = pa.count(points[b]) > 0;
            NodeSet adjust = pa;
            adjust.erase(points[b]);
            single(a, b) = total_effect_adjusted(cov, points[a], points[b], adjust, b_is_parent);
        }
    }

    // f_S(a -> b) memoized over the avoid-set of remaining targets
    std::map<std::tuple<int, int, std::uint32_t>, double> memo;
    std::function<double(int, int, std::uint32_t)> f = [&](int a, int b,
                                                           std::uint32_t avoid) -> double {
        avoid &= ~(1u << a);
        if (b < k) avoid &= ~(1u << b);
        if (avoid == 0) return single(a, b);
        const auto key = std::make_tuple(a, b, avoid);
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        const int c = std::countr_zero(avoid);  // peel the lowest remaining target
        const std::uint32_t rest = avoid & (avoid - 1);
        const double value = f(a, b, rest) - f(a, c, rest) * f(c, b, rest);
        memo.emplace(key, value);
        return value;
    };

    Eigen::VectorXd out(k);
    for (int a = 0; a < k; ++a) {
        std::uint32_t avoid = 0;
        for (int t = 0; t < k; ++t)
            if (t != a) avoid |= 1u << t;
        out(a) = f(a, m - 1, avoid);
    }
    return out;
}

template <class PerDag>
EffectMultiset jointida_impl(const Pdag& c, const std::vector<std::string>& targets,
                             const std::string& y, int max_undirected_edges, PerDag per_dag) {
    validate_query(c, targets, y);
    if (targets.size() > 30) throw budget_exceeded("too many joint intervention targets");
    EffectMultiset out{targets, y, Provenance::Enumeration, {}};
    for (const Dag& d : enumerate_dags_in_class(c, max_undirected_edges)) {
        Eigen::VectorXd v = per_dag(d);
        std::vector<double> values(v.data(), v.data() + v.size());
        out.entries.push_back({target_parent_sets(d, targets), std::move(values)});
    }
    return out;
}

}  // namespace

EffectMultiset jointida_mcd(const Pdag& c, const Covariance& cov,
                            const std::vector<std::string>& targets, const std::string& y,
                            int max_undirected_edges) {
    return jointida_impl(c, targets, y, max_undirected_edges,
                         [&](const Dag& d) { return mcd_effect(d, cov, targets, y); });
}

EffectMultiset jointida_rrc(const Pdag& c, const Covariance& cov,
                            const std::vector<std::string>& targets, const std::string& y,
                            int max_undirected_edges) {
    return jointida_impl(c, targets, y, max_undirected_edges,
                         [&](const Dag& d) { return rrc_effect(d, cov, targets, y); });
}

}  // namespace causalkit
