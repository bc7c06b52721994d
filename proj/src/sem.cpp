#include "causalkit/sem.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "causalkit/rng.hpp"

namespace causalkit {

int DataMatrix::col(const std::string& label) const {
    for (int j = 0; j < p(); ++j)
        if (labels[j] == label) return j;
    throw invalid_input("unknown variable label: " + label);
}

Eigen::MatrixXd DataMatrix::sample_covariance() const {
    if (n() < 1) throw invalid_input("empty data matrix");
    Eigen::MatrixXd centered = values.rowwise() - values.colwise().mean();
    return (centered.transpose() * centered) / static_cast<double>(n());
}

namespace {

Eigen::MatrixXd cov_to_corr(const Eigen::MatrixXd& cov) {
    Eigen::VectorXd d = cov.diagonal().cwiseSqrt();
    for (int i = 0; i < d.size(); ++i)
        if (!(d(i) > 0.0)) throw invalid_input("variable with zero variance");
    return d.cwiseInverse().asDiagonal() * cov * d.cwiseInverse().asDiagonal();
}

}  // namespace

Eigen::MatrixXd DataMatrix::sample_correlation() const { return cov_to_corr(sample_covariance()); }

Eigen::MatrixXd DataMatrix::rank_correlation() const {
    // column-wise average ranks, then Pearson on ranks = Spearman
    Eigen::MatrixXd ranks(n(), p());
    std::vector<int> order(n());
    for (int j = 0; j < p(); ++j) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return values(a, j) < values(b, j); });
        int i = 0;
        while (i < n()) {
            int k = i;
            while (k + 1 < n() && values(order[k + 1], j) == values(order[i], j)) ++k;
            const double avg = 0.5 * (i + k) + 1.0;
            for (int t = i; t <= k; ++t) ranks(order[t], j) = avg;
            i = k + 1;
        }
    }
    DataMatrix rank_data{labels, ranks};
    Eigen::MatrixXd spearman = rank_data.sample_correlation();
    constexpr double pi = 3.141592653589793238462643383279;
    Eigen::MatrixXd out = (spearman * (pi / 6.0)).array().sin().matrix() * 2.0;
    out.diagonal().setOnes();
    return out;
}

int Covariance::index_of(const std::string& label) const {
    for (int j = 0; j < static_cast<int>(labels.size()); ++j)
        if (labels[j] == label) return j;
    throw invalid_input("unknown variable label: " + label);
}

Eigen::MatrixXd Covariance::to_correlation() const { return cov_to_corr(mat); }

LinearSem::LinearSem(Dag dag, Eigen::MatrixXd weights, Eigen::VectorXd noise_var,
                     Eigen::VectorXd intercepts)
    : dag_(std::move(dag)),
      weights_(std::move(weights)),
      noise_var_(std::move(noise_var)),
      intercept_(std::move(intercepts)) {}

LinearSem::LinearSem(Dag dag,
                     const std::vector<std::tuple<std::string, std::string, double>>& weights,
                     const std::map<std::string, double>& noise_variances)
    : dag_(std::move(dag)) {
    const int p = dag_.num_nodes();
    weights_ = Eigen::MatrixXd::Zero(p, p);
    noise_var_ = Eigen::VectorXd::Zero(p);
    intercept_ = Eigen::VectorXd::Zero(p);

    std::vector<char> have_weight(static_cast<std::size_t>(p) * p, 0);
    for (const auto& [from, to, w] : weights) {
        const int j = dag_.index_of(from), i = dag_.index_of(to);
        if (!dag_.has_edge(from, to))
            throw invalid_input("weight given for missing edge " + from + " -> " + to);
        if (have_weight[static_cast<std::size_t>(j) * p + i])
            throw invalid_input("duplicate weight for edge " + from + " -> " + to);
        have_weight[static_cast<std::size_t>(j) * p + i] = 1;
        weights_(j, i) = w;
    }
    for (const auto& [from, to] : dag_.edges()) {
        const int j = dag_.index_of(from), i = dag_.index_of(to);
        if (!have_weight[static_cast<std::size_t>(j) * p + i])
            throw invalid_input("no weight stored for edge " + from + " -> " + to);
    }
    std::vector<char> have_var(p, 0);
    for (const auto& [label, v] : noise_variances) {
        const int i = dag_.index_of(label);
        if (!(v > 0.0)) throw invalid_input("noise variance must be strictly positive: " + label);
        noise_var_(i) = v;
        have_var[i] = 1;
    }
    for (int i = 0; i < p; ++i)
        if (!have_var[i]) throw invalid_input("no noise variance for node " + dag_.nodes()[i]);
}

double LinearSem::weight(const std::string& from, const std::string& to) const {
    return weights_(dag_.index_of(from), dag_.index_of(to));
}

double LinearSem::noise_variance(const std::string& v) const {
    return noise_var_(dag_.index_of(v));
}

double LinearSem::intercept(const std::string& v) const { return intercept_(dag_.index_of(v)); }

bool LinearSem::is_deterministic(const std::string& v) const {
    return noise_var_(dag_.index_of(v)) == 0.0;
}

DataMatrix LinearSem::simulate(int n, std::uint64_t seed) const {
    if (n < 1) throw invalid_input("simulate: n must be >= 1");
    const int p = dag_.num_nodes();
    std::vector<int> topo;
    topo.reserve(p);
    for (const auto& label : topological_order(dag_)) topo.push_back(dag_.index_of(label));

    Rng rng(seed);
    Eigen::MatrixXd x(n, p);
    for (int r = 0; r < n; ++r) {
        for (int v : topo) {
            double value = intercept_(v) + std::sqrt(noise_var_(v)) * rng.normal();
            for (int j : dag_.parents_of(v)) value += weights_(j, v) * x(r, j);
            x(r, v) = value;
        }
    }
    return DataMatrix{dag_.nodes(), std::move(x)};
}

Covariance LinearSem::true_covariance() const {
    const int p = dag_.num_nodes();
    // X = B X + eps with B(i, j) the coefficient of X_j in the equation of X_i
    Eigen::MatrixXd b = weights_.transpose();
    Eigen::MatrixXd a =
        (Eigen::MatrixXd::Identity(p, p) - b).partialPivLu().solve(Eigen::MatrixXd::Identity(p, p));
    Eigen::MatrixXd sigma = a * noise_var_.asDiagonal() * a.transpose();
    return Covariance{dag_.nodes(), 0.5 * (sigma + sigma.transpose())};
}

Eigen::VectorXd LinearSem::mean_vector() const {
    const int p = dag_.num_nodes();
    Eigen::MatrixXd b = weights_.transpose();
    return (Eigen::MatrixXd::Identity(p, p) - b).partialPivLu().solve(intercept_);
}

LinearSem LinearSem::do_intervention(
    const std::vector<std::pair<std::string, double>>& targets) const {
    std::set<int> target_ix;
    for (const auto& [label, value] : targets) {
        (void)value;
        if (!target_ix.insert(dag_.index_of(label)).second)
            throw invalid_input("duplicate intervention target: " + label);
    }
    Dag truncated(dag_.nodes());
    for (const auto& [from, to] : dag_.edges())
        if (!target_ix.count(dag_.index_of(to))) truncated.add_edge(from, to);

    Eigen::MatrixXd w = weights_;
    Eigen::VectorXd var = noise_var_;
    Eigen::VectorXd mu = intercept_;
    for (const auto& [label, value] : targets) {
        const int t = dag_.index_of(label);
        w.col(t).setZero();
        var(t) = 0.0;  // deterministic sentinel
        mu(t) = value;
    }
    return LinearSem(std::move(truncated), std::move(w), std::move(var), std::move(mu));
}

double LinearSem::total_effect_paths(const std::string& x, const std::string& y,
                                     const NodeSet& blocked) const {
    if (x == y) throw invalid_input("total_effect_paths: x and y must differ");
    if (blocked.count(x) || blocked.count(y))
        throw invalid_input("total_effect_paths: x and y must not be blocked");
    const int xi = dag_.index_of(x), yi = dag_.index_of(y);
    std::vector<char> is_blocked(dag_.num_nodes(), 0);
    for (const auto& label : blocked) is_blocked[dag_.index_of(label)] = 1;

    // Directed paths in a DAG compose node by node, so a memoized sum of
    // path-weight products is exact.
    std::vector<double> memo(dag_.num_nodes(), 0.0);
    std::vector<char> done(dag_.num_nodes(), 0);
    std::function<double(int)> effect_from = [&](int v) -> double {
        if (v == yi) return 1.0;
        if (done[v]) return memo[v];
        double sum = 0.0;
        for (int c : dag_.children_of(v))
            if (!is_blocked[c]) sum += weights_(v, c) * effect_from(c);
        done[v] = 1;
        memo[v] = sum;
        return sum;
    };
    return effect_from(xi);
}

double total_effect_adjusted(const Covariance& cov, const std::string& x, const std::string& y,
                             const NodeSet& adjust, bool y_is_parent_of_x) {
    if (adjust.count(x)) throw invalid_input("adjustment set must not contain x");
    if (adjust.count(y) || y == x) throw invalid_input("y must not be in the adjustment set or x");
    if (y_is_parent_of_x) return 0.0;

    std::vector<int> z;
    z.push_back(cov.index_of(x));
    for (const auto& label : adjust) z.push_back(cov.index_of(label));
    const int yi = cov.index_of(y);

    const int k = static_cast<int>(z.size());
    Eigen::MatrixXd szz(k, k);
    Eigen::VectorXd szy(k);
    for (int a = 0; a < k; ++a) {
        szy(a) = cov.mat(z[a], yi);
        for (int b = 0; b < k; ++b) szz(a, b) = cov.mat(z[a], z[b]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(szz);
    if (!lu.isInvertible()) throw invalid_input("singular covariance submatrix in adjustment");
    return lu.solve(szy)(0);
}

}  // namespace causalkit
