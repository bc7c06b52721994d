#include "causalkit/indep.hpp"

#include <algorithm>
#include <cmath>

namespace causalkit {

double partial_correlation(const Eigen::MatrixXd& corr, int i, int j, const std::vector<int>& s) {
    if (i == j) throw invalid_input("partial correlation needs distinct variables");
    for (int v : s)
        if (v == i || v == j) throw invalid_input("conditioning set overlaps the tested pair");

    std::vector<int> block{i, j};
    block.insert(block.end(), s.begin(), s.end());
    const int k = static_cast<int>(block.size());
    Eigen::MatrixXd sub(k, k);
    for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) sub(a, b) = corr(block[a], block[b]);

    Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
    if (!lu.isInvertible()) throw invalid_input("singular conditioning submatrix");
    Eigen::MatrixXd prec = lu.inverse();
    const double denom = prec(0, 0) * prec(1, 1);
    if (!(denom > 0.0)) throw invalid_input("degenerate precision matrix");
    double rho = -prec(0, 1) / std::sqrt(denom);
    // up to 1e-12 slack from round-off
    if (rho > 1.0) rho = 1.0;
    if (rho < -1.0) rho = -1.0;
    return rho;
}

CiDecider::CiDecider(Kind kind, std::vector<std::string> labels, Eigen::MatrixXd corr, int n,
                     double alpha, double tolerance)
    : kind_(kind),
      labels_(std::move(labels)),
      corr_(std::move(corr)),
      n_(n),
      alpha_(alpha),
      tol_(tolerance),
      calls_(std::make_shared<std::atomic<long>>(0)) {}

CiDecider CiDecider::fisher_z(const DataMatrix& data, double alpha, bool rank_transform) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw invalid_input("alpha must lie in (0, 1)");
    Eigen::MatrixXd corr =
        rank_transform ? data.rank_correlation() : data.sample_correlation();
    return CiDecider(Kind::FisherZ, data.labels, std::move(corr), data.n(), alpha, 0.0);
}

CiDecider CiDecider::oracle(const Covariance& cov, double tolerance) {
    if (!(tolerance > 0.0)) throw invalid_input("oracle tolerance must be positive");
    return CiDecider(Kind::Oracle, cov.labels, cov.to_correlation(), 0, 0.0, tolerance);
}

int CiDecider::index_of(const std::string& label) const {
    for (int j = 0; j < static_cast<int>(labels_.size()); ++j)
        if (labels_[j] == label) return j;
    throw invalid_input("unknown variable label: " + label);
}

bool CiDecider::decide_ix(int i, int j, const std::vector<int>& s) const {
    calls_->fetch_add(1, std::memory_order_relaxed);
    const double rho = partial_correlation(corr_, i, j, s);
    if (kind_ == Kind::Oracle) return std::abs(rho) < tol_;

    const double df = n_ - static_cast<double>(s.size()) - 3.0;
    if (!(df > 0.0)) throw invalid_input("sample too small for conditioning set of size " +
                                         std::to_string(s.size()));
    const double clamped = std::clamp(rho, -(1.0 - 1e-12), 1.0 - 1e-12);
    const double stat = std::sqrt(df) * std::abs(std::atanh(clamped));
    // p-value of the two-sided z test; independent iff it reaches alpha.
    // Equivalent to stat <= Phi^{-1}(1 - alpha/2).
    const double pvalue = std::erfc(stat / std::sqrt(2.0));
    return pvalue >= alpha_;
}

bool CiDecider::decide(const std::string& i, const std::string& j, const NodeSet& s) const {
    std::vector<int> six;
    six.reserve(s.size());
    for (const auto& label : s) six.push_back(index_of(label));
    return decide_ix(index_of(i), index_of(j), six);
}

}  // namespace causalkit
