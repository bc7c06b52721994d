#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <memory>
#include <string>
#include <vector>

#include "causalkit/sem.hpp"

namespace causalkit {

// Correlation of the residuals of i and j after population regression on s.
// Accepts a correlation or covariance matrix (the coefficient is
// scale-invariant). Throws invalid_input on a singular conditioning block.
double partial_correlation(const Eigen::MatrixXd& corr, int i, int j, const std::vector<int>& s);

// Conditional independence decisions: a Fisher-z test on data or an exact
// oracle on a true covariance. Decisions are pure; the diagnostic call
// counter is atomic so concurrent callers may share one decider.
class CiDecider {
public:
    static CiDecider fisher_z(const DataMatrix& data, double alpha, bool rank_transform = false);
    static CiDecider oracle(const Covariance& cov, double tolerance = 1e-8);

    // true = independent
    bool decide(const std::string& i, const std::string& j, const NodeSet& s) const;
    bool decide_ix(int i, int j, const std::vector<int>& s) const;

    const std::vector<std::string>& labels() const { return labels_; }
    int index_of(const std::string& label) const;
    long call_count() const { return calls_->load(); }
    bool is_oracle() const { return kind_ == Kind::Oracle; }

private:
    enum class Kind { FisherZ, Oracle };

    CiDecider(Kind kind, std::vector<std::string> labels, Eigen::MatrixXd corr, int n,
              double alpha, double tolerance);

    Kind kind_;
    std::vector<std::string> labels_;
    Eigen::MatrixXd corr_;
    int n_;            // sample size (fisher-z only)
    double alpha_;     // tuning parameter, in (0, 1)
    double tol_;       // oracle tolerance, > 0
    std::shared_ptr<std::atomic<long>> calls_;
};

}  // namespace causalkit
