#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "causalkit/graph.hpp"

namespace causalkit {

// n observations of p labeled variables, no missing values.
struct DataMatrix {
    std::vector<std::string> labels;
    Eigen::MatrixXd values;  // n x p

    int n() const { return static_cast<int>(values.rows()); }
    int p() const { return static_cast<int>(values.cols()); }
    int col(const std::string& label) const;

    // MLE covariance about the column means (1/n scaling).
    Eigen::MatrixXd sample_covariance() const;
    Eigen::MatrixXd sample_correlation() const;
    // Nonparanormal pre-transform: 2 sin(pi/6 * Spearman rank correlation).
    Eigen::MatrixXd rank_correlation() const;
};

// Covariance (or correlation) matrix with variable labels attached.
struct Covariance {
    std::vector<std::string> labels;
    Eigen::MatrixXd mat;

    int index_of(const std::string& label) const;
    Eigen::MatrixXd to_correlation() const;
};

// Linear Gaussian structural equation model: each variable is a weighted sum
// of its parents plus independent Gaussian noise. weight(j, i) is the
// coefficient of node j in the equation of node i; nonzero only on dag edges.
class LinearSem {
public:
    LinearSem(Dag dag, const std::vector<std::tuple<std::string, std::string, double>>& weights,
              const std::map<std::string, double>& noise_variances);

    const Dag& dag() const { return dag_; }
    double weight(const std::string& from, const std::string& to) const;
    double noise_variance(const std::string& v) const;
    double intercept(const std::string& v) const;
    // Noise variance exactly 0 marks a node fixed by a do-intervention.
    bool is_deterministic(const std::string& v) const;

    // i.i.d. rows; variables filled in topological order; bit-identical
    // output for identical (sem, n, seed).
    DataMatrix simulate(int n, std::uint64_t seed) const;

    // (I - B)^{-1} diag(noise) (I - B)^{-T}
    Covariance true_covariance() const;
    // (I - B)^{-1} intercepts; nonzero only after interventions.
    Eigen::VectorXd mean_vector() const;

    // Truncated SEM: drops all edges into each target and pins the target's
    // equation to the given constant.
    LinearSem do_intervention(const std::vector<std::pair<std::string, double>>& targets) const;

    // Sum over directed paths x -> ... -> y avoiding `blocked` of the product
    // of edge weights; 0 if no such path.
    double total_effect_paths(const std::string& x, const std::string& y,
                              const NodeSet& blocked = {}) const;

    const Eigen::MatrixXd& weight_matrix() const { return weights_; }
    const Eigen::VectorXd& noise_variances() const { return noise_var_; }

private:
    LinearSem(Dag dag, Eigen::MatrixXd weights, Eigen::VectorXd noise_var,
              Eigen::VectorXd intercepts);

    Dag dag_;
    Eigen::MatrixXd weights_;    // (j, i): coefficient of j in equation of i
    Eigen::VectorXd noise_var_;  // > 0, or exactly 0 for intervened nodes
    Eigen::VectorXd intercept_;
};

// Coefficient of x in the population regression of y on {x} union adjust,
// computed from the covariance. Callers that know y is a parent of x pass
// y_is_parent_of_x = true and get exactly 0.
double total_effect_adjusted(const Covariance& cov, const std::string& x, const std::string& y,
                             const NodeSet& adjust, bool y_is_parent_of_x = false);

}  // namespace causalkit
