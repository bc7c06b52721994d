#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "causalkit/discovery.hpp"
#include "causalkit/rng.hpp"
#include "causalkit/sem.hpp"

namespace causalkit {

// Random-instance model: ordered edge inclusion with probability
// edge_density, weights uniform on +-[weight_min, weight_max], noise
// variances uniform on [noise_min, noise_max].
struct InstanceConfig {
    int p = 10;
    double edge_density = 0.2;
    double expected_degree = -1.0;  // if > 0, overrides edge_density with deg / (p - 1)
    int n = 500;
    double weight_min = 0.5, weight_max = 2.0;
    double noise_min = 0.5, noise_max = 1.5;
    int max_faithfulness_resamples = 10;

    double density() const;
    void validate() const;
};

struct GeneratedInstance {
    LinearSem sem;
    DataMatrix data;
    int faithfulness_resamples = 0;
};

// Deterministic per (config, seed). Instances with p <= 10 are screened for
// faithfulness at the oracle level and resampled on violation.
GeneratedInstance generate_instance(const InstanceConfig& cfg, std::uint64_t seed);

// Random DAG + weights only (no data, no screening); building block shared
// with the test oracles.
LinearSem random_sem(const InstanceConfig& cfg, Rng& rng);

struct StructuralMetrics {
    int shd = 0;
    double skeleton_tpr = 0.0;
    double skeleton_fpr = 0.0;
};

// SHD counts pairs whose edge presence, type or orientation differs; TPR/FPR
// are computed on skeleton edges.
StructuralMetrics structural_metrics(const Pdag& truth, const Pdag& estimate);

struct StabilityConfig {
    std::string algo = "pc-stable";  // pc | pc-stable | ges
    double alpha = 0.01;
    int runs = 100;
    double fraction = 0.5;  // subsample fraction, without replacement
    bool permute_orderings = false;
    int max_cond = -1;
    int threads = 1;
};

// Per-edge selection counts of the estimated skeletons over subsample runs.
struct EdgeFrequencyTable {
    int runs = 0;
    std::map<std::pair<std::string, std::string>, int> counts;  // canonical pairs
};

EdgeFrequencyTable stability_run(const DataMatrix& data, const StabilityConfig& cfg,
                                 std::uint64_t seed);

struct RocPoint {
    double fpr = 0.0, tpr = 0.0;
};

struct RocCurve {
    std::vector<RocPoint> points;  // (0,0) ... (1,1)
    double auc = 0.0;
    int positives = 0, negatives = 0;
    double effect_threshold = 0.0;
};

// ROC of ranking the scored pairs by descending score against the ground
// truth "large effect" set: |true total effect| above the given percentile of
// the nonzero true effects, fixed before estimation.
RocCurve effect_ranking_roc(
    const LinearSem& truth,
    const std::vector<std::pair<std::pair<std::string, std::string>, double>>& scores,
    double percentile = 0.9);

struct BenchmarkConfig {
    InstanceConfig instance;
    int instances = 3;
    std::vector<std::string> algos = {"pc-stable"};  // pc | pc-stable | ges
    std::vector<double> alphas = {0.01};
    std::uint64_t seed = 1;
    int threads = 1;
    int stability_runs = 0;  // 0 = skip the stability step
    double stability_fraction = 0.5;
    bool permute_orderings = false;
};

// End-to-end pipeline: generate instances, learn, score IDA rankings, write
// graphs/reports/metrics/ROC (and optional stability tables) under out_dir.
// Byte-identical outputs for identical (config, seed).
void run_bench(const BenchmarkConfig& cfg, const std::string& out_dir);

// Chunked deterministic parallel map: results identical for any thread count.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

}  // namespace causalkit
