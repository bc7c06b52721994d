#include "causalkit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <mutex>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

#include "causalkit/effects.hpp"
#include "causalkit/io.hpp"

namespace causalkit {

using nlohmann::json;

double InstanceConfig::density() const {
    if (expected_degree > 0.0) return std::min(1.0, expected_degree / (p - 1));
    return edge_density;
}

void InstanceConfig::validate() const {
    if (p < 2) throw invalid_input("instance config: p must be >= 2");
    if (edge_density < 0.0 || edge_density > 1.0)
        throw invalid_input("instance config: edge density must lie in [0, 1]");
    if (n < 1) throw invalid_input("instance config: n must be >= 1");
    if (!(weight_min > 0.0) || weight_max < weight_min)
        throw invalid_input("instance config: bad weight range");
    if (!(noise_min > 0.0) || noise_max < noise_min)
        throw invalid_input("instance config: bad noise range");
}

namespace {

std::vector<std::string> make_labels(int p) {
    int width = 1;
    for (int v = p; v >= 10; v /= 10) ++width;
    std::vector<std::string> labels(p);
    for (int i = 0; i < p; ++i) {
        std::string num = std::to_string(i + 1);
        labels[i] = "X" + std::string(width - num.size(), '0') + num;
    }
    return labels;
}

// every-(i, j, S) agreement between the oracle decider and d-separation
bool faithful_at_oracle_level(const LinearSem& sem, double tol) {
    const auto& nodes = sem.dag().nodes();
    const int p = static_cast<int>(nodes.size());
    CiDecider oracle = CiDecider::oracle(sem.true_covariance(), tol);
    for (int i = 0; i < p; ++i) {
        for (int j = i + 1; j < p; ++j) {
            std::vector<int> rest;
            for (int t = 0; t < p; ++t)
                if (t != i && t != j) rest.push_back(t);
            const std::uint64_t m = std::uint64_t{1} << rest.size();
            for (std::uint64_t mask = 0; mask < m; ++mask) {
                NodeSet s;
                for (std::size_t t = 0; t < rest.size(); ++t)
                    if (mask >> t & 1) s.insert(nodes[rest[t]]);
                const bool indep = oracle.decide(nodes[i], nodes[j], s);
                const bool dsep = is_d_separated(sem.dag(), {nodes[i]}, {nodes[j]}, s);
                if (indep != dsep) return false;
            }
        }
    }
    return true;
}

}  // namespace

LinearSem random_sem(const InstanceConfig& cfg, Rng& rng) {
    const auto labels = make_labels(cfg.p);
    const double d = cfg.density();
    Dag dag(labels);
    std::vector<std::tuple<std::string, std::string, double>> weights;
    for (int i = 0; i < cfg.p; ++i)
        for (int j = i + 1; j < cfg.p; ++j)
            if (rng.bernoulli(d)) {
                const double magnitude = rng.uniform(cfg.weight_min, cfg.weight_max);
                const double sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
                dag.add_edge(labels[i], labels[j]);
                weights.emplace_back(labels[i], labels[j], sign * magnitude);
            }
    std::map<std::string, double> noise;
    for (const auto& v : labels) noise[v] = rng.uniform(cfg.noise_min, cfg.noise_max);
    return LinearSem(std::move(dag), weights, noise);
}

GeneratedInstance generate_instance(const InstanceConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Rng root(seed);
    for (int attempt = 0;; ++attempt) {
        if (attempt > cfg.max_faithfulness_resamples)
            throw invalid_input("faithfulness screening failed after " +
                                std::to_string(cfg.max_faithfulness_resamples) + " resamples");
        Rng sem_rng = root.fork("instance", static_cast<std::uint64_t>(attempt));
        LinearSem sem = random_sem(cfg, sem_rng);
        if (cfg.p <= 10 && !faithful_at_oracle_level(sem, 1e-8)) continue;
        DataMatrix data = sem.simulate(cfg.n, root.fork("data").seed());
        return GeneratedInstance{std::move(sem), std::move(data), attempt};
    }
}

namespace {

enum class PairType { None, Undirected, Forward, Backward };

PairType pair_type(const Pdag& g, const std::string& a, const std::string& b) {
    if (g.has_undirected_edge(a, b)) return PairType::Undirected;
    if (g.has_directed_edge(a, b)) return PairType::Forward;
    if (g.has_directed_edge(b, a)) return PairType::Backward;
    return PairType::None;
}

}  // namespace

StructuralMetrics structural_metrics(const Pdag& truth, const Pdag& estimate) {
    auto t_nodes = truth.nodes();
    auto e_nodes = estimate.nodes();
    std::sort(t_nodes.begin(), t_nodes.end());
    std::sort(e_nodes.begin(), e_nodes.end());
    if (t_nodes != e_nodes) throw invalid_input("graphs are over different node sets");

    StructuralMetrics m;
    int true_edges = 0, estimated_true = 0, estimated_false = 0;
    const int p = static_cast<int>(t_nodes.size());
    for (int a = 0; a < p; ++a) {
        for (int b = a + 1; b < p; ++b) {
            const PairType t = pair_type(truth, t_nodes[a], t_nodes[b]);
            const PairType e = pair_type(estimate, t_nodes[a], t_nodes[b]);
            if (t != e) ++m.shd;
            if (t != PairType::None) {
                ++true_edges;
                if (e != PairType::None) ++estimated_true;
            } else if (e != PairType::None) {
                ++estimated_false;
            }
        }
    }
    const int non_edges = p * (p - 1) / 2 - true_edges;
    m.skeleton_tpr = true_edges == 0 ? 1.0 : static_cast<double>(estimated_true) / true_edges;
    m.skeleton_fpr = non_edges == 0 ? 0.0 : static_cast<double>(estimated_false) / non_edges;
    return m;
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

namespace {

Pdag learn_graph(const DataMatrix& data, const std::string& algo, double alpha, int max_cond,
                 const std::vector<std::string>& order, RunReport* report) {
    SkeletonOptions opts;
    opts.max_cond = max_cond;
    if (algo == "pc" || algo == "pc-stable") {
        CiDecider decider = CiDecider::fisher_z(data, alpha);
        PcResult res = pc(decider, data.labels,
                          algo == "pc" ? PcVariant::Classic : PcVariant::Stable, order, opts);
        if (report) *report = res.report;
        return res.cpdag;
    }
    if (algo == "ges") {
        GaussianBic score(data);
        GesResult res = ges(score, data.labels);
        if (report) *report = res.report;
        return res.cpdag;
    }
    throw invalid_input("unknown algorithm: " + algo);
}

}  // namespace

EdgeFrequencyTable stability_run(const DataMatrix& data, const StabilityConfig& cfg,
                                 std::uint64_t seed) {
    if (cfg.runs < 1) throw invalid_input("stability: runs must be >= 1");
    if (!(cfg.fraction > 0.0 && cfg.fraction <= 1.0))
        throw invalid_input("stability: fraction must lie in (0, 1]");
    const int m = static_cast<int>(cfg.fraction * data.n());
    if (m < 4)
        throw invalid_input("stability: subsample of " + std::to_string(m) +
                            " rows is too small for the CI test");

    Rng root(seed);
    std::vector<std::vector<std::pair<std::string, std::string>>> per_run(cfg.runs);
    parallel_for(cfg.runs, cfg.threads, [&](int r) {
        Rng sub_rng = root.fork("subsample", static_cast<std::uint64_t>(r));
        std::vector<int> rows(data.n());
        for (int i = 0; i < data.n(); ++i) rows[i] = i;
        for (int i = 0; i < m; ++i) {
            const int j = i + static_cast<int>(sub_rng.below(rows.size() - i));
            std::swap(rows[i], rows[j]);
        }
        rows.resize(m);
        std::sort(rows.begin(), rows.end());
        Eigen::MatrixXd sub(m, data.p());
        for (int i = 0; i < m; ++i) sub.row(i) = data.values.row(rows[i]);
        DataMatrix sub_data{data.labels, std::move(sub)};

        std::vector<std::string> order = data.labels;
        if (cfg.permute_orderings) {
            Rng perm_rng = root.fork("permutation", static_cast<std::uint64_t>(r));
            perm_rng.shuffle(order);
        }
        Pdag est = learn_graph(sub_data, cfg.algo, cfg.alpha, cfg.max_cond, order, nullptr);
        per_run[r] = skeleton(est).undirected_edges();
    });

    EdgeFrequencyTable table;
    table.runs = cfg.runs;
    for (const auto& edges : per_run)
        for (const auto& e : edges) ++table.counts[e];
    return table;
}

RocCurve effect_ranking_roc(
    const LinearSem& truth,
    const std::vector<std::pair<std::pair<std::string, std::string>, double>>& scores,
    double percentile) {
    if (scores.empty()) throw invalid_input("roc: no scored pairs");
    if (!(percentile >= 0.0 && percentile < 1.0))
        throw invalid_input("roc: percentile must lie in [0, 1)");

    // ground-truth large-effect set, fixed before looking at the scores
    std::vector<double> nonzero;
    std::vector<double> true_effect(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const auto& [pair, score] = scores[i];
        (void)score;
        true_effect[i] = std::abs(truth.total_effect_paths(pair.first, pair.second));
        if (true_effect[i] > 1e-12) nonzero.push_back(true_effect[i]);
    }
    if (nonzero.empty()) throw invalid_input("roc: empty positive class");
    std::sort(nonzero.begin(), nonzero.end());
    // interpolated quantile; positives are strictly above it
    const double h = percentile * static_cast<double>(nonzero.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, nonzero.size() - 1);
    const double threshold = nonzero[lo] + (h - std::floor(h)) * (nonzero[hi] - nonzero[lo]);

    RocCurve curve;
    curve.effect_threshold = threshold;
    std::vector<char> positive(scores.size(), 0);
    for (std::size_t i = 0; i < scores.size(); ++i) {
        positive[i] = true_effect[i] > threshold ? 1 : 0;
        if (positive[i])
            ++curve.positives;
        else
            ++curve.negatives;
    }
    if (curve.positives == 0) throw invalid_input("roc: empty positive class");

    // rank by descending score; tied scores step together
    std::vector<std::size_t> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a].second != scores[b].second) return scores[a].second > scores[b].second;
        return scores[a].first < scores[b].first;
    });

    curve.points.push_back({0.0, 0.0});
    int tp = 0, fp = 0;
    double auc = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]].second == scores[order[i]].second) ++j;
        int dtp = 0, dfp = 0;
        for (std::size_t t = i; t < j; ++t)
            positive[order[t]] ? ++dtp : ++dfp;
        const double tpr0 = static_cast<double>(tp) / curve.positives;
        const double fpr0 = curve.negatives == 0 ? 0.0 : static_cast<double>(fp) / curve.negatives;
        tp += dtp;
        fp += dfp;
        const double tpr1 = static_cast<double>(tp) / curve.positives;
        const double fpr1 = curve.negatives == 0 ? 0.0 : static_cast<double>(fp) / curve.negatives;
        auc += 0.5 * (tpr0 + tpr1) * (fpr1 - fpr0);
        curve.points.push_back({fpr1, tpr1});
        i = j;
    }
    curve.auc = auc;
    return curve;
}

namespace {

std::string alpha_tag(double alpha) {
    std::ostringstream out;
    out << alpha;
    return out.str();
}

// minimum absolute possible effect per ordered pair, from the local multiset
std::vector<std::pair<std::pair<std::string, std::string>, double>> ida_ranking(
    const Pdag& cpdag, const Covariance& cov) {
    std::vector<std::pair<std::pair<std::string, std::string>, double>> scores;
    for (const auto& x : cpdag.nodes()) {
        for (const auto& y : cpdag.nodes()) {
            if (x == y) continue;
            double score = 0.0;
            const EffectMultiset m = ida_local(cpdag, cov, x, y);
            bool first = true;
            for (const auto& e : m.entries) {
                const double v = std::abs(e.values[0]);
                score = first ? v : std::min(score, v);
                first = false;
            }
            scores.push_back({{x, y}, score});
        }
    }
    return scores;
}

}  // namespace

void run_bench(const BenchmarkConfig& cfg, const std::string& out_dir) {
    cfg.instance.validate();
    if (cfg.instances < 1) throw invalid_input("bench: instances must be >= 1");
    for (const auto& algo : cfg.algos)
        if (algo != "pc" && algo != "pc-stable" && algo != "ges")
            throw invalid_input("unknown algorithm: " + algo);

    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    json config_json;
    config_json["p"] = cfg.instance.p;
    config_json["edge_density"] = cfg.instance.density();
    config_json["n"] = cfg.instance.n;
    config_json["instances"] = cfg.instances;
    config_json["algos"] = cfg.algos;
    config_json["alphas"] = cfg.alphas;
    config_json["seed"] = cfg.seed;
    config_json["stability_runs"] = cfg.stability_runs;
    config_json["stability_fraction"] = cfg.stability_fraction;
    config_json["permute_orderings"] = cfg.permute_orderings;
    write_json_file(out_dir + "/bench_config.json", config_json);

    struct Cell {
        StructuralMetrics metrics;
        bool has_auc = false;
        double auc = 0.0;
    };
    // one run per (algo, alpha); ges ignores alpha and runs once
    std::vector<std::pair<std::string, double>> run_matrix;
    for (const auto& algo : cfg.algos) {
        if (algo == "ges")
            run_matrix.emplace_back(algo, -1.0);
        else
            for (double a : cfg.alphas) run_matrix.emplace_back(algo, a);
    }

    std::vector<std::map<std::string, Cell>> results(cfg.instances);

    parallel_for(cfg.instances, cfg.threads, [&](int i) {
        char name[32];
        std::snprintf(name, sizeof(name), "instance_%03d", i);
        const std::string dir = out_dir + "/instances/" + name;
        fs::create_directories(dir);

        const std::uint64_t inst_seed = substream_seed(cfg.seed, "bench-instance",
                                                       static_cast<std::uint64_t>(i));
        GeneratedInstance inst = generate_instance(cfg.instance, inst_seed);
        const Pdag truth_cpdag = dag_to_cpdag(inst.sem.dag());
        write_json_file(dir + "/sem.json", sem_to_json(inst.sem));
        write_json_file(dir + "/truth_cpdag.json", graph_to_json(truth_cpdag));
        write_text_file(dir + "/data.csv", data_to_csv(inst.data));

        const Covariance sample_cov{inst.data.labels, inst.data.sample_covariance()};
        for (const auto& [algo, alpha] : run_matrix) {
            RunReport report;
            Pdag est = learn_graph(inst.data, algo, alpha, -1, {}, &report);
            const std::string suffix = algo == "ges" ? algo : algo + "_alpha" + alpha_tag(alpha);
            write_json_file(dir + "/learned_" + suffix + ".json", graph_to_json(est));
            write_json_file(dir + "/report_" + suffix + ".json", run_report_to_json(report));

            Cell cell;
            cell.metrics = structural_metrics(truth_cpdag, est);
            json metrics_json = metrics_to_json(cell.metrics);
            try {
                const RocCurve roc = effect_ranking_roc(inst.sem, ida_ranking(est, sample_cov));
                cell.has_auc = true;
                cell.auc = roc.auc;
                metrics_json["roc_auc"] = cell.auc;
                write_text_file(dir + "/roc_" + suffix + ".csv", roc_to_csv(roc));
            } catch (const invalid_input&) {
                // instance has no usable large-effect ground truth
                metrics_json["roc_auc"] = nullptr;
            }
            write_json_file(dir + "/metrics_" + suffix + ".json", metrics_json);
            results[i][suffix] = cell;
        }
        for (const auto& algo : cfg.algos) {
            if (cfg.stability_runs <= 0 || algo == "ges") continue;
            StabilityConfig stab;
            stab.algo = algo;
            stab.alpha = cfg.alphas.empty() ? 0.01 : cfg.alphas.front();
            stab.runs = cfg.stability_runs;
            stab.fraction = cfg.stability_fraction;
            stab.permute_orderings = cfg.permute_orderings;
            const EdgeFrequencyTable table =
                stability_run(inst.data, stab, substream_seed(inst_seed, "stability"));
            write_text_file(dir + "/stability_" + algo + ".csv", frequency_table_to_csv(table));
        }
    });

    // aggregate in instance order
    struct Sums {
        double shd = 0.0, tpr = 0.0, fpr = 0.0, auc = 0.0;
        int auc_count = 0;
    };
    std::map<std::string, Sums> agg;
    for (int i = 0; i < cfg.instances; ++i) {
        for (const auto& [suffix, cell] : results[i]) {
            auto& s = agg[suffix];
            s.shd += cell.metrics.shd;
            s.tpr += cell.metrics.skeleton_tpr;
            s.fpr += cell.metrics.skeleton_fpr;
            if (cell.has_auc) {
                s.auc += cell.auc;
                ++s.auc_count;
            }
        }
    }
    json summary;
    for (const auto& [suffix, s] : agg) {
        json entry = {{"mean_shd", s.shd / cfg.instances},
                      {"mean_skeleton_tpr", s.tpr / cfg.instances},
                      {"mean_skeleton_fpr", s.fpr / cfg.instances}};
        entry["mean_roc_auc"] = s.auc_count > 0 ? json(s.auc / s.auc_count) : json(nullptr);
        entry["roc_instances"] = s.auc_count;
        summary[suffix] = entry;
    }
    write_json_file(out_dir + "/summary.json", summary);
}

}  // namespace causalkit
