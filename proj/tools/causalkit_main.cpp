// causalkit command line: simulate linear Gaussian SEMs, learn CPDAGs from
// data, estimate (joint) intervention-effect multisets, and run the
// evaluation/stability/benchmark pipelines.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <nlohmann/json.hpp>

#include "causalkit/harness.hpp"
#include "causalkit/io.hpp"

using namespace causalkit;
using nlohmann::json;

namespace {

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

// --order accepts "asgiven", "permute:SEED", or a file with one label per line
std::vector<std::string> resolve_order(const std::string& spec,
                                       const std::vector<std::string>& labels) {
    if (spec.empty() || spec == "asgiven") return {};
    if (spec.rfind("permute:", 0) == 0) {
        std::uint64_t order_seed = 0;
        try {
            order_seed = std::stoull(spec.substr(8));
        } catch (const std::exception&) {
            throw invalid_input("bad --order permute seed: " + spec);
        }
        std::vector<std::string> order = labels;
        Rng(substream_seed(order_seed, "order")).shuffle(order);
        return order;
    }
    std::vector<std::string> order;
    std::istringstream in(read_text_file(spec));
    std::string token;
    while (in >> token) {
        for (auto& piece : split_list(token)) order.push_back(piece);
    }
    return order;
}

std::string joined_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

struct GlobalArgs {
    std::uint64_t seed = 1;
    std::string out_dir = ".";
    int threads = 1;
};

void ensure_out_dir(const GlobalArgs& g) { std::filesystem::create_directories(g.out_dir); }

void cmd_simulate(const GlobalArgs& g, const std::string& sem_path, int p, double density,
                  double degree, int n, const std::string& out) {
    ensure_out_dir(g);
    if (!sem_path.empty()) {
        const LinearSem sem = sem_from_json(read_json_file(sem_path));
        const DataMatrix data = sem.simulate(n, g.seed);
        const std::string target = out.empty() ? joined_path(g.out_dir, "data.csv") : out;
        write_text_file(target, data_to_csv(data));
        std::cout << "wrote " << target << " (" << data.n() << " x " << data.p() << ")\n";
        return;
    }
    if (p < 2) throw invalid_input("simulate needs --sem or --p");
    InstanceConfig cfg;
    cfg.p = p;
    cfg.edge_density = density;
    cfg.expected_degree = degree;
    cfg.n = n;
    const GeneratedInstance inst = generate_instance(cfg, g.seed);
    write_json_file(joined_path(g.out_dir, "sem.json"), sem_to_json(inst.sem));
    write_json_file(joined_path(g.out_dir, "truth_cpdag.json"),
                    graph_to_json(dag_to_cpdag(inst.sem.dag())));
    write_text_file(joined_path(g.out_dir, "data.csv"), data_to_csv(inst.data));
    std::cout << "wrote sem.json, truth_cpdag.json, data.csv to " << g.out_dir
              << " (edges " << inst.sem.dag().num_edges() << ", resamples "
              << inst.faithfulness_resamples << ")\n";
}

void cmd_learn(const GlobalArgs& g, const std::string& algo, const std::string& data_path,
               const std::string& cov_path, double alpha, double oracle_tol, bool rank,
               const std::string& order_spec, int max_cond, const std::string& out,
               const std::string& report_path) {
    ensure_out_dir(g);
    if (data_path.empty() == cov_path.empty())
        throw invalid_input("learn needs exactly one of --data or --cov");

    std::vector<std::string> labels;
    std::optional<CiDecider> decider;
    std::optional<DataMatrix> data;
    if (!data_path.empty()) {
        data = data_from_csv(read_text_file(data_path));
        labels = data->labels;
        if (algo != "ges") decider = CiDecider::fisher_z(*data, alpha, rank);
    } else {
        const Covariance cov = covariance_from_csv(read_text_file(cov_path));
        labels = cov.labels;
        if (algo != "ges") decider = CiDecider::oracle(cov, oracle_tol);
    }

    SkeletonOptions opts;
    opts.max_cond = max_cond;
    const std::vector<std::string> order = resolve_order(order_spec, labels);

    Pdag cpdag;
    RunReport report;
    if (algo == "pc" || algo == "pc-stable") {
        PcResult res = pc(*decider, labels,
                          algo == "pc" ? PcVariant::Classic : PcVariant::Stable, order, opts);
        cpdag = std::move(res.cpdag);
        report = res.report;
    } else if (algo == "ges") {
        if (!data) throw invalid_input("ges needs --data (a sample covariance alone lacks n)");
        GesResult res = ges(GaussianBic(*data), labels);
        cpdag = std::move(res.cpdag);
        report = res.report;
    } else {
        throw invalid_input("unknown algorithm: " + algo);
    }

    const std::string target = out.empty() ? joined_path(g.out_dir, "cpdag.json") : out;
    write_json_file(target, graph_to_json(cpdag));
    json report_json = run_report_to_json(report);
    report_json["alpha"] = alpha;
    report_json["order"] = order_spec.empty() ? "asgiven" : order_spec;
    report_json["rank_correlation"] = rank;
    const std::string rtarget =
        report_path.empty() ? target.substr(0, target.rfind(".json")) + ".report.json"
                            : report_path;
    write_json_file(rtarget, report_json);
    std::cout << "wrote " << target << " (" << cpdag.num_directed_edges() << " directed, "
              << cpdag.num_undirected_edges() << " undirected) and " << rtarget << "\n";
}

void cmd_effects(const GlobalArgs& g, const std::string& method, const std::string& cpdag_path,
                 const std::string& data_path, const std::string& cov_path, const std::string& xs,
                 const std::string& y, const std::string& out) {
    ensure_out_dir(g);
    if (data_path.empty() == cov_path.empty())
        throw invalid_input("effects needs exactly one of --data or --cov");
    const Pdag cpdag = pdag_from_json(read_json_file(cpdag_path));
    Covariance cov;
    if (!data_path.empty()) {
        const DataMatrix data = data_from_csv(read_text_file(data_path));
        cov = Covariance{data.labels, data.sample_covariance()};
    } else {
        cov = covariance_from_csv(read_text_file(cov_path));
    }

    const std::vector<std::string> targets = split_list(xs);
    if (targets.empty()) throw invalid_input("--x needs at least one node");

    EffectMultiset result;
    if (method == "ida-local" || method == "ida-global") {
        if (targets.size() != 1) throw invalid_input(method + " takes exactly one --x node");
        result = method == "ida-local" ? ida_local(cpdag, cov, targets[0], y)
                                       : ida_global(cpdag, cov, targets[0], y);
    } else if (method == "jointida-mcd") {
        result = jointida_mcd(cpdag, cov, targets, y);
    } else if (method == "jointida-rrc") {
        result = jointida_rrc(cpdag, cov, targets, y);
    } else {
        throw invalid_input("unknown method: " + method);
    }

    const std::string target = out.empty() ? joined_path(g.out_dir, "effects.json") : out;
    write_json_file(target, effects_to_json(result, method));
    std::cout << "wrote " << target << " (" << result.entries.size() << " candidates, "
              << result.distinct_values().size() << " distinct)\n";
}

void cmd_eval(const GlobalArgs& g, const std::string& truth_path, const std::string& est_path,
              const std::string& out) {
    ensure_out_dir(g);
    const Pdag truth = pdag_from_json(read_json_file(truth_path));
    const Pdag estimate = pdag_from_json(read_json_file(est_path));
    const StructuralMetrics m = structural_metrics(truth, estimate);
    const json j = metrics_to_json(m);
    const std::string target = out.empty() ? joined_path(g.out_dir, "metrics.json") : out;
    write_json_file(target, j);
    std::cout << j.dump() << "\n";
}

void cmd_stability(const GlobalArgs& g, const std::string& data_path, const std::string& algo,
                   double alpha, int runs, double fraction, bool permute, int max_cond,
                   const std::string& out) {
    ensure_out_dir(g);
    const DataMatrix data = data_from_csv(read_text_file(data_path));
    StabilityConfig cfg;
    cfg.algo = algo;
    cfg.alpha = alpha;
    cfg.runs = runs;
    cfg.fraction = fraction;
    cfg.permute_orderings = permute;
    cfg.max_cond = max_cond;
    cfg.threads = g.threads;
    const EdgeFrequencyTable table = stability_run(data, cfg, g.seed);
    const std::string target = out.empty() ? joined_path(g.out_dir, "frequencies.csv") : out;
    write_text_file(target, frequency_table_to_csv(table));
    std::cout << "wrote " << target << " (" << table.counts.size() << " edges over "
              << table.runs << " runs)\n";
}

void cmd_bench(const GlobalArgs& g, int p, double density, double degree, int n, int instances,
               const std::string& algos, const std::string& alphas, int stability_runs,
               double fraction, bool permute) {
    BenchmarkConfig cfg;
    cfg.instance.p = p;
    cfg.instance.edge_density = density;
    cfg.instance.expected_degree = degree;
    cfg.instance.n = n;
    cfg.instances = instances;
    cfg.algos = split_list(algos);
    cfg.alphas.clear();
    for (const auto& a : split_list(alphas)) cfg.alphas.push_back(std::stod(a));
    cfg.seed = g.seed;
    cfg.threads = g.threads;
    cfg.stability_runs = stability_runs;
    cfg.stability_fraction = fraction;
    cfg.permute_orderings = permute;
    run_bench(cfg, g.out_dir);
    std::cout << "wrote benchmark artifacts to " << g.out_dir << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"causal structure learning and total-effect estimation for linear Gaussian SEMs"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags are accepted after the subcommand too

    GlobalArgs g;
    app.add_option("--seed", g.seed, "root seed for all randomness")->capture_default_str();
    app.add_option("--out-dir", g.out_dir, "directory for default outputs")
        ->capture_default_str();
    app.add_option("--threads", g.threads, "worker threads for independent runs")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    // simulate
    auto* sim = app.add_subcommand("simulate", "simulate data from a SEM or a random instance");
    std::string sim_sem, sim_out;
    int sim_p = 0, sim_n = 500;
    double sim_density = 0.2, sim_degree = -1.0;
    sim->add_option("--sem", sim_sem, "SEM JSON to simulate from");
    sim->add_option("--p", sim_p, "node count for a random instance");
    sim->add_option("--density", sim_density, "edge-inclusion probability")
        ->capture_default_str();
    sim->add_option("--degree", sim_degree, "expected degree (overrides --density)");
    sim->add_option("--n", sim_n, "observations")->capture_default_str();
    sim->add_option("--out", sim_out, "data CSV path (with --sem)");
    sim->callback([&] { cmd_simulate(g, sim_sem, sim_p, sim_density, sim_degree, sim_n, sim_out); });

    // learn
    auto* learn = app.add_subcommand("learn", "estimate a CPDAG from data");
    std::string learn_algo = "pc-stable", learn_data, learn_cov, learn_order = "asgiven",
                learn_out, learn_report;
    double learn_alpha = 0.01, learn_tol = 1e-8;
    int learn_max_cond = -1;
    bool learn_rank = false;
    learn->add_option("--algo", learn_algo, "pc | pc-stable | ges")->capture_default_str();
    learn->add_option("--data", learn_data, "data CSV");
    learn->add_option("--cov", learn_cov, "covariance CSV (oracle decider)");
    learn->add_option("--alpha", learn_alpha, "CI-test tuning parameter")->capture_default_str();
    learn->add_option("--oracle-tol", learn_tol, "oracle partial-correlation tolerance")
        ->capture_default_str();
    learn->add_flag("--rank", learn_rank, "rank-correlation pre-transform");
    learn->add_option("--order", learn_order, "asgiven | permute:SEED | order file")
        ->capture_default_str();
    learn->add_option("--max-cond", learn_max_cond, "cap on conditioning-set size (-1 = none)")
        ->capture_default_str();
    learn->add_option("--out", learn_out, "output graph JSON");
    learn->add_option("--report", learn_report, "output run-report JSON");
    learn->callback([&] {
        cmd_learn(g, learn_algo, learn_data, learn_cov, learn_alpha, learn_tol, learn_rank,
                  learn_order, learn_max_cond, learn_out, learn_report);
    });

    // effects
    auto* eff = app.add_subcommand("effects", "possible total effects from a CPDAG");
    std::string eff_method = "ida-local", eff_cpdag, eff_data, eff_cov, eff_x, eff_y, eff_out;
    eff->add_option("--method", eff_method, "ida-local | ida-global | jointida-mcd | jointida-rrc")
        ->capture_default_str();
    eff->add_option("--cpdag", eff_cpdag, "graph JSON")->required();
    eff->add_option("--data", eff_data, "data CSV");
    eff->add_option("--cov", eff_cov, "covariance CSV");
    eff->add_option("--x", eff_x, "intervention node(s), comma separated")->required();
    eff->add_option("--y", eff_y, "response node")->required();
    eff->add_option("--out", eff_out, "output JSON");
    eff->callback(
        [&] { cmd_effects(g, eff_method, eff_cpdag, eff_data, eff_cov, eff_x, eff_y, eff_out); });

    // eval
    auto* ev = app.add_subcommand("eval", "structural metrics of an estimate against a truth");
    std::string ev_truth, ev_est, ev_out;
    ev->add_option("--truth", ev_truth, "truth graph JSON")->required();
    ev->add_option("--estimate", ev_est, "estimated graph JSON")->required();
    ev->add_option("--out", ev_out, "output metrics JSON");
    ev->callback([&] { cmd_eval(g, ev_truth, ev_est, ev_out); });

    // stability
    auto* stab = app.add_subcommand("stability", "subsampled edge-selection frequencies");
    std::string stab_data, stab_algo = "pc-stable", stab_out;
    double stab_alpha = 0.01, stab_fraction = 0.5;
    int stab_runs = 100, stab_max_cond = -1;
    bool stab_permute = false;
    stab->add_option("--data", stab_data, "data CSV")->required();
    stab->add_option("--algo", stab_algo, "pc | pc-stable | ges")->capture_default_str();
    stab->add_option("--alpha", stab_alpha, "CI-test tuning parameter")->capture_default_str();
    stab->add_option("--runs", stab_runs, "subsample runs")->capture_default_str();
    stab->add_option("--fraction", stab_fraction, "subsample fraction")->capture_default_str();
    stab->add_flag("--permute", stab_permute, "permute variable ordering per run");
    stab->add_option("--max-cond", stab_max_cond, "cap on conditioning-set size")
        ->capture_default_str();
    stab->add_option("--out", stab_out, "output frequency CSV");
    stab->callback([&] {
        cmd_stability(g, stab_data, stab_algo, stab_alpha, stab_runs, stab_fraction, stab_permute,
                      stab_max_cond, stab_out);
    });

    // bench
    auto* bench = app.add_subcommand("bench", "end-to-end benchmark over random instances");
    int bench_p = 10, bench_n = 500, bench_instances = 3, bench_stab_runs = 0;
    double bench_density = 0.2, bench_degree = -1.0, bench_fraction = 0.5;
    std::string bench_algos = "pc-stable", bench_alphas = "0.01";
    bool bench_permute = false;
    bench->add_option("--p", bench_p, "node count")->capture_default_str();
    bench->add_option("--density", bench_density, "edge-inclusion probability")
        ->capture_default_str();
    bench->add_option("--degree", bench_degree, "expected degree (overrides --density)");
    bench->add_option("--n", bench_n, "observations per instance")->capture_default_str();
    bench->add_option("--instances", bench_instances, "instance count")->capture_default_str();
    bench->add_option("--algos", bench_algos, "comma list: pc, pc-stable, ges")
        ->capture_default_str();
    bench->add_option("--alphas", bench_alphas, "comma list of alpha values")
        ->capture_default_str();
    bench->add_option("--stability-runs", bench_stab_runs, "stability runs per instance (0 = off)")
        ->capture_default_str();
    bench->add_option("--fraction", bench_fraction, "stability subsample fraction")
        ->capture_default_str();
    bench->add_flag("--permute", bench_permute, "permute orderings in stability runs");
    bench->callback([&] {
        cmd_bench(g, bench_p, bench_density, bench_degree, bench_n, bench_instances, bench_algos,
                  bench_alphas, bench_stab_runs, bench_fraction, bench_permute);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const budget_exceeded& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const invalid_input& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
