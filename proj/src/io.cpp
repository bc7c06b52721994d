#include "causalkit/io.hpp"

#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace causalkit {

using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

json graph_to_json(const Pdag& g) {
    json edges = json::array();
    for (const auto& [from, to] : g.directed_edges())
        edges.push_back({{"from", from}, {"to", to}, {"type", "directed"}});
    for (const auto& [a, b] : g.undirected_edges())
        edges.push_back({{"from", a}, {"to", b}, {"type", "undirected"}});
    return json{{"nodes", g.nodes()}, {"edges", edges}};
}

namespace {

void check_keys(const json& j, std::initializer_list<const char*> keys, const char* what) {
    if (!j.is_object()) throw invalid_input(std::string(what) + ": expected a JSON object");
    for (const char* k : keys)
        if (!j.contains(k)) throw invalid_input(std::string(what) + ": missing key '" + k + "'");
}

}  // namespace

Pdag pdag_from_json(const json& j) {
    check_keys(j, {"nodes", "edges"}, "graph");
    Pdag g(j.at("nodes").get<std::vector<std::string>>());
    for (const auto& e : j.at("edges")) {
        check_keys(e, {"from", "to", "type"}, "edge");
        const auto type = e.at("type").get<std::string>();
        if (type == "directed")
            g.add_directed_edge(e.at("from").get<std::string>(), e.at("to").get<std::string>());
        else if (type == "undirected")
            g.add_undirected_edge(e.at("from").get<std::string>(), e.at("to").get<std::string>());
        else
            throw invalid_input("unknown edge type: " + type);
    }
    return g;
}

Dag dag_from_json(const json& j) {
    Pdag p = pdag_from_json(j);
    if (!p.fully_directed()) throw invalid_input("expected a DAG but found undirected edges");
    return p.to_dag();
}

json sem_to_json(const LinearSem& sem) {
    json j = graph_to_json(Pdag::from_dag(sem.dag()));
    json weights = json::array();
    for (const auto& [from, to] : sem.dag().edges())
        weights.push_back({{"from", from}, {"to", to}, {"w", sem.weight(from, to)}});
    json noise = json::object();
    for (const auto& v : sem.dag().nodes()) noise[v] = sem.noise_variance(v);
    j["weights"] = weights;
    j["noise_variances"] = noise;
    return j;
}

LinearSem sem_from_json(const json& j) {
    check_keys(j, {"nodes", "edges", "weights", "noise_variances"}, "sem");
    Dag dag = dag_from_json(json{{"nodes", j.at("nodes")}, {"edges", j.at("edges")}});
    std::vector<std::tuple<std::string, std::string, double>> weights;
    for (const auto& w : j.at("weights")) {
        check_keys(w, {"from", "to", "w"}, "weight");
        weights.emplace_back(w.at("from").get<std::string>(), w.at("to").get<std::string>(),
                             w.at("w").get<double>());
    }
    std::map<std::string, double> noise;
    for (const auto& [label, value] : j.at("noise_variances").items())
        noise[label] = value.get<double>();
    return LinearSem(std::move(dag), weights, noise);
}

std::string data_to_csv(const DataMatrix& data) {
    std::ostringstream out;
    for (int c = 0; c < data.p(); ++c) {
        if (c) out << ',';
        out << data.labels[c];
    }
    out << '\n';
    for (int r = 0; r < data.n(); ++r) {
        for (int c = 0; c < data.p(); ++c) {
            if (c) out << ',';
            out << format_double(data.values(r, c));
        }
        out << '\n';
    }
    return out.str();
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

std::pair<std::vector<std::string>, Eigen::MatrixXd> parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw invalid_input("empty CSV");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto labels = split_csv_line(line);
    const int p = static_cast<int>(labels.size());

    std::vector<double> cells;
    int rows = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (static_cast<int>(fields.size()) != p)
            throw invalid_input("CSV row " + std::to_string(rows + 2) + " has " +
                                std::to_string(fields.size()) + " fields, expected " +
                                std::to_string(p));
        for (const auto& f : fields) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(f, &used);
            } catch (const std::exception&) {
                throw invalid_input("CSV value is not a number: '" + f + "'");
            }
            if (used != f.size()) throw invalid_input("CSV value is not a number: '" + f + "'");
            cells.push_back(v);
        }
        ++rows;
    }
    if (rows == 0) throw invalid_input("CSV has no data rows");
    Eigen::MatrixXd m(rows, p);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < p; ++c) m(r, c) = cells[static_cast<std::size_t>(r) * p + c];
    return {labels, m};
}

}  // namespace

DataMatrix data_from_csv(const std::string& text) {
    auto [labels, m] = parse_csv(text);
    return DataMatrix{std::move(labels), std::move(m)};
}

std::string covariance_to_csv(const Covariance& cov) {
    return data_to_csv(DataMatrix{cov.labels, cov.mat});
}

Covariance covariance_from_csv(const std::string& text) {
    auto [labels, m] = parse_csv(text);
    if (m.rows() != m.cols())
        throw invalid_input("covariance CSV must be square, got " + std::to_string(m.rows()) +
                            " rows x " + std::to_string(m.cols()) + " columns");
    return Covariance{std::move(labels), std::move(m)};
}

json effects_to_json(const EffectMultiset& m, const std::string& method) {
    json j;
    j["method"] = method;
    j["x"] = m.targets;
    j["y"] = m.response;
    j["provenance"] = m.provenance == Provenance::Local ? "local" : "enumeration";
    json entries = json::array();
    for (const auto& e : m.entries) {
        json parent_sets = json::object();
        for (const auto& [t, pa] : e.parent_sets) parent_sets[t] = pa;
        entries.push_back({{"parents", parent_sets}, {"values", e.values}});
    }
    j["candidates"] = entries;
    json distinct = json::array();
    for (const auto& [values, mult] : m.distinct_values())
        distinct.push_back({{"values", values}, {"multiplicity", mult}});
    j["distinct"] = distinct;
    return j;
}

json run_report_to_json(const RunReport& r) {
    json j;
    j["algo"] = r.algo;
    j["ci_tests"] = r.ci_tests;
    j["levels"] = r.levels;
    j["collider_conflicts"] = r.collider_conflicts;
    j["max_cond_hit"] = r.max_cond_hit;
    if (r.algo == "ges") {
        j["ges_forward_moves"] = r.ges_forward_moves;
        j["ges_backward_moves"] = r.ges_backward_moves;
        j["ges_final_score"] = r.ges_final_score;
    }
    return j;
}

json metrics_to_json(const StructuralMetrics& m) {
    return json{{"shd", m.shd}, {"skeleton_tpr", m.skeleton_tpr}, {"skeleton_fpr", m.skeleton_fpr}};
}

std::string frequency_table_to_csv(const EdgeFrequencyTable& table) {
    std::ostringstream out;
    out << "from,to,count,runs,frequency\n";
    for (const auto& [edge, count] : table.counts)
        out << edge.first << ',' << edge.second << ',' << count << ',' << table.runs << ','
            << format_double(static_cast<double>(count) / table.runs) << '\n';
    return out.str();
}

std::string roc_to_csv(const RocCurve& curve) {
    std::ostringstream out;
    out << "label,fpr,tpr\n";
    for (const auto& pt : curve.points)
        out << "estimate," << format_double(pt.fpr) << ',' << format_double(pt.tpr) << '\n';
    out << "RG,0,0\nRG,1,1\n";
    return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw invalid_input("cannot open for writing: " + path);
    out << content;
    if (!out) throw invalid_input("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw invalid_input("cannot open: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_json_file(const std::string& path, const json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

json read_json_file(const std::string& path) {
    try {
        return json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw invalid_input("invalid JSON in " + path + ": " + e.what());
    }
}

}  // namespace causalkit
