#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>

#include "causalkit/discovery.hpp"
#include "causalkit/effects.hpp"
#include "causalkit/harness.hpp"
#include "causalkit/sem.hpp"

// File formats shared by the library and the CLI.
//
// Graph JSON: {"nodes": [...], "edges": [{"from": .., "to": .., "type":
//   "directed"|"undirected"}, ...]}
// SEM JSON: graph JSON plus "weights": [{"from", "to", "w"}, ...] and
//   "noise_variances": {label: value}.
// Data CSV: first row labels, one observation per row, decimal point, no
//   index column. Covariance CSV uses the same layout with p value rows.

namespace causalkit {

nlohmann::json graph_to_json(const Pdag& g);
Pdag pdag_from_json(const nlohmann::json& j);
Dag dag_from_json(const nlohmann::json& j);  // rejects undirected edges

nlohmann::json sem_to_json(const LinearSem& sem);
LinearSem sem_from_json(const nlohmann::json& j);

std::string data_to_csv(const DataMatrix& data);
DataMatrix data_from_csv(const std::string& text);

std::string covariance_to_csv(const Covariance& cov);
Covariance covariance_from_csv(const std::string& text);

nlohmann::json effects_to_json(const EffectMultiset& m, const std::string& method);
nlohmann::json run_report_to_json(const RunReport& r);
nlohmann::json metrics_to_json(const StructuralMetrics& m);

// "from,to,count,runs,frequency" rows in canonical pair order.
std::string frequency_table_to_csv(const EdgeFrequencyTable& table);
// "label,fpr,tpr" rows; the random-guessing diagonal is appended as "RG".
std::string roc_to_csv(const RocCurve& curve);

// Whole-file helpers; throw invalid_input on unreadable paths or bad content.
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::string& path);

// "%.17g": deterministic and round-trips doubles.
std::string format_double(double v);

}  // namespace causalkit
