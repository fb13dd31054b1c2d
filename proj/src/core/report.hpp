#pragma once

#include <filesystem>
#include <string>

#include "ablation.hpp"
#include "config.hpp"
#include "eval.hpp"
#include "json.hpp"
#include "trainer.hpp"

namespace credanno {

nlohmann::json metrics_json(const MetricReport& m, const AttributeSchema& schema);
nlohmann::json run_report_json(const RunReport& r, const Dataset& dataset);
nlohmann::json aggregate_json(const AggregateReport& a, const AttributeSchema& schema);
nlohmann::json experiment_json(const ExperimentResult& e, const ExperimentConfig& cfg, const Dataset& dataset);
nlohmann::json ablation_json(const AblationTable& t);

// "91.22±1.51"
std::string mean_std(const Summary& s, int decimals = 2);

// Aligned-column tables: attribute accuracies, malignancy and annotation use.
std::string metrics_text(const MetricReport& m, const AttributeSchema& schema, const std::string& title);
std::string experiment_text(const ExperimentResult& e, const AttributeSchema& schema);
std::string ablation_text(const AblationTable& t);

std::string experiment_csv(const ExperimentResult& e, const AttributeSchema& schema);
std::string ablation_csv(const AblationTable& t);

// Files of one `train` invocation under `out_dir`:
//   config.cfg, report.json, report.csv, report.txt, manifest.json,
//   repeat_NNN/{seeds.csv, acquisition_stT.csv, stT.json/.bin, final.json/.bin, run.json}
// run.log (notes and wall time) is the only file that varies between
// identical invocations and is left out of the manifest.
void write_experiment(const std::filesystem::path& out_dir, const ExperimentConfig& cfg, const Dataset& dataset,
                      const ExperimentResult& result, double seconds);

void write_ablation(const std::filesystem::path& out_dir, const ExperimentConfig& cfg, const AblationTable& table,
                    double seconds);

void write_evaluation(const std::filesystem::path& out_dir, const MetricReport& m, const AttributeSchema& schema,
                      const std::filesystem::path& checkpoint);

// manifest.json listing every file in `out_dir` (except run.log) with size and FNV-1a hash.
void write_manifest(const std::filesystem::path& out_dir, const std::string& kind);

}  // namespace credanno
