#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "acquisition.hpp"
#include "predictor.hpp"
#include "seeding.hpp"
#include "synthgen.hpp"

namespace credanno {

enum class SeedingMode { Sparse, Random };
enum class PseudoMode { Dynamic, Static, Off };
enum class ScheduleMode { Restart, FullSpan };

const char* to_string(SeedingMode m);
const char* to_string(PseudoMode m);
const char* to_string(ScheduleMode m);

struct RunConfig {
  double seed_fraction = 0.01;
  double request_fraction = 0.0;
  int seed_epochs = 100;
  int resume_epochs = 50;
  int quench_period = 10;
  double confidence_threshold = 0.7;
  Strategy strategy = Strategy::LeastConfidence;
  int batch_size = 128;
  double momentum = 0.9;
  double base_lr = 0.00025;
  std::uint64_t rng_seed = 0;
  SeedingMode seeding = SeedingMode::Sparse;
  PseudoMode pseudo_labels = PseudoMode::Dynamic;
  bool quenching = true;
  ScheduleMode schedule = ScheduleMode::Restart;
  PredictorOptions predictor;
  bool seed_within_cluster = true;
  KMeansOptions kmeans;
  // Number of quench events (starting at st1) that spend part of the request budget.
  int acquisition_rounds = 1;

  void validate() const;
};

struct DataSource {
  // Empty `features` selects the synthetic generator.
  std::filesystem::path features, annotations, split, schema;
  bool synthetic() const { return features.empty(); }
};

struct ExperimentConfig {
  RunConfig run;
  SynthConfig synth;
  DataSource data;
  int n_repeats = 1;
  int parallel_repeats = 1;
  std::vector<double> ablation_budgets{0.10, 0.01};
  std::filesystem::path checkpoint;

  void validate() const;
};

// Applies one `key = value` setting; unknown keys and bad values throw Error(Config).
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);
std::string get_config_value(const ExperimentConfig& cfg, const std::string& key);
const std::vector<std::string>& config_keys();

// Flat `key = value` text; `#` comments. Overrides are applied after the
// file and the result is validated.
ExperimentConfig parse_config(const std::string& content, const std::vector<std::pair<std::string, std::string>>& overrides = {});
ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::pair<std::string, std::string>>& overrides = {});
// Every key with its resolved value, in config_keys() order. Parsing the
// echo reproduces the configuration exactly.
std::string config_echo(const ExperimentConfig& cfg);

// Loads the configured files, or generates the synthetic dataset when no
// feature file is set. The schema file defaults to the LIDC preset.
Dataset load_configured_dataset(const ExperimentConfig& cfg);

// ceil(fraction * n) with a small tolerance so 0.09 * 500 gives 45, not 46.
std::size_t budget_count(double fraction, std::size_t n);

}  // namespace credanno
