#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "acquisition.hpp"
#include "config.hpp"
#include "data_model.hpp"
#include "eval.hpp"
#include "predictor.hpp"
#include "seeding.hpp"

namespace credanno {

struct SeedTraceRow {
  std::size_t row;
  std::optional<std::size_t> cluster;  // empty under random seeding
  std::optional<double> similarity;
};

struct AcquisitionTraceRow {
  std::size_t row;
  PoolGroup group;
  double cls_confidence;
  double integrated_entropy;
};

// Predictor state at the end of a training stage: st1 after seeding, then
// the state just before each quench, and the final state.
struct StatusSnapshot {
  int status = 0;
  int resume_epoch = 0;  // resume-phase epoch at which it was taken
  MetricReport test;
  std::size_t n_requested = 0;
  std::size_t n_pseudo = 0;
  std::size_t n_unused = 0;
  std::optional<HierarchicalPredictor> predictor;  // kept when artifacts are requested
  std::vector<AcquisitionTraceRow> acquisition;
};

struct QuenchEvent {
  int index = 0;
  int resume_epoch = 0;
  bool weights_at_st0 = false;
  bool momentum_zero = false;
  bool pseudo_refreshed = false;
  std::size_t n_pseudo = 0;
};

struct RunReport {
  RunConfig config;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::size_t n_seed = 0;
  std::size_t n_requested = 0;
  std::size_t oracle_reads = 0;
  MetricReport final_metrics;
  std::vector<StatusSnapshot> statuses;
  std::vector<QuenchEvent> quenches;
  std::vector<std::string> notes;
};

struct RunResult {
  RunReport report;
  HierarchicalPredictor final_predictor;
  std::vector<SeedTraceRow> seeds;
};

// Hooks for tests and tracing. `on_quench` sees the predictor before and
// after the restore together with the refreshed pool.
struct TrainerHooks {
  std::function<void(const HierarchicalPredictor& before, const HierarchicalPredictor& after,
                     const OptimizerState& opt, const LabelPool& pool)>
      on_quench;
  std::function<void(const std::vector<std::size_t>& seed_rows)> on_seeds;
};

struct TrainOptions {
  bool keep_artifacts = false;
  TrainerHooks hooks;
};

struct SeedPhase {
  HierarchicalPredictor predictor;
  OptimizerState optimizer;
  LabelPool pool;
  std::vector<SeedTraceRow> seeds;
  std::size_t n_seed = 0;
};

// Picks seeds (sparse or random), reads them from the oracle and trains the
// predictor from st0 to st1 on them alone.
SeedPhase run_seed_phase(const Dataset& dataset, const RunConfig& config, Oracle& oracle,
                         const TrainOptions& options = {});
// Same, with an explicit seed set instead of the configured selection.
SeedPhase run_seed_phase_with(const Dataset& dataset, const RunConfig& config, Oracle& oracle,
                              std::vector<std::size_t> seed_rows);

// Requests, pseudo labels, quench cycles; returns the completed run.
RunResult run_active_phase(SeedPhase seeded, const Dataset& dataset, const RunConfig& config, Oracle& oracle,
                           const TrainOptions& options = {});

RunResult run_single(const Dataset& dataset, const RunConfig& config, const TrainOptions& options = {});

// Trains on `examples` for `epochs` epochs; `lr_at(e)` gives the rate of
// epoch e. Mini-batches come from a per-epoch shuffle keyed by
// (rng_seed, status, epoch); the last short batch is kept.
void train_epochs(HierarchicalPredictor& pred, OptimizerState& opt, std::span<const TrainingExample> examples,
                  int epochs, const std::function<double(int)>& lr_at, std::uint64_t rng_seed, int status);

struct Summary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single value
};
Summary summarize(std::span<const double> values);

struct AggregateReport {
  std::size_t repeats = 0;
  Summary malignancy;
  std::vector<Summary> attributes;
  std::vector<Summary> k_correct;
  Summary n_seed;
  Summary n_requested;
  Summary oracle_reads;
};

struct ExperimentResult {
  std::vector<RunResult> runs;  // by repeat index
  AggregateReport aggregate;
};

// Repeat r uses rng_seed + r; runs execute on up to `parallel` threads and
// are merged by repeat index.
ExperimentResult run_experiment(const Dataset& dataset, const RunConfig& config, int n_repeats, int parallel = 1,
                                const TrainOptions& options = {});

AggregateReport aggregate(std::span<const RunResult> runs);

}  // namespace credanno
