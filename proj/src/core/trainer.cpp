#include "trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <random>
#include <thread>

#include "error.hpp"
#include "rng.hpp"

namespace credanno {

namespace {

std::vector<TrainingExample> make_examples(const Dataset& dataset, const LabelPool& pool) {
  std::vector<TrainingExample> out;
  const auto& labelled = pool.labelled();
  const auto& pseudo = pool.pseudo();
  for (auto row : pool.train_rows()) {
    if (auto it = labelled.find(row); it != labelled.end())
      out.push_back({dataset.row(row), &it->second});
    else if (auto jt = pseudo.find(row); jt != pseudo.end())
      out.push_back({dataset.row(row), &jt->second});
  }
  return out;
}

std::vector<AcquisitionTraceRow> acquisition_trace(const HierarchicalPredictor& pred, const Dataset& dataset,
                                                   const LabelPool& pool) {
  std::vector<AcquisitionTraceRow> out;
  for (const auto& s : score_pool(pred, dataset, pool.train_rows()))
    out.push_back({s.row, pool.group(s.row), s.cls_confidence, s.integrated_entropy});
  return out;
}

}  // namespace

void train_epochs(HierarchicalPredictor& pred, OptimizerState& opt, std::span<const TrainingExample> examples,
                  int epochs, const std::function<double(int)>& lr_at, std::uint64_t rng_seed, int status) {
  if (examples.empty()) fail(ErrorKind::Runtime, "no training examples");
  const auto batch_size = static_cast<std::size_t>(opt.batch_size);
  std::vector<std::size_t> order(examples.size());
  std::vector<TrainingExample> batch;
  batch.reserve(std::min(batch_size, examples.size()));
  for (int e = 0; e < epochs; ++e) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng = make_rng(rng_seed, Stream::Shuffle,
                       {static_cast<std::uint64_t>(status), static_cast<std::uint64_t>(e)});
    std::shuffle(order.begin(), order.end(), rng);
    const double lr = lr_at(e);
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      batch.clear();
      for (std::size_t i = start; i < std::min(start + batch_size, order.size()); ++i) batch.push_back(examples[order[i]]);
      sgd_step(pred, opt, pred.compute_gradients(batch), lr);
    }
  }
}

SeedPhase run_seed_phase_with(const Dataset& dataset, const RunConfig& config, Oracle& oracle,
                              std::vector<std::size_t> seed_rows) {
  if (seed_rows.empty()) fail(ErrorKind::Runtime, "seed set is empty");
  SeedPhase s{HierarchicalPredictor(dataset.dim(), dataset.schema(), config.rng_seed, config.predictor),
              {},
              LabelPool(dataset.train_rows()),
              {},
              seed_rows.size()};
  for (auto row : seed_rows) s.pool.add_seed(row, oracle.read(row));
  s.optimizer = s.predictor.make_optimizer(config.momentum, config.base_lr, config.batch_size);
  auto examples = make_examples(dataset, s.pool);
  const int epochs = config.seed_epochs;
  train_epochs(
      s.predictor, s.optimizer, examples, epochs, [&](int e) { return cosine_lr(e, epochs, config.base_lr); },
      config.rng_seed, 0);
  return s;
}

SeedPhase run_seed_phase(const Dataset& dataset, const RunConfig& config, Oracle& oracle, const TrainOptions& options) {
  config.validate();
  const auto& train = dataset.train_rows();
  const std::size_t n_seed = budget_count(config.seed_fraction, train.size());
  if (n_seed == 0) fail(ErrorKind::Runtime, "seed budget rounds to zero samples");

  std::vector<std::size_t> rows;
  std::vector<SeedTraceRow> trace;
  if (config.seeding == SeedingMode::Sparse) {
    Matrix points(0, dataset.dim());
    for (auto r : train) points.append_row(dataset.row(r));
    auto clustering = kmeans(points, n_seed, config.rng_seed, config.kmeans);
    for (const auto& c : select_seeds(points, clustering, config.seed_within_cluster)) {
      rows.push_back(train[c.point]);
      trace.push_back({train[c.point], c.cluster, c.similarity});
    }
  } else {
    std::vector<std::size_t> pick(train.begin(), train.end());
    Rng rng = make_rng(config.rng_seed, Stream::RandomSeeding);
    for (std::size_t i = 0; i < n_seed; ++i)
      std::swap(pick[i], pick[std::uniform_int_distribution<std::size_t>(i, pick.size() - 1)(rng)]);
    pick.resize(n_seed);
    for (auto r : pick) {
      rows.push_back(r);
      trace.push_back({r, std::nullopt, std::nullopt});
    }
  }
  if (options.hooks.on_seeds) options.hooks.on_seeds(rows);
  auto s = run_seed_phase_with(dataset, config, oracle, rows);
  s.seeds = std::move(trace);
  return s;
}

RunResult run_active_phase(SeedPhase seeded, const Dataset& dataset, const RunConfig& config, Oracle& oracle,
                           const TrainOptions& options) {
  config.validate();
  RunResult result{{}, seeded.predictor, std::move(seeded.seeds)};
  RunReport& rep = result.report;
  rep.config = config;
  rep.n_train = dataset.train_rows().size();
  rep.n_test = dataset.test_rows().size();
  rep.n_seed = seeded.n_seed;

  HierarchicalPredictor& pred = seeded.predictor;
  OptimizerState& opt = seeded.optimizer;
  LabelPool& pool = seeded.pool;

  const std::size_t k_total = budget_count(config.request_fraction, rep.n_train);
  if (k_total > pool.candidates().size())
    fail(ErrorKind::Runtime, "annotation budget exhausted: " + std::to_string(k_total) + " requests, " +
                                 std::to_string(pool.candidates().size()) + " unannotated samples");

  const bool quench = config.quenching && config.resume_epochs > 0;
  const int full_segments = quench ? config.resume_epochs / config.quench_period : 0;
  const bool terminal_boundary = quench && config.resume_epochs % config.quench_period == 0;
  // Acquisition can happen at st1 and at every boundary that is followed by more training.
  const int slots = 1 + full_segments - (terminal_boundary ? 1 : 0);
  const int rounds = std::min(config.acquisition_rounds, slots);
  int next_round = 0;

  auto acquire = [&]() {
    if (next_round >= rounds) return;
    const int round = next_round++;
    std::size_t quota = k_total / static_cast<std::size_t>(rounds) +
                        (static_cast<std::size_t>(round) < k_total % static_cast<std::size_t>(rounds) ? 1 : 0);
    if (quota == 0) return;
    auto candidates = pool.candidates();
    auto scores = score_pool(pred, dataset, candidates);
    for (auto row : select_requests(scores, config.strategy, quota, config.rng_seed, static_cast<std::uint64_t>(round)))
      pool.add_requested(row, oracle.read(row));
  };

  auto refresh_pseudo = [&](int status) {
    if (assign_pseudo_labels(pred, dataset, pool, config.confidence_threshold) == 0)
      rep.notes.push_back("st" + std::to_string(status) +
                          ": no sample passed the confidence gate; training on seeds and requests only");
  };

  auto snapshot = [&](const HierarchicalPredictor& p, int status, int epoch) {
    StatusSnapshot st;
    st.status = status;
    st.resume_epoch = epoch;
    st.test = evaluate(p, dataset);
    st.n_requested = pool.count(PoolGroup::Requested);
    st.n_pseudo = pool.count(PoolGroup::Pseudo);
    st.n_unused = pool.count(PoolGroup::Unused);
    if (options.keep_artifacts) {
      st.predictor = p;
      st.acquisition = acquisition_trace(p, dataset, pool);
    }
    rep.statuses.push_back(std::move(st));
  };

  auto do_quench = [&](const HierarchicalPredictor& before, int epoch, bool refreshed) {
    pred.restore_st0(opt);
    QuenchEvent ev;
    ev.index = static_cast<int>(rep.quenches.size());
    ev.resume_epoch = epoch;
    ev.weights_at_st0 = pred.at_st0();
    ev.momentum_zero = opt.is_zero();
    ev.pseudo_refreshed = refreshed;
    ev.n_pseudo = pool.count(PoolGroup::Pseudo);
    rep.quenches.push_back(ev);
    if (options.hooks.on_quench) options.hooks.on_quench(before, pred, opt, pool);
  };

  // Seeded status st1.
  acquire();
  if (config.pseudo_labels != PseudoMode::Off) refresh_pseudo(1);
  snapshot(pred, 1, 0);

  if (!quench) {
    if (config.pseudo_labels == PseudoMode::Dynamic && config.resume_epochs > 0)
      rep.notes.push_back("quenching disabled: pseudo labels keep their st1 values");
    if (config.resume_epochs > 0) {
      auto examples = make_examples(dataset, pool);
      const int span = config.resume_epochs;
      train_epochs(
          pred, opt, examples, span, [&](int e) { return cosine_lr(e, span, config.base_lr); }, config.rng_seed, 1);
      snapshot(pred, 2, config.resume_epochs);
    }
    result.final_predictor = pred;
  } else {
    HierarchicalPredictor st1 = pred;
    do_quench(st1, 0, config.pseudo_labels != PseudoMode::Off);
    int epoch = 0;
    int status = 1;
    std::optional<HierarchicalPredictor> final_pred;
    while (epoch < config.resume_epochs) {
      const int len = std::min(config.quench_period, config.resume_epochs - epoch);
      auto examples = make_examples(dataset, pool);
      const int first = epoch;
      std::function<double(int)> lr_at;
      if (config.schedule == ScheduleMode::Restart)
        lr_at = [&, len](int e) { return cosine_lr(e, len, config.base_lr); };
      else
        lr_at = [&, first](int e) { return cosine_lr(first + e, config.resume_epochs, config.base_lr); };
      train_epochs(pred, opt, examples, len, lr_at, config.rng_seed, status);
      epoch += len;
      ++status;
      if (len == config.quench_period) {
        const bool terminal = epoch == config.resume_epochs;
        HierarchicalPredictor before = pred;
        if (!terminal) acquire();
        const bool dynamic = config.pseudo_labels == PseudoMode::Dynamic;
        if (dynamic) refresh_pseudo(status);
        snapshot(before, status, epoch);
        do_quench(before, epoch, dynamic);
        if (terminal) final_pred = std::move(before);
      } else {
        rep.notes.push_back("final partial segment of " + std::to_string(len) +
                            " epoch(s) runs without a terminal quench");
        snapshot(pred, status, epoch);
        final_pred = pred;
      }
    }
    result.final_predictor = std::move(*final_pred);
  }

  rep.n_requested = pool.count(PoolGroup::Requested);
  rep.oracle_reads = oracle.reads();
  rep.final_metrics = evaluate(result.final_predictor, dataset);
  pool.check_invariants(dataset.schema());
  return result;
}

RunResult run_single(const Dataset& dataset, const RunConfig& config, const TrainOptions& options) {
  Oracle oracle(dataset);
  auto seeded = run_seed_phase(dataset, config, oracle, options);
  return run_active_phase(std::move(seeded), dataset, config, oracle, options);
}

Summary summarize(std::span<const double> values) {
  Summary s;
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

AggregateReport aggregate(std::span<const RunResult> runs) {
  AggregateReport a;
  a.repeats = runs.size();
  if (runs.empty()) return a;
  auto collect = [&](auto get) {
    std::vector<double> v;
    for (const auto& r : runs) v.push_back(get(r.report));
    return summarize(v);
  };
  a.malignancy = collect([](const RunReport& r) { return r.final_metrics.malignancy_accuracy; });
  const std::size_t m = runs.front().report.final_metrics.per_attribute_accuracy.size();
  for (std::size_t i = 0; i < m; ++i)
    a.attributes.push_back(collect([i](const RunReport& r) { return r.final_metrics.per_attribute_accuracy[i]; }));
  for (std::size_t k = 0; k <= m; ++k)
    a.k_correct.push_back(collect([k](const RunReport& r) { return r.final_metrics.k_correct_probs[k]; }));
  a.n_seed = collect([](const RunReport& r) { return static_cast<double>(r.n_seed); });
  a.n_requested = collect([](const RunReport& r) { return static_cast<double>(r.n_requested); });
  a.oracle_reads = collect([](const RunReport& r) { return static_cast<double>(r.oracle_reads); });
  return a;
}

ExperimentResult run_experiment(const Dataset& dataset, const RunConfig& config, int n_repeats, int parallel,
                                const TrainOptions& options) {
  if (n_repeats < 1) fail(ErrorKind::InvalidArgument, "n_repeats must be >= 1");
  config.validate();
  std::vector<std::optional<RunResult>> slots(static_cast<std::size_t>(n_repeats));
  std::vector<std::exception_ptr> errors(slots.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < slots.size(); r = next++) {
      try {
        RunConfig c = config;
        c.rng_seed = config.rng_seed + r;
        slots[r] = run_single(dataset, c, options);
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min(parallel, n_repeats));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  ExperimentResult out;
  for (auto& s : slots) out.runs.push_back(std::move(*s));
  out.aggregate = aggregate(out.runs);
  return out;
}

}  // namespace credanno
