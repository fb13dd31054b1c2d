#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "data_model.hpp"
#include "predictor.hpp"

namespace credanno {

// Stand-in for the human annotator: hands out ground-truth records and
// counts every read.
class Oracle {
 public:
  explicit Oracle(const Dataset& dataset) : dataset_(&dataset) {}

  const AnnotationRecord& read(std::size_t row);
  std::size_t reads() const noexcept { return reads_; }

 private:
  const Dataset* dataset_;
  std::size_t reads_ = 0;
};

enum class PoolGroup { Seed, Requested, Pseudo, Unused };
const char* to_string(PoolGroup g);

// Partition of the training rows. Seed and requested rows carry oracle
// records; pseudo rows carry predicted records.
class LabelPool {
 public:
  LabelPool() = default;
  explicit LabelPool(std::vector<std::size_t> train_rows);

  void add_seed(std::size_t row, AnnotationRecord record);
  void add_requested(std::size_t row, AnnotationRecord record);
  // Drops every pseudo record; those rows become unused.
  void clear_pseudo();
  void set_pseudo(std::size_t row, AnnotationRecord record);
  void set_unused(std::size_t row);

  PoolGroup group(std::size_t row) const;
  const std::vector<std::size_t>& train_rows() const noexcept { return train_rows_; }
  std::vector<std::size_t> rows_in(PoolGroup g) const;
  std::size_t count(PoolGroup g) const;
  const std::map<std::size_t, AnnotationRecord>& labelled() const noexcept { return labelled_; }
  const std::map<std::size_t, AnnotationRecord>& pseudo() const noexcept { return pseudo_; }
  // Rows eligible for requests or pseudo labels: not seed, not requested.
  std::vector<std::size_t> candidates() const;

  // Disjoint cover of the train rows and schema conformance of every record.
  void check_invariants(const AttributeSchema& schema) const;

 private:
  std::vector<std::size_t> train_rows_;
  std::map<std::size_t, PoolGroup> group_;
  std::map<std::size_t, AnnotationRecord> labelled_;  // seed + requested
  std::map<std::size_t, AnnotationRecord> pseudo_;
};

struct AcquisitionScore {
  std::size_t row;
  double cls_confidence;      // max malignancy probability
  double integrated_entropy;  // sum of Shannon entropies (nats) over all heads
};

double shannon_entropy(std::span<const double> probs);

std::vector<AcquisitionScore> score_pool(const HierarchicalPredictor& pred, const Dataset& dataset,
                                         std::span<const std::size_t> rows);

enum class Strategy { LeastConfidence, IntegratedEntropy, Random };
const char* to_string(Strategy s);
Strategy parse_strategy(const std::string& s);

// Rows to send to the oracle. Ties go to the lowest row index.
std::vector<std::size_t> select_requests(std::span<const AcquisitionScore> scores, Strategy strategy, std::size_t k,
                                         std::uint64_t rng_seed, std::uint64_t round = 0);

// Re-labels every candidate row: confidence >= threshold gives a pseudo
// record of per-head argmax predictions, otherwise the row becomes unused.
// All previous pseudo records are replaced. Returns the number assigned.
std::size_t assign_pseudo_labels(const HierarchicalPredictor& pred, const Dataset& dataset, LabelPool& pool,
                                 double threshold);

}  // namespace credanno
