#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "data_model.hpp"
#include "predictor.hpp"

namespace credanno {

struct MetricReport {
  double malignancy_accuracy = 0.0;                 // %
  std::vector<double> per_attribute_accuracy;       // %, within +-1 level
  std::vector<double> per_attribute_exact_accuracy; // %, exact match
  // P(K = k), k = 0..M, from the per-attribute accuracies treated as
  // independent Bernoulli trials.
  std::vector<double> k_correct_probs;
  // Same distribution counted per test sample.
  std::vector<double> k_correct_empirical;
  std::size_t samples = 0;
};

// An attribute prediction is correct within one ordinal level of the truth.
inline bool attribute_correct(int predicted, int truth) { return predicted - truth <= 1 && truth - predicted <= 1; }

MetricReport evaluate(const HierarchicalPredictor& pred, const Dataset& dataset, std::span<const std::size_t> rows);
inline MetricReport evaluate(const HierarchicalPredictor& pred, const Dataset& dataset) {
  return evaluate(pred, dataset, dataset.test_rows());
}

// Poisson-binomial pmf by iterative convolution with [1 - p_i, p_i].
std::vector<double> k_correct_distribution(std::span<const double> accuracies);
// Unreported accuracies count as 1.0.
std::vector<double> k_correct_distribution(std::span<const std::optional<double>> accuracies);

// Published accuracy rows (%), attributes in LIDC preset order; nullopt
// where a method reports no value.
struct ReferenceRow {
  std::string method;
  std::vector<std::optional<double>> attributes;
  std::optional<double> malignancy;
};
const std::vector<ReferenceRow>& reference_rows();

}  // namespace credanno
