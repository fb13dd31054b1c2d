#include "eval.hpp"

#include "error.hpp"

namespace credanno {

MetricReport evaluate(const HierarchicalPredictor& pred, const Dataset& dataset, std::span<const std::size_t> rows) {
  if (rows.empty()) fail(ErrorKind::InvalidArgument, "evaluation set is empty");
  const std::size_t m = dataset.schema().size();
  if (pred.schema() != dataset.schema()) fail(ErrorKind::InvalidArgument, "predictor schema does not match dataset");
  std::size_t mal_hits = 0;
  std::vector<std::size_t> hits(m, 0), exact(m, 0), per_k(m + 1, 0);
  for (auto row : rows) {
    const auto& truth = dataset.truth(row);
    auto b = pred.forward(dataset.row(row));
    if (b.malignancy() == truth.malignancy) ++mal_hits;
    auto labels = b.attribute_labels();
    std::size_t k = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (attribute_correct(labels[i], truth.attribute_labels[i])) {
        ++hits[i];
        ++k;
      }
      if (labels[i] == truth.attribute_labels[i]) ++exact[i];
    }
    ++per_k[k];
  }
  const double n = static_cast<double>(rows.size());
  MetricReport r;
  r.samples = rows.size();
  r.malignancy_accuracy = 100.0 * static_cast<double>(mal_hits) / n;
  std::vector<double> p(m);
  for (std::size_t i = 0; i < m; ++i) {
    r.per_attribute_accuracy.push_back(100.0 * static_cast<double>(hits[i]) / n);
    r.per_attribute_exact_accuracy.push_back(100.0 * static_cast<double>(exact[i]) / n);
    p[i] = static_cast<double>(hits[i]) / n;
  }
  r.k_correct_probs = k_correct_distribution(p);
  for (auto c : per_k) r.k_correct_empirical.push_back(static_cast<double>(c) / n);
  return r;
}

std::vector<double> k_correct_distribution(std::span<const double> accuracies) {
  std::vector<double> dist{1.0};
  for (double p : accuracies) {
    if (!(p >= 0.0 && p <= 1.0)) fail(ErrorKind::InvalidArgument, "accuracy must lie in [0, 1]");
    std::vector<double> next(dist.size() + 1, 0.0);
    for (std::size_t k = 0; k < dist.size(); ++k) {
      next[k] += dist[k] * (1.0 - p);
      next[k + 1] += dist[k] * p;
    }
    dist = std::move(next);
  }
  return dist;
}

std::vector<double> k_correct_distribution(std::span<const std::optional<double>> accuracies) {
  std::vector<double> p;
  p.reserve(accuracies.size());
  for (const auto& a : accuracies) p.push_back(a.value_or(1.0));
  return k_correct_distribution(p);
}

const std::vector<ReferenceRow>& reference_rows() {
  using std::nullopt;
  // Sub, Cal, Sph, Mar, Lob, Spi, Tex; malignancy.
  static const std::vector<ReferenceRow> rows = {
      {"full annotations", {96.32, 95.88, 97.23, 96.23, 93.93, 94.06, 97.01}, 87.56},
      {"10% annotations", {96.23, 92.72, 95.71, 90.03, 93.89, 93.67, 92.41}, 87.86},
      {"1% annotations", {95.84, 92.67, 95.97, 91.03, 93.54, 92.72, 92.67}, 86.22},
  };
  return rows;
}

}  // namespace credanno
