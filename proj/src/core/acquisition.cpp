#include "acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "error.hpp"
#include "rng.hpp"

namespace credanno {

const AnnotationRecord& Oracle::read(std::size_t row) {
  if (row >= dataset_->size()) fail(ErrorKind::InvalidArgument, "oracle read outside the dataset");
  if (dataset_->split(row) != Split::Train) fail(ErrorKind::Runtime, "oracle read of a test sample");
  ++reads_;
  return dataset_->truth(row);
}

const char* to_string(PoolGroup g) {
  switch (g) {
    case PoolGroup::Seed:
      return "seed";
    case PoolGroup::Requested:
      return "requested";
    case PoolGroup::Pseudo:
      return "pseudo";
    case PoolGroup::Unused:
      return "unused";
  }
  return "unused";
}

LabelPool::LabelPool(std::vector<std::size_t> train_rows) : train_rows_(std::move(train_rows)) {
  for (auto r : train_rows_) group_.emplace(r, PoolGroup::Unused);
}

PoolGroup LabelPool::group(std::size_t row) const {
  auto it = group_.find(row);
  if (it == group_.end()) fail(ErrorKind::InvalidArgument, "row " + std::to_string(row) + " is not in the pool");
  return it->second;
}

void LabelPool::add_seed(std::size_t row, AnnotationRecord record) {
  auto g = group(row);
  if (g == PoolGroup::Seed || g == PoolGroup::Requested)
    fail(ErrorKind::Runtime, "row " + std::to_string(row) + " already annotated");
  pseudo_.erase(row);
  group_[row] = PoolGroup::Seed;
  labelled_[row] = std::move(record);
}

void LabelPool::add_requested(std::size_t row, AnnotationRecord record) {
  auto g = group(row);
  if (g == PoolGroup::Seed || g == PoolGroup::Requested)
    fail(ErrorKind::Runtime, "row " + std::to_string(row) + " already annotated");
  pseudo_.erase(row);
  group_[row] = PoolGroup::Requested;
  labelled_[row] = std::move(record);
}

void LabelPool::clear_pseudo() {
  for (const auto& [row, rec] : pseudo_) group_[row] = PoolGroup::Unused;
  pseudo_.clear();
}

void LabelPool::set_pseudo(std::size_t row, AnnotationRecord record) {
  auto g = group(row);
  if (g == PoolGroup::Seed || g == PoolGroup::Requested)
    fail(ErrorKind::Runtime, "cannot pseudo-label annotated row " + std::to_string(row));
  group_[row] = PoolGroup::Pseudo;
  pseudo_[row] = std::move(record);
}

void LabelPool::set_unused(std::size_t row) {
  auto g = group(row);
  if (g == PoolGroup::Seed || g == PoolGroup::Requested)
    fail(ErrorKind::Runtime, "cannot drop annotated row " + std::to_string(row));
  pseudo_.erase(row);
  group_[row] = PoolGroup::Unused;
}

std::vector<std::size_t> LabelPool::rows_in(PoolGroup g) const {
  std::vector<std::size_t> out;
  for (auto r : train_rows_)
    if (group_.at(r) == g) out.push_back(r);
  return out;
}

std::size_t LabelPool::count(PoolGroup g) const {
  return static_cast<std::size_t>(
      std::count_if(group_.begin(), group_.end(), [g](const auto& kv) { return kv.second == g; }));
}

std::vector<std::size_t> LabelPool::candidates() const {
  std::vector<std::size_t> out;
  for (auto r : train_rows_) {
    auto g = group_.at(r);
    if (g == PoolGroup::Pseudo || g == PoolGroup::Unused) out.push_back(r);
  }
  return out;
}

void LabelPool::check_invariants(const AttributeSchema& schema) const {
  if (group_.size() != train_rows_.size()) fail(ErrorKind::Runtime, "label pool does not cover the train split");
  std::size_t seeds = 0, requested = 0, pseudo = 0;
  for (const auto& [row, g] : group_) {
    switch (g) {
      case PoolGroup::Seed:
        ++seeds;
        if (!labelled_.contains(row)) fail(ErrorKind::Runtime, "seed row without a record");
        break;
      case PoolGroup::Requested:
        ++requested;
        if (!labelled_.contains(row)) fail(ErrorKind::Runtime, "requested row without a record");
        break;
      case PoolGroup::Pseudo:
        ++pseudo;
        if (!pseudo_.contains(row)) fail(ErrorKind::Runtime, "pseudo row without a record");
        break;
      case PoolGroup::Unused:
        if (pseudo_.contains(row) || labelled_.contains(row)) fail(ErrorKind::Runtime, "unused row carries a record");
        break;
    }
  }
  if (labelled_.size() != seeds + requested || pseudo_.size() != pseudo)
    fail(ErrorKind::Runtime, "label pool groups overlap");
  for (const auto& [row, rec] : labelled_) validate_record(rec, schema);
  for (const auto& [row, rec] : pseudo_) validate_record(rec, schema);
}

double shannon_entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs)
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

std::vector<AcquisitionScore> score_pool(const HierarchicalPredictor& pred, const Dataset& dataset,
                                         std::span<const std::size_t> rows) {
  std::vector<AcquisitionScore> out;
  out.reserve(rows.size());
  for (auto row : rows) {
    auto b = pred.forward(dataset.row(row));
    double h = shannon_entropy(b.cls_probs);
    for (const auto& p : b.attr_probs) h += shannon_entropy(p);
    out.push_back({row, b.cls_confidence, h});
  }
  return out;
}

const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::LeastConfidence:
      return "least_confidence";
    case Strategy::IntegratedEntropy:
      return "integrated_entropy";
    case Strategy::Random:
      return "random";
  }
  return "least_confidence";
}

Strategy parse_strategy(const std::string& s) {
  if (s == "least_confidence") return Strategy::LeastConfidence;
  if (s == "integrated_entropy") return Strategy::IntegratedEntropy;
  if (s == "random") return Strategy::Random;
  fail(ErrorKind::Config, "strategy must be least_confidence, integrated_entropy or random (got '" + s + "')");
}

std::vector<std::size_t> select_requests(std::span<const AcquisitionScore> scores, Strategy strategy, std::size_t k,
                                         std::uint64_t rng_seed, std::uint64_t round) {
  if (k > scores.size())
    fail(ErrorKind::Runtime, "annotation budget exhausted: " + std::to_string(k) + " requests for a pool of " +
                                 std::to_string(scores.size()));
  std::vector<AcquisitionScore> order(scores.begin(), scores.end());
  switch (strategy) {
    case Strategy::LeastConfidence:
      std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
        return a.cls_confidence != b.cls_confidence ? a.cls_confidence < b.cls_confidence : a.row < b.row;
      });
      break;
    case Strategy::IntegratedEntropy:
      std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
        return a.integrated_entropy != b.integrated_entropy ? a.integrated_entropy > b.integrated_entropy
                                                            : a.row < b.row;
      });
      break;
    case Strategy::Random: {
      std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.row < b.row; });
      Rng rng = make_rng(rng_seed, Stream::RandomAcquisition, {round});
      // Partial Fisher-Yates: the first k slots are a uniform sample.
      for (std::size_t i = 0; i < k; ++i) {
        auto j = std::uniform_int_distribution<std::size_t>(i, order.size() - 1)(rng);
        std::swap(order[i], order[j]);
      }
      break;
    }
  }
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(order[i].row);
  return out;
}

std::size_t assign_pseudo_labels(const HierarchicalPredictor& pred, const Dataset& dataset, LabelPool& pool,
                                 double threshold) {
  if (!(threshold >= 0.5 && threshold <= 1.0))
    fail(ErrorKind::InvalidArgument, "confidence threshold must lie in [0.5, 1]");
  pool.clear_pseudo();
  std::size_t assigned = 0;
  for (auto row : pool.candidates()) {
    auto b = pred.forward(dataset.row(row));
    if (b.cls_confidence >= threshold) {
      AnnotationRecord rec;
      rec.id = dataset.id(row);
      rec.malignancy = b.malignancy();
      rec.attribute_labels = b.attribute_labels();
      pool.set_pseudo(row, std::move(rec));
      ++assigned;
    } else {
      pool.set_unused(row);
    }
  }
  return assigned;
}

}  // namespace credanno
