#pragma once
// Independent reference computations the library is checked against.

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "data_model.hpp"
#include "matrix.hpp"
#include "predictor.hpp"

namespace oracles {

using namespace credanno;

inline void set_param(Parameters& p, std::size_t index, double value) {
  std::size_t i = 0;
  p.for_each([&](double& x) {
    if (i++ == index) x = value;
  });
}

// Reference implementation for the gradient oracle, written without the
// library's forward pass. `feed_params` supplies the attribute heads whose
// outputs enter the malignancy head; passing the unperturbed parameters
// there reproduces stop-gradient semantics.
inline std::vector<double> ref_softmax(const std::vector<double>& z) {
  double m = *std::max_element(z.begin(), z.end());
  std::vector<double> e(z.size());
  double s = 0;
  for (std::size_t i = 0; i < z.size(); ++i) s += e[i] = std::exp(z[i] - m);
  for (auto& v : e) v /= s;
  return e;
}

inline std::vector<double> ref_logits(const LinearHead& h, const std::vector<double>& x) {
  std::vector<double> z(h.classes());
  for (std::size_t c = 0; c < h.classes(); ++c) {
    z[c] = h.bias[c];
    for (std::size_t j = 0; j < x.size(); ++j) z[c] += h.weights(c, j) * x[j];
  }
  return z;
}

inline double ref_loss(const Parameters& live, const Parameters& feed_params, AttrFeed feed, const std::vector<double>& f,
                const AnnotationRecord& rec) {
  double loss = 0;
  std::vector<double> cls_in = f;
  for (std::size_t i = 0; i < live.attr.size(); ++i) {
    auto p = ref_softmax(ref_logits(live.attr[i], f));
    loss -= std::log(std::max(p[rec.attribute_labels[i]], 1e-12));
    auto zf = ref_logits(feed_params.attr[i], f);
    auto pf = ref_softmax(zf);
    if (feed == AttrFeed::Probabilities) cls_in.insert(cls_in.end(), pf.begin(), pf.end());
    if (feed == AttrFeed::Logits) cls_in.insert(cls_in.end(), zf.begin(), zf.end());
    if (feed == AttrFeed::OneHot) {
      std::vector<double> oh(pf.size(), 0.0);
      oh[std::max_element(pf.begin(), pf.end()) - pf.begin()] = 1.0;
      cls_in.insert(cls_in.end(), oh.begin(), oh.end());
    }
  }
  auto pc = ref_softmax(ref_logits(live.cls, cls_in));
  loss -= std::log(std::max(pc[rec.malignancy], 1e-12));
  return loss;
}

struct Instance {
  HierarchicalPredictor pred;
  std::vector<std::vector<double>> features;
  std::vector<AnnotationRecord> records;
  std::vector<TrainingExample> batch() const {
    std::vector<TrainingExample> b;
    for (std::size_t i = 0; i < features.size(); ++i) b.push_back({features[i], &records[i]});
    return b;
  }
};

inline Instance random_instance(std::mt19937_64& gen, AttrFeed feed, bool joint) {
  std::uniform_int_distribution<int> dim_d(1, 8), m_d(0, 3), c_d(2, 5), b_d(1, 8);
  std::normal_distribution<double> n(0.0, 1.0);
  int d = dim_d(gen), m = m_d(gen), batch = b_d(gen);
  std::vector<Attribute> attrs;
  for (int i = 0; i < m; ++i) attrs.push_back({"x" + std::to_string(i), c_d(gen)});
  AttributeSchema schema(attrs);
  Instance inst{HierarchicalPredictor(static_cast<std::size_t>(d), schema, gen(), {feed, joint}), {}, {}};
  // Larger weights than the init so probabilities are away from uniform.
  inst.pred.params().for_each([&](double& x) { x = n(gen); });
  for (int s = 0; s < batch; ++s) {
    std::vector<double> f(static_cast<std::size_t>(d));
    for (auto& v : f) v = n(gen);
    AnnotationRecord r{"s" + std::to_string(s), static_cast<int>(gen() % 2), {}};
    for (const auto& a : attrs) r.attribute_labels.push_back(static_cast<int>(gen() % a.class_count));
    inst.features.push_back(f);
    inst.records.push_back(r);
  }
  return inst;
}

// Relative error between the analytic gradient and central differences of
// the reference loss, as ||a - n|| / max(||a|| + ||n||, 1e-12).
inline double gradient_error(const Instance& inst) {
  const auto& base = inst.pred.params();
  auto analytic = inst.pred.compute_gradients(inst.batch()).flatten();
  const double h = 1e-5;
  bool joint = inst.pred.options().joint_backprop;
  AttrFeed feed = inst.pred.options().feed;
  auto mean_ref = [&](const Parameters& p) {
    double s = 0;
    for (std::size_t i = 0; i < inst.features.size(); ++i)
      s += ref_loss(p, joint ? p : base, feed, inst.features[i], inst.records[i]);
    return s / static_cast<double>(inst.features.size());
  };
  auto flat = base.flatten();
  double diff2 = 0, norm_a = 0, norm_n = 0;
  for (std::size_t k = 0; k < flat.size(); ++k) {
    Parameters plus = base, minus = base;
    set_param(plus, k, flat[k] + h);
    set_param(minus, k, flat[k] - h);
    double numeric = (mean_ref(plus) - mean_ref(minus)) / (2 * h);
    diff2 += (analytic[k] - numeric) * (analytic[k] - numeric);
    norm_a += analytic[k] * analytic[k];
    norm_n += numeric * numeric;
  }
  return std::sqrt(diff2) / std::max(std::sqrt(norm_a) + std::sqrt(norm_n), 1e-12);
}

// Exhaustive oracle: every labelling of N points into n non-empty clusters,
// each scored with centroids at the cluster means.
inline double brute_force_inertia(const Matrix& x, std::size_t n) {
  const std::size_t N = x.rows(), D = x.cols();
  std::vector<std::size_t> label(N, 0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    std::vector<std::size_t> count(n, 0);
    for (auto l : label) ++count[l];
    if (std::all_of(count.begin(), count.end(), [](std::size_t c) { return c > 0; })) {
      std::vector<double> mean(n * D, 0.0);
      for (std::size_t i = 0; i < N; ++i)
        for (std::size_t d = 0; d < D; ++d) mean[label[i] * D + d] += x(i, d) / static_cast<double>(count[label[i]]);
      double sse = 0;
      for (std::size_t i = 0; i < N; ++i)
        for (std::size_t d = 0; d < D; ++d) sse += std::pow(x(i, d) - mean[label[i] * D + d], 2);
      best = std::min(best, sse);
    }
    std::size_t pos = 0;
    while (pos < N && ++label[pos] == n) label[pos++] = 0;
    if (pos == N) break;
  }
  return best;
}

inline double brute_force_k(const std::vector<double>& p, std::size_t k) {
  double total = 0;
  for (unsigned mask = 0; mask < (1u << p.size()); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) != k) continue;
    double prob = 1;
    for (std::size_t i = 0; i < p.size(); ++i) prob *= (mask >> i) & 1 ? p[i] : 1 - p[i];
    total += prob;
  }
  return total;
}

}  // namespace oracles
