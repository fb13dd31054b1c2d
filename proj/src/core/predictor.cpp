#include "predictor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "error.hpp"
#include "rng.hpp"

namespace credanno {

void LinearHead::logits(std::span<const double> input, std::span<double> out) const {
  for (std::size_t c = 0; c < classes(); ++c) {
    auto w = weights.row(c);
    double acc = bias[c];
    for (std::size_t j = 0; j < w.size(); ++j) acc += w[j] * input[j];
    out[c] = acc;
  }
}

Parameters Parameters::zeros_like() const {
  Parameters z;
  z.attr.reserve(attr.size());
  for (const auto& h : attr) z.attr.emplace_back(h.classes(), h.inputs());
  z.cls = LinearHead(cls.classes(), cls.inputs());
  return z;
}

std::size_t Parameters::count() const {
  std::size_t n = cls.weights.values().size() + cls.bias.size();
  for (const auto& h : attr) n += h.weights.values().size() + h.bias.size();
  return n;
}

void Parameters::for_each(const std::function<void(double&)>& fn) {
  auto head = [&](LinearHead& h) {
    for (double& v : h.weights.values()) fn(v);
    for (double& v : h.bias) fn(v);
  };
  for (auto& h : attr) head(h);
  head(cls);
}

void Parameters::visit(const std::function<void(double)>& fn) const {
  auto head = [&](const LinearHead& h) {
    for (double v : h.weights.values()) fn(v);
    for (double v : h.bias) fn(v);
  };
  for (const auto& h : attr) head(h);
  head(cls);
}

std::vector<double> Parameters::flatten() const {
  std::vector<double> out;
  out.reserve(count());
  visit([&](double v) { out.push_back(v); });
  return out;
}

std::vector<int> PredictionBundle::attribute_labels() const {
  std::vector<int> out;
  out.reserve(attr_probs.size());
  for (const auto& p : attr_probs)
    out.push_back(static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin()));
  return out;
}

void OptimizerState::reset() {
  buffers.for_each([](double& v) { v = 0.0; });
}

bool OptimizerState::is_zero() const {
  bool zero = true;
  buffers.visit([&](double v) { zero = zero && v == 0.0; });
  return zero;
}

void softmax(std::span<const double> logits, std::span<double> out) {
  double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    sum += out[i];
  }
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] /= sum;
}

HierarchicalPredictor::HierarchicalPredictor(std::size_t dim, AttributeSchema schema, std::uint64_t rng_seed,
                                             PredictorOptions options)
    : dim_(dim), schema_(std::move(schema)), rng_seed_(rng_seed), options_(options) {
  if (dim_ == 0) fail(ErrorKind::InvalidArgument, "feature dimension must be >= 1");
  Rng rng = make_rng(rng_seed_, Stream::PredictorInit);
  auto init = [&](std::size_t classes, std::size_t inputs) {
    LinearHead h(classes, inputs);
    double bound = 1.0 / std::sqrt(static_cast<double>(inputs));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (double& w : h.weights.values()) w = u(rng);
    return h;
  };
  for (const auto& a : schema_.attributes()) live_.attr.push_back(init(static_cast<std::size_t>(a.class_count), dim_));
  live_.cls = init(kMalignancyClasses, dim_ + static_cast<std::size_t>(schema_.total_classes()));
  st0_ = live_;
}

HierarchicalPredictor::HierarchicalPredictor(std::size_t dim, AttributeSchema schema, std::uint64_t rng_seed,
                                             PredictorOptions options, Parameters live, Parameters st0)
    : dim_(dim),
      schema_(std::move(schema)),
      rng_seed_(rng_seed),
      options_(options),
      live_(std::move(live)),
      st0_(std::move(st0)) {
  auto check = [&](const Parameters& p) {
    if (p.attr.size() != schema_.size()) fail(ErrorKind::Format, "head count does not match schema");
    for (std::size_t i = 0; i < schema_.size(); ++i)
      if (p.attr[i].classes() != static_cast<std::size_t>(schema_[i].class_count) || p.attr[i].inputs() != dim_ ||
          p.attr[i].bias.size() != p.attr[i].classes())
        fail(ErrorKind::Format, "attribute head shape mismatch for " + schema_[i].name);
    if (p.cls.classes() != kMalignancyClasses ||
        p.cls.inputs() != dim_ + static_cast<std::size_t>(schema_.total_classes()) || p.cls.bias.size() != 2)
      fail(ErrorKind::Format, "malignancy head shape mismatch");
    p.visit([](double v) {
      if (!std::isfinite(v)) fail(ErrorKind::Format, "non-finite parameter");
    });
  };
  check(live_);
  check(st0_);
}

OptimizerState HierarchicalPredictor::make_optimizer(double momentum, double base_lr, int batch_size) const {
  OptimizerState opt;
  opt.buffers = live_.zeros_like();
  opt.momentum = momentum;
  opt.base_lr = base_lr;
  opt.batch_size = batch_size;
  return opt;
}

void HierarchicalPredictor::check_input(std::span<const double> features) const {
  if (features.size() != dim_)
    fail(ErrorKind::InvalidArgument,
         "feature vector has length " + std::to_string(features.size()) + ", expected " + std::to_string(dim_));
  for (double v : features)
    if (!std::isfinite(v)) fail(ErrorKind::InvalidArgument, "non-finite feature value");
}

namespace {

// Scratch for one forward pass, kept so the backward pass can reuse it.
struct ForwardTrace {
  std::vector<std::vector<double>> attr_logits;
  std::vector<std::vector<double>> attr_probs;
  std::vector<double> cls_input;
  std::array<double, 2> cls_logits{};
  std::array<double, 2> cls_probs{};
};

ForwardTrace run_forward(const Parameters& p, const PredictorOptions& opt, std::span<const double> f) {
  ForwardTrace t;
  t.cls_input.assign(f.begin(), f.end());
  t.attr_logits.resize(p.attr.size());
  t.attr_probs.resize(p.attr.size());
  for (std::size_t i = 0; i < p.attr.size(); ++i) {
    const auto& h = p.attr[i];
    t.attr_logits[i].resize(h.classes());
    t.attr_probs[i].resize(h.classes());
    h.logits(f, t.attr_logits[i]);
    softmax(t.attr_logits[i], t.attr_probs[i]);
    switch (opt.feed) {
      case AttrFeed::Probabilities:
        t.cls_input.insert(t.cls_input.end(), t.attr_probs[i].begin(), t.attr_probs[i].end());
        break;
      case AttrFeed::Logits:
        t.cls_input.insert(t.cls_input.end(), t.attr_logits[i].begin(), t.attr_logits[i].end());
        break;
      case AttrFeed::OneHot: {
        auto arg = std::max_element(t.attr_probs[i].begin(), t.attr_probs[i].end()) - t.attr_probs[i].begin();
        for (std::size_t c = 0; c < h.classes(); ++c)
          t.cls_input.push_back(static_cast<std::ptrdiff_t>(c) == arg ? 1.0 : 0.0);
        break;
      }
    }
  }
  p.cls.logits(t.cls_input, t.cls_logits);
  softmax(t.cls_logits, t.cls_probs);
  return t;
}

double clamped_nll(double p) { return -std::log(std::max(p, kProbabilityClamp)); }

}  // namespace

PredictionBundle HierarchicalPredictor::forward(std::span<const double> features) const {
  check_input(features);
  auto t = run_forward(live_, options_, features);
  PredictionBundle b;
  b.attr_probs = std::move(t.attr_probs);
  b.cls_probs = t.cls_probs;
  b.cls_confidence = std::max(t.cls_probs[0], t.cls_probs[1]);
  return b;
}

double HierarchicalPredictor::joint_loss(std::span<const double> features, const AnnotationRecord& record) const {
  auto b = forward(features);
  double loss = clamped_nll(b.cls_probs[static_cast<std::size_t>(record.malignancy)]);
  for (std::size_t i = 0; i < b.attr_probs.size(); ++i)
    loss += clamped_nll(b.attr_probs[i][static_cast<std::size_t>(record.attribute_labels[i])]);
  return loss;
}

double HierarchicalPredictor::mean_loss(std::span<const TrainingExample> batch) const {
  if (batch.empty()) fail(ErrorKind::InvalidArgument, "empty batch");
  double sum = 0.0;
  for (const auto& ex : batch) sum += joint_loss(ex.features, *ex.label);
  return sum / static_cast<double>(batch.size());
}

void HierarchicalPredictor::accumulate(const TrainingExample& ex, Parameters& grad) const {
  check_input(ex.features);
  const auto& rec = *ex.label;
  auto t = run_forward(live_, options_, ex.features);

  // Softmax + cross-entropy: d loss / d logits = probs - onehot(label).
  // Below the clamp the loss term is constant and contributes nothing.
  std::array<double, 2> g_cls{0.0, 0.0};
  if (t.cls_probs[static_cast<std::size_t>(rec.malignancy)] >= kProbabilityClamp) {
    g_cls = t.cls_probs;
    g_cls[static_cast<std::size_t>(rec.malignancy)] -= 1.0;
  }
  for (std::size_t c = 0; c < 2; ++c) {
    auto row = grad.cls.weights.row(c);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] += g_cls[c] * t.cls_input[j];
    grad.cls.bias[c] += g_cls[c];
  }

  std::size_t offset = dim_;
  for (std::size_t i = 0; i < live_.attr.size(); ++i) {
    const std::size_t classes = live_.attr[i].classes();
    const auto label = static_cast<std::size_t>(rec.attribute_labels[i]);
    std::vector<double> g(classes, 0.0);
    if (t.attr_probs[i][label] >= kProbabilityClamp) {
      g = t.attr_probs[i];
      g[label] -= 1.0;
    }

    if (options_.joint_backprop && options_.feed != AttrFeed::OneHot) {
      // Gradient of the malignancy loss w.r.t. this head's slice of the
      // malignancy input, pulled back through the feed.
      std::vector<double> v(classes, 0.0);
      for (std::size_t c = 0; c < classes; ++c)
        v[c] = g_cls[0] * live_.cls.weights(0, offset + c) + g_cls[1] * live_.cls.weights(1, offset + c);
      if (options_.feed == AttrFeed::Logits) {
        for (std::size_t c = 0; c < classes; ++c) g[c] += v[c];
      } else {
        const auto& p = t.attr_probs[i];
        double pv = 0.0;
        for (std::size_t c = 0; c < classes; ++c) pv += p[c] * v[c];
        for (std::size_t c = 0; c < classes; ++c) g[c] += p[c] * (v[c] - pv);
      }
    }

    auto& gh = grad.attr[i];
    for (std::size_t c = 0; c < classes; ++c) {
      auto row = gh.weights.row(c);
      for (std::size_t j = 0; j < dim_; ++j) row[j] += g[c] * ex.features[j];
      gh.bias[c] += g[c];
    }
    offset += classes;
  }
}

Parameters HierarchicalPredictor::compute_gradients(std::span<const TrainingExample> batch) const {
  if (batch.empty()) fail(ErrorKind::InvalidArgument, "empty batch");
  Parameters grad = live_.zeros_like();
  for (const auto& ex : batch) accumulate(ex, grad);
  const double scale = 1.0 / static_cast<double>(batch.size());
  grad.for_each([scale](double& v) { v *= scale; });
  return grad;
}

void HierarchicalPredictor::restore_st0(OptimizerState& opt) {
  live_ = st0_;
  opt.buffers = live_.zeros_like();
}

void sgd_step(HierarchicalPredictor& pred, OptimizerState& opt, const Parameters& grads, double lr) {
  if (!(lr >= 0.0)) fail(ErrorKind::InvalidArgument, "learning rate must be >= 0");
  auto& params = pred.params();
  auto step = [&](LinearHead& p, LinearHead& buf, const LinearHead& g) {
    auto pw = p.weights.values();
    auto bw = buf.weights.values();
    auto gw = g.weights.values();
    for (std::size_t k = 0; k < pw.size(); ++k) {
      bw[k] = opt.momentum * bw[k] + gw[k];
      pw[k] -= lr * bw[k];
    }
    for (std::size_t k = 0; k < p.bias.size(); ++k) {
      buf.bias[k] = opt.momentum * buf.bias[k] + g.bias[k];
      p.bias[k] -= lr * buf.bias[k];
    }
  };
  for (std::size_t i = 0; i < params.attr.size(); ++i) step(params.attr[i], opt.buffers.attr[i], grads.attr[i]);
  step(params.cls, opt.buffers.cls, grads.cls);
}

double cosine_lr(int epoch, int total_epochs, double base_lr) {
  if (total_epochs < 1 || epoch < 0 || epoch >= total_epochs)
    fail(ErrorKind::InvalidArgument,
         "epoch " + std::to_string(epoch) + " outside [0, " + std::to_string(total_epochs) + ")");
  return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * epoch / total_epochs));
}

}  // namespace credanno
