#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "data_model.hpp"
#include "matrix.hpp"

namespace credanno {

inline constexpr double kProbabilityClamp = 1e-12;

struct LinearHead {
  Matrix weights;  // classes x inputs
  std::vector<double> bias;

  LinearHead() = default;
  LinearHead(std::size_t classes, std::size_t inputs) : weights(classes, inputs), bias(classes, 0.0) {}

  std::size_t classes() const noexcept { return weights.rows(); }
  std::size_t inputs() const noexcept { return weights.cols(); }
  void logits(std::span<const double> input, std::span<double> out) const;

  friend bool operator==(const LinearHead&, const LinearHead&) = default;
};

// All trainable tensors: one head per attribute, then the malignancy head.
// Also used for gradients and momentum buffers, which share the shapes.
struct Parameters {
  std::vector<LinearHead> attr;
  LinearHead cls;

  Parameters zeros_like() const;
  std::size_t count() const;
  // Visits every scalar in a fixed order: attribute heads then malignancy
  // head, each as weights (row-major) followed by bias.
  void for_each(const std::function<void(double&)>& fn);
  void visit(const std::function<void(double)>& fn) const;
  std::vector<double> flatten() const;

  friend bool operator==(const Parameters&, const Parameters&) = default;
};

// What the malignancy head sees of each attribute head.
enum class AttrFeed { Probabilities, Logits, OneHot };

struct PredictorOptions {
  AttrFeed feed = AttrFeed::Probabilities;
  // When false the malignancy loss does not reach the attribute heads.
  bool joint_backprop = false;
};

struct PredictionBundle {
  std::vector<std::vector<double>> attr_probs;
  std::array<double, 2> cls_probs{};
  double cls_confidence = 0.0;

  // Ties resolve to the lowest class index.
  int malignancy() const noexcept { return cls_probs[1] > cls_probs[0] ? 1 : 0; }
  std::vector<int> attribute_labels() const;
};

struct TrainingExample {
  std::span<const double> features;
  const AnnotationRecord* label = nullptr;
};

struct OptimizerState {
  Parameters buffers;
  double momentum = 0.9;
  double base_lr = 0.00025;
  int batch_size = 128;

  void reset();
  bool is_zero() const;
};

class HierarchicalPredictor {
 public:
  HierarchicalPredictor() = default;
  // Weights ~ U[-1/sqrt(inputs), +1/sqrt(inputs)] per head, biases zero. The
  // initial parameters are kept as the st0 snapshot.
  HierarchicalPredictor(std::size_t dim, AttributeSchema schema, std::uint64_t rng_seed, PredictorOptions options = {});
  // Rebuilds a predictor from stored tensors (checkpoint loading).
  HierarchicalPredictor(std::size_t dim, AttributeSchema schema, std::uint64_t rng_seed, PredictorOptions options,
                        Parameters live, Parameters st0);

  std::size_t dim() const noexcept { return dim_; }
  const AttributeSchema& schema() const noexcept { return schema_; }
  std::uint64_t rng_seed() const noexcept { return rng_seed_; }
  const PredictorOptions& options() const noexcept { return options_; }

  const Parameters& params() const noexcept { return live_; }
  Parameters& params() noexcept { return live_; }
  const Parameters& st0() const noexcept { return st0_; }

  PredictionBundle forward(std::span<const double> features) const;
  double joint_loss(std::span<const double> features, const AnnotationRecord& record) const;
  double mean_loss(std::span<const TrainingExample> batch) const;
  // Mean gradient of the joint loss over the batch.
  Parameters compute_gradients(std::span<const TrainingExample> batch) const;

  // Live parameters back to st0, momentum buffers to zero.
  void restore_st0(OptimizerState& opt);
  bool at_st0() const { return live_ == st0_; }

  OptimizerState make_optimizer(double momentum = 0.9, double base_lr = 0.00025, int batch_size = 128) const;

 private:
  void check_input(std::span<const double> features) const;
  void accumulate(const TrainingExample& ex, Parameters& grad) const;

  std::size_t dim_ = 0;
  AttributeSchema schema_;
  std::uint64_t rng_seed_ = 0;
  PredictorOptions options_;
  Parameters live_;
  Parameters st0_;
};

// Numerically stable (max-subtracted) softmax.
void softmax(std::span<const double> logits, std::span<double> out);

// buffer <- momentum * buffer + grad; param <- param - lr * buffer
void sgd_step(HierarchicalPredictor& pred, OptimizerState& opt, const Parameters& grads, double lr);

// base_lr * (1 + cos(pi * epoch / total_epochs)) / 2, for 0 <= epoch < total_epochs.
double cosine_lr(int epoch, int total_epochs, double base_lr);

}  // namespace credanno
