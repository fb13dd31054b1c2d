#include "synthgen.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include "error.hpp"
#include "rng.hpp"

namespace credanno {

void SynthConfig::validate() const {
  if (n_train < 1 || n_test < 1) fail(ErrorKind::Config, "synth_n_train and synth_n_test must be >= 1");
  if (dim < 1) fail(ErrorKind::Config, "synth_dim must be >= 1");
  if (n_modes < 1) fail(ErrorKind::Config, "synth_modes must be >= 1");
  if (!(mode_separation >= 0.0) || !std::isfinite(mode_separation))
    fail(ErrorKind::Config, "synth_separation must be finite and >= 0");
  if (!(attr_flip_prob >= 0.0 && attr_flip_prob <= 0.5)) fail(ErrorKind::Config, "synth_flip must lie in [0, 0.5]");
  if (schema.size() == 0) fail(ErrorKind::Config, "synthetic schema needs at least one attribute");
}

SynthResult generate_synthetic(const SynthConfig& config) {
  config.validate();
  const auto& schema = config.schema;
  const auto d = static_cast<std::size_t>(config.dim);
  const auto modes = static_cast<std::size_t>(config.n_modes);
  Rng rng = make_rng(config.rng_seed, Stream::Synth);

  SynthResult out;
  out.centers = Matrix(modes, d);
  const double radius = config.mode_separation / std::sqrt(2.0);
  for (std::size_t k = 0; k < modes; ++k) {
    std::size_t slot = k / 2;
    std::size_t axis = slot % d;
    double shell = static_cast<double>(slot / d + 1);
    out.centers(k, axis) = (k % 2 == 0 ? 1.0 : -1.0) * radius * shell;
  }

  // Benign modes draw base ratings from the lower half of each scale and
  // malignant modes from the upper half, giving attribute/malignancy correlation.
  out.mode_malignancy.resize(modes);
  out.mode_base.assign(modes, std::vector<int>(schema.size()));
  for (std::size_t k = 0; k < modes; ++k) {
    out.mode_malignancy[k] = static_cast<int>(k % 2);
    for (std::size_t a = 0; a < schema.size(); ++a) {
      int c = schema[a].class_count;
      int half = c / 2;
      int lo = out.mode_malignancy[k] == 0 ? 0 : half;
      int hi = out.mode_malignancy[k] == 0 ? std::max(half - 1, 0) : c - 1;
      out.mode_base[k][a] = std::uniform_int_distribution<int>(lo, hi)(rng);
    }
  }

  std::normal_distribution<double> noise(0.0, 1.0);
  std::bernoulli_distribution flip(config.attr_flip_prob);
  std::bernoulli_distribution coin(0.5);

  FeatureMatrix features;
  features.data = Matrix(0, d);
  AnnotationTable table(schema);
  SplitMap split;
  std::vector<double> row(d);
  char idbuf[32];

  auto emit = [&](int count, Split s, const char* prefix) {
    for (int j = 0; j < count; ++j) {
      std::size_t k = static_cast<std::size_t>(j) % modes;
      for (std::size_t c = 0; c < d; ++c) row[c] = out.centers(k, c) + noise(rng);
      AnnotationRecord rec;
      std::snprintf(idbuf, sizeof(idbuf), "%s%05d", prefix, j);
      rec.id = idbuf;
      rec.malignancy = out.mode_malignancy[k];
      rec.attribute_labels = out.mode_base[k];
      for (std::size_t a = 0; a < schema.size(); ++a) {
        if (!flip(rng)) continue;
        int c = schema[a].class_count;
        int v = rec.attribute_labels[a];
        // Move one ordinal level; at either end of the scale the only neighbour is taken.
        if (v == 0)
          v = 1;
        else if (v == c - 1)
          v = c - 2;
        else
          v += coin(rng) ? 1 : -1;
        rec.attribute_labels[a] = v;
      }
      features.ids.push_back(rec.id);
      features.data.append_row(row);
      split.entries.emplace_back(rec.id, s);
      out.mode_of_row.push_back(static_cast<int>(k));
      table.add(std::move(rec));
    }
  };
  emit(config.n_train, Split::Train, "tr");
  emit(config.n_test, Split::Test, "te");

  out.dataset = assemble_dataset(std::move(features), std::move(table), std::move(split));
  return out;
}

}  // namespace credanno
