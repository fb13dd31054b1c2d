#pragma once

#include <cstdint>
#include <vector>

#include "data_model.hpp"
#include "matrix.hpp"

namespace credanno {

struct SynthConfig {
  int n_train = 500;
  int n_test = 200;
  int dim = 16;
  int n_modes = 4;
  double mode_separation = 8.0;  // in per-mode standard deviations
  double attr_flip_prob = 0.05;
  AttributeSchema schema = AttributeSchema::lidc_default();
  std::uint64_t rng_seed = 0;

  void validate() const;
};

// Dataset plus the generating truth, which the oracle checks in the tests use.
struct SynthResult {
  Dataset dataset;
  std::vector<int> mode_of_row;
  Matrix centers;                           // n_modes x dim
  std::vector<int> mode_malignancy;         // per mode
  std::vector<std::vector<int>> mode_base;  // per mode, per attribute
};

// Mode k sits on axis (k / 2) mod dim with sign (-1)^k at radius
// separation / sqrt(2), so two modes on different axes are exactly
// `separation` apart. Modes beyond 2*dim wrap onto larger shells. Sample j of
// each split belongs to mode j mod n_modes; malignancy of mode k is k mod 2.
SynthResult generate_synthetic(const SynthConfig& config);

}  // namespace credanno
