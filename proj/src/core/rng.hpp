#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace credanno {

using Rng = std::mt19937_64;

// Named RNG streams. Every consumer derives its generator from
// (run seed, stream, extra indices) so that draws in one stage never shift
// the draws of another.
enum class Stream : std::uint32_t {
  PredictorInit = 1,
  KMeans = 2,
  RandomSeeding = 3,
  RandomAcquisition = 4,
  Shuffle = 5,
  Synth = 6,
};

inline Rng make_rng(std::uint64_t seed, Stream stream, std::initializer_list<std::uint64_t> extra = {}) {
  std::vector<std::uint32_t> words{static_cast<std::uint32_t>(seed & 0xffffffffu),
                                   static_cast<std::uint32_t>(seed >> 32),
                                   static_cast<std::uint32_t>(stream)};
  for (auto e : extra) {
    words.push_back(static_cast<std::uint32_t>(e & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(e >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

}  // namespace credanno
