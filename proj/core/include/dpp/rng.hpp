#pragma once

#include <cstdint>

namespace dpp {

// SplitMix64 (Steele, Lea, Flood 2014). Chosen over <random> engines so that
// sampled event sequences are identical across standard libraries.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform();

 private:
  std::uint64_t state_;
};

}  // namespace dpp
