#pragma once

#include <cstdint>
#include <random>

#include "lidlab/core/types.hpp"

namespace lidlab {

/// Seeded random stream with distributions implemented on top of the raw
/// mt19937_64 output, so that draws are reproducible bit-for-bit for a given
/// seed (std::normal_distribution et al. are implementation-defined and are
/// deliberately not used).
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (lo, hi]; never returns lo.
  double uniform_open_closed(double lo, double hi);
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  /// Standard normal via Box-Muller.
  double gaussian();
  Vec gaussian_vec(Eigen::Index n);
  /// Rademacher +-1 entries.
  Vec rademacher_vec(Eigen::Index n);

  /// Independent substream; distinct tags give decorrelated streams.
  Rng fork(std::uint64_t tag) const;

  std::uint64_t raw();

 private:
  std::mt19937_64 eng_;
  std::uint64_t seed_;
  double cached_gaussian_ = 0.0;
  bool has_cached_gaussian_ = false;
};

/// splitmix64 finalizer, used for seed mixing and lightweight hashing.
std::uint64_t mix64(std::uint64_t x);

} // namespace lidlab
