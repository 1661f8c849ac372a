#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace respred {

/// Derives an independent stream seed from a root seed and a stream label.
/// The mapping is a fixed hash, so results do not depend on the order in
/// which streams are created or consumed.
std::uint64_t derive_seed(std::uint64_t root, std::string_view label);

/// Deterministic random source. All transforms are implemented here instead
/// of through std::*_distribution so that a seed produces the same draws on
/// every platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform01();

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);

  /// Standard normal draw (Box-Muller, second value cached).
  double gaussian();

  /// Unbiased integer on [0, bound); bound must be positive.
  std::uint64_t integer(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace respred
