#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace dictct {

/// Seeded random source with a fixed, platform-independent streaming rule.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The standard distributions are not, so the conversions to
/// uniform doubles, bounded integers and Gaussians are implemented here:
///  - uniform():  top 53 bits of one engine draw, scaled to [0, 1).
///  - index(n):   rejection sampling on one engine draw per attempt.
///  - gaussian(): Marsaglia polar method; draws come in pairs and the second
///                value of a pair is cached for the next call.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform();
  std::uint64_t index(std::uint64_t n);
  double gaussian();

  /// k distinct indices from [0, n), in increasing order.
  std::vector<std::size_t> sample_sorted(std::size_t n, std::size_t k);
  /// k distinct indices from [0, n), in draw order (partial Fisher-Yates).
  std::vector<std::size_t> sample_shuffled(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace dictct
