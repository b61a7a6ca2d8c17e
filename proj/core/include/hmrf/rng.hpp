#pragma once

#include <cstdint>
#include <random>

namespace hmrf {

/// Seedable, splittable random stream used everywhere in the library.
///
/// Backed by std::mt19937_64. Child streams are derived from the parent's
/// seed and a stream id through splitmix64, so a child never depends on how
/// many draws the parent has made.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  /// Uniform on [0, 1).
  double uniform() { return unit_(engine_); }

  double normal(double mean, double sd) {
    std::normal_distribution<double> dist(mean, sd);
    return dist(engine_);
  }

  /// Uniform integer in [0, n).
  int index(int n) {
    std::uniform_int_distribution<int> dist(0, n - 1);
    return dist(engine_);
  }

  Rng split(std::uint64_t stream) const { return Rng(derive_seed(seed_, stream)); }

  static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(seed ^ splitmix64(stream + 0x9E3779B97F4A7C15ULL));
  }

  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
};

// Named stream ids so that the same seed drives unrelated parts of a run
// independently.
namespace stream {
inline constexpr std::uint64_t kHiddenField = 1;
inline constexpr std::uint64_t kEmission = 2;
inline constexpr std::uint64_t kPosteriorChain = 3;
inline constexpr std::uint64_t kPriorChain = 4;
inline constexpr std::uint64_t kPlChain = 5;
inline constexpr std::uint64_t kScanPoint = 6;
}  // namespace stream

}  // namespace hmrf
