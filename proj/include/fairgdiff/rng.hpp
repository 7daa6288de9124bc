#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace fairgdiff {

/// Deterministic random stream. All distribution transforms are hand-rolled
/// on top of std::mt19937_64 so that a given seed produces the same values on
/// every platform (std::uniform_real_distribution and friends are
/// implementation-defined and would break byte-identical reruns).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller. The second value of each pair is
  /// cached, so draws come in a fixed order for a fixed seed.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  /// Uniform integer in [0, bound). bound must be nonzero.
  std::uint64_t below(std::uint64_t bound) {
    // Lemire multiply-shift; bias is negligible for desk-scale bounds.
    unsigned __int128 m = static_cast<unsigned __int128>(gen_()) * bound;
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Fisher-Yates permutation of 0..n-1.
  std::vector<int> permutation(int n) {
    std::vector<int> p(n);
    for (int i = 0; i < n; ++i) p[i] = i;
    shuffle(p);
    return p;
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Derives the seed for a named substream from a root seed. Every stage of
/// the pipeline draws from its own named stream so stages can be reproduced
/// independently.
std::uint64_t substream_seed(std::uint64_t root, std::string_view name);

}  // namespace fairgdiff
