#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace bridgescore {

/// Nearest-rank percentile over raw samples. The samples are copied and
/// sorted ascending; the returned value is the element at 1-indexed position
/// ceil(p * n / 100). p must be in (0, 100]; samples must be non-empty.
int nearest_rank_percentile(std::vector<int> samples, double p);

/// Population mean / stddev / median of integer samples. The median of an
/// even-sized sample is the average of the two middle order statistics.
struct Moments {
  double mean = 0.0;
  double stddev = 0.0;  // population (divide by n)
  double median = 0.0;
  int min = 0;
  int max = 0;
};

Moments compute_moments(const std::vector<int>& samples);

/// Deterministic RNG. mt19937_64 output is fully specified by the standard;
/// the distributions are not, so this class exposes only hand-rolled
/// operations (rejection-sampled bounded draw, Fisher-Yates shuffle) whose
/// results are identical on every platform.
class DetRng {
 public:
  explicit DetRng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform integer in [0, bound) via rejection sampling. bound > 0.
  std::uint64_t below(std::uint64_t bound);

  /// Uniform double in [0, 1) with 53 random bits.
  double unit();

  /// In-place Fisher-Yates shuffle.
  template <class T>
  void shuffle(std::vector<T>& v) {
    if (v.size() < 2) return;
    for (std::size_t i = v.size() - 1; i > 0; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i + 1));
      if (j != i) std::swap(v[i], v[j]);
    }
  }

 private:
  std::mt19937_64 eng_;
};

/// Stable 64-bit FNV-1a over bytes; used for config fingerprints and the
/// deterministic mock embeddings.
std::uint64_t fnv1a64(const void* data, std::size_t len);
std::uint64_t fnv1a64_str(const std::string& s);

/// splitmix64 step; used to expand a hash into a value stream.
std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace bridgescore
