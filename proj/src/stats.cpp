#include "bridgescore/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bridgescore {

int nearest_rank_percentile(std::vector<int> samples, double p) {
  if (samples.empty()) throw std::invalid_argument("percentile of empty sample");
  if (!(p > 0.0) || p > 100.0) throw std::invalid_argument("percentile p out of (0,100]");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  auto rank = static_cast<std::size_t>(std::ceil(p * n / 100.0));
  if (rank < 1) rank = 1;
  if (rank > samples.size()) rank = samples.size();
  return samples[rank - 1];
}

Moments compute_moments(const std::vector<int>& samples) {
  Moments m;
  if (samples.empty()) return m;
  double sum = 0.0;
  m.min = samples[0];
  m.max = samples[0];
  for (int v : samples) {
    sum += v;
    m.min = std::min(m.min, v);
    m.max = std::max(m.max, v);
  }
  m.mean = sum / static_cast<double>(samples.size());
  double sq = 0.0;
  for (int v : samples) {
    const double d = v - m.mean;
    sq += d * d;
  }
  m.stddev = std::sqrt(sq / static_cast<double>(samples.size()));

  std::vector<int> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  if (n % 2 == 1) {
    m.median = sorted[n / 2];
  } else {
    m.median = (static_cast<double>(sorted[n / 2 - 1]) + sorted[n / 2]) / 2.0;
  }
  return m;
}

std::uint64_t DetRng::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("DetRng::below(0)");
  // Rejection sampling over the largest multiple of bound that fits.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = eng_();
  } while (x >= limit);
  return x % bound;
}

double DetRng::unit() {
  return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
}

std::uint64_t fnv1a64(const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 14695981039346656037ull;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t fnv1a64_str(const std::string& s) { return fnv1a64(s.data(), s.size()); }

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace bridgescore
