#include "bridgescore/numfmt.hpp"

#include <cfenv>
#include <cmath>
#include <cstdio>

namespace bridgescore {

std::int64_t percent_tenths(std::uint64_t count, std::uint64_t total) {
  if (total == 0) return 0;
  std::uint64_t num = count * 1000;
  std::uint64_t q = num / total;
  std::uint64_t r = num % total;
  if (2 * r > total) return static_cast<std::int64_t>(q + 1);
  if (2 * r < total) return static_cast<std::int64_t>(q);
  // exact tie: round to even
  if (q % 2 == 1) ++q;
  return static_cast<std::int64_t>(q);
}

std::string format_percent(std::uint64_t count, std::uint64_t total) {
  std::int64_t tenths = percent_tenths(count, total);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%lld.%lld",
                static_cast<long long>(tenths / 10),
                static_cast<long long>(tenths % 10));
  return buf;
}

double round_half_even(double value, int decimals) {
  double scale = std::pow(10.0, decimals);
  // nearbyint honours the default FE_TONEAREST mode, which is half-to-even.
  return std::nearbyint(value * scale) / scale;
}

std::string format_fixed(double value, int decimals) {
  if (decimals < 0) decimals = 0;
  if (decimals > 9) decimals = 9;
  double rounded = round_half_even(value, decimals);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, rounded);
  // normalize "-0.0" to "0.0"
  if (buf[0] == '-') {
    bool all_zero = true;
    for (const char* p = buf + 1; *p; ++p)
      if (*p != '0' && *p != '.') {
        all_zero = false;
        break;
      }
    if (all_zero) return buf + 1;
  }
  return buf;
}

}  // namespace bridgescore
