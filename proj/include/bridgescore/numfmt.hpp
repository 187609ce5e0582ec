#pragma once

#include <cstdint>
#include <string>

namespace bridgescore {

/// Percent of count/total with one decimal, banker's rounding on exact ties.
/// Computed in integer arithmetic so ties are detected exactly
/// (2/800 -> "0.2", 18/800 -> "2.2", 727/800 -> "90.9").
std::string format_percent(std::uint64_t count, std::uint64_t total);

/// Tenths of a percent as an integer (908.75 -> 909). Half-to-even ties.
std::int64_t percent_tenths(std::uint64_t count, std::uint64_t total);

/// Fixed-decimal formatting with round-half-even, e.g. format_fixed(70.2278, 1)
/// -> "70.2". decimals in [0, 9].
std::string format_fixed(double value, int decimals);

double round_half_even(double value, int decimals);

}  // namespace bridgescore
