#pragma once

#include <string>
#include <vector>

namespace bridgescore {

/// One canonical attribute value and the surface strings that map to it.
/// The canonical name itself always counts as a surface.
struct SurfaceEntry {
  std::string canonical;
  std::vector<std::string> surfaces;

  bool operator==(const SurfaceEntry&) const = default;
};

/// Thresholds that turn numeric extent mentions ("30%", "1.5 m2") into
/// canonical extent bands.
struct NumericBands {
  double percent_threshold = 30.0;
  double area_threshold_m2 = 1.0;
  std::string at_or_above = "widespread";
  std::string below = "local";

  bool operator==(const NumericBands&) const = default;
};

struct Vocabulary {
  std::vector<SurfaceEntry> members;
  std::vector<SurfaceEntry> damages;
  std::vector<SurfaceEntry> locations;
  std::vector<SurfaceEntry> severities;  // canonicals restricted to high/medium/low
  std::vector<SurfaceEntry> extents;
  NumericBands numeric_bands;
  std::vector<std::string> negation_markers;

  bool operator==(const Vocabulary&) const = default;
};

/// All invariant violations, empty when valid: duplicate canonicals, a
/// surface claimed by two canonicals of one category (case-insensitive),
/// severity canonicals outside {high, medium, low}, numeric bands naming
/// unknown extents.
std::vector<std::string> validate_vocabulary(const Vocabulary& vocab);

/// Loads and validates; throws ConfigError listing every violation.
Vocabulary load_vocabulary(const std::string& path);
Vocabulary parse_vocabulary_yaml(const std::string& yaml_text);

}  // namespace bridgescore
