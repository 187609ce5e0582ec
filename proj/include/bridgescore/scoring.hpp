#pragma once

#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "bridgescore/extract.hpp"

namespace bridgescore {

/// One additive bonus: fires when every (attribute, value) pair in `when`
/// holds. Keys are restricted to member/damage/location/severity/extent;
/// the damage key matches any mentioned damage, not just the primary one.
struct BonusRule {
  std::string id;
  std::map<std::string, std::string> when;
  double delta = 0.0;

  bool operator==(const BonusRule&) const = default;
};

/// Weighted-sum scoring rules. Each lookup table maps canonical attribute
/// names to values in [0,1] and must carry a "default" entry used for
/// missing or unlisted attributes. priority_bands holds the four band
/// thresholds (t5, t4, t3, t2), strictly descending within (0,1).
struct ScoringRules {
  int schema_version = 1;
  double w_d = 0.0;
  double w_v = 0.0;
  double w_l = 0.0;
  double w_r = 0.0;
  std::map<std::string, double> phi_d;
  std::map<std::string, double> phi_v;
  std::map<std::string, double> phi_l;
  std::map<std::string, double> phi_r;
  std::vector<BonusRule> bonuses;
  std::array<double, 4> priority_bands{};
  // When set, the damage term uses the highest-valued mentioned damage
  // instead of the primary one.
  bool strictest_damage = false;

  bool operator==(const ScoringRules&) const = default;
};

/// All rule violations, empty when the rules are valid. Every check runs;
/// nothing short-circuits after the first failure.
std::vector<std::string> validate_rules(const ScoringRules& rules);

/// Parse rules from YAML text. Throws ConfigError listing every structural
/// and semantic violation.
ScoringRules parse_rules_yaml(const std::string& text);

/// Load and fully validate a rules file. Throws ConfigError (all violations
/// listed) or std::runtime_error when the file cannot be read.
ScoringRules load_rules(const std::string& path);

/// Emit rules as YAML. Numbers use shortest round-trip formatting, so
/// load(serialize(r)) == r.
std::string serialize_rules(const ScoringRules& rules);

/// Weighted base score in [0,1]: w_d*phi_d(damage) + w_v*phi_v(severity)
/// + w_l*phi_l(location) + w_r*phi_r(extent). Missing attributes fall back
/// to each table's "default" entry.
double compute_score(const StructuredAttributes& a, const ScoringRules& rules);

struct AppliedBonus {
  std::string id;
  double delta = 0.0;

  bool operator==(const AppliedBonus&) const = default;
};

/// Add every matching bonus to `s`, capping at 1.0. Returns the bonused
/// score and the list of bonuses that fired, in rule-file order.
std::pair<double, std::vector<AppliedBonus>> apply_bonuses(
    double s, const StructuredAttributes& a, const ScoringRules& rules);

enum class PriorityLabel { minimal = 1, low = 2, moderate = 3, high = 4, immediate = 5 };

const char* priority_label_name(PriorityLabel label);

/// Discretize a bonused score: P=5 iff s' >= t5, else 4 iff >= t4, else 3
/// iff >= t3, else 2 iff >= t2, else 1. Boundaries are inclusive upward.
std::pair<int, PriorityLabel> priority_index(double s_prime, const ScoringRules& rules);

struct PriorityResult {
  double base_score = 0.0;
  double bonused_score = 0.0;
  std::vector<AppliedBonus> applied_bonuses;
  int level = 1;
  PriorityLabel label = PriorityLabel::minimal;

  bool operator==(const PriorityResult&) const = default;
};

/// compute_score + apply_bonuses + priority_index in one call.
PriorityResult score_record(const StructuredAttributes& a, const ScoringRules& rules);

}  // namespace bridgescore
