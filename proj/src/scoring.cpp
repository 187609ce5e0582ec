#include "bridgescore/scoring.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "bridgescore/errors.hpp"

namespace bridgescore {

namespace {

const std::array<std::string, 5> kConditionKeys = {"damage", "extent", "location",
                                                   "member", "severity"};

std::string fmt_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, end);
}

// Quote a scalar only when plain YAML would mangle it (leading/trailing
// space, flow indicators, or a spelling YAML 1.1 reads as bool/null/number).
std::string yaml_scalar(const std::string& s) {
  auto needs_quotes = [&]() {
    if (s.empty()) return true;
    if (s.front() == ' ' || s.back() == ' ') return true;
    if (s.find_first_of(":#\"'\n\t{}[],&*!|>%@`-?") != std::string::npos) return true;
    std::string lower;
    for (char c : s) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    for (const char* word : {"true", "false", "yes", "no", "on", "off", "null", "~"})
      if (lower == word) return true;
    double parsed = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), parsed);
    if (ec == std::errc() && p == s.data() + s.size()) return true;
    return false;
  };
  if (!needs_quotes()) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

struct TableRef {
  const char* name;
  std::map<std::string, double> ScoringRules::* field;
};

const std::array<TableRef, 4> kTables = {{{"phi_d", &ScoringRules::phi_d},
                                          {"phi_v", &ScoringRules::phi_v},
                                          {"phi_l", &ScoringRules::phi_l},
                                          {"phi_r", &ScoringRules::phi_r}}};

void parse_table(const YAML::Node& node, const char* name,
                 std::map<std::string, double>& out, std::vector<std::string>& problems) {
  if (!node) {
    problems.push_back(std::string("missing required block '") + name + "'");
    return;
  }
  if (!node.IsMap()) {
    problems.push_back(std::string("block '") + name + "' must be a mapping of name to value");
    return;
  }
  for (const auto& kv : node) {
    std::string key;
    try {
      key = kv.first.as<std::string>();
    } catch (const YAML::Exception&) {
      problems.push_back(std::string("block '") + name + "' has a non-scalar key");
      continue;
    }
    double value = 0.0;
    try {
      value = kv.second.as<double>();
    } catch (const YAML::Exception&) {
      problems.push_back(std::string(name) + " entry '" + key + "' is not a number");
      continue;
    }
    if (!out.emplace(key, value).second)
      problems.push_back(std::string(name) + " entry '" + key + "' appears more than once");
  }
}

void parse_bonuses(const YAML::Node& node, std::vector<BonusRule>& out,
                   std::vector<std::string>& problems) {
  if (!node) return;  // bonuses are optional
  if (!node.IsSequence()) {
    problems.push_back("block 'bonuses' must be a sequence");
    return;
  }
  std::size_t index = 0;
  for (const auto& item : node) {
    ++index;
    std::string where = "bonus #" + std::to_string(index);
    if (!item.IsMap()) {
      problems.push_back(where + " must be a mapping with id/when/delta");
      continue;
    }
    BonusRule rule;
    for (const auto& kv : item) {
      std::string key = kv.first.as<std::string>("");
      if (key == "id") {
        rule.id = kv.second.as<std::string>("");
      } else if (key == "delta") {
        try {
          rule.delta = kv.second.as<double>();
        } catch (const YAML::Exception&) {
          problems.push_back(where + " delta is not a number");
        }
      } else if (key == "when") {
        if (!kv.second.IsMap()) {
          problems.push_back(where + " 'when' must be a mapping of attribute to value");
          continue;
        }
        for (const auto& cond : kv.second) {
          std::string attr = cond.first.as<std::string>("");
          std::string value = cond.second.as<std::string>("");
          if (!rule.when.emplace(attr, value).second)
            problems.push_back(where + " repeats condition key '" + attr + "'");
        }
      } else {
        problems.push_back(where + " has unknown key '" + key + "'");
      }
    }
    out.push_back(std::move(rule));
  }
}

double lookup(const std::map<std::string, double>& table,
              const std::optional<std::string>& key) {
  if (key) {
    auto it = table.find(*key);
    if (it != table.end()) return it->second;
  }
  return table.at("default");
}

bool bonus_matches(const BonusRule& rule, const StructuredAttributes& a) {
  for (const auto& [attr, value] : rule.when) {
    if (attr == "member") {
      if (!a.member || *a.member != value) return false;
    } else if (attr == "damage") {
      if (std::find(a.damages.begin(), a.damages.end(), value) == a.damages.end())
        return false;
    } else if (attr == "location") {
      if (!a.location || *a.location != value) return false;
    } else if (attr == "severity") {
      if (!a.severity || *a.severity != value) return false;
    } else if (attr == "extent") {
      if (!a.extent || *a.extent != value) return false;
    } else {
      return false;  // unreachable after validation
    }
  }
  return true;
}

}  // namespace

std::vector<std::string> validate_rules(const ScoringRules& rules) {
  std::vector<std::string> problems;

  if (rules.schema_version != 1)
    problems.push_back("schema_version must be 1 (got " +
                       std::to_string(rules.schema_version) + ")");

  const std::array<double, 4> weights = {rules.w_d, rules.w_v, rules.w_l, rules.w_r};
  const double sum = rules.w_d + rules.w_v + rules.w_l + rules.w_r;
  const bool in_range = std::all_of(weights.begin(), weights.end(),
                                    [](double w) { return w >= 0.0 && w <= 1.0; });
  if (!in_range || std::abs(sum - 1.0) > 1e-9) {
    problems.push_back("weights must sum to 1 and lie in [0,1] (w_d=" + fmt_double(rules.w_d) +
                       ", w_v=" + fmt_double(rules.w_v) + ", w_l=" + fmt_double(rules.w_l) +
                       ", w_r=" + fmt_double(rules.w_r) + ", sum=" + fmt_double(sum) + ")");
  }

  for (const auto& table : kTables) {
    const auto& entries = rules.*(table.field);
    if (entries.find("default") == entries.end())
      problems.push_back(std::string(table.name) + " is missing its 'default' entry");
    for (const auto& [key, value] : entries) {
      if (!(value >= 0.0 && value <= 1.0))
        problems.push_back(std::string(table.name) + " entry '" + key + "' has value " +
                           fmt_double(value) + " outside [0,1]");
    }
  }

  std::vector<std::string> seen_ids;
  std::size_t index = 0;
  for (const auto& bonus : rules.bonuses) {
    ++index;
    const std::string where =
        bonus.id.empty() ? "bonus #" + std::to_string(index) : "bonus '" + bonus.id + "'";
    if (bonus.id.empty())
      problems.push_back(where + " is missing an 'id'");
    else if (std::find(seen_ids.begin(), seen_ids.end(), bonus.id) != seen_ids.end())
      problems.push_back(where + " repeats an already-used id");
    else
      seen_ids.push_back(bonus.id);
    if (bonus.when.empty())
      problems.push_back(where + " has an empty condition; every bonus must name at least one attribute");
    for (const auto& [attr, value] : bonus.when) {
      if (std::find(kConditionKeys.begin(), kConditionKeys.end(), attr) ==
          kConditionKeys.end())
        problems.push_back(where + " condition key '" + attr +
                           "' is not an attribute (allowed: damage, extent, location, member, severity)");
      else if (value.empty())
        problems.push_back(where + " condition '" + attr + "' has an empty value");
    }
    if (!(bonus.delta >= 0.0 && bonus.delta <= 1.0))
      problems.push_back(where + " delta " + fmt_double(bonus.delta) + " outside [0,1]");
  }

  bool bands_ok = true;
  for (double t : rules.priority_bands)
    if (!(t > 0.0 && t < 1.0)) bands_ok = false;
  for (std::size_t i = 1; i < rules.priority_bands.size(); ++i)
    if (!(rules.priority_bands[i] < rules.priority_bands[i - 1])) bands_ok = false;
  if (!bands_ok) {
    std::string got;
    for (double t : rules.priority_bands) {
      if (!got.empty()) got += ", ";
      got += fmt_double(t);
    }
    problems.push_back("priority_bands must be 4 strictly descending thresholds in (0,1) (got [" +
                       got + "])");
  }

  return problems;
}

ScoringRules parse_rules_yaml(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("invalid scoring rules:\n  - YAML parse error: ") + e.what());
  }

  std::vector<std::string> problems;
  ScoringRules rules;

  if (!root.IsMap()) {
    problems.push_back("top level must be a mapping");
  } else {
    for (const auto& kv : root) {
      const std::string key = kv.first.as<std::string>("");
      static const std::array<std::string, 9> known = {
          "schema_version", "weights", "phi_d", "phi_v", "phi_l",
          "phi_r",          "bonuses", "priority_bands", "strictest_damage"};
      if (std::find(known.begin(), known.end(), key) == known.end())
        problems.push_back("unknown top-level key '" + key + "'");
    }

    if (!root["schema_version"]) {
      problems.push_back("missing required key 'schema_version'");
    } else {
      try {
        rules.schema_version = root["schema_version"].as<int>();
      } catch (const YAML::Exception&) {
        problems.push_back("schema_version must be an integer");
      }
    }

    const YAML::Node weights = root["weights"];
    if (!weights || !weights.IsMap()) {
      problems.push_back("missing required block 'weights' (mapping with w_d, w_v, w_l, w_r)");
    } else {
      const std::array<std::pair<const char*, double ScoringRules::*>, 4> slots = {
          {{"w_d", &ScoringRules::w_d},
           {"w_v", &ScoringRules::w_v},
           {"w_l", &ScoringRules::w_l},
           {"w_r", &ScoringRules::w_r}}};
      for (const auto& [name, field] : slots) {
        if (!weights[name]) {
          problems.push_back(std::string("weights block is missing '") + name + "'");
          continue;
        }
        try {
          rules.*field = weights[name].as<double>();
        } catch (const YAML::Exception&) {
          problems.push_back(std::string("weights entry '") + name + "' is not a number");
        }
      }
      for (const auto& kv : weights) {
        const std::string key = kv.first.as<std::string>("");
        if (key != "w_d" && key != "w_v" && key != "w_l" && key != "w_r")
          problems.push_back("weights block has unknown key '" + key + "'");
      }
    }

    for (const auto& table : kTables)
      parse_table(root[table.name], table.name, rules.*(table.field), problems);

    parse_bonuses(root["bonuses"], rules.bonuses, problems);

    const YAML::Node bands = root["priority_bands"];
    if (!bands || !bands.IsSequence() || bands.size() != 4) {
      problems.push_back("missing or malformed 'priority_bands' (sequence of 4 thresholds)");
    } else {
      for (std::size_t i = 0; i < 4; ++i) {
        try {
          rules.priority_bands[i] = bands[i].as<double>();
        } catch (const YAML::Exception&) {
          problems.push_back("priority_bands entry " + std::to_string(i + 1) + " is not a number");
        }
      }
    }

    if (root["strictest_damage"]) {
      try {
        rules.strictest_damage = root["strictest_damage"].as<bool>();
      } catch (const YAML::Exception&) {
        problems.push_back("strictest_damage must be a boolean");
      }
    }
  }

  auto semantic = validate_rules(rules);
  problems.insert(problems.end(), semantic.begin(), semantic.end());
  if (!problems.empty()) {
    std::string message = "invalid scoring rules:";
    for (const auto& p : problems) message += "\n  - " + p;
    throw ConfigError(message);
  }
  return rules;
}

ScoringRules load_rules(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open scoring rules file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_rules_yaml(buf.str());
}

std::string serialize_rules(const ScoringRules& rules) {
  std::string out;
  out += "schema_version: " + std::to_string(rules.schema_version) + "\n";
  out += "weights:\n";
  out += "  w_d: " + fmt_double(rules.w_d) + "\n";
  out += "  w_v: " + fmt_double(rules.w_v) + "\n";
  out += "  w_l: " + fmt_double(rules.w_l) + "\n";
  out += "  w_r: " + fmt_double(rules.w_r) + "\n";
  for (const auto& table : kTables) {
    out += std::string(table.name) + ":\n";
    for (const auto& [key, value] : rules.*(table.field))
      out += "  " + yaml_scalar(key) + ": " + fmt_double(value) + "\n";
  }
  out += "bonuses:";
  if (rules.bonuses.empty()) out += " []";
  out += "\n";
  for (const auto& bonus : rules.bonuses) {
    out += "  - id: " + yaml_scalar(bonus.id) + "\n";
    out += "    when:\n";
    for (const auto& [attr, value] : bonus.when)
      out += "      " + yaml_scalar(attr) + ": " + yaml_scalar(value) + "\n";
    out += "    delta: " + fmt_double(bonus.delta) + "\n";
  }
  out += "priority_bands: [";
  for (std::size_t i = 0; i < rules.priority_bands.size(); ++i) {
    if (i) out += ", ";
    out += fmt_double(rules.priority_bands[i]);
  }
  out += "]\n";
  out += std::string("strictest_damage: ") + (rules.strictest_damage ? "true" : "false") + "\n";
  return out;
}

double compute_score(const StructuredAttributes& a, const ScoringRules& rules) {
  double phi_damage;
  if (rules.strictest_damage && !a.damages.empty()) {
    phi_damage = 0.0;
    for (const auto& d : a.damages)
      phi_damage = std::max(phi_damage, lookup(rules.phi_d, d));
  } else {
    phi_damage = lookup(rules.phi_d, a.primary_damage());
  }
  return rules.w_d * phi_damage + rules.w_v * lookup(rules.phi_v, a.severity) +
         rules.w_l * lookup(rules.phi_l, a.location) +
         rules.w_r * lookup(rules.phi_r, a.extent);
}

std::pair<double, std::vector<AppliedBonus>> apply_bonuses(
    double s, const StructuredAttributes& a, const ScoringRules& rules) {
  std::vector<AppliedBonus> applied;
  double total = 0.0;
  for (const auto& bonus : rules.bonuses) {
    if (bonus_matches(bonus, a)) {
      applied.push_back({bonus.id, bonus.delta});
      total += bonus.delta;
    }
  }
  return {std::min(1.0, s + total), std::move(applied)};
}

const char* priority_label_name(PriorityLabel label) {
  switch (label) {
    case PriorityLabel::immediate: return "Immediate";
    case PriorityLabel::high: return "High";
    case PriorityLabel::moderate: return "Moderate";
    case PriorityLabel::low: return "Low";
    case PriorityLabel::minimal: return "Minimal";
  }
  return "Minimal";
}

std::pair<int, PriorityLabel> priority_index(double s_prime, const ScoringRules& rules) {
  if (s_prime >= rules.priority_bands[0]) return {5, PriorityLabel::immediate};
  if (s_prime >= rules.priority_bands[1]) return {4, PriorityLabel::high};
  if (s_prime >= rules.priority_bands[2]) return {3, PriorityLabel::moderate};
  if (s_prime >= rules.priority_bands[3]) return {2, PriorityLabel::low};
  return {1, PriorityLabel::minimal};
}

PriorityResult score_record(const StructuredAttributes& a, const ScoringRules& rules) {
  PriorityResult result;
  result.base_score = compute_score(a, rules);
  auto [bonused, applied] = apply_bonuses(result.base_score, a, rules);
  result.bonused_score = bonused;
  result.applied_bonuses = std::move(applied);
  auto [level, label] = priority_index(result.bonused_score, rules);
  result.level = level;
  result.label = label;
  return result;
}

}  // namespace bridgescore
