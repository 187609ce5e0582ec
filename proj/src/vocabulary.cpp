#include "bridgescore/vocabulary.hpp"

#include <yaml-cpp/yaml.h>

#include <map>
#include <set>

#include "bridgescore/errors.hpp"
#include "bridgescore/textmatch.hpp"

namespace bridgescore {
namespace {

std::vector<SurfaceEntry> parse_category(const YAML::Node& node) {
  std::vector<SurfaceEntry> entries;
  if (!node) return entries;
  for (const auto& item : node) {
    SurfaceEntry e;
    e.canonical = item["canonical"].as<std::string>();
    if (item["surfaces"])
      e.surfaces = item["surfaces"].as<std::vector<std::string>>();
    entries.push_back(std::move(e));
  }
  return entries;
}

void check_category(const std::string& name, const std::vector<SurfaceEntry>& entries,
                    std::vector<std::string>& problems) {
  std::set<std::string> canonicals;
  std::map<std::string, std::string> surface_owner;  // lowered surface -> canonical
  for (const auto& e : entries) {
    if (e.canonical.empty()) {
      problems.push_back(name + ": empty canonical name");
      continue;
    }
    if (!canonicals.insert(ascii_lower(e.canonical)).second)
      problems.push_back(name + ": duplicate canonical \"" + e.canonical + "\"");
    std::vector<std::string> all = e.surfaces;
    all.push_back(e.canonical);  // canonical is always a surface of itself
    std::set<std::string> within;
    for (const auto& s : all) {
      const std::string key = ascii_lower(s);
      if (!within.insert(key).second) continue;  // repeats inside one entry are harmless
      auto [it, fresh] = surface_owner.emplace(key, e.canonical);
      if (!fresh && it->second != e.canonical)
        problems.push_back(name + ": surface \"" + s + "\" maps to both \"" +
                           it->second + "\" and \"" + e.canonical + "\"");
    }
  }
}

bool has_canonical(const std::vector<SurfaceEntry>& entries, const std::string& name) {
  for (const auto& e : entries)
    if (e.canonical == name) return true;
  return false;
}

Vocabulary parse_node(const YAML::Node& root) {
  Vocabulary v;
  try {
    v.members = parse_category(root["members"]);
    v.damages = parse_category(root["damages"]);
    v.locations = parse_category(root["locations"]);
    v.severities = parse_category(root["severities"]);
    v.extents = parse_category(root["extents"]);
    if (const auto& nb = root["numeric_bands"]) {
      if (nb["percent_threshold"])
        v.numeric_bands.percent_threshold = nb["percent_threshold"].as<double>();
      if (nb["area_threshold_m2"])
        v.numeric_bands.area_threshold_m2 = nb["area_threshold_m2"].as<double>();
      if (nb["at_or_above"]) v.numeric_bands.at_or_above = nb["at_or_above"].as<std::string>();
      if (nb["below"]) v.numeric_bands.below = nb["below"].as<std::string>();
    }
    if (root["negation_markers"])
      v.negation_markers = root["negation_markers"].as<std::vector<std::string>>();
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("vocabulary: ") + e.what());
  }

  const auto problems = validate_vocabulary(v);
  if (!problems.empty()) {
    std::string msg = "invalid vocabulary:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw ConfigError(msg);
  }
  return v;
}

}  // namespace

std::vector<std::string> validate_vocabulary(const Vocabulary& v) {
  std::vector<std::string> problems;
  check_category("members", v.members, problems);
  check_category("damages", v.damages, problems);
  check_category("locations", v.locations, problems);
  check_category("severities", v.severities, problems);
  check_category("extents", v.extents, problems);

  for (const auto& e : v.severities) {
    if (e.canonical != "high" && e.canonical != "medium" && e.canonical != "low")
      problems.push_back("severities: canonical \"" + e.canonical +
                         "\" is not one of high/medium/low");
  }
  for (const auto* band : {&v.numeric_bands.at_or_above, &v.numeric_bands.below}) {
    if (!has_canonical(v.extents, *band))
      problems.push_back("numeric_bands: \"" + *band + "\" is not a canonical extent");
  }
  if (v.numeric_bands.percent_threshold < 0)
    problems.push_back("numeric_bands: percent_threshold must be non-negative");
  if (v.numeric_bands.area_threshold_m2 < 0)
    problems.push_back("numeric_bands: area_threshold_m2 must be non-negative");
  for (const auto& m : v.negation_markers)
    if (m.empty()) problems.push_back("negation_markers: empty marker");
  return problems;
}

Vocabulary parse_vocabulary_yaml(const std::string& yaml_text) {
  try {
    return parse_node(YAML::Load(yaml_text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("vocabulary: ") + e.what());
  }
}

Vocabulary load_vocabulary(const std::string& path) {
  try {
    return parse_node(YAML::LoadFile(path));
  } catch (const YAML::Exception& e) {
    throw ConfigError("vocabulary " + path + ": " + e.what());
  }
}

}  // namespace bridgescore
