#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cfaudit/filter.hpp"
#include "cfaudit/predictor.hpp"
#include "cfaudit/synthetic.hpp"

namespace cfaudit {

// Minimal TOML subset: comments, [section] headers (dotted names allowed),
// and key = string | number | bool | homogeneous array. Keys flatten to
// "section.key". Enough for the tool's declarative configs.
struct TomlValue {
  std::variant<std::string, double, bool, std::vector<std::string>,
               std::vector<double>>
      value;

  const std::string& as_string() const;
  double as_number() const;
  bool as_bool() const;
  const std::vector<std::string>& as_string_array() const;
  const std::vector<double>& as_number_array() const;
};

using TomlTable = std::map<std::string, TomlValue>;

TomlTable parse_toml(const std::string& text);
TomlTable parse_toml_file(const std::string& path);

// Dataset profile presets: scale bounds, language, default excluded labels
// and report precision, so the two published setups are one-flag switches.
// raw_scale is the intake label space; scale is the audit space left after
// the excluded levels are filtered away.
struct Profile {
  std::string name = "custom";
  LabelScale scale{1, 5};
  LabelScale raw_scale{1, 5};
  std::optional<std::string> min_date;
  Language language = Language::fr;
  std::set<int> excluded_labels;
  int percent_decimals = 1;
};

const Profile& get_profile(const std::string& name);  // bordeaux | mimic
Profile default_profile();

FilterConfig load_filter_config(const TomlTable& toml, const Profile& profile);
PredictorBinding load_binding_config(const TomlTable& toml, const Profile& profile);
SynthConfig load_synth_config(const TomlTable& toml);

}  // namespace cfaudit
