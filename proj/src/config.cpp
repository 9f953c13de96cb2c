#include "cfaudit/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace cfaudit {

const std::string& TomlValue::as_string() const {
  if (auto* s = std::get_if<std::string>(&value)) return *s;
  throw ConfigError("expected a string value");
}

double TomlValue::as_number() const {
  if (auto* n = std::get_if<double>(&value)) return *n;
  throw ConfigError("expected a numeric value");
}

bool TomlValue::as_bool() const {
  if (auto* b = std::get_if<bool>(&value)) return *b;
  throw ConfigError("expected a boolean value");
}

const std::vector<std::string>& TomlValue::as_string_array() const {
  if (auto* a = std::get_if<std::vector<std::string>>(&value)) return *a;
  throw ConfigError("expected a string array");
}

const std::vector<double>& TomlValue::as_number_array() const {
  if (auto* a = std::get_if<std::vector<double>>(&value)) return *a;
  throw ConfigError("expected a numeric array");
}

namespace {

std::string strip(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Parses one scalar token (string/number/bool).
TomlValue parse_scalar(const std::string& raw, int lineno) {
  const std::string tok = strip(raw);
  if (tok.empty()) throw ConfigError("toml:" + std::to_string(lineno) + ": empty value");
  if (tok.front() == '"') {
    if (tok.size() < 2 || tok.back() != '"')
      throw ConfigError("toml:" + std::to_string(lineno) + ": unterminated string");
    std::string out;
    for (std::size_t i = 1; i + 1 < tok.size(); ++i) {
      if (tok[i] == '\\' && i + 2 < tok.size()) {
        ++i;
        switch (tok[i]) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default:
            throw ConfigError("toml:" + std::to_string(lineno) +
                              ": unsupported escape \\" + tok[i]);
        }
      } else {
        out += tok[i];
      }
    }
    return TomlValue{out};
  }
  if (tok == "true") return TomlValue{true};
  if (tok == "false") return TomlValue{false};
  try {
    std::size_t used = 0;
    const double num = std::stod(tok, &used);
    if (used == tok.size()) return TomlValue{num};
  } catch (const std::exception&) {
  }
  throw ConfigError("toml:" + std::to_string(lineno) + ": cannot parse value '" +
                    tok + "'");
}

std::vector<std::string> split_array_items(const std::string& inner, int lineno) {
  std::vector<std::string> items;
  std::string cur;
  bool in_string = false;
  for (std::size_t i = 0; i < inner.size(); ++i) {
    const char c = inner[i];
    if (in_string) {
      cur += c;
      if (c == '\\' && i + 1 < inner.size()) {
        cur += inner[++i];
      } else if (c == '"') {
        in_string = false;
      }
    } else if (c == '"') {
      cur += c;
      in_string = true;
    } else if (c == ',') {
      items.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (in_string)
    throw ConfigError("toml:" + std::to_string(lineno) + ": unterminated string");
  if (!strip(cur).empty()) items.push_back(cur);
  return items;
}

}  // namespace

TomlTable parse_toml(const std::string& text) {
  TomlTable table;
  std::istringstream in(text);
  std::string line;
  std::string prefix;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // Strip comments outside strings.
    bool in_string = false;
    std::string code;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (c == '"' ) in_string = !in_string;
      if (c == '#' && !in_string) break;
      code += c;
    }
    code = strip(code);
    if (code.empty()) continue;
    if (code.front() == '[') {
      if (code.back() != ']')
        throw ConfigError("toml:" + std::to_string(lineno) + ": bad section header");
      prefix = strip(code.substr(1, code.size() - 2));
      if (prefix.empty())
        throw ConfigError("toml:" + std::to_string(lineno) + ": empty section");
      continue;
    }
    const auto eq = code.find('=');
    if (eq == std::string::npos)
      throw ConfigError("toml:" + std::to_string(lineno) + ": expected key = value");
    std::string key = strip(code.substr(0, eq));
    if (key.empty())
      throw ConfigError("toml:" + std::to_string(lineno) + ": empty key");
    if (!prefix.empty()) key = prefix + "." + key;
    const std::string raw = strip(code.substr(eq + 1));
    if (!raw.empty() && raw.front() == '[') {
      if (raw.back() != ']')
        throw ConfigError("toml:" + std::to_string(lineno) + ": unterminated array");
      const auto items = split_array_items(raw.substr(1, raw.size() - 2), lineno);
      std::vector<std::string> strings;
      std::vector<double> numbers;
      bool any_string = false, any_number = false;
      for (const auto& item : items) {
        auto v = parse_scalar(item, lineno);
        if (auto* s = std::get_if<std::string>(&v.value)) {
          strings.push_back(*s);
          any_string = true;
        } else if (auto* n = std::get_if<double>(&v.value)) {
          numbers.push_back(*n);
          any_number = true;
        } else {
          throw ConfigError("toml:" + std::to_string(lineno) +
                            ": arrays hold strings or numbers");
        }
      }
      if (any_string && any_number)
        throw ConfigError("toml:" + std::to_string(lineno) + ": mixed array");
      if (any_string)
        table[key] = TomlValue{strings};
      else
        table[key] = TomlValue{numbers};
    } else {
      table[key] = parse_scalar(raw, lineno);
    }
  }
  return table;
}

TomlTable parse_toml_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_toml(ss.str());
}

Profile default_profile() { return Profile{}; }

const Profile& get_profile(const std::string& name) {
  static const Profile bordeaux{"bordeaux",    LabelScale{2, 5},
                                LabelScale{1, 5}, std::string("2016-01-01"),
                                Language::fr,     {1},
                                1};
  static const Profile mimic{"mimic",        LabelScale{1, 4},
                             LabelScale{1, 5}, std::nullopt,
                             Language::en,     {5},
                             2};
  if (name == "bordeaux") return bordeaux;
  if (name == "mimic") return mimic;
  throw ConfigError("unknown profile: " + name + " (expected bordeaux or mimic)");
}

namespace {

std::optional<std::string> opt_string(const TomlTable& t, const std::string& key) {
  auto it = t.find(key);
  if (it == t.end()) return std::nullopt;
  return it->second.as_string();
}

std::optional<double> opt_number(const TomlTable& t, const std::string& key) {
  auto it = t.find(key);
  if (it == t.end()) return std::nullopt;
  return it->second.as_number();
}

}  // namespace

FilterConfig load_filter_config(const TomlTable& toml, const Profile& profile) {
  Profile p = profile;
  if (auto name = opt_string(toml, "profile")) p = get_profile(*name);
  FilterConfig cfg;
  cfg.scale = p.raw_scale;
  cfg.min_date = p.min_date;
  cfg.excluded_labels = p.excluded_labels;
  cfg.lexicon = builtin_lexicon(p.language);
  cfg.excluded_cc_classes = default_excluded_cc_classes();
  if (auto v = opt_string(toml, "min_date")) cfg.min_date = *v;
  if (auto v = opt_number(toml, "min_age")) cfg.min_age = *v;
  if (auto it = toml.find("excluded_labels"); it != toml.end()) {
    cfg.excluded_labels.clear();
    for (double v : it->second.as_number_array())
      cfg.excluded_labels.insert(static_cast<int>(v));
  }
  for (int label : cfg.excluded_labels)
    if (!cfg.scale.contains(label))
      throw ConfigError("excluded label " + std::to_string(label) +
                        " outside scale");
  if (auto it = toml.find("excluded_cc_classes"); it != toml.end())
    cfg.excluded_cc_classes = it->second.as_string_array();
  if (auto lang = opt_string(toml, "lexicon"))
    cfg.lexicon = builtin_lexicon(language_from_string(*lang));
  if (auto it = toml.find("lexicon_stems"); it != toml.end()) {
    // Custom stem list replaces the builtin table (single unnamed category).
    cfg.lexicon.categories = {{"custom", it->second.as_string_array()}};
  }
  if (auto it = toml.find("required_fields"); it != toml.end()) {
    cfg.required_fields.clear();
    for (const auto& f : it->second.as_string_array())
      cfg.required_fields.insert(f);
  }
  return cfg;
}

PredictorBinding load_binding_config(const TomlTable& toml, const Profile& profile) {
  Profile p = profile;
  if (auto name = opt_string(toml, "profile")) p = get_profile(*name);
  PredictorBinding binding;
  binding.scale = p.scale;
  binding.prompt_language = p.language;
  if (auto v = opt_number(toml, "scale_min")) binding.scale.min = static_cast<int>(*v);
  if (auto v = opt_number(toml, "scale_max")) binding.scale.max = static_cast<int>(*v);
  if (binding.scale.min > binding.scale.max)
    throw ConfigError("binding: scale_min > scale_max");

  const auto kind = opt_string(toml, "kind");
  if (!kind) throw ConfigError("binding: missing kind");
  if (*kind == "table") {
    binding.kind = BindingKind::table;
    auto path = opt_string(toml, "table.path");
    if (!path) throw ConfigError("binding: table.path required");
    binding.table_path = *path;
  } else if (*kind == "remote") {
    binding.kind = BindingKind::remote;
    if (auto v = opt_string(toml, "remote.endpoint")) binding.service.endpoint = *v;
    if (auto v = opt_string(toml, "remote.model")) binding.service.model = *v;
    if (auto v = opt_number(toml, "remote.max_concurrent"))
      binding.service.max_concurrent = static_cast<int>(*v);
    if (auto v = opt_number(toml, "remote.timeout_s")) binding.service.timeout_s = *v;
    if (auto v = opt_number(toml, "remote.retries"))
      binding.service.retries = static_cast<int>(*v);
    if (auto v = opt_number(toml, "remote.temperature"))
      binding.service.temperature = *v;
    if (auto v = opt_string(toml, "remote.language"))
      binding.prompt_language = language_from_string(*v);
    binding.service.validate();
  } else if (*kind == "bow_baseline") {
    binding.kind = BindingKind::bow_baseline;
    auto artifact = opt_string(toml, "bow_baseline.artifact");
    if (!artifact) throw ConfigError("binding: bow_baseline.artifact required");
    binding.artifact_path = *artifact;
    if (auto v = opt_string(toml, "bow_baseline.train.input"))
      binding.train_input = *v;
    if (auto v = opt_number(toml, "bow_baseline.train.seed"))
      binding.train_seed = static_cast<std::uint64_t>(*v);
  } else {
    throw ConfigError("binding: unknown kind '" + *kind + "'");
  }
  return binding;
}

SynthConfig load_synth_config(const TomlTable& toml) {
  SynthConfig cfg;
  if (auto v = opt_number(toml, "n_pairs"))
    cfg.n_pairs = static_cast<std::size_t>(*v);
  if (auto v = opt_number(toml, "scale_min")) cfg.scale.min = static_cast<int>(*v);
  if (auto v = opt_number(toml, "scale_max")) cfg.scale.max = static_cast<int>(*v);
  if (auto it = toml.find("base_dist"); it != toml.end())
    cfg.base_dist = it->second.as_number_array();
  else
    cfg.base_dist.assign(static_cast<std::size_t>(cfg.scale.size()),
                         1.0 / cfg.scale.size());
  if (auto v = opt_number(toml, "delta")) cfg.delta = *v;
  if (auto v = opt_number(toml, "epsilon")) cfg.epsilon = *v;
  if (auto v = opt_number(toml, "seed"))
    cfg.seed = static_cast<std::uint64_t>(*v);
  if (auto it = toml.find("conditions"); it != toml.end()) {
    cfg.conditions.clear();
    for (const auto& c : it->second.as_string_array())
      cfg.conditions.push_back(condition_from_string(c));
  }
  cfg.validate();
  return cfg;
}

}  // namespace cfaudit
