#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cfaudit/errors.hpp"

namespace cfaudit {

enum class Sex { male = 0, female = 1 };
enum class Language { fr, en };
enum class Condition { full, text_iso, tab_iso };
enum class Direction { m_to_f, f_to_m };
enum class CfQuality { correct, incomplete, failed, unvalidated };

Sex flip(Sex s);

const char* to_string(Sex s);
const char* to_string(Condition c);
const char* to_string(Direction d);
const char* to_string(CfQuality q);
const char* to_string(Language l);

Sex sex_from_string(const std::string& s);
Condition condition_from_string(const std::string& s);
Direction direction_from_string(const std::string& s);
CfQuality cf_quality_from_string(const std::string& s);
Language language_from_string(const std::string& s);

// Ordinal label scale. Lower value = more severe is a property of the scale
// (Bordeaux CIMU 2-5, MIMIC ESI 1-4), never hard-coded elsewhere.
struct LabelScale {
  int min = 1;
  int max = 5;

  int size() const { return max - min + 1; }
  bool contains(int v) const { return v >= min && v <= max; }
  int clamp(int v) const { return v < min ? min : (v > max ? max : v); }
};

// One ED admission. Tabular scalars are an open map so Bordeaux and MIMIC
// schemas coexist; nurse-related fields ride along in meta untouched.
struct DecisionRecord {
  std::string id;
  std::optional<Sex> sex;
  std::optional<double> age;
  std::optional<std::string> date;      // ISO yyyy-mm-dd, lexicographic order
  std::optional<std::string> cc_class;  // categorical chief-complaint class
  std::map<std::string, double> tabular;
  std::string chief_complaint;
  std::string hpi;
  std::string pmh;
  std::optional<int> label;
  std::map<std::string, std::string> meta;

  bool all_text_empty() const {
    return chief_complaint.empty() && hpi.empty() && pmh.empty();
  }
};

struct CounterfactualPair {
  std::string pair_id;
  DecisionRecord original;
  DecisionRecord counterfactual;
  Direction direction = Direction::m_to_f;
  Condition condition = Condition::full;
  CfQuality cf_quality = CfQuality::unvalidated;
};

struct PairedPrediction {
  std::string pair_id;
  Condition condition = Condition::full;
  int y_orig = 0;
  int y_cf = 0;
  Direction direction = Direction::m_to_f;
};

// Ordered set of pair ids, fixed across all conditions of one audit.
struct IndexSet {
  std::vector<std::string> ids;

  bool operator==(const IndexSet& other) const { return ids == other.ids; }
  std::size_t size() const { return ids.size(); }
};

// full -> identity; text_iso -> drop the tabular sex field, keep text;
// tab_iso -> replace all text fields by the empty placeholder, keep sex.
DecisionRecord make_variant(const DecisionRecord& record, Condition condition);

// m_to_f iff the original is male. Rejects pairs without original sex or
// whose counterfactual sex was not flipped.
Direction classify_direction(const CounterfactualPair& pair);

}  // namespace cfaudit
