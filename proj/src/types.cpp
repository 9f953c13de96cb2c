#include "cfaudit/types.hpp"

namespace cfaudit {

Sex flip(Sex s) { return s == Sex::male ? Sex::female : Sex::male; }

const char* to_string(Sex s) { return s == Sex::male ? "male" : "female"; }

const char* to_string(Condition c) {
  switch (c) {
    case Condition::full: return "full";
    case Condition::text_iso: return "text_iso";
    case Condition::tab_iso: return "tab_iso";
  }
  return "full";
}

const char* to_string(Direction d) {
  return d == Direction::m_to_f ? "m_to_f" : "f_to_m";
}

const char* to_string(CfQuality q) {
  switch (q) {
    case CfQuality::correct: return "correct";
    case CfQuality::incomplete: return "incomplete";
    case CfQuality::failed: return "failed";
    case CfQuality::unvalidated: return "unvalidated";
  }
  return "unvalidated";
}

const char* to_string(Language l) { return l == Language::fr ? "fr" : "en"; }

Sex sex_from_string(const std::string& s) {
  if (s == "male" || s == "m" || s == "M") return Sex::male;
  if (s == "female" || s == "f" || s == "F") return Sex::female;
  throw DataError("unknown sex value: " + s);
}

Condition condition_from_string(const std::string& s) {
  if (s == "full") return Condition::full;
  if (s == "text_iso") return Condition::text_iso;
  if (s == "tab_iso") return Condition::tab_iso;
  throw DataError("unknown condition: " + s);
}

Direction direction_from_string(const std::string& s) {
  if (s == "m_to_f") return Direction::m_to_f;
  if (s == "f_to_m") return Direction::f_to_m;
  throw DataError("unknown direction: " + s);
}

CfQuality cf_quality_from_string(const std::string& s) {
  if (s == "correct") return CfQuality::correct;
  if (s == "incomplete") return CfQuality::incomplete;
  if (s == "failed") return CfQuality::failed;
  if (s == "unvalidated") return CfQuality::unvalidated;
  throw DataError("unknown cf_quality: " + s);
}

Language language_from_string(const std::string& s) {
  if (s == "fr") return Language::fr;
  if (s == "en") return Language::en;
  throw ConfigError("unknown language: " + s);
}

DecisionRecord make_variant(const DecisionRecord& record, Condition condition) {
  DecisionRecord out = record;
  switch (condition) {
    case Condition::full:
      break;
    case Condition::text_iso:
      out.sex.reset();
      break;
    case Condition::tab_iso:
      out.chief_complaint.clear();
      out.hpi.clear();
      out.pmh.clear();
      break;
  }
  return out;
}

Direction classify_direction(const CounterfactualPair& pair) {
  if (!pair.original.sex)
    throw DataError("pair " + pair.pair_id + ": original has no sex");
  if (pair.counterfactual.sex && *pair.counterfactual.sex == *pair.original.sex)
    throw DataError("pair " + pair.pair_id + ": counterfactual sex not flipped");
  return *pair.original.sex == Sex::male ? Direction::m_to_f : Direction::f_to_m;
}

}  // namespace cfaudit
