#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "cfaudit/lexicon.hpp"
#include "cfaudit/types.hpp"

namespace cfaudit {

// Rejection reasons, in cascade order. Each rejected record carries exactly
// one reason: the first matching rule.
enum class RejectReason {
  parse_error,
  pre_date,
  missing_field,
  underage,
  excluded_label,
  excluded_class,
  lexicon,
};

const char* to_string(RejectReason r);

struct FilterConfig {
  std::optional<std::string> min_date;  // ISO yyyy-mm-dd; unset = no date rule
  double min_age = 18.0;
  LabelScale scale{1, 5};
  std::set<int> excluded_labels;
  std::vector<std::string> excluded_cc_classes;  // case-insensitive exact match
  GenderLexicon lexicon;
  // "sex", "age", "label", "text" (text = at least one nonempty text field)
  std::set<std::string> required_fields{"sex", "age", "label", "text"};
};

// Default excluded chief-complaint classes (the paper's four-item list).
const std::vector<std::string>& default_excluded_cc_classes();

struct Rejected {
  DecisionRecord record;       // empty except raw_line for parse errors
  RejectReason reason = RejectReason::parse_error;
  std::vector<std::string> matched_stems;  // for reason == lexicon
  std::string raw_line;                    // for reason == parse_error
  std::size_t lineno = 0;
};

struct FilterResult {
  std::vector<DecisionRecord> kept;
  std::vector<Rejected> rejected;
};

// Applies the exclusion cascade to already-parsed records (input order kept).
FilterResult filter_dataset(const std::vector<DecisionRecord>& records,
                            const FilterConfig& cfg);

// Streaming variant: parses JSONL and folds malformed lines into the
// rejected list with reason=parse_error instead of aborting.
FilterResult filter_jsonl(const std::string& path, const FilterConfig& cfg);

// Seeded stratified partition: per-label train counts stay within +/-1 of
// fraction * per-label total. Throws DataError on unlabeled records.
struct SplitResult {
  std::vector<DecisionRecord> train;
  std::vector<DecisionRecord> test;
};

SplitResult stratified_split(const std::vector<DecisionRecord>& records,
                             double fraction, std::uint64_t seed);

}  // namespace cfaudit
