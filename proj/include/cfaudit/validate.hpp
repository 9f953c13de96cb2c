#pragma once

#include <string>
#include <vector>

#include "cfaudit/types.hpp"

namespace cfaudit {

// Gendered-term lexicon for counterfactual validation: pronouns, honorifics,
// gendered nouns, kinship terms and common French agreement markers. This is
// a separate asset from the exclusion lexicon; terms match as whole tokens.
struct GenderMarkers {
  Language language = Language::fr;
  std::vector<std::string> male_terms;
  std::vector<std::string> female_terms;

  const std::vector<std::string>& terms(Sex s) const {
    return s == Sex::male ? male_terms : female_terms;
  }
};

const GenderMarkers& builtin_markers(Language lang);

struct ValidationReport {
  CfQuality quality = CfQuality::failed;
  bool flipped_marker_found = false;
  std::vector<std::string> residual_source_gender_terms;
  double non_gender_token_overlap = 0.0;
};

struct ValidationThresholds {
  double correct_overlap = 0.90;  // >= : eligible for correct
  double failed_overlap = 0.70;   // <  : failed regardless of markers
};

// Mechanical stand-in for the manual transformation review:
//   correct    = sex flipped, target markers present (or none needed),
//                no residual source markers, overlap >= correct threshold
//   incomplete = flipped but residual markers remain, or overlap in
//                [failed, correct)
//   failed     = otherwise (including a no-op copy with unflipped sex)
ValidationReport validate_cf(const DecisionRecord& original,
                             const DecisionRecord& candidate,
                             const GenderMarkers& markers,
                             const ValidationThresholds& thresholds = {});

// Tokenization used by the validator: splits on ASCII non-alphanumerics,
// keeps multi-byte sequences intact, folds ASCII + Latin-1 uppercase.
std::vector<std::string> marker_tokens(const std::string& text);

// Multiset Dice overlap of the two token lists with marker terms removed.
double non_gender_overlap(const std::vector<std::string>& a,
                          const std::vector<std::string>& b,
                          const GenderMarkers& markers);

}  // namespace cfaudit
