#include "cfaudit/validate.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

namespace cfaudit {

namespace {

// Lowercase ASCII plus the Latin-1 supplement (À-Þ -> à-þ, ×/÷ excluded), so
// capitalized French forms like "Âgée" or "Elle" fold to their list entries.
std::string fold_token(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto b = static_cast<unsigned char>(s[i]);
    if (b < 0x80) {
      out += static_cast<char>(std::tolower(b));
    } else if (b == 0xC3 && i + 1 < s.size()) {
      auto b2 = static_cast<unsigned char>(s[i + 1]);
      if (b2 >= 0x80 && b2 <= 0x9E && b2 != 0x97) b2 += 0x20;
      out += static_cast<char>(b);
      out += static_cast<char>(b2);
      ++i;
    } else {
      out += static_cast<char>(b);
    }
  }
  return out;
}

std::string joined_text(const DecisionRecord& r) {
  std::string out = r.chief_complaint;
  out += '\n';
  out += r.hpi;
  out += '\n';
  out += r.pmh;
  return out;
}

}  // namespace

std::vector<std::string> marker_tokens(const std::string& text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (unsigned char b : text) {
    const bool is_word = (b >= 0x80) || std::isalnum(b);
    if (is_word) {
      cur += static_cast<char>(b);
    } else if (!cur.empty()) {
      tokens.push_back(fold_token(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(fold_token(cur));
  return tokens;
}

const GenderMarkers& builtin_markers(Language lang) {
  static const GenderMarkers fr{
      Language::fr,
      // male
      {"il", "ils", "lui", "monsieur", "mr", "homme", "hommes", "garçon",
       "garcon", "patient", "patients", "masculin", "père", "pere", "mari",
       "époux", "epoux", "frère", "frere", "fils", "oncle", "veuf", "âgé",
       "agé", "hospitalisé", "adressé", "amené", "retrouvé", "conscient",
       "agité"},
      // female
      {"elle", "elles", "madame", "mme", "femme", "femmes", "fille", "filles",
       "patiente", "patientes", "féminin", "feminin", "mère", "mere",
       "épouse", "epouse", "sœur", "soeur", "tante", "veuve", "âgée", "agée",
       "agee", "hospitalisée", "adressée", "amenée", "retrouvée",
       "consciente", "agitée"}};
  static const GenderMarkers en{
      Language::en,
      {"he", "him", "his", "himself", "man", "men", "male", "gentleman",
       "mr", "sir", "boy", "father", "husband", "brother", "son", "uncle",
       "widower"},
      {"she", "her", "hers", "herself", "woman", "women", "female", "lady",
       "mrs", "ms", "madam", "girl", "mother", "wife", "sister", "daughter",
       "aunt", "widow"}};
  return lang == Language::fr ? fr : en;
}

namespace {

// "il" in the impersonal "il y a" is not a gender cue. Terms present in both
// sets carry no direction and are dropped by the caller.
bool is_marker(const std::vector<std::string>& tokens, std::size_t i,
               const std::set<std::string>& terms, Language lang) {
  const auto& tok = tokens[i];
  if (!terms.count(tok)) return false;
  if (lang == Language::fr && tok == "il" && i + 1 < tokens.size() &&
      tokens[i + 1] == "y")
    return false;
  return true;
}

}  // namespace

double non_gender_overlap(const std::vector<std::string>& a,
                          const std::vector<std::string>& b,
                          const GenderMarkers& markers) {
  std::set<std::string> gendered(markers.male_terms.begin(), markers.male_terms.end());
  gendered.insert(markers.female_terms.begin(), markers.female_terms.end());
  auto count = [&](const std::vector<std::string>& tokens) {
    std::map<std::string, std::size_t> m;
    for (const auto& t : tokens)
      if (!gendered.count(t)) ++m[t];
    return m;
  };
  const auto ca = count(a);
  const auto cb = count(b);
  std::size_t na = 0, nb = 0, common = 0;
  for (const auto& [t, n] : ca) na += n;
  for (const auto& [t, n] : cb) nb += n;
  for (const auto& [t, n] : ca) {
    auto it = cb.find(t);
    if (it != cb.end()) common += std::min(n, it->second);
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * static_cast<double>(common) / static_cast<double>(na + nb);
}

ValidationReport validate_cf(const DecisionRecord& original,
                             const DecisionRecord& candidate,
                             const GenderMarkers& markers,
                             const ValidationThresholds& thresholds) {
  ValidationReport report;
  if (!original.sex) return report;  // cannot validate: failed

  const Sex src = *original.sex;
  const Sex tgt = flip(src);
  const auto orig_tokens = marker_tokens(joined_text(original));
  const auto cand_tokens = marker_tokens(joined_text(candidate));

  const std::set<std::string> src_terms(markers.terms(src).begin(),
                                        markers.terms(src).end());
  std::set<std::string> tgt_terms(markers.terms(tgt).begin(),
                                  markers.terms(tgt).end());
  // Terms listed on both sides carry no direction; ignore them throughout.
  std::set<std::string> unambiguous_src, shared;
  for (const auto& t : src_terms)
    (tgt_terms.count(t) ? shared : unambiguous_src).insert(t);
  for (const auto& t : shared) tgt_terms.erase(t);

  bool orig_has_src = false;
  for (std::size_t i = 0; i < orig_tokens.size(); ++i)
    if (is_marker(orig_tokens, i, unambiguous_src, markers.language))
      orig_has_src = true;

  bool cand_has_tgt = false;
  std::set<std::string> residuals;
  for (std::size_t i = 0; i < cand_tokens.size(); ++i) {
    if (is_marker(cand_tokens, i, tgt_terms, markers.language)) cand_has_tgt = true;
    if (is_marker(cand_tokens, i, unambiguous_src, markers.language))
      residuals.insert(cand_tokens[i]);
  }
  report.residual_source_gender_terms.assign(residuals.begin(), residuals.end());

  const bool sex_flipped = candidate.sex && *candidate.sex == tgt;
  report.flipped_marker_found =
      sex_flipped && (cand_has_tgt || !orig_has_src);
  report.non_gender_token_overlap =
      non_gender_overlap(orig_tokens, cand_tokens, markers);

  const bool residual_free = residuals.empty();
  if (report.non_gender_token_overlap < thresholds.failed_overlap ||
      !report.flipped_marker_found) {
    report.quality = CfQuality::failed;
  } else if (residual_free &&
             report.non_gender_token_overlap >= thresholds.correct_overlap) {
    report.quality = CfQuality::correct;
  } else {
    report.quality = CfQuality::incomplete;
  }
  return report;
}

}  // namespace cfaudit
