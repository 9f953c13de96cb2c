#include "cfaudit/lexicon.hpp"

#include <algorithm>
#include <cctype>

namespace cfaudit {

std::string ascii_lower(const std::string& s) {
  std::string out = s;
  for (auto& c : out)
    if (static_cast<unsigned char>(c) < 0x80)
      c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> GenderLexicon::all_stems() const {
  std::vector<std::string> out;
  for (const auto& cat : categories)
    out.insert(out.end(), cat.stems.begin(), cat.stems.end());
  return out;
}

bool GenderLexicon::empty() const {
  for (const auto& cat : categories)
    if (!cat.stems.empty()) return false;
  return true;
}

const GenderLexicon& builtin_lexicon_fr() {
  static const GenderLexicon lex{
      Language::fr,
      {
          {"female_reproductive_anatomy",
           {"uter", "utér", "ovair", "ovarien", "vagin", "vulv", "mamma",
            "fallope"}},
          {"male_reproductive_anatomy",
           {"prostat", "testicul", "peni", "pénien", "scrot", "séminale"}},
          {"pregnancy_reproductive_conditions",
           {"grossesse", "enceinte", "fausse couche", "ivg", "curetage"}},
          {"female_specific_conditions",
           {"menopause", "ménorrhée", "règles", "endométriose",
            "endometriose"}},
          {"male_specific_conditions", {"andropause"}},
          {"gynecological_procedures",
           {"hystérectomie", "hysterectomie", "ligature trompes", "cesarienne",
            "cezarienne"}},
          {"medical_specialties", {"Gyné", "Obsté", "gyneco", "obste"}},
          {"sex_specific_neoplasms", {"cancer du sein", "K sein"}},
      }};
  return lex;
}

const GenderLexicon& builtin_lexicon_en() {
  static const GenderLexicon lex{
      Language::en,
      {
          {"female_reproductive_anatomy",
           {"uter", "uterin", "ovar", "ovarian", "vagin", "vulv", "mammar",
            "fallop"}},
          {"male_reproductive_anatomy",
           {"prostat", "testic", "penil", "scrot", "seminal"}},
          {"pregnancy_reproductive_conditions",
           {"pregnan", "miscarr", "abortion", "curettage"}},
          {"female_specific_conditions",
           {"menopaus", "menstruat", "menses", "endometrios"}},
          {"male_specific_conditions", {"andropaus"}},
          {"gynecological_procedures",
           {"hysterectom", "tubal ligation", "cesare", "c-section"}},
          {"medical_specialties", {"gyneco", "obstet", "ob/gyn"}},
          {"sex_specific_neoplasms", {"ovarian cancer", "prostate cancer"}},
      }};
  return lex;
}

const GenderLexicon& builtin_lexicon(Language lang) {
  return lang == Language::fr ? builtin_lexicon_fr() : builtin_lexicon_en();
}

LexiconMatch matches_lexicon(const std::string& text, const GenderLexicon& lexicon) {
  LexiconMatch result;
  if (text.empty()) return result;
  const std::string haystack = ascii_lower(text);
  for (const auto& cat : lexicon.categories) {
    for (const auto& stem : cat.stems) {
      const std::string needle = ascii_lower(stem);
      if (!needle.empty() && haystack.find(needle) != std::string::npos) {
        result.matched = true;
        if (std::find(result.stems.begin(), result.stems.end(), stem) ==
            result.stems.end())
          result.stems.push_back(stem);
      }
    }
  }
  return result;
}

}  // namespace cfaudit
