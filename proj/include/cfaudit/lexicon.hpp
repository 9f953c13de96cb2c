#pragma once

#include <string>
#include <vector>

#include "cfaudit/types.hpp"

namespace cfaudit {

// Sex-specific content exclusion lexicon. Stems are matched as
// case-insensitive substrings (ASCII case folding only; accented variants are
// listed explicitly, no extra Unicode folding).
struct GenderLexicon {
  struct Category {
    std::string name;
    std::vector<std::string> stems;
  };
  Language language = Language::fr;
  std::vector<Category> categories;

  std::vector<std::string> all_stems() const;
  bool empty() const;
};

const GenderLexicon& builtin_lexicon_fr();
const GenderLexicon& builtin_lexicon_en();
const GenderLexicon& builtin_lexicon(Language lang);

struct LexiconMatch {
  bool matched = false;
  std::vector<std::string> stems;  // every stem that occurred, lexicon order
};

LexiconMatch matches_lexicon(const std::string& text, const GenderLexicon& lexicon);

// ASCII-only lowercase copy; bytes >= 0x80 pass through unchanged.
std::string ascii_lower(const std::string& s);

}  // namespace cfaudit
