#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cfaudit/types.hpp"

namespace cfaudit {

// Which record text field a labeled prompt segment maps to.
enum class TextField { chief_complaint, hpi, pmh };

struct Exemplar {
  std::string input;   // formatted record line, original
  std::string output;  // formatted record line, transformed
};

// Few-shot rewrite prompt. The system prompt, instruction and delimiters for
// the builtin fr/en templates follow the published defaults byte for byte;
// exemplars are curated assets and configurable (default 10).
struct PromptTemplate {
  Language language = Language::fr;
  std::string system_prompt;
  std::string instruction;
  std::vector<Exemplar> exemplars;
  std::string transform_header;   // "#### Anamnèse à changer ####"
  std::string original_label;     // "Anamnèse originale:"
  std::string transformed_label;  // "Anamnèse transformée:"
  std::string sex_label;          // "Sexe patient"
  std::string label_sep;          // " : " (fr) / ": " (en)
  std::vector<std::pair<std::string, TextField>> fields;

  // "Sexe patient : M, Anamnèse : ..., Antécédents : ..."
  std::string format_record(const DecisionRecord& r) const;
  // system prompt + instruction + exemplars + record, in template order.
  std::string render(const DecisionRecord& r) const;
  // Same content split for a chat-completion request.
  std::pair<std::string, std::string> chat_messages(const DecisionRecord& r) const;
};

const PromptTemplate& builtin_cf_template_fr();
const PromptTemplate& builtin_cf_template_en();
const PromptTemplate& builtin_cf_template(Language lang);

std::string build_prompt(const DecisionRecord& record, const PromptTemplate& tmpl);

struct ParsedGeneration {
  Sex sex = Sex::male;
  // Values aligned with tmpl.fields order.
  std::vector<std::string> values;
};

// Anchors on the labeled prefixes, in template order; clinical text may
// contain commas so raw comma count is never trusted. Returns nullopt (with
// reason) on unlabeled/garbled output.
std::optional<ParsedGeneration> parse_generation(const std::string& output,
                                                 const PromptTemplate& tmpl,
                                                 std::string* error = nullptr);

// Triage scoring prompt (for remote predictor bindings).
struct TriagePromptTemplate {
  Language language = Language::fr;
  std::string instruction;
  std::string begin_marker;
  std::string end_marker;
  std::string answer_prefix;  // "Score de triage:" / "Triage score:"

  std::string render(const std::string& patient_history) const;
};

const TriagePromptTemplate& builtin_triage_template(Language lang);

// Linearizes a record variant into the {patient_clinical_history} string:
// named fields joined by ", ", text fields last. Omits the sex entry when
// the variant dropped it; keeps empty text labels under tab_iso.
std::string record_to_history(const DecisionRecord& r, Language lang);

}  // namespace cfaudit
