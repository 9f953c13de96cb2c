#pragma once

#include <string>
#include <vector>

#include "cfaudit/prompts.hpp"
#include "cfaudit/service.hpp"
#include "cfaudit/types.hpp"
#include "cfaudit/validate.hpp"

namespace cfaudit {

// Flips the tabular sex field; every other field stays byte-identical.
DecisionRecord flip_tabular(const DecisionRecord& record);

struct GenerationLogEntry {
  std::string pair_id;
  CfQuality quality = CfQuality::failed;
  std::string detail;  // parse error text, residual terms, etc.
  double overlap = 0.0;
};

struct GenerateOptions {
  bool validate = true;
  ValidationThresholds thresholds{};
  std::size_t checkpoint_every = 100;
  // Resume file (JSONL of finished pairs); "" disables checkpointing.
  std::string checkpoint_path;
};

struct GenerateResult {
  std::vector<CounterfactualPair> pairs;        // input order, all records
  std::vector<GenerationLogEntry> log;          // one entry per record
  std::map<std::string, std::size_t> quality_histogram;
};

// Tabular flip + service text rewrite + parse + validate for each record.
// Failed pairs stay in the result/log but are excluded from audit index
// sets downstream. Throws ServiceError after exhausted retries (the
// checkpoint file keeps completed pairs).
GenerateResult generate_pairs(const std::vector<DecisionRecord>& records,
                              const PromptTemplate& tmpl,
                              const GenServiceConfig& service,
                              const GenerateOptions& options = {});

// Rebuilds a counterfactual record from a parsed generation.
CounterfactualPair assemble_pair(const DecisionRecord& original,
                                 const ParsedGeneration& parsed,
                                 const PromptTemplate& tmpl);

}  // namespace cfaudit
