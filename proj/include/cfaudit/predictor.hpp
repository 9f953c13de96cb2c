#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "cfaudit/metrics.hpp"
#include "cfaudit/prompts.hpp"
#include "cfaudit/service.hpp"
#include "cfaudit/types.hpp"

namespace cfaudit {

// Raised when a predictor cannot produce an in-scale label for a variant;
// predict_paired drops the whole pair and logs it.
struct PredictionError : DataError {
  using DataError::DataError;
};

struct VariantKey {
  std::string pair_id;
  Condition condition = Condition::full;
  std::string role = "original";  // "original" | "counterfactual"
};

class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual int predict(const DecisionRecord& variant, const VariantKey& key) = 0;
  const LabelScale& scale() const { return scale_; }
  // Remote predictors answer concurrently up to this many in-flight calls.
  virtual int max_concurrent() const { return 1; }

 protected:
  explicit Predictor(LabelScale scale) : scale_(scale) {}
  LabelScale scale_;
};

enum class BindingKind { remote, table, bow_baseline };

struct PredictorBinding {
  BindingKind kind = BindingKind::table;
  LabelScale scale{1, 5};
  // table
  std::string table_path;
  // remote
  GenServiceConfig service;
  Language prompt_language = Language::fr;
  // bow_baseline
  std::string artifact_path;
  std::string train_input;  // optional: train when the artifact is absent
  std::uint64_t train_seed = 0;
};

std::unique_ptr<Predictor> make_predictor(const PredictorBinding& binding);

// Lookup table over (pair_id, condition, role); falls back to id-only
// entries for plain records.
class TablePredictor : public Predictor {
 public:
  TablePredictor(LabelScale scale, const std::string& path);
  TablePredictor(LabelScale scale,
                 std::map<std::string, int> by_variant,
                 std::map<std::string, int> by_id);
  int predict(const DecisionRecord& variant, const VariantKey& key) override;

 private:
  std::map<std::string, int> by_variant_;  // "pair|cond|role"
  std::map<std::string, int> by_id_;
};

// First in-scale integer in a free-text service reply; nullopt otherwise.
std::optional<int> parse_label_reply(const std::string& reply, LabelScale scale);

struct DroppedPair {
  std::string pair_id;
  Condition condition = Condition::full;
  std::string role;
  std::string reason;
};

struct PredictPairedResult {
  PredictionSet set;
  std::vector<DroppedPair> dropped;
};

// Scores both variants of every pair under every requested condition. A
// prediction error in any requested condition removes the pair from the
// index set for all conditions (fixed-index-set comparability).
PredictPairedResult predict_paired(const std::vector<CounterfactualPair>& pairs,
                                   const std::vector<Condition>& conditions,
                                   Predictor& predictor);

// Joins persisted prediction lines with pair metadata into an aligned
// PredictionSet. Pair order follows first appearance in the prediction
// stream; differing id sets across conditions (or a missing role) violate
// the fixed-index-set contract and raise DataError.
struct PredLine;  // jsonl.hpp
PredictionSet assemble_prediction_set(const std::vector<PredLine>& preds,
                                      const std::vector<CounterfactualPair>& pairs,
                                      LabelScale scale);
// Variant keyed on plain records (direction from record sex, reference label
// from the record's human label).
PredictionSet assemble_prediction_set(const std::vector<PredLine>& preds,
                                      const std::vector<DecisionRecord>& records,
                                      LabelScale scale);

// k x k agreement counts: O[i][j] = #(reference i, predicted j), indices
// offset by scale.min.
struct AgreementMatrix {
  LabelScale scale{1, 5};
  std::vector<std::vector<std::uint64_t>> counts;

  explicit AgreementMatrix(LabelScale s)
      : scale(s),
        counts(static_cast<std::size_t>(s.size()),
               std::vector<std::uint64_t>(static_cast<std::size_t>(s.size()), 0)) {}
  void add(int reference, int predicted);
  std::uint64_t total() const;
};

// Quadratically weighted Cohen's kappa:
//   k_w = 1 - sum(w_ij O_ij) / sum(w_ij E_ij),  w_ij = (i-j)^2/(k-1)^2,
// with E from the marginal products. Throws DataError on degenerate
// marginals (single reference class).
double weighted_kappa(const AgreementMatrix& matrix);

}  // namespace cfaudit
