#pragma once

#include <cstdint>
#include <vector>

#include "cfaudit/metrics.hpp"
#include "cfaudit/types.hpp"

namespace cfaudit {

// Synthetic population with a known injected effect. Per pair: the male
// presentation draws its label from base_dist; the female presentation is
// incremented (+1, clamped at scale.max) with probability delta; each
// presentation is then independently nudged +/-1 (clamped) with probability
// epsilon. The original's sex is a fair coin.
struct SynthConfig {
  std::size_t n_pairs = 1000;
  LabelScale scale{2, 5};
  std::vector<double> base_dist;  // over scale labels; must sum to 1
  double delta = 0.0;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  std::vector<Condition> conditions{Condition::full};

  void validate() const;
};

// Exact metric values induced by the config (computed by enumeration over
// the finite outcome space, clamping included).
struct SynthTruth {
  double pdr = 0;
  double p_up_mf = 0, p_down_mf = 0, p_up_fm = 0, p_down_fm = 0;
  double nats_plus = 0, nats_minus = 0;
  double dts_f_given_m = 0, dts_m_given_f = 0;
  double nmdf = 0;
};

SynthTruth closed_form_truth(const SynthConfig& cfg);

struct SynthOutput {
  std::vector<CounterfactualPair> pairs;
  PredictionSet preds;  // the table-predictor outputs over the index set
  SynthTruth truth;
};

SynthOutput generate(const SynthConfig& cfg);

}  // namespace cfaudit
