#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cfaudit/types.hpp"

namespace cfaudit {

// Pair-level observation, one per pair per condition. cmp is the sign of
// (y_cf - y_orig); fdiff is f(female presentation) - f(male presentation),
// with the female presentation assigned by pre-neutralization sex.
struct PairObs {
  std::int8_t dir = 0;  // 0 = m_to_f, 1 = f_to_m
  std::int8_t cmp = 0;
  std::int8_t fdiff = 0;
};

PairObs make_obs(Direction dir, int y_orig, int y_cf);

struct DirectionalCounts {
  std::uint64_t n_mf = 0, up_mf = 0, down_mf = 0;
  std::uint64_t n_fm = 0, up_fm = 0, down_fm = 0;

  std::uint64_t same_mf() const { return n_mf - up_mf - down_mf; }
  std::uint64_t same_fm() const { return n_fm - up_fm - down_fm; }
  std::uint64_t total() const { return n_mf + n_fm; }
  std::uint64_t changed() const { return up_mf + down_mf + up_fm + down_fm; }
};

// Counts plus the NMDF numerator; everything downstream derives from this.
struct MetricAccumulator {
  DirectionalCounts counts;
  std::int64_t nmdf_sum = 0;

  void add(const PairObs& o) {
    if (o.dir == 0) {
      ++counts.n_mf;
      counts.up_mf += o.cmp > 0;
      counts.down_mf += o.cmp < 0;
    } else {
      ++counts.n_fm;
      counts.up_fm += o.cmp > 0;
      counts.down_fm += o.cmp < 0;
    }
    nmdf_sum += o.fdiff;
  }
};

struct DirectionalProbs {
  double p_up_mf = 0, p_down_mf = 0, p_up_fm = 0, p_down_fm = 0;
  bool mf_defined = false, fm_defined = false;
};

struct MetricValues {
  double pdr = 0;
  DirectionalProbs probs;
  double nats_plus = 0, nats_minus = 0;
  double dts_f_given_m = 0, dts_m_given_f = 0;
  double nmdf = 0;

  double get(const std::string& name) const;
};

// Canonical statistic names, in Table-3 row order.
const std::vector<std::string>& metric_names();

MetricAccumulator accumulate(std::span<const PairObs> obs);
MetricValues metrics_from(const MetricAccumulator& acc);

// Spec-level operations (thin wrappers over the accumulator so every code
// path shares one arithmetic).
double pdr(std::span<const PairObs> obs);
DirectionalProbs directional_probs(std::span<const PairObs> obs);
std::pair<double, double> nats(const DirectionalProbs& p);  // (plus, minus)
std::pair<double, double> dts(const DirectionalProbs& p);   // (f|m, m|f)
double nmdf(std::span<const PairObs> obs);

// Aligned predictions for every variant of every pair over a fixed index set.
struct CondPreds {
  std::vector<int> y_orig;
  std::vector<int> y_cf;
};

struct PredictionSet {
  LabelScale scale;
  IndexSet index_set;                 // canonical pair order
  std::vector<Direction> directions;  // aligned with index_set
  std::vector<int> ref_labels;        // original human label; -1 when unknown
  std::map<Condition, CondPreds> preds;

  std::size_t size() const { return index_set.size(); }
  std::vector<PairObs> observations(Condition c) const;
  std::vector<PairedPrediction> paired_predictions(Condition c) const;
  void validate() const;  // shapes, scales, one index set
};

}  // namespace cfaudit
