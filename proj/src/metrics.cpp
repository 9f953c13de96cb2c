#include "cfaudit/metrics.hpp"

#include <algorithm>

namespace cfaudit {

PairObs make_obs(Direction dir, int y_orig, int y_cf) {
  PairObs o;
  o.dir = dir == Direction::m_to_f ? 0 : 1;
  o.cmp = static_cast<std::int8_t>(y_cf > y_orig ? 1 : (y_cf < y_orig ? -1 : 0));
  // female presentation = counterfactual under m_to_f, original under f_to_m
  const int d = y_cf - y_orig;
  o.fdiff = static_cast<std::int8_t>(dir == Direction::m_to_f ? d : -d);
  return o;
}

const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names{
      "pdr",        "p_down_mf",     "p_up_mf",       "p_down_fm",
      "p_up_fm",    "dts_m_given_f", "dts_f_given_m", "nats_minus",
      "nats_plus",  "nmdf"};
  return names;
}

double MetricValues::get(const std::string& name) const {
  if (name == "pdr") return pdr;
  if (name == "p_up_mf") return probs.p_up_mf;
  if (name == "p_down_mf") return probs.p_down_mf;
  if (name == "p_up_fm") return probs.p_up_fm;
  if (name == "p_down_fm") return probs.p_down_fm;
  if (name == "nats_plus") return nats_plus;
  if (name == "nats_minus") return nats_minus;
  if (name == "dts_f_given_m") return dts_f_given_m;
  if (name == "dts_m_given_f") return dts_m_given_f;
  if (name == "nmdf") return nmdf;
  throw DataError("unknown metric: " + name);
}

MetricAccumulator accumulate(std::span<const PairObs> obs) {
  MetricAccumulator acc;
  for (const auto& o : obs) acc.add(o);
  return acc;
}

MetricValues metrics_from(const MetricAccumulator& acc) {
  MetricValues v;
  const auto& c = acc.counts;
  const auto n = c.total();
  if (n == 0) throw DataError("metrics on an empty prediction set");
  v.pdr = static_cast<double>(c.changed()) / static_cast<double>(n);
  if (c.n_mf > 0) {
    v.probs.mf_defined = true;
    v.probs.p_up_mf = static_cast<double>(c.up_mf) / static_cast<double>(c.n_mf);
    v.probs.p_down_mf = static_cast<double>(c.down_mf) / static_cast<double>(c.n_mf);
  }
  if (c.n_fm > 0) {
    v.probs.fm_defined = true;
    v.probs.p_up_fm = static_cast<double>(c.up_fm) / static_cast<double>(c.n_fm);
    v.probs.p_down_fm = static_cast<double>(c.down_fm) / static_cast<double>(c.n_fm);
  }
  v.nats_plus = v.probs.p_up_fm - v.probs.p_up_mf;
  v.nats_minus = v.probs.p_down_fm - v.probs.p_down_mf;
  v.dts_f_given_m = v.probs.p_up_mf - v.probs.p_down_mf;
  v.dts_m_given_f = v.probs.p_up_fm - v.probs.p_down_fm;
  v.nmdf = static_cast<double>(acc.nmdf_sum) / static_cast<double>(n);
  return v;
}

double pdr(std::span<const PairObs> obs) {
  return metrics_from(accumulate(obs)).pdr;
}

DirectionalProbs directional_probs(std::span<const PairObs> obs) {
  return metrics_from(accumulate(obs)).probs;
}

std::pair<double, double> nats(const DirectionalProbs& p) {
  if (!p.mf_defined || !p.fm_defined)
    throw DataError("nats requires both directions to be nonempty");
  return {p.p_up_fm - p.p_up_mf, p.p_down_fm - p.p_down_mf};
}

std::pair<double, double> dts(const DirectionalProbs& p) {
  if (!p.mf_defined || !p.fm_defined)
    throw DataError("dts requires both directions to be nonempty");
  return {p.p_up_mf - p.p_down_mf, p.p_up_fm - p.p_down_fm};
}

double nmdf(std::span<const PairObs> obs) {
  return metrics_from(accumulate(obs)).nmdf;
}

std::vector<PairObs> PredictionSet::observations(Condition c) const {
  auto it = preds.find(c);
  if (it == preds.end())
    throw DataError(std::string("no predictions for condition ") + to_string(c));
  const auto& cp = it->second;
  std::vector<PairObs> out;
  out.reserve(index_set.size());
  for (std::size_t i = 0; i < index_set.size(); ++i)
    out.push_back(make_obs(directions[i], cp.y_orig[i], cp.y_cf[i]));
  return out;
}

std::vector<PairedPrediction> PredictionSet::paired_predictions(Condition c) const {
  auto it = preds.find(c);
  if (it == preds.end())
    throw DataError(std::string("no predictions for condition ") + to_string(c));
  std::vector<PairedPrediction> out;
  out.reserve(index_set.size());
  for (std::size_t i = 0; i < index_set.size(); ++i)
    out.push_back({index_set.ids[i], c, it->second.y_orig[i],
                   it->second.y_cf[i], directions[i]});
  return out;
}

void PredictionSet::validate() const {
  const std::size_t n = index_set.size();
  if (directions.size() != n || ref_labels.size() != n)
    throw DataError("prediction set: misaligned pair metadata");
  if (preds.empty()) throw DataError("prediction set: no conditions");
  for (const auto& [cond, cp] : preds) {
    if (cp.y_orig.size() != n || cp.y_cf.size() != n)
      throw DataError(std::string("prediction set: condition ") +
                      to_string(cond) + " does not cover the index set");
    for (std::size_t i = 0; i < n; ++i)
      if (!scale.contains(cp.y_orig[i]) || !scale.contains(cp.y_cf[i]))
        throw DataError("prediction set: label outside scale");
  }
}

}  // namespace cfaudit
