#include "cfaudit/synthetic.hpp"

#include <cmath>
#include <cstdio>

#include "cfaudit/rng.hpp"

namespace cfaudit {

void SynthConfig::validate() const {
  if (n_pairs == 0) throw ConfigError("synth: n_pairs must be > 0");
  if (base_dist.size() != static_cast<std::size_t>(scale.size()))
    throw ConfigError("synth: base_dist must have one entry per scale label");
  double sum = 0.0;
  for (double p : base_dist) {
    if (p < 0.0) throw ConfigError("synth: negative base probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw ConfigError("synth: base_dist must sum to 1");
  if (delta < 0.0 || delta > 1.0 || epsilon < 0.0 || epsilon > 1.0)
    throw ConfigError("synth: delta and epsilon must be in [0, 1]");
  if (conditions.empty()) throw ConfigError("synth: no conditions");
}

namespace {

// Noise kernel: with probability eps move one step (each side eps/2),
// clamped at the scale bounds. P(noisy = j | clean = i).
double noise_prob(const LabelScale& scale, int clean, int noisy, double eps) {
  const int down = scale.clamp(clean - 1);
  const int up = scale.clamp(clean + 1);
  double p = 0.0;
  if (noisy == clean) p += 1.0 - eps;
  if (noisy == down) p += eps / 2.0;
  if (noisy == up) p += eps / 2.0;
  return p;
}

}  // namespace

SynthTruth closed_form_truth(const SynthConfig& cfg) {
  cfg.validate();
  const auto& scale = cfg.scale;
  SynthTruth t;
  // Exact expectation over (base label, increment, male noise, female noise).
  for (int base = scale.min; base <= scale.max; ++base) {
    const double p_base = cfg.base_dist[static_cast<std::size_t>(base - scale.min)];
    if (p_base == 0.0) continue;
    for (int inc = 0; inc <= 1; ++inc) {
      const double p_inc = inc ? cfg.delta : 1.0 - cfg.delta;
      if (p_inc == 0.0) continue;
      const int female_clean = scale.clamp(base + inc);
      for (int ym = scale.min; ym <= scale.max; ++ym) {
        const double pm = noise_prob(scale, base, ym, cfg.epsilon);
        if (pm == 0.0) continue;
        for (int yf = scale.min; yf <= scale.max; ++yf) {
          const double pf = noise_prob(scale, female_clean, yf, cfg.epsilon);
          if (pf == 0.0) continue;
          const double p = p_base * p_inc * pm * pf;
          t.nmdf += p * static_cast<double>(yf - ym);
          if (yf != ym) t.pdr += p;
          if (yf > ym) t.p_up_mf += p;   // y_cf > y_orig under m_to_f
          if (yf < ym) t.p_down_mf += p;
        }
      }
    }
  }
  // Under f_to_m the counterfactual is the male presentation.
  t.p_up_fm = t.p_down_mf;
  t.p_down_fm = t.p_up_mf;
  t.nats_plus = t.p_up_fm - t.p_up_mf;
  t.nats_minus = t.p_down_fm - t.p_down_mf;
  t.dts_f_given_m = t.p_up_mf - t.p_down_mf;
  t.dts_m_given_f = t.p_up_fm - t.p_down_fm;
  return t;
}

namespace {

int draw_base_label(const SynthConfig& cfg, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (int i = 0; i < cfg.scale.size(); ++i) {
    acc += cfg.base_dist[static_cast<std::size_t>(i)];
    if (u < acc) return cfg.scale.min + i;
  }
  return cfg.scale.max;
}

int apply_noise(const LabelScale& scale, int label, double eps, Rng& rng) {
  if (eps <= 0.0) return label;
  if (!rng.bernoulli(eps)) return label;
  return scale.clamp(rng.bernoulli(0.5) ? label + 1 : label - 1);
}

std::string synth_id(std::size_t i) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "synth-%06zu", i);
  return buf;
}

}  // namespace

SynthOutput generate(const SynthConfig& cfg) {
  cfg.validate();
  SynthOutput out;
  out.truth = closed_form_truth(cfg);
  out.preds.scale = cfg.scale;

  for (std::size_t i = 0; i < cfg.n_pairs; ++i) {
    Rng rng(substream_seed(cfg.seed, 0x517E, i));
    const Sex orig_sex = rng.bernoulli(0.5) ? Sex::female : Sex::male;
    const int base = draw_base_label(cfg, rng);
    const int female_clean = cfg.scale.clamp(base + (rng.bernoulli(cfg.delta) ? 1 : 0));

    CounterfactualPair pair;
    pair.pair_id = synth_id(i);
    pair.direction = orig_sex == Sex::male ? Direction::m_to_f : Direction::f_to_m;
    pair.condition = Condition::full;
    pair.cf_quality = CfQuality::correct;
    pair.original.id = pair.pair_id;
    pair.original.sex = orig_sex;
    pair.original.age = 50;
    pair.original.chief_complaint = "synthetic presentation";
    pair.original.hpi = "synthetic history";
    pair.original.pmh = "none";
    pair.original.label = orig_sex == Sex::male ? base : female_clean;
    pair.counterfactual = pair.original;
    pair.counterfactual.sex = flip(orig_sex);
    pair.counterfactual.label.reset();

    out.preds.index_set.ids.push_back(pair.pair_id);
    out.preds.directions.push_back(pair.direction);
    out.preds.ref_labels.push_back(*pair.original.label);
    for (std::size_t c = 0; c < cfg.conditions.size(); ++c) {
      // Independent noise per condition, same underlying presentation.
      Rng noise_rng(substream_seed(cfg.seed, 0x40153, i, c));
      const int ym = apply_noise(cfg.scale, base, cfg.epsilon, noise_rng);
      const int yf = apply_noise(cfg.scale, female_clean, cfg.epsilon, noise_rng);
      auto& cp = out.preds.preds[cfg.conditions[c]];
      if (orig_sex == Sex::male) {
        cp.y_orig.push_back(ym);
        cp.y_cf.push_back(yf);
      } else {
        cp.y_orig.push_back(yf);
        cp.y_cf.push_back(ym);
      }
    }
    out.pairs.push_back(std::move(pair));
  }
  return out;
}

}  // namespace cfaudit
