#include <doctest.h>

#include <cmath>

#include "cfaudit/bootstrap.hpp"
#include "cfaudit/jsonl.hpp"
#include "cfaudit/rng.hpp"
#include "cfaudit/synthetic.hpp"

using namespace cfaudit;

TEST_CASE("no effect and no noise: everything is exactly zero") {
  SynthConfig cfg;
  cfg.n_pairs = 2000;
  cfg.scale = LabelScale{2, 5};
  cfg.base_dist = {0.25, 0.25, 0.25, 0.25};
  cfg.delta = 0.0;
  cfg.epsilon = 0.0;
  cfg.seed = 3;
  const auto out = generate(cfg);
  CHECK(out.truth.pdr == 0.0);
  CHECK(out.truth.nmdf == 0.0);
  CHECK(out.truth.dts_f_given_m == 0.0);
  const auto observed =
      metrics_from(accumulate(out.preds.observations(Condition::full)));
  CHECK(observed.pdr == 0.0);
  CHECK(observed.nmdf == 0.0);
}

TEST_CASE("injected delta without clamping is recovered exactly in truth") {
  SynthConfig cfg;
  cfg.n_pairs = 20000;
  cfg.scale = LabelScale{2, 5};
  cfg.base_dist = {1.0 / 3, 1.0 / 3, 1.0 / 3, 0.0};  // labels 2..4: no clamping
  cfg.delta = 0.021;
  cfg.epsilon = 0.0;
  cfg.seed = 17;
  const auto out = generate(cfg);
  CHECK(out.truth.nmdf == doctest::Approx(0.021).epsilon(1e-12));
  CHECK(out.truth.dts_f_given_m == doctest::Approx(0.021).epsilon(1e-12));
  CHECK(out.truth.dts_m_given_f == doctest::Approx(-0.021).epsilon(1e-12));
  CHECK(out.truth.pdr == doctest::Approx(0.021).epsilon(1e-12));

  // The estimator recovers the truth within its bootstrap interval.
  BootstrapConfig bcfg;
  bcfg.iterations = 400;
  bcfg.seed = 5;
  const auto ci = bootstrap_ci(out.preds, Condition::full, "nmdf", bcfg);
  CHECK(ci.lower <= 0.021);
  CHECK(0.021 <= ci.upper);
}

TEST_CASE("clamping at the scale top reduces the induced effect") {
  SynthConfig cfg;
  cfg.n_pairs = 100;
  cfg.scale = LabelScale{2, 5};
  cfg.base_dist = {0.0, 0.0, 0.0, 1.0};  // all pairs at the max label
  cfg.delta = 1.0;
  cfg.epsilon = 0.0;
  cfg.seed = 1;
  const auto truth = closed_form_truth(cfg);
  // increments clamp at scale.max, so the flip changes nothing
  CHECK(truth.nmdf == 0.0);
  CHECK(truth.pdr == 0.0);
}

TEST_CASE("symmetric noise alone keeps every asymmetry at zero") {
  SynthConfig cfg;
  cfg.n_pairs = 1000;
  cfg.scale = LabelScale{2, 5};
  cfg.base_dist = {0.25, 0.25, 0.25, 0.25};
  cfg.delta = 0.0;
  cfg.epsilon = 0.05;
  cfg.seed = 7;
  const auto truth = closed_form_truth(cfg);
  CHECK(truth.nats_plus == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(truth.nats_minus == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(truth.dts_f_given_m == doctest::Approx(-truth.dts_m_given_f));
  CHECK(truth.nmdf == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(truth.pdr > 0.0);  // noise does change labels
}

TEST_CASE("monte carlo agrees with the closed form under noise") {
  SynthConfig cfg;
  cfg.n_pairs = 60000;
  cfg.scale = LabelScale{2, 5};
  cfg.base_dist = {0.4, 0.3, 0.2, 0.1};
  cfg.delta = 0.05;
  cfg.epsilon = 0.10;
  cfg.seed = 23;
  const auto out = generate(cfg);
  const auto observed =
      metrics_from(accumulate(out.preds.observations(Condition::full)));
  // 4-sigma bands with sigma ~ sqrt(p(1-p)/n) ~ 0.002
  CHECK(std::abs(observed.pdr - out.truth.pdr) < 0.01);
  CHECK(std::abs(observed.nmdf - out.truth.nmdf) < 0.01);
  CHECK(std::abs(observed.probs.p_up_mf - out.truth.p_up_mf) < 0.01);
  CHECK(std::abs(observed.probs.p_down_fm - out.truth.p_down_fm) < 0.01);
}

TEST_CASE("generation is deterministic for a given seed") {
  SynthConfig cfg;
  cfg.n_pairs = 500;
  cfg.scale = LabelScale{1, 4};
  cfg.base_dist = {0.25, 0.25, 0.25, 0.25};
  cfg.delta = 0.02;
  cfg.epsilon = 0.03;
  cfg.seed = 99;
  cfg.conditions = {Condition::full, Condition::text_iso};
  const auto a = generate(cfg);
  const auto b = generate(cfg);
  REQUIRE(a.pairs.size() == b.pairs.size());
  for (std::size_t i = 0; i < a.pairs.size(); ++i)
    CHECK(pair_to_json(a.pairs[i]) == pair_to_json(b.pairs[i]));
  for (const auto& [cond, cp] : a.preds.preds) {
    CHECK(cp.y_orig == b.preds.preds.at(cond).y_orig);
    CHECK(cp.y_cf == b.preds.preds.at(cond).y_cf);
  }
  // conditions share the index set; noise differs per condition
  CHECK(a.preds.preds.size() == 2);
  CHECK(a.preds.index_set == b.preds.index_set);
}

TEST_CASE("injected delta recovered within three standard errors") {
  // No-clamping regime: labels 2..4 on a 2..5 scale.
  SynthConfig cfg;
  cfg.n_pairs = 20000;
  cfg.scale = LabelScale{2, 5};
  cfg.base_dist = {1.0 / 3, 1.0 / 3, 1.0 / 3, 0.0};
  cfg.delta = 0.021;
  cfg.epsilon = 0.0;
  cfg.seed = 29;
  const auto out = generate(cfg);
  const auto obs = out.preds.observations(Condition::full);
  const auto estimate = metrics_from(accumulate(obs)).nmdf;
  // fdiff is Bernoulli(delta) here: SE = sqrt(d(1-d)/N)
  const double se = std::sqrt(cfg.delta * (1 - cfg.delta) /
                              static_cast<double>(cfg.n_pairs));
  CHECK(std::abs(estimate - cfg.delta) <= 3.0 * se);
}

TEST_CASE("estimates converge: doubling n halves the rms error") {
  auto rms_error = [](std::size_t n_pairs) {
    SynthConfig cfg;
    cfg.scale = LabelScale{2, 5};
    cfg.base_dist = {0.25, 0.25, 0.25, 0.25};
    cfg.delta = 0.03;
    cfg.epsilon = 0.05;
    cfg.n_pairs = n_pairs;
    double sq = 0.0;
    const int reps = 40;
    for (int rep = 0; rep < reps; ++rep) {
      cfg.seed = substream_seed(51, n_pairs, static_cast<std::uint64_t>(rep));
      const auto out = generate(cfg);
      const auto est =
          metrics_from(accumulate(out.preds.observations(Condition::full)));
      const double err = est.nmdf - out.truth.nmdf;
      sq += err * err;
    }
    return std::sqrt(sq / reps);
  };
  const double small = rms_error(1500);
  const double large = rms_error(6000);  // 4x pairs: rms should halve
  CHECK(large < small);
  CHECK(small / large > 2.0 * 0.6);
  CHECK(small / large < 2.0 * 1.6);
}

TEST_CASE("synthetic oracle config validation") {
  SynthConfig cfg;
  cfg.n_pairs = 10;
  cfg.scale = LabelScale{2, 5};
  cfg.base_dist = {0.5, 0.5};  // wrong arity
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.base_dist = {0.5, 0.2, 0.2, 0.2};  // sums to 1.1
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.base_dist = {0.4, 0.2, 0.2, 0.2};
  cfg.delta = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
