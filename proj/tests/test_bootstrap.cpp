#include <doctest.h>

#include <cmath>

#include "cfaudit/bootstrap.hpp"
#include "cfaudit/rng.hpp"
#include "cfaudit/synthetic.hpp"

using namespace cfaudit;

namespace {

PredictionSet bernoulli_change_set(std::size_t n, double p, std::uint64_t seed) {
  PredictionSet set;
  set.scale = LabelScale{2, 5};
  auto& cp = set.preds[Condition::full];
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    set.index_set.ids.push_back("p" + std::to_string(i));
    set.directions.push_back(i % 2 ? Direction::f_to_m : Direction::m_to_f);
    set.ref_labels.push_back(3);
    cp.y_orig.push_back(3);
    cp.y_cf.push_back(rng.bernoulli(p) ? 4 : 3);
  }
  return set;
}

}  // namespace

TEST_CASE("constant statistic has a zero-width interval") {
  auto set = bernoulli_change_set(200, 0.0, 1);
  BootstrapConfig cfg;
  cfg.iterations = 200;
  cfg.seed = 5;
  const auto ci = bootstrap_ci(set, Condition::full, "pdr", cfg);
  CHECK(ci.point == 0.0);
  CHECK(ci.lower == 0.0);
  CHECK(ci.upper == 0.0);
}

TEST_CASE("same seed twice gives identical intervals") {
  auto set = bernoulli_change_set(500, 0.3, 2);
  BootstrapConfig cfg;
  cfg.iterations = 300;
  cfg.seed = 77;
  const auto a = bootstrap_ci(set, Condition::full, "pdr", cfg);
  const auto b = bootstrap_ci(set, Condition::full, "pdr", cfg);
  CHECK(a.lower == b.lower);
  CHECK(a.upper == b.upper);
  // A different seed must change at least one interval somewhere.
  const auto full_a = bootstrap_audit(set, cfg);
  cfg.seed = 78;
  const auto full_c = bootstrap_audit(set, cfg);
  bool any_diff = false;
  for (const auto& name : metric_names())
    any_diff = any_diff ||
               full_a[0].metrics.at(name).lower != full_c[0].metrics.at(name).lower ||
               full_a[0].metrics.at(name).upper != full_c[0].metrics.at(name).upper;
  CHECK(any_diff);
}

TEST_CASE("parallel execution reproduces the serial stream") {
  auto set = bernoulli_change_set(400, 0.2, 3);
  BootstrapConfig cfg;
  cfg.iterations = 128;
  cfg.seed = 9;
  cfg.threads = 1;
  const auto serial = bootstrap_audit(set, cfg);
  cfg.threads = 4;
  const auto parallel = bootstrap_audit(set, cfg);
  for (const auto& name : metric_names()) {
    CHECK(serial[0].metrics.at(name).lower == parallel[0].metrics.at(name).lower);
    CHECK(serial[0].metrics.at(name).upper == parallel[0].metrics.at(name).upper);
  }
}

TEST_CASE("lower <= point <= upper on moderately sized sets") {
  auto set = bernoulli_change_set(800, 0.15, 4);
  BootstrapConfig cfg;
  cfg.iterations = 400;
  cfg.seed = 11;
  const auto cis = bootstrap_audit(set, cfg);
  for (const auto& name : metric_names()) {
    const auto& v = cis[0].metrics.at(name);
    CHECK(v.lower <= v.point + 1e-12);
    CHECK(v.point <= v.upper + 1e-12);
  }
}

TEST_CASE("quadrupling N roughly halves the interval width") {
  BootstrapConfig cfg;
  cfg.iterations = 500;
  cfg.seed = 21;
  auto width = [&](std::size_t n) {
    auto set = bernoulli_change_set(n, 0.25, 31);
    const auto ci = bootstrap_ci(set, Condition::full, "pdr", cfg);
    return ci.upper - ci.lower;
  };
  const double w1 = width(2000);
  const double w4 = width(8000);
  const double ratio = w1 / w4;
  CHECK(ratio > 2.0 * 0.7);
  CHECK(ratio < 2.0 * 1.3);
}

TEST_CASE("undefined resamples are redrawn and counted") {
  // One f_to_m pair among 40: resamples missing it cannot define nats.
  PredictionSet set;
  set.scale = LabelScale{2, 5};
  auto& cp = set.preds[Condition::full];
  for (std::size_t i = 0; i < 40; ++i) {
    set.index_set.ids.push_back("p" + std::to_string(i));
    set.directions.push_back(i == 0 ? Direction::f_to_m : Direction::m_to_f);
    set.ref_labels.push_back(3);
    cp.y_orig.push_back(3);
    cp.y_cf.push_back(i % 3 == 0 ? 4 : 3);
  }
  BootstrapConfig cfg;
  cfg.iterations = 300;
  cfg.seed = 13;
  BootstrapMeta meta;
  const auto ci = bootstrap_ci(set, Condition::full, "nats_plus", cfg, &meta);
  // P(resample misses the single f_to_m pair) = (39/40)^40 ~ 36%
  CHECK(meta.redraws > 0);
  CHECK(std::isfinite(ci.point));

  // pdr needs no direction, so the same set needs no redraws
  BootstrapMeta meta_pdr;
  bootstrap_ci(set, Condition::full, "pdr", cfg, &meta_pdr);
  CHECK(meta_pdr.redraws == 0);
}

TEST_CASE("statistic undefined on the full set is an immediate error") {
  PredictionSet set;
  set.scale = LabelScale{2, 5};
  auto& cp = set.preds[Condition::full];
  for (std::size_t i = 0; i < 10; ++i) {
    set.index_set.ids.push_back("p" + std::to_string(i));
    set.directions.push_back(Direction::m_to_f);  // no f_to_m at all
    set.ref_labels.push_back(3);
    cp.y_orig.push_back(3);
    cp.y_cf.push_back(4);
  }
  BootstrapConfig cfg;
  cfg.seed = 1;
  CHECK_THROWS_AS(bootstrap_ci(set, Condition::full, "nats_plus", cfg), DataError);
  CHECK_NOTHROW(bootstrap_ci(set, Condition::full, "pdr", cfg));
}

TEST_CASE("percentile interval with linear interpolation") {
  CHECK(percentile_interval({1, 1, 1, 1}, 0.95) ==
        std::pair<double, double>{1.0, 1.0});
  const auto [lo, hi] = percentile_interval({0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10},
                                            0.8);
  CHECK(lo == doctest::Approx(1.0));
  CHECK(hi == doctest::Approx(9.0));
}

TEST_CASE("coverage: 95% CI contains the truth in 90-99% of replications") {
  // Bernoulli PDR with known p; light version of the acceptance sweep.
  const double p_true = 0.2;
  int covered = 0;
  const int reps = 200;
  for (int rep = 0; rep < reps; ++rep) {
    auto set = bernoulli_change_set(400, p_true, substream_seed(1234, 0, rep));
    BootstrapConfig cfg;
    cfg.iterations = 200;
    cfg.seed = substream_seed(99, 1, rep);
    const auto ci = bootstrap_ci(set, Condition::full, "pdr", cfg);
    if (ci.lower <= p_true && p_true <= ci.upper) ++covered;
  }
  CHECK(covered >= static_cast<int>(0.90 * reps));
  CHECK(covered <= static_cast<int>(0.998 * reps));
}

TEST_CASE("bootstrap_audit shares one resample across conditions") {
  // Identical predictions in two conditions must give identical intervals.
  auto set = bernoulli_change_set(300, 0.3, 8);
  set.preds[Condition::text_iso] = set.preds.at(Condition::full);
  BootstrapConfig cfg;
  cfg.iterations = 150;
  cfg.seed = 17;
  const auto cis = bootstrap_audit(set, cfg);
  REQUIRE(cis.size() == 2);
  for (const auto& name : metric_names()) {
    CHECK(cis[0].metrics.at(name).lower == cis[1].metrics.at(name).lower);
    CHECK(cis[0].metrics.at(name).upper == cis[1].metrics.at(name).upper);
  }
}
