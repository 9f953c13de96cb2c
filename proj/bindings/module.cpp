// Python bindings for the main audit operations: paired bias metrics,
// bootstrap intervals, odds ratios, weighted kappa, lexicon screening and
// the synthetic oracle.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cfaudit/bootstrap.hpp"
#include "cfaudit/lexicon.hpp"
#include "cfaudit/predictor.hpp"
#include "cfaudit/prompts.hpp"
#include "cfaudit/report.hpp"
#include "cfaudit/strata.hpp"
#include "cfaudit/synthetic.hpp"
#include "cfaudit/validate.hpp"

namespace py = pybind11;
using namespace cfaudit;

namespace {

// (direction, y_orig, y_cf) triples -> aligned prediction set, one condition.
PredictionSet set_from_triples(
    const std::vector<std::tuple<std::string, int, int>>& pairs, int scale_min,
    int scale_max) {
  PredictionSet set;
  set.scale = LabelScale{scale_min, scale_max};
  auto& cp = set.preds[Condition::full];
  std::size_t i = 0;
  for (const auto& [dir, yo, yc] : pairs) {
    set.index_set.ids.push_back("p" + std::to_string(i++));
    set.directions.push_back(direction_from_string(dir));
    set.ref_labels.push_back(yo);
    cp.y_orig.push_back(yo);
    cp.y_cf.push_back(yc);
  }
  return set;
}

py::dict metrics_dict(const MetricValues& v) {
  py::dict out;
  out["pdr"] = v.pdr;
  out["p_up_mf"] = v.probs.p_up_mf;
  out["p_down_mf"] = v.probs.p_down_mf;
  out["p_up_fm"] = v.probs.p_up_fm;
  out["p_down_fm"] = v.probs.p_down_fm;
  out["nats_plus"] = v.nats_plus;
  out["nats_minus"] = v.nats_minus;
  out["dts_f_given_m"] = v.dts_f_given_m;
  out["dts_m_given_f"] = v.dts_m_given_f;
  out["nmdf"] = v.nmdf;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Counterfactual bias audit core (paired metrics, bootstrap, "
            "odds ratios, kappa)";

  m.def(
      "paired_metrics",
      [](const std::vector<std::tuple<std::string, int, int>>& pairs,
         int scale_min, int scale_max) {
        const auto set = set_from_triples(pairs, scale_min, scale_max);
        return metrics_dict(metrics_from(accumulate(set.observations(Condition::full))));
      },
      py::arg("pairs"), py::arg("scale_min") = 1, py::arg("scale_max") = 5,
      "All paired bias metrics from (direction, y_orig, y_cf) triples");

  m.def(
      "bootstrap_metrics",
      [](const std::vector<std::tuple<std::string, int, int>>& pairs,
         int scale_min, int scale_max, int iterations, double confidence,
         std::uint64_t seed) {
        const auto set = set_from_triples(pairs, scale_min, scale_max);
        BootstrapConfig cfg;
        cfg.iterations = iterations;
        cfg.confidence = confidence;
        cfg.seed = seed;
        const auto intervals = bootstrap_audit(set, cfg);
        py::dict out;
        for (const auto& [name, v] : intervals.front().metrics)
          out[name.c_str()] = py::make_tuple(v.point, v.lower, v.upper);
        return out;
      },
      py::arg("pairs"), py::arg("scale_min") = 1, py::arg("scale_max") = 5,
      py::arg("iterations") = 1000, py::arg("confidence") = 0.95,
      py::arg("seed") = 0,
      "Percentile bootstrap intervals (pair-level resampling) for all metrics");

  m.def(
      "odds_ratio",
      [](std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
        const auto v = odds_ratio(a, b, c, d);
        return py::make_tuple(v.value, v.lower, v.upper);
      },
      py::arg("a"), py::arg("b"), py::arg("c"), py::arg("d"),
      "Odds ratio with the Woolf 95% interval");

  m.def("chi_square_p",
        py::overload_cast<std::uint64_t, std::uint64_t, std::uint64_t,
                          std::uint64_t>(&chi_square_p),
        py::arg("a"), py::arg("b"), py::arg("c"), py::arg("d"),
        "Pearson chi-square p-value (1 df, no continuity correction)");

  m.def("chi_square_sf", &chi_square_sf, py::arg("statistic"), py::arg("dof"),
        "Chi-square survival function via the regularized incomplete gamma");

  m.def(
      "weighted_kappa",
      [](const std::vector<std::vector<std::uint64_t>>& counts) {
        const auto k = counts.size();
        AgreementMatrix matrix(LabelScale{1, static_cast<int>(k)});
        for (std::size_t i = 0; i < k; ++i) {
          if (counts[i].size() != k)
            throw DataError("weighted_kappa: matrix must be square");
          for (std::size_t j = 0; j < k; ++j) matrix.counts[i][j] = counts[i][j];
        }
        return weighted_kappa(matrix);
      },
      py::arg("counts"), "Quadratically weighted Cohen's kappa from a k x k matrix");

  m.def(
      "project_impact",
      [](double visits, double share, double differential) {
        const auto p = project_impact({visits, share, differential});
        return py::make_tuple(p.raw, p.rounded);
      },
      py::arg("visits"), py::arg("share"), py::arg("differential"),
      "Impact projection: raw product and 2-significant-figure rounding");

  m.def(
      "matches_lexicon",
      [](const std::string& text, const std::string& language) {
        const auto match = matches_lexicon(
            text, builtin_lexicon(language_from_string(language)));
        return match.stems;
      },
      py::arg("text"), py::arg("language"),
      "Matched exclusion-lexicon stems (empty list = clean)");

  m.def(
      "validate_rewrite",
      [](const std::string& language, const std::string& orig_sex,
         const std::string& orig_text, const std::string& cand_text) {
        DecisionRecord orig, cand;
        orig.sex = sex_from_string(orig_sex);
        orig.hpi = orig_text;
        cand.sex = flip(*orig.sex);
        cand.hpi = cand_text;
        const auto report = validate_cf(
            orig, cand, builtin_markers(language_from_string(language)));
        py::dict out;
        out["quality"] = std::string(to_string(report.quality));
        out["flipped_marker_found"] = report.flipped_marker_found;
        out["residual_source_gender_terms"] = report.residual_source_gender_terms;
        out["non_gender_token_overlap"] = report.non_gender_token_overlap;
        return out;
      },
      py::arg("language"), py::arg("orig_sex"), py::arg("orig_text"),
      py::arg("cand_text"), "Automatic counterfactual rewrite validation");

  m.def(
      "synth_truth",
      [](std::size_t n_pairs, int scale_min, int scale_max, double delta,
         double epsilon, std::uint64_t seed) {
        SynthConfig cfg;
        cfg.n_pairs = n_pairs;
        cfg.scale = LabelScale{scale_min, scale_max};
        cfg.base_dist.assign(static_cast<std::size_t>(cfg.scale.size()),
                             1.0 / cfg.scale.size());
        cfg.delta = delta;
        cfg.epsilon = epsilon;
        cfg.seed = seed;
        const auto out = generate(cfg);
        const auto observed =
            metrics_from(accumulate(out.preds.observations(Condition::full)));
        py::dict truth;
        truth["pdr"] = out.truth.pdr;
        truth["nmdf"] = out.truth.nmdf;
        truth["nats_plus"] = out.truth.nats_plus;
        truth["nats_minus"] = out.truth.nats_minus;
        truth["dts_f_given_m"] = out.truth.dts_f_given_m;
        truth["dts_m_given_f"] = out.truth.dts_m_given_f;
        py::dict result;
        result["truth"] = truth;
        result["observed"] = metrics_dict(observed);
        return result;
      },
      py::arg("n_pairs"), py::arg("scale_min") = 2, py::arg("scale_max") = 5,
      py::arg("delta") = 0.0, py::arg("epsilon") = 0.0, py::arg("seed") = 0,
      "Synthetic population: closed-form truth plus observed estimates");

  m.def(
      "parse_generation",
      [](const std::string& output, const std::string& language)
          -> py::object {
        std::string err;
        const auto parsed = parse_generation(
            output, builtin_cf_template(language_from_string(language)), &err);
        if (!parsed) return py::none();
        return py::make_tuple(std::string(to_string(parsed->sex)),
                              parsed->values);
      },
      py::arg("output"), py::arg("language"),
      "Parse a labeled comma-separated rewrite reply (None on garble)");

  m.attr("__version__") = CFAUDIT_VERSION;
}
