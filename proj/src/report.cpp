#include "cfaudit/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "cfaudit/manifest.hpp"

namespace cfaudit {

using nlohmann::json;

namespace {

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

std::string pct(double v, int decimals) {
  char spec[16];
  std::snprintf(spec, sizeof(spec), "%%.%df%%%%", decimals);
  return fmt(spec, v * 100.0);
}

std::string pct_ci(const CiValue& v, int decimals) {
  return pct(v.point, decimals) + " [" + pct(v.lower, decimals) + "–" +
         pct(v.upper, decimals) + "]";
}

std::string num_ci(const CiValue& v) {
  return fmt("%.4f", v.point) + " [" + fmt("%.4f", v.lower) + "–" +
         fmt("%.4f", v.upper) + "]";
}

std::string p_value_text(double p) {
  if (p < 1e-15) return "<1e-15";
  if (p < 1e-3) return fmt("%.1e", p);
  return fmt("%.4f", p);
}

const std::vector<std::pair<std::string, std::string>>& metric_rows() {
  // Table row label per metric, in published order.
  static const std::vector<std::pair<std::string, std::string>> rows{
      {"p_down_mf", "More severe when M→F (P↓ M→F)"},
      {"p_up_mf", "Less severe when M→F (P↑ M→F)"},
      {"p_down_fm", "More severe when F→M (P↓ F→M)"},
      {"p_up_fm", "Less severe when F→M (P↑ F→M)"},
      {"dts_m_given_f", "Directional Triage Skew for F→M (DTS M|F)"},
      {"dts_f_given_m", "Directional Triage Skew for M→F (DTS F|M)"},
      {"nats_minus", "Downward Net Asymmetric Triage Shift (NATS(−))"},
      {"nats_plus", "Upward Net Asymmetric Triage Shift (NATS(+))"},
      {"nmdf", "Net Mean Disadvantage for Females (NMDF)"},
  };
  return rows;
}

std::string condition_title(Condition c) {
  switch (c) {
    case Condition::full: return "Full";
    case Condition::text_iso: return "Text-Iso";
    case Condition::tab_iso: return "Tab-Iso";
  }
  return "Full";
}

}  // namespace

std::string index_set_digest(const IndexSet& index_set) {
  std::string joined;
  for (const auto& id : index_set.ids) {
    joined += id;
    joined += '\n';
  }
  return sha256_hex(joined);
}

AuditReport run_audit(const PredictionSet& set, const BootstrapConfig& cfg,
                      const std::string& profile, int percent_decimals) {
  AuditReport report;
  report.profile = profile;
  report.scale = set.scale;
  report.n_pairs = set.size();
  report.index_digest = index_set_digest(set.index_set);
  report.percent_decimals = percent_decimals;
  report.conditions = bootstrap_audit(set, cfg, &report.bootstrap);
  return report;
}

json report_to_json(const AuditReport& report) {
  json j;
  j["schema"] = "v1";
  j["profile"] = report.profile;
  j["scale"] = {{"min", report.scale.min}, {"max", report.scale.max}};
  j["n_pairs"] = report.n_pairs;
  j["index_digest"] = report.index_digest;
  j["percent_decimals"] = report.percent_decimals;
  j["bootstrap"] = {{"iterations", report.bootstrap.iterations},
                    {"confidence", report.bootstrap.confidence},
                    {"seed", report.bootstrap.seed},
                    {"method", report.bootstrap.method},
                    {"redraws", report.bootstrap.redraws}};
  if (!report.manifest_run_id.empty()) j["manifest_run_id"] = report.manifest_run_id;
  json conds = json::array();
  for (const auto& ci : report.conditions) {
    json c;
    c["condition"] = to_string(ci.condition);
    json metrics;
    for (const auto& [name, v] : ci.metrics)
      metrics[name] = {{"point", v.point}, {"lower", v.lower}, {"upper", v.upper}};
    c["metrics"] = metrics;
    conds.push_back(c);
  }
  j["conditions"] = conds;
  return j;
}

AuditReport report_from_json(const json& j) {
  if (!j.contains("schema") || j.at("schema") != "v1")
    throw DataError("report: missing or unsupported schema version");
  AuditReport report;
  report.profile = j.value("profile", "custom");
  report.scale.min = j.at("scale").at("min").get<int>();
  report.scale.max = j.at("scale").at("max").get<int>();
  report.n_pairs = j.at("n_pairs").get<std::size_t>();
  report.index_digest = j.at("index_digest").get<std::string>();
  report.percent_decimals = j.value("percent_decimals", 1);
  const auto& b = j.at("bootstrap");
  report.bootstrap.iterations = b.at("iterations").get<int>();
  report.bootstrap.confidence = b.at("confidence").get<double>();
  report.bootstrap.seed = b.at("seed").get<std::uint64_t>();
  report.bootstrap.method = b.at("method").get<std::string>();
  report.bootstrap.redraws = b.value("redraws", 0ULL);
  report.manifest_run_id = j.value("manifest_run_id", "");
  for (const auto& c : j.at("conditions")) {
    ConditionIntervals ci;
    ci.condition = condition_from_string(c.at("condition").get<std::string>());
    for (const auto& [name, v] : c.at("metrics").items())
      ci.metrics[name] = CiValue{v.at("point").get<double>(),
                                 v.at("lower").get<double>(),
                                 v.at("upper").get<double>()};
    report.conditions.push_back(std::move(ci));
  }
  return report;
}

std::string report_to_markdown(const AuditReport& report) {
  const int dec = report.percent_decimals;
  std::string md;
  md += "| Metric |";
  for (const auto& ci : report.conditions)
    md += " " + condition_title(ci.condition) + " |";
  md += "\n|---|";
  for (std::size_t i = 0; i < report.conditions.size(); ++i) md += "---|";
  md += "\n";

  auto row = [&](const std::string& label, const std::string& metric) {
    md += "| " + label + " |";
    for (const auto& ci : report.conditions) {
      const auto& v = ci.metrics.at(metric);
      md += " " + (metric == "nmdf" ? num_ci(v) : pct_ci(v, dec)) + " |";
    }
    md += "\n";
  };
  auto section = [&](const std::string& title) {
    md += "| *" + title + "* |";
    for (std::size_t i = 0; i < report.conditions.size(); ++i) md += " |";
    md += "\n";
  };

  row("Pairwise Disagreement Rate (PDR)", "pdr");
  section("Directional Probabilities");
  for (std::size_t i = 0; i < 4; ++i)
    row(metric_rows()[i].second, metric_rows()[i].first);
  section("Net Effects");
  for (std::size_t i = 4; i < metric_rows().size(); ++i)
    row(metric_rows()[i].second, metric_rows()[i].first);
  return md;
}

json report_plot_data(const AuditReport& report) {
  json plot;
  plot["schema"] = "v1";
  json metrics;
  std::vector<std::string> names{"pdr"};
  for (const auto& [name, label] : metric_rows()) names.push_back(name);
  for (const auto& name : names) {
    json series = json::array();
    for (const auto& ci : report.conditions) {
      const auto& v = ci.metrics.at(name);
      series.push_back({{"condition", to_string(ci.condition)},
                        {"point", v.point},
                        {"lower", v.lower},
                        {"upper", v.upper}});
    }
    metrics[name] = series;
  }
  plot["metrics"] = metrics;
  return plot;
}

json strata_to_json(const std::vector<StratumTable>& strata) {
  json rows = json::array();
  for (const auto& s : strata) {
    json r;
    r["label"] = s.label;
    r["counts"] = {{"a_cf_lt_orig_m", s.a},
                   {"b_cf_ge_orig_m", s.b},
                   {"c_cf_lt_orig_f", s.c},
                   {"d_cf_ge_orig_f", s.d}};
    r["pct_cf_gt_orig_m"] = s.pct_up_m;
    r["pct_cf_lt_orig_m"] = s.pct_down_m;
    r["pct_cf_gt_orig_f"] = s.pct_up_f;
    r["pct_cf_lt_orig_f"] = s.pct_down_f;
    if (s.oratio) {
      r["odds_ratio"] = {{"value", s.oratio->value},
                         {"lower", s.oratio->lower},
                         {"upper", s.oratio->upper}};
    } else {
      r["odds_ratio"] = nullptr;
    }
    if (s.p_value)
      r["p_value"] = *s.p_value;
    else
      r["p_value"] = nullptr;
    rows.push_back(r);
  }
  return json{{"schema", "v1"}, {"strata", rows}};
}

std::string strata_to_markdown(const std::vector<StratumTable>& strata) {
  std::string md;
  md += "| Triage Score | cf>orig (M) | cf<orig (M) | cf>orig (F) | cf<orig (F)"
        " | Δ M-F cf> | Δ M-F cf< |\n";
  md += "|---|---|---|---|---|---|---|\n";
  for (const auto& s : strata) {
    md += "| " + std::to_string(s.label) + " | " + fmt("%.1f%%", s.pct_up_m) +
          " | " + fmt("%.1f%%", s.pct_down_m) + " | " + fmt("%.1f%%", s.pct_up_f) +
          " | " + fmt("%.1f%%", s.pct_down_f) + " | " +
          fmt("%+.1f", s.pct_up_m - s.pct_up_f) + " | " +
          fmt("%+.1f", s.pct_down_m - s.pct_down_f) + " |\n";
  }
  md += "\n";
  md += "| Triage Sc. | cf<orig (M) | cf≥orig (M) | cf<orig (F) | "
        "cf≥orig (F) | OR (M/F) | IC95% | p-val |\n";
  md += "|---|---|---|---|---|---|---|---|\n";
  for (const auto& s : strata) {
    md += "| " + std::to_string(s.label) + " | " + std::to_string(s.a) + " | " +
          std::to_string(s.b) + " | " + std::to_string(s.c) + " | " +
          std::to_string(s.d) + " | ";
    if (s.oratio) {
      md += fmt("%.2f", s.oratio->value) + " | [" + fmt("%.2f", s.oratio->lower) +
            "–" + fmt("%.2f", s.oratio->upper) + "] | " +
            p_value_text(*s.p_value) + " |\n";
    } else {
      md += "— | — | — |\n";
    }
  }
  return md;
}

double round_sig(double x, int figures) {
  if (x == 0.0) return 0.0;
  const double mag =
      std::pow(10.0, std::floor(std::log10(std::abs(x))) - (figures - 1));
  return std::round(x / mag) * mag;
}

ImpactProjection project_impact(const ImpactInput& input) {
  input.validate();
  ImpactProjection out;
  out.raw = input.annual_visits * input.share * input.differential;
  out.rounded = round_sig(out.raw, 2);
  return out;
}

std::string overlap_status(const CiValue& a, const CiValue& b) {
  constexpr double tol = 1e-12;
  if (a.lower == b.lower && a.upper == b.upper) return "overlapping";
  const double lo = std::max(a.lower, b.lower);
  const double hi = std::min(a.upper, b.upper);
  if (hi - lo > tol) return "overlapping";
  if (std::abs(hi - lo) <= tol) return "borderline";
  return "disjoint";
}

std::vector<CompareRow> compare_predictors(const AuditReport& a,
                                           const AuditReport& b) {
  if (a.index_digest != b.index_digest)
    throw DataError("compare: audits do not share an index set");
  if (a.conditions.size() != b.conditions.size())
    throw DataError("compare: audits cover different conditions");
  static const std::vector<std::string> compared{
      "nats_minus", "nats_plus", "dts_f_given_m", "dts_m_given_f", "nmdf"};
  std::vector<CompareRow> rows;
  for (std::size_t i = 0; i < a.conditions.size(); ++i) {
    const auto& ca = a.conditions[i];
    const auto& cb = b.conditions[i];
    if (ca.condition != cb.condition)
      throw DataError("compare: audits cover different conditions");
    for (const auto& metric : compared) {
      CompareRow row;
      row.condition = ca.condition;
      row.metric = metric;
      row.a = ca.metrics.at(metric);
      row.b = cb.metrics.at(metric);
      row.delta = row.a.point - row.b.point;
      row.overlap = overlap_status(row.a, row.b);
      rows.push_back(row);
    }
  }
  return rows;
}

json compare_to_json(const std::vector<CompareRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({{"condition", to_string(r.condition)},
                   {"metric", r.metric},
                   {"a", {{"point", r.a.point}, {"lower", r.a.lower}, {"upper", r.a.upper}}},
                   {"b", {{"point", r.b.point}, {"lower", r.b.lower}, {"upper", r.b.upper}}},
                   {"delta", r.delta},
                   {"overlap", r.overlap}});
  }
  return json{{"schema", "v1"}, {"rows", out}};
}

std::string compare_to_markdown(const std::vector<CompareRow>& rows) {
  std::string md;
  md += "| Condition | Metric | A | B | Δ (A−B) | CIs |\n";
  md += "|---|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    md += "| " + std::string(to_string(r.condition)) + " | " + r.metric + " | " +
          num_ci(r.a) + " | " + num_ci(r.b) + " | " + fmt("%+.4f", r.delta) +
          " | " + r.overlap + " |\n";
  }
  return md;
}

}  // namespace cfaudit
