#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "cfaudit/bootstrap.hpp"
#include "cfaudit/strata.hpp"

namespace cfaudit {

struct AuditReport {
  std::string profile = "custom";
  LabelScale scale{1, 5};
  std::size_t n_pairs = 0;
  std::string index_digest;  // sha256 over the ordered pair ids
  int percent_decimals = 1;
  BootstrapMeta bootstrap;
  std::vector<ConditionIntervals> conditions;
  std::string manifest_run_id;
};

std::string index_set_digest(const IndexSet& index_set);

// Builds the per-condition reports (Table-3 shape) from a prediction set.
AuditReport run_audit(const PredictionSet& set, const BootstrapConfig& cfg,
                      const std::string& profile, int percent_decimals);

nlohmann::json report_to_json(const AuditReport& report);
AuditReport report_from_json(const nlohmann::json& j);

// Markdown table with the published row order: PDR, the four directional
// probabilities, then the net effects.
std::string report_to_markdown(const AuditReport& report);

// metric -> [{condition, point, lower, upper}] for external plotting.
nlohmann::json report_plot_data(const AuditReport& report);

nlohmann::json strata_to_json(const std::vector<StratumTable>& strata);
std::string strata_to_markdown(const std::vector<StratumTable>& strata);

// Impact projection (annual visits x share x differential), raw plus the
// value rounded to two significant figures.
struct ImpactInput {
  double annual_visits = 0;
  double share = 0;
  double differential = 0;

  void validate() const {
    if (annual_visits < 0 || share < 0 || differential < 0)
      throw ConfigError("impact inputs must be nonnegative");
    if (share > 1 || differential > 1)
      throw ConfigError("impact ratios must be <= 1");
  }
};

struct ImpactProjection {
  double raw = 0;
  double rounded = 0;  // two significant figures
};

ImpactProjection project_impact(const ImpactInput& input);
double round_sig(double x, int figures);

// Two-audit comparison (same index set and conditions required).
struct CompareRow {
  Condition condition = Condition::full;
  std::string metric;
  CiValue a, b;
  double delta = 0;  // a.point - b.point
  std::string overlap;  // "overlapping" | "borderline" | "disjoint"
};

std::vector<CompareRow> compare_predictors(const AuditReport& a,
                                           const AuditReport& b);
std::string overlap_status(const CiValue& a, const CiValue& b);
nlohmann::json compare_to_json(const std::vector<CompareRow>& rows);
std::string compare_to_markdown(const std::vector<CompareRow>& rows);

}  // namespace cfaudit
