#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cfaudit/metrics.hpp"

namespace cfaudit {

struct OddsRatioCi {
  double value = 0, lower = 0, upper = 0;
};

// (a*d)/(b*c) with the Woolf log interval exp(ln OR +/- z*sqrt(1/a+...)),
// z = 1.959964. Throws DataError on any zero cell.
OddsRatioCi odds_ratio(std::uint64_t a, std::uint64_t b, std::uint64_t c,
                       std::uint64_t d);

// Pearson chi-square on the 2x2 table, 1 df, no continuity correction;
// two-sided p from the chi-square survival function. Throws DataError on
// degenerate margins.
double chi_square_p(std::uint64_t a, std::uint64_t b, std::uint64_t c,
                    std::uint64_t d);

// Regularized incomplete gamma functions, relative error <= 1e-10 on the
// ranges used here (needed to report p < 1e-15 without underflow).
double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);

// Survival function of the chi-square distribution.
double chi_square_sf(double statistic, double dof);

// Per-original-label 2x2 with event = (cf < orig). a/b count male-original
// pairs, c/d female-original.
struct StratumTable {
  int label = 0;
  std::uint64_t a = 0;  // cf < orig, M original
  std::uint64_t b = 0;  // cf >= orig, M original
  std::uint64_t c = 0;  // cf < orig, F original
  std::uint64_t d = 0;  // cf >= orig, F original
  double pct_up_m = 0, pct_down_m = 0;  // %(cf>orig), %(cf<orig) of M pairs
  double pct_up_f = 0, pct_down_f = 0;
  // Suppressed (rendered as em dash) when any cell is below the small-sample
  // floor, matching the published tables.
  std::optional<OddsRatioCi> oratio;
  std::optional<double> p_value;
};

inline constexpr std::uint64_t kMinCellForOr = 5;

// Requires ref_labels on every pair (-1 entries are rejected).
std::vector<StratumTable> stratify(const PredictionSet& set,
                                   Condition condition = Condition::full);

}  // namespace cfaudit
