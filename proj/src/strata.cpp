#include "cfaudit/strata.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace cfaudit {

namespace {

constexpr double kWoolfZ = 1.959964;
constexpr int kGammaMaxIter = 500;
constexpr double kGammaEps = 1e-16;

// Lower regularized incomplete gamma by series expansion (x < a + 1).
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double term = sum;
  for (int n = 0; n < kGammaMaxIter; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kGammaEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper regularized incomplete gamma by Lentz continued fraction (x >= a + 1).
double gamma_q_cf(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kGammaMaxIter; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kGammaEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double regularized_gamma_p(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw DataError("regularized gamma: bad arguments");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

double regularized_gamma_q(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw DataError("regularized gamma: bad arguments");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double chi_square_sf(double statistic, double dof) {
  if (statistic < 0.0 || dof <= 0.0)
    throw DataError("chi_square_sf: bad arguments");
  return regularized_gamma_q(dof / 2.0, statistic / 2.0);
}

OddsRatioCi odds_ratio(std::uint64_t a, std::uint64_t b, std::uint64_t c,
                       std::uint64_t d) {
  if (a == 0 || b == 0 || c == 0 || d == 0)
    throw DataError("odds_ratio: zero cell");
  const double ad = static_cast<double>(a) * static_cast<double>(d);
  const double bc = static_cast<double>(b) * static_cast<double>(c);
  OddsRatioCi out;
  out.value = ad / bc;
  const double se = std::sqrt(1.0 / static_cast<double>(a) +
                              1.0 / static_cast<double>(b) +
                              1.0 / static_cast<double>(c) +
                              1.0 / static_cast<double>(d));
  const double log_or = std::log(out.value);
  out.lower = std::exp(log_or - kWoolfZ * se);
  out.upper = std::exp(log_or + kWoolfZ * se);
  return out;
}

double chi_square_p(std::uint64_t a, std::uint64_t b, std::uint64_t c,
                    std::uint64_t d) {
  const double da = static_cast<double>(a), db = static_cast<double>(b);
  const double dc = static_cast<double>(c), dd = static_cast<double>(d);
  const double n = da + db + dc + dd;
  if (n == 0) throw DataError("chi_square_p: empty table");
  const double r1 = da + db, r2 = dc + dd;
  const double c1 = da + dc, c2 = db + dd;
  if (r1 == 0 || r2 == 0 || c1 == 0 || c2 == 0)
    throw DataError("chi_square_p: degenerate margins");
  const double delta = da * dd - db * dc;
  const double statistic = n * delta * delta / (r1 * r2 * c1 * c2);
  return chi_square_sf(statistic, 1.0);
}

std::vector<StratumTable> stratify(const PredictionSet& set, Condition condition) {
  set.validate();
  auto it = set.preds.find(condition);
  if (it == set.preds.end())
    throw DataError(std::string("stratify: no predictions for condition ") +
                    to_string(condition));
  const auto& cp = it->second;

  struct Cells {
    std::uint64_t up_m = 0, down_m = 0, n_m = 0;
    std::uint64_t up_f = 0, down_f = 0, n_f = 0;
  };
  std::map<int, Cells> strata;
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (set.ref_labels[i] < 0)
      throw DataError("stratify: pair " + set.index_set.ids[i] +
                      " has no reference label");
    auto& cell = strata[set.ref_labels[i]];
    const bool up = cp.y_cf[i] > cp.y_orig[i];
    const bool down = cp.y_cf[i] < cp.y_orig[i];
    if (set.directions[i] == Direction::m_to_f) {
      ++cell.n_m;
      cell.up_m += up;
      cell.down_m += down;
    } else {
      ++cell.n_f;
      cell.up_f += up;
      cell.down_f += down;
    }
  }

  std::vector<StratumTable> out;
  for (const auto& [label, cell] : strata) {
    StratumTable row;
    row.label = label;
    row.a = cell.down_m;
    row.b = cell.n_m - cell.down_m;
    row.c = cell.down_f;
    row.d = cell.n_f - cell.down_f;
    if (cell.n_m > 0) {
      row.pct_up_m = 100.0 * static_cast<double>(cell.up_m) / static_cast<double>(cell.n_m);
      row.pct_down_m = 100.0 * static_cast<double>(cell.down_m) / static_cast<double>(cell.n_m);
    }
    if (cell.n_f > 0) {
      row.pct_up_f = 100.0 * static_cast<double>(cell.up_f) / static_cast<double>(cell.n_f);
      row.pct_down_f = 100.0 * static_cast<double>(cell.down_f) / static_cast<double>(cell.n_f);
    }
    const auto min_cell = std::min({row.a, row.b, row.c, row.d});
    if (min_cell >= kMinCellForOr) {
      row.oratio = odds_ratio(row.a, row.b, row.c, row.d);
      row.p_value = chi_square_p(row.a, row.b, row.c, row.d);
    }
    out.push_back(row);
  }
  return out;
}

}  // namespace cfaudit
