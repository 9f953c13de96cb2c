#include "cfaudit/bootstrap.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "cfaudit/rng.hpp"

namespace cfaudit {

namespace {

constexpr std::uint64_t kBootstrapStage = 0xB007;
constexpr int kMaxRedraws = 1000;

enum Needs : unsigned { kNeedsNone = 0, kNeedsMf = 1, kNeedsFm = 2 };

unsigned needs_for(const std::string& statistic) {
  if (statistic == "pdr" || statistic == "nmdf") return kNeedsNone;
  if (statistic == "p_up_mf" || statistic == "p_down_mf" ||
      statistic == "dts_f_given_m")
    return kNeedsMf;
  if (statistic == "p_up_fm" || statistic == "p_down_fm" ||
      statistic == "dts_m_given_f")
    return kNeedsFm;
  if (statistic == "nats_plus" || statistic == "nats_minus")
    return kNeedsMf | kNeedsFm;
  throw ConfigError("unknown bootstrap statistic: " + statistic);
}

// One resample of all conditions; returns false when the direction
// requirements cannot be met (caller redraws).
bool resample(const std::vector<std::vector<PairObs>>& conds, Rng& rng,
              unsigned needs, std::vector<MetricAccumulator>& out) {
  const std::size_t n = conds.front().size();
  out.assign(conds.size(), MetricAccumulator{});
  for (std::size_t j = 0; j < n; ++j) {
    const auto idx = static_cast<std::size_t>(rng.bounded(n));
    for (std::size_t c = 0; c < conds.size(); ++c) out[c].add(conds[c][idx]);
  }
  // Direction composition is identical across conditions (same drawn pairs).
  const auto& counts = out.front().counts;
  if ((needs & kNeedsMf) && counts.n_mf == 0) return false;
  if ((needs & kNeedsFm) && counts.n_fm == 0) return false;
  return true;
}

struct Samples {
  // samples[cond][metric][iteration]
  std::vector<std::map<std::string, std::vector<double>>> values;
  std::uint64_t redraws = 0;
};

Samples run_iterations(const std::vector<std::vector<PairObs>>& conds,
                       const BootstrapConfig& cfg, unsigned needs) {
  const int B = cfg.iterations;
  Samples out;
  out.values.resize(conds.size());
  for (auto& per_cond : out.values)
    for (const auto& name : metric_names()) per_cond[name].assign(B, 0.0);

  std::atomic<std::uint64_t> redraws{0};
  std::atomic<int> next{0};
  std::atomic<bool> exhausted{false};
  auto work = [&] {
    std::vector<MetricAccumulator> accs;
    for (;;) {
      const int t = next.fetch_add(1);
      if (t >= B || exhausted.load()) return;
      bool ok = false;
      for (int attempt = 0; attempt < kMaxRedraws && !ok; ++attempt) {
        Rng rng(substream_seed(cfg.seed, kBootstrapStage,
                               static_cast<std::uint64_t>(t),
                               static_cast<std::uint64_t>(attempt)));
        ok = resample(conds, rng, needs, accs);
        if (!ok) redraws.fetch_add(1);
      }
      if (!ok) {
        exhausted.store(true);
        return;
      }
      for (std::size_t c = 0; c < conds.size(); ++c) {
        const auto v = metrics_from(accs[c]);
        for (const auto& name : metric_names())
          out.values[c][name][t] = v.get(name);
      }
    }
  };

  int n_threads = cfg.threads > 0
                      ? cfg.threads
                      : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::max(1, std::min(n_threads, B));
  if (n_threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (exhausted.load())
    throw DataError("bootstrap: statistic undefined on every redraw");
  out.redraws = redraws.load();
  return out;
}

// Throws when the statistic is already undefined on the full set, so the
// redraw loop can never be asked for the impossible.
void require_defined(const std::vector<std::vector<PairObs>>& conds,
                     unsigned needs) {
  const auto counts = accumulate(conds.front()).counts;
  if ((needs & kNeedsMf) && counts.n_mf == 0)
    throw DataError("direction m_to_f has no pairs; statistic undefined");
  if ((needs & kNeedsFm) && counts.n_fm == 0)
    throw DataError("direction f_to_m has no pairs; statistic undefined");
}

}  // namespace

std::pair<double, double> percentile_interval(std::vector<double> samples,
                                              double confidence) {
  if (samples.empty()) throw DataError("percentile interval of nothing");
  std::sort(samples.begin(), samples.end());
  auto quantile = [&](double q) {
    const double h = q * static_cast<double>(samples.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, samples.size() - 1);
    const double frac = h - std::floor(h);
    return samples[lo] + frac * (samples[hi] - samples[lo]);
  };
  const double alpha = (1.0 - confidence) / 2.0;
  return {quantile(alpha), quantile(1.0 - alpha)};
}

CiValue bootstrap_ci(const PredictionSet& set, Condition condition,
                     const std::string& statistic, const BootstrapConfig& cfg,
                     BootstrapMeta* meta) {
  cfg.validate();
  set.validate();
  const std::vector<std::vector<PairObs>> conds{set.observations(condition)};
  if (conds.front().empty()) throw DataError("bootstrap on an empty set");
  const auto needs = needs_for(statistic);
  require_defined(conds, needs);
  const auto point_val = metrics_from(accumulate(conds.front()));

  auto samples = run_iterations(conds, cfg, needs);
  auto [lo, hi] = percentile_interval(samples.values[0][statistic], cfg.confidence);
  if (meta) {
    meta->iterations = cfg.iterations;
    meta->confidence = cfg.confidence;
    meta->seed = cfg.seed;
    meta->method = cfg.method;
    meta->redraws = samples.redraws;
  }
  return CiValue{point_val.get(statistic), lo, hi};
}

std::vector<ConditionIntervals> bootstrap_audit(const PredictionSet& set,
                                                const BootstrapConfig& cfg,
                                                BootstrapMeta* meta) {
  cfg.validate();
  set.validate();
  std::vector<Condition> cond_order;
  std::vector<std::vector<PairObs>> conds;
  for (const auto& [cond, _] : set.preds) {
    cond_order.push_back(cond);
    conds.push_back(set.observations(cond));
  }
  if (conds.front().empty()) throw DataError("bootstrap on an empty set");

  // The audit reports NATS/DTS everywhere, so both directions are required.
  require_defined(conds, kNeedsMf | kNeedsFm);
  auto samples = run_iterations(conds, cfg, kNeedsMf | kNeedsFm);

  std::vector<ConditionIntervals> out;
  for (std::size_t c = 0; c < conds.size(); ++c) {
    ConditionIntervals ci;
    ci.condition = cond_order[c];
    const auto point = metrics_from(accumulate(conds[c]));
    for (const auto& name : metric_names()) {
      auto [lo, hi] = percentile_interval(samples.values[c][name], cfg.confidence);
      ci.metrics[name] = CiValue{point.get(name), lo, hi};
    }
    out.push_back(std::move(ci));
  }
  if (meta) {
    meta->iterations = cfg.iterations;
    meta->confidence = cfg.confidence;
    meta->seed = cfg.seed;
    meta->method = cfg.method;
    meta->redraws = samples.redraws;
  }
  return out;
}

}  // namespace cfaudit
