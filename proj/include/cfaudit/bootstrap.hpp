#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cfaudit/metrics.hpp"

namespace cfaudit {

struct BootstrapConfig {
  int iterations = 1000;
  double confidence = 0.95;
  std::uint64_t seed = 0;
  std::string method = "percentile";
  int threads = 0;  // 0 = hardware concurrency

  void validate() const {
    if (iterations < 1) throw ConfigError("bootstrap iterations must be >= 1");
    if (!(confidence > 0.0 && confidence < 1.0))
      throw ConfigError("confidence must be in (0, 1)");
    if (method != "percentile")
      throw ConfigError("unsupported bootstrap method: " + method);
  }
};

struct CiValue {
  double point = 0, lower = 0, upper = 0;
};

struct BootstrapMeta {
  int iterations = 0;
  double confidence = 0.95;
  std::uint64_t seed = 0;
  std::string method = "percentile";
  std::uint64_t redraws = 0;  // resamples redrawn due to undefined statistics
};

// Paired bootstrap over one condition for a single named statistic.
// The resampling unit is the whole pair; a resample on which the statistic
// is undefined (e.g. an empty direction) is redrawn and counted.
CiValue bootstrap_ci(const PredictionSet& set, Condition condition,
                     const std::string& statistic, const BootstrapConfig& cfg,
                     BootstrapMeta* meta = nullptr);

// Full audit bootstrap: one resample per iteration drives every metric in
// every condition (pairs move together across conditions), so cross-condition
// comparability survives resampling.
struct ConditionIntervals {
  Condition condition = Condition::full;
  std::map<std::string, CiValue> metrics;  // keyed by metric_names()
};

std::vector<ConditionIntervals> bootstrap_audit(const PredictionSet& set,
                                                const BootstrapConfig& cfg,
                                                BootstrapMeta* meta = nullptr);

// Percentile interval with linear interpolation between order statistics.
std::pair<double, double> percentile_interval(std::vector<double> samples,
                                              double confidence);

}  // namespace cfaudit
