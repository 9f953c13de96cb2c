#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfaudit/types.hpp"

namespace cfaudit {

inline constexpr const char* kSchemaVersion = "v1";

bool is_valid_utf8(const std::string& s);

nlohmann::json record_to_json(const DecisionRecord& r);
DecisionRecord record_from_json(const nlohmann::json& j);

nlohmann::json pair_to_json(const CounterfactualPair& p);
CounterfactualPair pair_from_json(const nlohmann::json& j);

// Predictions persist as {pair_id, condition, role, label} lines.
struct PredLine {
  std::string pair_id;
  Condition condition = Condition::full;
  std::string role;  // "original" | "counterfactual"
  int label = 0;
};

nlohmann::json pred_to_json(const PredLine& p);
PredLine pred_from_json(const nlohmann::json& j);

// Throws DataError on malformed lines.
std::vector<DecisionRecord> read_records(const std::string& path);
std::vector<CounterfactualPair> read_pairs(const std::string& path);
std::vector<PredLine> read_preds(const std::string& path);

void write_records(const std::string& path, const std::vector<DecisionRecord>& rs);
void write_pairs(const std::string& path, const std::vector<CounterfactualPair>& ps);
void write_preds(const std::string& path, const std::vector<PredLine>& ps);

// Streaming line reader; hands each nonempty line to the callback together
// with its 1-based line number.
void for_each_line(std::istream& in,
                   const std::function<void(std::size_t, const std::string&)>& fn);

}  // namespace cfaudit
