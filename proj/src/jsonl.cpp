#include "cfaudit/jsonl.hpp"

#include <fstream>
#include <istream>

namespace cfaudit {

using nlohmann::json;

bool is_valid_utf8(const std::string& s) {
  std::size_t i = 0;
  const auto n = s.size();
  while (i < n) {
    const auto b = static_cast<unsigned char>(s[i]);
    std::size_t len;
    if (b < 0x80) {
      len = 1;
    } else if ((b & 0xE0) == 0xC0) {
      len = 2;
      if (b < 0xC2) return false;  // overlong
    } else if ((b & 0xF0) == 0xE0) {
      len = 3;
    } else if ((b & 0xF8) == 0xF0) {
      len = 4;
      if (b > 0xF4) return false;
    } else {
      return false;
    }
    if (i + len > n) return false;
    for (std::size_t k = 1; k < len; ++k)
      if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return false;
    i += len;
  }
  return true;
}

namespace {

void require_schema(const json& j) {
  if (!j.contains("schema") || j.at("schema") != kSchemaVersion)
    throw DataError("missing or unsupported schema version (expected \"v1\")");
}

void check_text(const std::string& field, const std::string& value) {
  if (!is_valid_utf8(value))
    throw DataError("field '" + field + "' is not valid UTF-8");
}

}  // namespace

json record_to_json(const DecisionRecord& r) {
  json j;
  j["schema"] = kSchemaVersion;
  j["id"] = r.id;
  if (r.sex) j["sex"] = to_string(*r.sex);
  if (r.age) j["age"] = *r.age;
  if (r.date) j["date"] = *r.date;
  if (r.cc_class) j["cc_class"] = *r.cc_class;
  if (!r.tabular.empty()) j["tabular"] = r.tabular;
  j["chief_complaint"] = r.chief_complaint;
  j["hpi"] = r.hpi;
  j["pmh"] = r.pmh;
  if (r.label) j["label"] = *r.label;
  if (!r.meta.empty()) j["meta"] = r.meta;
  return j;
}

DecisionRecord record_from_json(const json& j) {
  require_schema(j);
  DecisionRecord r;
  r.id = j.at("id").get<std::string>();
  if (j.contains("sex")) r.sex = sex_from_string(j.at("sex").get<std::string>());
  if (j.contains("age")) r.age = j.at("age").get<double>();
  if (j.contains("date")) r.date = j.at("date").get<std::string>();
  if (j.contains("cc_class")) r.cc_class = j.at("cc_class").get<std::string>();
  if (j.contains("tabular"))
    r.tabular = j.at("tabular").get<std::map<std::string, double>>();
  if (j.contains("chief_complaint"))
    r.chief_complaint = j.at("chief_complaint").get<std::string>();
  if (j.contains("hpi")) r.hpi = j.at("hpi").get<std::string>();
  if (j.contains("pmh")) r.pmh = j.at("pmh").get<std::string>();
  if (j.contains("label")) r.label = j.at("label").get<int>();
  if (j.contains("meta"))
    r.meta = j.at("meta").get<std::map<std::string, std::string>>();
  check_text("chief_complaint", r.chief_complaint);
  check_text("hpi", r.hpi);
  check_text("pmh", r.pmh);
  return r;
}

json pair_to_json(const CounterfactualPair& p) {
  json j;
  j["schema"] = kSchemaVersion;
  j["pair_id"] = p.pair_id;
  j["direction"] = to_string(p.direction);
  j["condition"] = to_string(p.condition);
  j["cf_quality"] = to_string(p.cf_quality);
  j["original"] = record_to_json(p.original);
  j["counterfactual"] = record_to_json(p.counterfactual);
  return j;
}

CounterfactualPair pair_from_json(const json& j) {
  require_schema(j);
  CounterfactualPair p;
  p.pair_id = j.at("pair_id").get<std::string>();
  p.direction = direction_from_string(j.at("direction").get<std::string>());
  p.condition = condition_from_string(j.at("condition").get<std::string>());
  p.cf_quality = cf_quality_from_string(j.at("cf_quality").get<std::string>());
  p.original = record_from_json(j.at("original"));
  p.counterfactual = record_from_json(j.at("counterfactual"));
  return p;
}

json pred_to_json(const PredLine& p) {
  json j;
  j["schema"] = kSchemaVersion;
  j["pair_id"] = p.pair_id;
  j["condition"] = to_string(p.condition);
  j["role"] = p.role;
  j["label"] = p.label;
  return j;
}

PredLine pred_from_json(const json& j) {
  require_schema(j);
  PredLine p;
  p.pair_id = j.at("pair_id").get<std::string>();
  p.condition = condition_from_string(j.at("condition").get<std::string>());
  p.role = j.at("role").get<std::string>();
  if (p.role != "original" && p.role != "counterfactual")
    throw DataError("unknown prediction role: " + p.role);
  p.label = j.at("label").get<int>();
  return p;
}

void for_each_line(std::istream& in,
                   const std::function<void(std::size_t, const std::string&)>& fn) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    fn(lineno, line);
  }
}

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  return out;
}

template <typename T, typename Parse>
std::vector<T> read_jsonl(const std::string& path, Parse parse) {
  auto in = open_input(path);
  std::vector<T> out;
  for_each_line(in, [&](std::size_t lineno, const std::string& line) {
    json j;
    try {
      j = json::parse(line);
      out.push_back(parse(j));
    } catch (const json::exception& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  });
  return out;
}

}  // namespace

std::vector<DecisionRecord> read_records(const std::string& path) {
  return read_jsonl<DecisionRecord>(path, record_from_json);
}

std::vector<CounterfactualPair> read_pairs(const std::string& path) {
  return read_jsonl<CounterfactualPair>(path, pair_from_json);
}

std::vector<PredLine> read_preds(const std::string& path) {
  return read_jsonl<PredLine>(path, pred_from_json);
}

void write_records(const std::string& path, const std::vector<DecisionRecord>& rs) {
  auto out = open_output(path);
  for (const auto& r : rs) out << record_to_json(r).dump() << '\n';
}

void write_pairs(const std::string& path, const std::vector<CounterfactualPair>& ps) {
  auto out = open_output(path);
  for (const auto& p : ps) out << pair_to_json(p).dump() << '\n';
}

void write_preds(const std::string& path, const std::vector<PredLine>& ps) {
  auto out = open_output(path);
  for (const auto& p : ps) out << pred_to_json(p).dump() << '\n';
}

}  // namespace cfaudit
