#include "cfaudit/filter.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "cfaudit/jsonl.hpp"
#include "cfaudit/rng.hpp"

namespace cfaudit {

const char* to_string(RejectReason r) {
  switch (r) {
    case RejectReason::parse_error: return "parse_error";
    case RejectReason::pre_date: return "pre_date";
    case RejectReason::missing_field: return "missing_field";
    case RejectReason::underage: return "underage";
    case RejectReason::excluded_label: return "excluded_label";
    case RejectReason::excluded_class: return "excluded_class";
    case RejectReason::lexicon: return "lexicon";
  }
  return "parse_error";
}

const std::vector<std::string>& default_excluded_cc_classes() {
  static const std::vector<std::string> classes{
      "Recent pelvic or genital pain",
      "Female/male urogenital problem without pain",
      "Female/male genital bleeding",
      "Foreign body in the genitourinary tract",
  };
  return classes;
}

namespace {

bool missing_required(const DecisionRecord& r, const FilterConfig& cfg) {
  for (const auto& f : cfg.required_fields) {
    if (f == "sex" && !r.sex) return true;
    if (f == "age" && !r.age) return true;
    if (f == "label" && !r.label) return true;
    if (f == "text" && r.all_text_empty()) return true;
    if (f == "date" && !r.date) return true;
  }
  return false;
}

// nullopt = kept
std::optional<Rejected> apply_rules(const DecisionRecord& r, const FilterConfig& cfg) {
  if (cfg.min_date && r.date && *r.date < *cfg.min_date)
    return Rejected{r, RejectReason::pre_date, {}, {}, 0};
  if (missing_required(r, cfg))
    return Rejected{r, RejectReason::missing_field, {}, {}, 0};
  if (r.age && *r.age < cfg.min_age)
    return Rejected{r, RejectReason::underage, {}, {}, 0};
  if (r.label && cfg.excluded_labels.count(*r.label))
    return Rejected{r, RejectReason::excluded_label, {}, {}, 0};
  const std::string cls = ascii_lower(r.cc_class ? *r.cc_class : r.chief_complaint);
  for (const auto& excluded : cfg.excluded_cc_classes)
    if (!cls.empty() && cls == ascii_lower(excluded))
      return Rejected{r, RejectReason::excluded_class, {}, {}, 0};
  // Lexicon screening covers all three text fields for both languages (the
  // paper scopes fields slightly differently per dataset; we screen all).
  std::vector<std::string> stems;
  for (const std::string* text : {&r.chief_complaint, &r.hpi, &r.pmh}) {
    auto m = matches_lexicon(*text, cfg.lexicon);
    for (auto& s : m.stems)
      if (std::find(stems.begin(), stems.end(), s) == stems.end())
        stems.push_back(std::move(s));
  }
  if (!stems.empty())
    return Rejected{r, RejectReason::lexicon, std::move(stems), {}, 0};
  return std::nullopt;
}

}  // namespace

FilterResult filter_dataset(const std::vector<DecisionRecord>& records,
                            const FilterConfig& cfg) {
  if (cfg.lexicon.empty()) throw ConfigError("filter lexicon is empty");
  FilterResult out;
  for (const auto& r : records) {
    if (auto rej = apply_rules(r, cfg))
      out.rejected.push_back(std::move(*rej));
    else
      out.kept.push_back(r);
  }
  return out;
}

FilterResult filter_jsonl(const std::string& path, const FilterConfig& cfg) {
  if (cfg.lexicon.empty()) throw ConfigError("filter lexicon is empty");
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  FilterResult out;
  for_each_line(in, [&](std::size_t lineno, const std::string& line) {
    DecisionRecord rec;
    try {
      rec = record_from_json(nlohmann::json::parse(line));
    } catch (const std::exception&) {
      Rejected rej;
      rej.reason = RejectReason::parse_error;
      rej.raw_line = line;
      rej.lineno = lineno;
      out.rejected.push_back(std::move(rej));
      return;
    }
    if (auto rej = apply_rules(rec, cfg)) {
      rej->lineno = lineno;
      out.rejected.push_back(std::move(*rej));
    } else {
      out.kept.push_back(std::move(rec));
    }
  });
  return out;
}

SplitResult stratified_split(const std::vector<DecisionRecord>& records,
                             double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw ConfigError("split fraction must be in (0, 1)");
  std::map<int, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!records[i].label)
      throw DataError("stratified_split: record " + records[i].id + " has no label");
    by_label[*records[i].label].push_back(i);
  }
  std::vector<bool> in_train(records.size(), false);
  std::uint64_t stratum = 0;
  for (auto& [label, idx] : by_label) {
    Rng rng(substream_seed(seed, 0x5711ULL, stratum++));
    for (std::size_t i = idx.size(); i > 1; --i)
      std::swap(idx[i - 1], idx[rng.bounded(i)]);
    const auto n_train = static_cast<std::size_t>(
        fraction * static_cast<double>(idx.size()) + 0.5);
    for (std::size_t i = 0; i < n_train; ++i) in_train[idx[i]] = true;
  }
  SplitResult out;
  for (std::size_t i = 0; i < records.size(); ++i)
    (in_train[i] ? out.train : out.test).push_back(records[i]);
  return out;
}

}  // namespace cfaudit
