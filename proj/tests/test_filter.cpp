#include <doctest.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "cfaudit/filter.hpp"
#include "cfaudit/jsonl.hpp"

using namespace cfaudit;

namespace {

DecisionRecord clean_record(const std::string& id, int label = 3,
                            Sex sex = Sex::male) {
  DecisionRecord r;
  r.id = id;
  r.sex = sex;
  r.age = 40;
  r.date = "2018-06-01";
  r.chief_complaint = "douleur du poignet";
  r.hpi = "chute de sa hauteur ce matin";
  r.pmh = "aucun";
  r.label = label;
  return r;
}

FilterConfig bordeaux_cfg() {
  FilterConfig cfg;
  cfg.scale = LabelScale{2, 5};
  cfg.min_date = "2016-01-01";
  cfg.excluded_labels = {1};
  cfg.excluded_cc_classes = default_excluded_cc_classes();
  cfg.lexicon = builtin_lexicon_fr();
  return cfg;
}

}  // namespace

TEST_CASE("matches_lexicon: spec examples") {
  auto m = matches_lexicon("Patiente enceinte de 12 SA", builtin_lexicon_fr());
  CHECK(m.matched);
  CHECK(std::find(m.stems.begin(), m.stems.end(), "enceinte") != m.stems.end());

  CHECK(!matches_lexicon("douleur thoracique", builtin_lexicon_fr()).matched);

  auto en = matches_lexicon("s/p hysterectomy 2015", builtin_lexicon_en());
  CHECK(en.matched);
  CHECK(std::find(en.stems.begin(), en.stems.end(), "hysterectom") != en.stems.end());
}

TEST_CASE("every builtin stem triggers on a one-line fixture") {
  for (const auto* lex : {&builtin_lexicon_fr(), &builtin_lexicon_en()}) {
    for (const auto& stem : lex->all_stems()) {
      const std::string text = "note clinique: " + stem + " mentionné";
      const auto m = matches_lexicon(text, *lex);
      CHECK_MESSAGE(m.matched, "stem not matched: ", stem);
      // case-insensitive: ASCII-uppercased copy still matches
      std::string upper = text;
      for (auto& c : upper)
        if (static_cast<unsigned char>(c) < 0x80)
          c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      CHECK_MESSAGE(matches_lexicon(upper, *lex).matched,
                    "stem not matched case-insensitively: ", stem);
    }
  }
}

TEST_CASE("matching is plain substring, stems over-match by design") {
  CHECK(matches_lexicon("utérus rétroversé", builtin_lexicon_fr()).matched);
  CHECK(matches_lexicon("uterine fibroid", builtin_lexicon_en()).matched);
  // "uter" hits inside larger words too
  CHECK(matches_lexicon("computeruse", builtin_lexicon_en()).matched);
}

TEST_CASE("filter cascade: reason codes in rule order") {
  auto cfg = bordeaux_cfg();
  std::vector<DecisionRecord> records;

  auto pre_date = clean_record("pre");
  pre_date.date = "2015-12-31";
  records.push_back(pre_date);

  auto missing = clean_record("missing");
  missing.sex.reset();
  records.push_back(missing);

  auto young = clean_record("young");
  young.age = 17;
  records.push_back(young);

  auto excluded_label = clean_record("lvl1", 1);
  records.push_back(excluded_label);

  auto excluded_class = clean_record("class");
  excluded_class.cc_class = "Recent pelvic or genital pain";
  records.push_back(excluded_class);

  auto lexicon_hit = clean_record("lex");
  lexicon_hit.pmh = "suivi pour prostatite";  // contains "prostat"
  records.push_back(lexicon_hit);

  records.push_back(clean_record("ok"));

  const auto result = filter_dataset(records, cfg);
  REQUIRE(result.kept.size() == 1);
  CHECK(result.kept[0].id == "ok");
  REQUIRE(result.rejected.size() == 6);
  std::map<std::string, RejectReason> by_id;
  for (const auto& r : result.rejected) by_id[r.record.id] = r.reason;
  CHECK(by_id.at("pre") == RejectReason::pre_date);
  CHECK(by_id.at("missing") == RejectReason::missing_field);
  CHECK(by_id.at("young") == RejectReason::underage);
  CHECK(by_id.at("lvl1") == RejectReason::excluded_label);
  CHECK(by_id.at("class") == RejectReason::excluded_class);
  CHECK(by_id.at("lex") == RejectReason::lexicon);
}

TEST_CASE("first matching rule wins") {
  auto cfg = bordeaux_cfg();
  // Record violating both the age and lexicon rules: age wins (earlier rule).
  auto r = clean_record("both");
  r.age = 16;
  r.hpi = "grossesse en cours";
  const auto result = filter_dataset({r}, cfg);
  REQUIRE(result.rejected.size() == 1);
  CHECK(result.rejected[0].reason == RejectReason::underage);
}

TEST_CASE("all-empty text is a missing required field") {
  auto cfg = bordeaux_cfg();
  auto r = clean_record("empty");
  r.chief_complaint.clear();
  r.hpi.clear();
  r.pmh.clear();
  const auto result = filter_dataset({r}, cfg);
  REQUIRE(result.rejected.size() == 1);
  CHECK(result.rejected[0].reason == RejectReason::missing_field);
}

TEST_CASE("filtering is idempotent and partitions the input") {
  auto cfg = bordeaux_cfg();
  std::vector<DecisionRecord> records;
  for (int i = 0; i < 40; ++i) {
    auto r = clean_record("r" + std::to_string(i), 2 + i % 4);
    if (i % 5 == 0) r.pmh = "antécédent de césarienne";  // lexicon (cesarienne)
    if (i % 7 == 0) r.age = 15;
    records.push_back(r);
  }
  const auto once = filter_dataset(records, cfg);
  CHECK(once.kept.size() + once.rejected.size() == records.size());
  const auto twice = filter_dataset(once.kept, cfg);
  CHECK(twice.rejected.empty());
  CHECK(twice.kept.size() == once.kept.size());

  // kept U rejected is a permutation of the input
  std::multiset<std::string> in_ids, out_ids;
  for (const auto& r : records) in_ids.insert(r.id);
  for (const auto& r : once.kept) out_ids.insert(r.id);
  for (const auto& r : once.rejected) out_ids.insert(r.record.id);
  CHECK(in_ids == out_ids);
}

TEST_CASE("malformed lines become parse_error rejections, stream continues") {
  const std::string path = "/tmp/cfaudit_test_malformed.jsonl";
  {
    std::ofstream out(path);
    out << record_to_json(clean_record("a")).dump() << "\n";
    out << "{not json}\n";
    out << record_to_json(clean_record("b")).dump() << "\n";
  }
  const auto result = filter_jsonl(path, bordeaux_cfg());
  CHECK(result.kept.size() == 2);
  REQUIRE(result.rejected.size() == 1);
  CHECK(result.rejected[0].reason == RejectReason::parse_error);
  CHECK(result.rejected[0].lineno == 2);
}

TEST_CASE("stratified_split: exact divisibility") {
  std::vector<DecisionRecord> records;
  for (int i = 0; i < 50; ++i) records.push_back(clean_record("a" + std::to_string(i), 3));
  for (int i = 0; i < 50; ++i) records.push_back(clean_record("b" + std::to_string(i), 4));
  const auto split = stratified_split(records, 0.5, 7);
  CHECK(split.train.size() == 50);
  CHECK(split.test.size() == 50);
  auto count_label = [](const std::vector<DecisionRecord>& v, int label) {
    return std::count_if(v.begin(), v.end(),
                         [&](const auto& r) { return r.label == label; });
  };
  CHECK(count_label(split.train, 3) == 25);
  CHECK(count_label(split.train, 4) == 25);
}

TEST_CASE("stratified_split: deterministic for a given seed") {
  std::vector<DecisionRecord> records;
  for (int i = 0; i < 101; ++i)
    records.push_back(clean_record("r" + std::to_string(i), 2 + i % 3));
  const auto a = stratified_split(records, 0.5, 99);
  const auto b = stratified_split(records, 0.5, 99);
  REQUIRE(a.train.size() == b.train.size());
  for (std::size_t i = 0; i < a.train.size(); ++i)
    CHECK(a.train[i].id == b.train[i].id);
  const auto c = stratified_split(records, 0.5, 100);
  bool all_same = a.train.size() == c.train.size();
  if (all_same)
    for (std::size_t i = 0; i < a.train.size(); ++i)
      all_same = all_same && a.train[i].id == c.train[i].id;
  CHECK(!all_same);
}

TEST_CASE("stratified_split: 101 records stay within +/-1 per label") {
  // Brute-force oracle: per label, train count must be within 1 of
  // fraction * label total, and totals must partition the input.
  std::vector<DecisionRecord> records;
  std::map<int, int> label_totals;
  for (int i = 0; i < 101; ++i) {
    const int label = 2 + i % 3;  // 34 / 34 / 33
    records.push_back(clean_record("r" + std::to_string(i), label));
    ++label_totals[label];
  }
  const double fraction = 0.5;
  const auto split = stratified_split(records, fraction, 3);
  CHECK(split.train.size() + split.test.size() == records.size());
  CHECK((split.train.size() == 50 || split.train.size() == 51));
  std::map<int, int> train_counts;
  for (const auto& r : split.train) ++train_counts[*r.label];
  for (const auto& [label, total] : label_totals) {
    const double target = fraction * total;
    CHECK(std::abs(train_counts[label] - target) <= 1.0);
  }
  // disjoint
  std::set<std::string> train_ids;
  for (const auto& r : split.train) train_ids.insert(r.id);
  for (const auto& r : split.test) CHECK(!train_ids.count(r.id));
}

TEST_CASE("stratified_split: unlabeled record is an error") {
  auto r = clean_record("x");
  r.label.reset();
  CHECK_THROWS_AS(stratified_split({r}, 0.5, 1), DataError);
}
