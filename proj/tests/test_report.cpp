#include <doctest.h>

#include <cmath>

#include "cfaudit/config.hpp"
#include "cfaudit/report.hpp"
#include "cfaudit/synthetic.hpp"

using namespace cfaudit;

TEST_CASE("impact projection: published arithmetic, exact") {
  const auto france = project_impact({20.9e6, 0.50, 0.021});
  CHECK(france.raw == doctest::Approx(219450.0).epsilon(1e-12));
  CHECK(france.rounded == doctest::Approx(220000.0));

  const auto us = project_impact({155.4e6, 0.50, 0.021});
  CHECK(us.raw == doctest::Approx(1631700.0).epsilon(1e-12));
  CHECK(us.rounded == doctest::Approx(1600000.0));

  CHECK(project_impact({0.0, 0.5, 0.021}).raw == 0.0);
  CHECK(project_impact({1e6, 0.0, 0.021}).rounded == 0.0);
  CHECK_THROWS_AS(project_impact({1e6, 1.5, 0.021}), ConfigError);
}

TEST_CASE("round_sig") {
  CHECK(round_sig(219450, 2) == doctest::Approx(220000));
  CHECK(round_sig(1631700, 2) == doctest::Approx(1600000));
  CHECK(round_sig(0.0, 2) == 0.0);
  CHECK(round_sig(0.0216, 2) == doctest::Approx(0.022));
  CHECK(round_sig(99.4, 2) == doctest::Approx(99.0));
}

namespace {

AuditReport synthetic_report(std::uint64_t seed,
                             std::vector<Condition> conditions = {Condition::full}) {
  SynthConfig cfg;
  cfg.n_pairs = 400;
  cfg.scale = LabelScale{2, 5};
  cfg.base_dist = {0.25, 0.25, 0.25, 0.25};
  cfg.delta = 0.05;
  cfg.epsilon = 0.05;
  cfg.seed = seed;
  cfg.conditions = std::move(conditions);
  const auto out = generate(cfg);
  BootstrapConfig bcfg;
  bcfg.iterations = 120;
  bcfg.seed = seed + 1;
  return run_audit(out.preds, bcfg, "bordeaux", 1);
}

}  // namespace

TEST_CASE("report round trip and single source of truth across formats") {
  const auto report = synthetic_report(5, {Condition::full, Condition::text_iso,
                                           Condition::tab_iso});
  CHECK(report.conditions.size() == 3);
  const auto j = report_to_json(report);
  const auto back = report_from_json(j);
  CHECK(report_to_json(back) == j);
  // markdown rendered from the stored json equals markdown from the source
  CHECK(report_to_markdown(back) == report_to_markdown(report));
}

TEST_CASE("markdown layout follows the published row order") {
  const auto report = synthetic_report(6, {Condition::full, Condition::text_iso,
                                           Condition::tab_iso});
  const auto md = report_to_markdown(report);
  const std::vector<std::string> expected_order{
      "| Metric | Full | Text-Iso | Tab-Iso |",
      "Pairwise Disagreement Rate (PDR)",
      "*Directional Probabilities*",
      "More severe when M→F",
      "Less severe when M→F",
      "More severe when F→M",
      "Less severe when F→M",
      "*Net Effects*",
      "Directional Triage Skew for F→M",
      "Directional Triage Skew for M→F",
      "Downward Net Asymmetric Triage Shift",
      "Upward Net Asymmetric Triage Shift",
      "Net Mean Disadvantage for Females (NMDF)"};
  std::size_t pos = 0;
  for (const auto& needle : expected_order) {
    const auto at = md.find(needle, pos);
    REQUIRE_MESSAGE(at != std::string::npos, "missing or misordered: ", needle);
    pos = at;
  }
  // one column per condition: bracketed CI appears 3x in the PDR row
  const auto pdr_row_start = md.find("Pairwise");
  const auto pdr_row_end = md.find('\n', pdr_row_start);
  const auto row = md.substr(pdr_row_start, pdr_row_end - pdr_row_start);
  std::size_t brackets = 0;
  for (char ch : row) brackets += ch == '[';
  CHECK(brackets == 3);
  CHECK(row.find('%') != std::string::npos);
}

TEST_CASE("plot data covers every metric and condition") {
  const auto report = synthetic_report(7);
  const auto plot = report_plot_data(report);
  CHECK(plot.at("metrics").size() == 10);
  for (const auto& [name, series] : plot.at("metrics").items()) {
    CHECK(series.size() == 1);
    CHECK(series.at(0).contains("point"));
    CHECK(series.at(0).contains("lower"));
    CHECK(series.at(0).contains("upper"));
  }
}

TEST_CASE("overlap status") {
  const CiValue a{1.01, 0.74, 1.32};
  SUBCASE("identical intervals overlap") {
    CHECK(overlap_status(a, a) == "overlapping");
  }
  SUBCASE("touching intervals are borderline") {
    const CiValue b{0.37, 0.00, 0.74};
    CHECK(overlap_status(a, b) == "borderline");
  }
  SUBCASE("clearly separated intervals are disjoint") {
    const CiValue b{0.3, 0.0, 0.6};
    CHECK(overlap_status(a, b) == "disjoint");
  }
  SUBCASE("partial overlap") {
    const CiValue b{0.9, 0.6, 1.0};
    CHECK(overlap_status(a, b) == "overlapping");
  }
}

TEST_CASE("compare_predictors") {
  const auto r1 = synthetic_report(8);
  SUBCASE("identical reports: zero deltas, overlapping everywhere") {
    const auto rows = compare_predictors(r1, r1);
    CHECK(rows.size() == 5);  // NATS(2) + DTS(2) + NMDF per condition
    for (const auto& row : rows) {
      CHECK(row.delta == 0.0);
      CHECK(row.overlap == "overlapping");
    }
  }
  SUBCASE("published fine-tuned vs from-scratch NATS values") {
    auto a = r1, b = r1;
    a.conditions[0].metrics["nats_minus"] = CiValue{-0.0112, -0.0143, -0.0081};
    b.conditions[0].metrics["nats_minus"] = CiValue{-0.0100, -0.0147, -0.0050};
    a.conditions[0].metrics["nats_plus"] = CiValue{0.0101, 0.0074, 0.0132};
    b.conditions[0].metrics["nats_plus"] = CiValue{0.0037, 0.0000, 0.0074};
    const auto rows = compare_predictors(a, b);
    for (const auto& row : rows) {
      if (row.metric == "nats_minus") {
        CHECK(row.delta == doctest::Approx(-0.0012));  // ~0.12 pp
        CHECK(row.overlap == "overlapping");
      }
      if (row.metric == "nats_plus") {
        CHECK(row.overlap == "borderline");  // lower bound touches 0.0074
      }
    }
  }
  SUBCASE("different index sets are an error") {
    auto b = synthetic_report(9);
    b.index_digest = "other";
    CHECK_THROWS_AS(compare_predictors(r1, b), DataError);
  }
}

TEST_CASE("strata rendering: column order and em-dash suppression") {
  StratumTable full_row;
  full_row.label = 3;
  full_row.a = 20;
  full_row.b = 80;
  full_row.c = 10;
  full_row.d = 90;
  full_row.oratio = odds_ratio(20, 80, 10, 90);
  full_row.p_value = chi_square_p(20, 80, 10, 90);
  StratumTable dash_row;
  dash_row.label = 2;
  dash_row.b = 100;
  dash_row.d = 100;
  const auto md = strata_to_markdown({dash_row, full_row});
  CHECK(md.find("| Triage Score | cf>orig (M) | cf<orig (M) | cf>orig (F) | "
                "cf<orig (F) | Δ M-F cf> | Δ M-F cf< |") !=
        std::string::npos);
  CHECK(md.find("OR (M/F) | IC95% | p-val") != std::string::npos);
  CHECK(md.find("—") != std::string::npos);  // suppressed row renders dashes
  const auto j = strata_to_json({dash_row, full_row});
  CHECK(j.at("strata").at(0).at("odds_ratio").is_null());
  CHECK(j.at("strata").at(1).at("odds_ratio").at("value").get<double>() ==
        doctest::Approx(2.25));
}

TEST_CASE("toml-mini parses the config subset") {
  const auto t = parse_toml(
      "# comment\n"
      "kind = \"table\"\n"
      "n = 42\n"
      "flag = true\n"
      "arr = [1, 2, 3]\n"
      "names = [\"a\", \"b\"]\n"
      "[table]\n"
      "path = \"x.jsonl\"  # trailing\n");
  CHECK(t.at("kind").as_string() == "table");
  CHECK(t.at("n").as_number() == 42);
  CHECK(t.at("flag").as_bool());
  CHECK(t.at("arr").as_number_array() == std::vector<double>{1, 2, 3});
  CHECK(t.at("names").as_string_array() == std::vector<std::string>{"a", "b"});
  CHECK(t.at("table.path").as_string() == "x.jsonl");
  CHECK_THROWS_AS(parse_toml("oops\n"), ConfigError);
  CHECK_THROWS_AS(parse_toml("x = [1, \"a\"]\n"), ConfigError);
}

TEST_CASE("profiles pin the published setups") {
  const auto& bordeaux = get_profile("bordeaux");
  CHECK(bordeaux.scale.min == 2);
  CHECK(bordeaux.scale.max == 5);
  CHECK(bordeaux.language == Language::fr);
  CHECK(bordeaux.excluded_labels == std::set<int>{1});
  CHECK(bordeaux.percent_decimals == 1);
  const auto& mimic = get_profile("mimic");
  CHECK(mimic.scale.min == 1);
  CHECK(mimic.scale.max == 4);
  CHECK(mimic.language == Language::en);
  CHECK(mimic.excluded_labels == std::set<int>{5});
  CHECK(mimic.percent_decimals == 2);
  CHECK_THROWS_AS(get_profile("nope"), ConfigError);
}

TEST_CASE("binding config loads each kind") {
  const auto table = load_binding_config(
      parse_toml("kind = \"table\"\n[table]\npath = \"t.jsonl\"\n"),
      get_profile("bordeaux"));
  CHECK(table.kind == BindingKind::table);
  CHECK(table.scale.min == 2);
  CHECK(table.table_path == "t.jsonl");

  const auto remote = load_binding_config(
      parse_toml("kind = \"remote\"\n[remote]\nendpoint = \"http://h:1/v1\"\n"
                 "model = \"m\"\nmax_concurrent = 8\n"),
      get_profile("mimic"));
  CHECK(remote.kind == BindingKind::remote);
  CHECK(remote.service.endpoint == "http://h:1/v1");
  CHECK(remote.service.max_concurrent == 8);
  CHECK(remote.prompt_language == Language::en);

  CHECK_THROWS_AS(load_binding_config(parse_toml("kind = \"nope\"\n"),
                                      default_profile()),
                  ConfigError);
  CHECK_THROWS_AS(load_binding_config(parse_toml(""), default_profile()),
                  ConfigError);
}
