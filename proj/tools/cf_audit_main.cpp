// cf-audit: batch CLI for the counterfactual triage bias audit pipeline.
//
// Subcommands: filter, pairs, predict, audit, stratify, synth, project,
// compare, report. Exit codes: 0 ok, 2 config error, 3 data error,
// 4 service error, 1 internal.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cfaudit/config.hpp"
#include "cfaudit/generator.hpp"
#include "cfaudit/jsonl.hpp"
#include "cfaudit/manifest.hpp"
#include "cfaudit/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cfaudit;

namespace {

struct GlobalOpts {
  std::uint64_t seed = 0;
  std::string profile;  // "" = custom defaults
  std::string out_dir = ".";
};

Profile resolve_profile(const GlobalOpts& g) {
  return g.profile.empty() ? default_profile() : get_profile(g.profile);
}

void ensure_out_dir(const GlobalOpts& g) {
  if (!g.out_dir.empty()) fs::create_directories(g.out_dir);
}

std::string out_path(const GlobalOpts& g, const std::string& name) {
  return (fs::path(g.out_dir) / name).string();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << text;
}

void write_json(const std::string& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

// Writes a batch of report files; a failure removes the ones already
// written so no half-emitted report survives.
void write_all_or_none(
    const std::vector<std::pair<std::string, std::string>>& files) {
  std::vector<std::string> written;
  try {
    for (const auto& [path, text] : files) {
      write_text(path, text);
      written.push_back(path);
    }
  } catch (...) {
    for (const auto& path : written) {
      std::error_code ec;
      fs::remove(path, ec);
    }
    throw;
  }
}

AuditRunManifest stage_manifest(const GlobalOpts& g, const std::string& command,
                                const std::string& config_path,
                                const std::vector<std::string>& inputs) {
  std::map<std::string, std::string> digests;
  for (const auto& path : inputs) digests[path] = sha256_file(path);
  const std::string config_hash =
      config_path.empty() ? "" : sha256_file(config_path);
  return make_manifest(command, config_hash, digests, g.seed);
}

void finish_and_write(AuditRunManifest& m, const GlobalOpts& g,
                      const std::string& command) {
  finish_manifest(m);
  ensure_out_dir(g);
  write_manifest(m, out_path(g, command + ".manifest.json"));
}

// ---------------------------------------------------------------- filter

struct FilterArgs {
  std::string input, config, kept = "kept.jsonl", rejected = "rejected.jsonl";
  double split = 0.0;
  std::string train, test;
};

int run_filter(const GlobalOpts& g, const FilterArgs& args) {
  const Profile profile = resolve_profile(g);
  FilterConfig cfg = args.config.empty()
                         ? load_filter_config(TomlTable{}, profile)
                         : load_filter_config(parse_toml_file(args.config), profile);
  auto manifest = stage_manifest(g, "filter", args.config, {args.input});

  const auto result = filter_jsonl(args.input, cfg);
  write_records(args.kept, result.kept);
  {
    std::ofstream out(args.rejected);
    if (!out) throw DataError("cannot write " + args.rejected);
    for (const auto& rej : result.rejected) {
      json line;
      line["schema"] = kSchemaVersion;
      line["reason"] = to_string(rej.reason);
      if (rej.reason == RejectReason::parse_error) {
        line["lineno"] = rej.lineno;
        line["line"] = rej.raw_line;
      } else {
        if (!rej.matched_stems.empty()) line["matched_stems"] = rej.matched_stems;
        line["record"] = record_to_json(rej.record);
      }
      // raw_line may carry arbitrary bytes; substitute instead of throwing
      out << line.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
    }
  }

  json reasons = json::object();
  for (const auto& rej : result.rejected) {
    const std::string key = to_string(rej.reason);
    reasons[key] = reasons.value(key, 0) + 1;
  }
  json summary{{"kept", result.kept.size()},
               {"rejected", reasons},
               {"total", result.kept.size() + result.rejected.size()}};

  manifest.counts["input"] = result.kept.size() + result.rejected.size();
  manifest.counts["kept"] = result.kept.size();
  manifest.counts["rejected"] = result.rejected.size();

  if (args.split > 0.0) {
    if (args.train.empty() || args.test.empty())
      throw ConfigError("--split requires --train and --test");
    const auto split = stratified_split(result.kept, args.split, g.seed);
    write_records(args.train, split.train);
    write_records(args.test, split.test);
    summary["train"] = split.train.size();
    summary["test"] = split.test.size();
    manifest.counts["train"] = split.train.size();
    manifest.counts["test"] = split.test.size();
  }
  finish_and_write(manifest, g, "filter");
  std::cout << summary.dump(2) << std::endl;
  return kExitOk;
}

// ---------------------------------------------------------------- pairs

struct PairsArgs {
  std::string input, out = "pairs.jsonl", log, checkpoint;
  std::string template_lang;  // fr|en, default from profile
  std::string endpoint, model = "default";
  int concurrency = 4, retries = 2, n_exemplars = 10;
  double timeout_s = 60.0, temperature = 0.0;
  bool no_validate = false;
  bool log_bodies = false;
};

int run_pairs(const GlobalOpts& g, const PairsArgs& args) {
  const Profile profile = resolve_profile(g);
  const Language lang = args.template_lang.empty()
                            ? profile.language
                            : language_from_string(args.template_lang);
  PromptTemplate tmpl = builtin_cf_template(lang);
  if (args.n_exemplars < 0 ||
      static_cast<std::size_t>(args.n_exemplars) > tmpl.exemplars.size())
    throw ConfigError("--n-exemplars out of range");
  tmpl.exemplars.resize(static_cast<std::size_t>(args.n_exemplars));

  GenServiceConfig service;
  if (args.endpoint.empty()) throw ConfigError("--endpoint is required");
  service.endpoint = args.endpoint;
  service.model = args.model;
  service.max_concurrent = args.concurrency;
  service.timeout_s = args.timeout_s;
  service.retries = args.retries;
  service.temperature = args.temperature;
  service.log_bodies = args.log_bodies;

  GenerateOptions options;
  options.validate = !args.no_validate;
  options.checkpoint_path =
      args.checkpoint.empty() ? args.out + ".partial" : args.checkpoint;

  auto manifest = stage_manifest(g, "pairs", "", {args.input});
  const auto records = read_records(args.input);
  const auto result = generate_pairs(records, tmpl, service, options);
  write_pairs(args.out, result.pairs);
  std::error_code ec;
  fs::remove(options.checkpoint_path, ec);  // complete; checkpoint obsolete

  const std::string log_path = args.log.empty() ? args.out + ".log.jsonl" : args.log;
  {
    std::ofstream out(log_path);
    for (const auto& entry : result.log) {
      json line{{"schema", kSchemaVersion},
                {"pair_id", entry.pair_id},
                {"quality", to_string(entry.quality)},
                {"overlap", entry.overlap}};
      if (!entry.detail.empty()) line["detail"] = entry.detail;
      out << line.dump() << '\n';
    }
  }
  manifest.counts["records"] = records.size();
  manifest.counts["pairs"] = result.pairs.size();
  finish_and_write(manifest, g, "pairs");
  json summary{{"pairs", result.pairs.size()},
               {"quality_histogram", result.quality_histogram}};
  std::cout << summary.dump(2) << std::endl;
  return kExitOk;
}

// ---------------------------------------------------------------- predict

struct PredictArgs {
  std::string pairs, binding, out = "preds.jsonl";
  std::string conditions = "full";
};

std::vector<Condition> parse_conditions(const std::string& csv) {
  std::vector<Condition> out;
  std::string cur;
  for (char c : csv + ",") {
    if (c == ',') {
      if (!cur.empty()) out.push_back(condition_from_string(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (out.empty()) throw ConfigError("no conditions given");
  return out;
}

int run_predict(const GlobalOpts& g, const PredictArgs& args) {
  const Profile profile = resolve_profile(g);
  const auto binding =
      load_binding_config(parse_toml_file(args.binding), profile);
  auto manifest = stage_manifest(g, "predict", args.binding, {args.pairs});
  const auto pairs = read_pairs(args.pairs);
  const auto conditions = parse_conditions(args.conditions);
  auto predictor = make_predictor(binding);
  const auto result = predict_paired(pairs, conditions, *predictor);

  std::vector<PredLine> lines;
  for (const auto& [cond, cp] : result.set.preds) {
    for (std::size_t i = 0; i < result.set.size(); ++i) {
      lines.push_back({result.set.index_set.ids[i], cond, "original", cp.y_orig[i]});
      lines.push_back({result.set.index_set.ids[i], cond, "counterfactual", cp.y_cf[i]});
    }
  }
  write_preds(args.out, lines);
  {
    std::ofstream out(args.out + ".dropped.jsonl");
    for (const auto& d : result.dropped) {
      json line{{"schema", kSchemaVersion},
                {"pair_id", d.pair_id},
                {"condition", to_string(d.condition)},
                {"reason", d.reason}};
      out << line.dump() << '\n';
    }
  }
  manifest.counts["pairs_in"] = pairs.size();
  manifest.counts["pairs_scored"] = result.set.size();
  manifest.counts["pairs_dropped"] = result.dropped.size();
  finish_and_write(manifest, g, "predict");
  json summary{{"pairs_scored", result.set.size()},
               {"pairs_dropped", result.dropped.size()},
               {"predictions", lines.size()}};
  std::cout << summary.dump(2) << std::endl;
  return kExitOk;
}

// ---------------------------------------------------------------- audit

struct AuditArgs {
  std::string preds, pairs;
  int iterations = 1000;
  double confidence = 0.95;
  int threads = 0;
};

int run_audit_cmd(const GlobalOpts& g, const AuditArgs& args) {
  const Profile profile = resolve_profile(g);
  auto manifest = stage_manifest(g, "audit", "", {args.preds, args.pairs});
  const auto preds = read_preds(args.preds);
  const auto pairs = read_pairs(args.pairs);
  const auto set = assemble_prediction_set(preds, pairs, profile.scale);

  BootstrapConfig cfg;
  cfg.iterations = args.iterations;
  cfg.confidence = args.confidence;
  cfg.seed = g.seed;
  cfg.threads = args.threads;

  auto report = run_audit(set, cfg,
                          g.profile.empty() ? "custom" : g.profile,
                          profile.percent_decimals);
  report.manifest_run_id = manifest.run_id;
  manifest.counts["pairs"] = set.size();

  ensure_out_dir(g);
  write_all_or_none({
      {out_path(g, "report.json"), report_to_json(report).dump(2) + "\n"},
      {out_path(g, "report.md"), report_to_markdown(report)},
      {out_path(g, "plot.json"), report_plot_data(report).dump(2) + "\n"},
  });
  finish_and_write(manifest, g, "audit");
  std::cout << json{{"report", out_path(g, "report.json")},
                    {"n_pairs", set.size()},
                    {"redraws", report.bootstrap.redraws}}
                   .dump(2)
            << std::endl;
  return kExitOk;
}

// ---------------------------------------------------------------- stratify

struct StratifyArgs {
  std::string preds, labels, condition = "full";
};

int run_stratify(const GlobalOpts& g, const StratifyArgs& args) {
  const Profile profile = resolve_profile(g);
  auto manifest = stage_manifest(g, "stratify", "", {args.preds, args.labels});
  const auto preds = read_preds(args.preds);
  const auto records = read_records(args.labels);
  const auto set = assemble_prediction_set(preds, records, profile.scale);
  const auto strata = stratify(set, condition_from_string(args.condition));

  ensure_out_dir(g);
  write_all_or_none({
      {out_path(g, "strata.json"), strata_to_json(strata).dump(2) + "\n"},
      {out_path(g, "strata.md"), strata_to_markdown(strata)},
  });
  manifest.counts["pairs"] = set.size();
  manifest.counts["strata"] = strata.size();
  finish_and_write(manifest, g, "stratify");
  std::cout << strata_to_markdown(strata) << std::endl;
  return kExitOk;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string config;
  std::string out_pairs = "pairs.jsonl", out_preds = "preds.jsonl",
              truth = "truth.json";
};

int run_synth(const GlobalOpts& g, const SynthArgs& args, bool seed_given) {
  SynthConfig cfg = args.config.empty() ? SynthConfig{}
                                        : load_synth_config(parse_toml_file(args.config));
  if (args.config.empty()) {
    cfg.base_dist.assign(static_cast<std::size_t>(cfg.scale.size()),
                         1.0 / cfg.scale.size());
  }
  if (seed_given) cfg.seed = g.seed;
  cfg.validate();
  auto manifest = stage_manifest(g, "synth", args.config, {});
  manifest.seed = cfg.seed;

  const auto out = generate(cfg);
  write_pairs(args.out_pairs, out.pairs);
  std::vector<PredLine> lines;
  for (const auto& [cond, cp] : out.preds.preds) {
    for (std::size_t i = 0; i < out.preds.size(); ++i) {
      lines.push_back({out.preds.index_set.ids[i], cond, "original", cp.y_orig[i]});
      lines.push_back(
          {out.preds.index_set.ids[i], cond, "counterfactual", cp.y_cf[i]});
    }
  }
  write_preds(args.out_preds, lines);

  json truth{{"schema", "v1"},
             {"truth",
              {{"pdr", out.truth.pdr},
               {"p_up_mf", out.truth.p_up_mf},
               {"p_down_mf", out.truth.p_down_mf},
               {"p_up_fm", out.truth.p_up_fm},
               {"p_down_fm", out.truth.p_down_fm},
               {"nats_plus", out.truth.nats_plus},
               {"nats_minus", out.truth.nats_minus},
               {"dts_f_given_m", out.truth.dts_f_given_m},
               {"dts_m_given_f", out.truth.dts_m_given_f},
               {"nmdf", out.truth.nmdf}}},
             {"config",
              {{"n_pairs", cfg.n_pairs},
               {"scale", {{"min", cfg.scale.min}, {"max", cfg.scale.max}}},
               {"base_dist", cfg.base_dist},
               {"delta", cfg.delta},
               {"epsilon", cfg.epsilon},
               {"seed", cfg.seed}}}};
  write_json(args.truth, truth);
  manifest.counts["pairs"] = out.pairs.size();
  finish_and_write(manifest, g, "synth");
  std::cout << json{{"pairs", out.pairs.size()},
                    {"preds", lines.size()},
                    {"truth", args.truth}}
                   .dump(2)
            << std::endl;
  return kExitOk;
}

// ---------------------------------------------------------------- project

int run_project(double visits, double share, double differential) {
  const auto projection = project_impact({visits, share, differential});
  std::cout << json{{"raw", projection.raw}, {"rounded", projection.rounded}}.dump(2)
            << std::endl;
  return kExitOk;
}

// ---------------------------------------------------------------- compare

struct CompareArgs {
  std::string a, b;
};

int run_compare(const GlobalOpts& g, const CompareArgs& args) {
  auto manifest = stage_manifest(g, "compare", "", {args.a, args.b});
  const auto load = [](const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    return report_from_json(json::parse(in));
  };
  const auto rows = compare_predictors(load(args.a), load(args.b));
  ensure_out_dir(g);
  write_all_or_none({
      {out_path(g, "compare.json"), compare_to_json(rows).dump(2) + "\n"},
      {out_path(g, "compare.md"), compare_to_markdown(rows)},
  });
  finish_and_write(manifest, g, "compare");
  std::cout << compare_to_markdown(rows) << std::endl;
  return kExitOk;
}

// ---------------------------------------------------------------- report

struct ReportArgs {
  std::string in, format = "markdown", out;
};

int run_report(const ReportArgs& args) {
  std::ifstream in(args.in);
  if (!in) throw DataError("cannot open " + args.in);
  const auto report = report_from_json(json::parse(in));
  std::string text;
  if (args.format == "markdown" || args.format == "md")
    text = report_to_markdown(report);
  else if (args.format == "json")
    text = report_to_json(report).dump(2) + "\n";
  else
    throw ConfigError("unknown format: " + args.format);
  if (args.out.empty())
    std::cout << text;
  else
    write_text(args.out, text);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cf-audit: counterfactual bias audit for ordinal decisions"};
  app.require_subcommand(1);
  GlobalOpts g;
  app.add_option("--seed", g.seed, "Master RNG seed")->capture_default_str();
  app.add_option("--profile", g.profile, "Dataset profile: bordeaux | mimic");
  app.add_option("--out-dir", g.out_dir, "Directory for reports and manifests")
      ->capture_default_str();

  FilterArgs filter_args;
  auto* filter_cmd = app.add_subcommand("filter", "Apply the exclusion cascade");
  filter_cmd->add_option("--input", filter_args.input, "Raw records (JSONL)")
      ->required();
  filter_cmd->add_option("--config", filter_args.config, "Filter config (TOML)");
  filter_cmd->add_option("--kept", filter_args.kept, "Kept output")
      ->capture_default_str();
  filter_cmd->add_option("--rejected", filter_args.rejected, "Rejected output")
      ->capture_default_str();
  filter_cmd->add_option("--split", filter_args.split,
                         "Stratified train fraction (0 = no split)");
  filter_cmd->add_option("--train", filter_args.train, "Train partition output");
  filter_cmd->add_option("--test", filter_args.test, "Test partition output");

  PairsArgs pairs_args;
  auto* pairs_cmd =
      app.add_subcommand("pairs", "Generate counterfactual pairs via a service");
  pairs_cmd->add_option("--input", pairs_args.input, "Filtered records (JSONL)")
      ->required();
  pairs_cmd->add_option("--template", pairs_args.template_lang,
                        "Prompt template language: fr | en");
  pairs_cmd->add_option("--endpoint", pairs_args.endpoint,
                        "Chat-completion endpoint URL")->required();
  pairs_cmd->add_option("--model", pairs_args.model, "Model name")
      ->capture_default_str();
  pairs_cmd->add_option("--out", pairs_args.out, "Pairs output")
      ->capture_default_str();
  pairs_cmd->add_option("--log", pairs_args.log, "Generation log path");
  pairs_cmd->add_option("--checkpoint", pairs_args.checkpoint,
                        "Checkpoint path (default <out>.partial)");
  pairs_cmd->add_option("--concurrency", pairs_args.concurrency,
                        "Max in-flight requests")->capture_default_str();
  pairs_cmd->add_option("--timeout", pairs_args.timeout_s, "Request timeout (s)")
      ->capture_default_str();
  pairs_cmd->add_option("--retries", pairs_args.retries, "Retries per request")
      ->capture_default_str();
  pairs_cmd->add_option("--temperature", pairs_args.temperature,
                        "Sampling temperature")->capture_default_str();
  pairs_cmd->add_option("--n-exemplars", pairs_args.n_exemplars,
                        "Few-shot exemplar count")->capture_default_str();
  pairs_cmd->add_flag("--no-validate", pairs_args.no_validate,
                      "Skip automatic quality validation");
  pairs_cmd->add_flag("--log-bodies", pairs_args.log_bodies,
                      "Log request/response bodies to stderr for audit");

  PredictArgs predict_args;
  auto* predict_cmd = app.add_subcommand("predict", "Score both pair variants");
  predict_cmd->add_option("--pairs", predict_args.pairs, "Pairs (JSONL)")
      ->required();
  predict_cmd->add_option("--conditions", predict_args.conditions,
                          "Comma list: full,text_iso,tab_iso")
      ->capture_default_str();
  predict_cmd->add_option("--binding", predict_args.binding,
                          "Predictor binding config (TOML)")->required();
  predict_cmd->add_option("--out", predict_args.out, "Predictions output")
      ->capture_default_str();

  AuditArgs audit_args;
  auto* audit_cmd =
      app.add_subcommand("audit", "Compute bias metrics with bootstrap CIs");
  audit_cmd->add_option("--preds", audit_args.preds, "Predictions (JSONL)")
      ->required();
  audit_cmd->add_option("--pairs", audit_args.pairs, "Pairs (JSONL)")->required();
  audit_cmd->add_option("--iterations", audit_args.iterations,
                        "Bootstrap iterations")->capture_default_str();
  audit_cmd->add_option("--confidence", audit_args.confidence,
                        "Confidence level")->capture_default_str();
  audit_cmd->add_option("--threads", audit_args.threads,
                        "Bootstrap worker threads (0 = auto)");

  StratifyArgs stratify_args;
  auto* stratify_cmd =
      app.add_subcommand("stratify", "Per-label odds-ratio analysis");
  stratify_cmd->add_option("--preds", stratify_args.preds, "Predictions (JSONL)")
      ->required();
  stratify_cmd->add_option("--labels", stratify_args.labels,
                           "Records with reference labels (JSONL)")->required();
  stratify_cmd->add_option("--condition", stratify_args.condition,
                           "Condition to stratify")->capture_default_str();

  SynthArgs synth_args;
  auto* synth_cmd =
      app.add_subcommand("synth", "Generate a synthetic audit with known truth");
  synth_cmd->add_option("--config", synth_args.config, "Synth config (TOML)");
  synth_cmd->add_option("--out-pairs", synth_args.out_pairs, "Pairs output")
      ->capture_default_str();
  synth_cmd->add_option("--out-preds", synth_args.out_preds,
                        "Predictions output (table-binding compatible)")
      ->capture_default_str();
  synth_cmd->add_option("--truth", synth_args.truth, "Closed-form truth output")
      ->capture_default_str();

  double visits = 0, share = 0, differential = 0;
  auto* project_cmd =
      app.add_subcommand("project", "Impact projection (visits x share x differential)");
  project_cmd->add_option("--visits", visits, "Annual visits")->required();
  project_cmd->add_option("--share", share, "Population share of interest")
      ->required();
  project_cmd->add_option("--differential", differential, "Bias differential")
      ->required();

  CompareArgs compare_args;
  auto* compare_cmd =
      app.add_subcommand("compare", "Diff two audit reports (same index set)");
  compare_cmd->add_option("--a", compare_args.a, "Report A (JSON)")->required();
  compare_cmd->add_option("--b", compare_args.b, "Report B (JSON)")->required();

  ReportArgs report_args;
  auto* report_cmd =
      app.add_subcommand("report", "Re-emit a stored report in another format");
  report_cmd->add_option("--in", report_args.in, "report.json")->required();
  report_cmd->add_option("--format", report_args.format, "markdown | json")
      ->capture_default_str();
  report_cmd->add_option("--out", report_args.out, "Output path (default stdout)");

  // Global flags remain valid after the subcommand name.
  for (auto* sub : app.get_subcommands([](CLI::App*) { return true; }))
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (filter_cmd->parsed()) return run_filter(g, filter_args);
    if (pairs_cmd->parsed()) return run_pairs(g, pairs_args);
    if (predict_cmd->parsed()) return run_predict(g, predict_args);
    if (audit_cmd->parsed()) return run_audit_cmd(g, audit_args);
    if (stratify_cmd->parsed()) return run_stratify(g, stratify_args);
    if (synth_cmd->parsed())
      return run_synth(g, synth_args, app.count("--seed") > 0);
    if (project_cmd->parsed()) return run_project(visits, share, differential);
    if (compare_cmd->parsed()) return run_compare(g, compare_args);
    if (report_cmd->parsed()) return run_report(report_args);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return kExitConfig;
  } catch (const ServiceError& e) {
    std::cerr << "service error: " << e.what() << std::endl;
    return kExitService;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << std::endl;
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << std::endl;
    return kExitInternal;
  }
  return kExitConfig;
}
