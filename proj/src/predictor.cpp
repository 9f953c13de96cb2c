#include "cfaudit/predictor.hpp"

#include <atomic>
#include <cctype>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include <json.hpp>

#include "cfaudit/bow.hpp"
#include "cfaudit/jsonl.hpp"

namespace cfaudit {

namespace {

std::string variant_key_string(const std::string& pair_id, Condition cond,
                               const std::string& role) {
  return pair_id + "|" + to_string(cond) + "|" + role;
}

}  // namespace

std::optional<int> parse_label_reply(const std::string& reply, LabelScale scale) {
  std::size_t i = 0;
  while (i < reply.size()) {
    if (std::isdigit(static_cast<unsigned char>(reply[i]))) {
      std::size_t j = i;
      while (j < reply.size() && std::isdigit(static_cast<unsigned char>(reply[j])))
        ++j;
      if (j - i <= 9) {
        const int value = std::stoi(reply.substr(i, j - i));
        if (scale.contains(value)) return value;
      }
      i = j;
    } else {
      ++i;
    }
  }
  return std::nullopt;
}

TablePredictor::TablePredictor(LabelScale scale, const std::string& path)
    : Predictor(scale) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open prediction table " + path);
  for_each_line(in, [&](std::size_t lineno, const std::string& line) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    const int label = j.at("label").get<int>();
    if (j.contains("pair_id")) {
      by_variant_[variant_key_string(
          j.at("pair_id").get<std::string>(),
          condition_from_string(j.at("condition").get<std::string>()),
          j.at("role").get<std::string>())] = label;
    } else {
      by_id_[j.at("id").get<std::string>()] = label;
    }
  });
}

TablePredictor::TablePredictor(LabelScale scale,
                               std::map<std::string, int> by_variant,
                               std::map<std::string, int> by_id)
    : Predictor(scale),
      by_variant_(std::move(by_variant)),
      by_id_(std::move(by_id)) {}

int TablePredictor::predict(const DecisionRecord& variant, const VariantKey& key) {
  auto it = by_variant_.find(variant_key_string(key.pair_id, key.condition, key.role));
  if (it == by_variant_.end()) it = by_id_.find(variant.id);
  else {
    if (!scale_.contains(it->second))
      throw PredictionError("table label outside scale for " + key.pair_id);
    return it->second;
  }
  if (it == by_id_.end())
    throw PredictionError("no table entry for " + key.pair_id + "/" +
                          to_string(key.condition) + "/" + key.role);
  if (!scale_.contains(it->second))
    throw PredictionError("table label outside scale for " + variant.id);
  return it->second;
}

namespace {

class RemotePredictor : public Predictor {
 public:
  RemotePredictor(LabelScale scale, const GenServiceConfig& service, Language lang)
      : Predictor(scale), client_(service), lang_(lang) {}

  int predict(const DecisionRecord& variant, const VariantKey& key) override {
    const auto& tmpl = builtin_triage_template(lang_);
    const std::string prompt = tmpl.render(record_to_history(variant, lang_));
    const std::string reply = client_.complete("", prompt);
    const auto label = parse_label_reply(reply, scale_);
    if (!label)
      throw PredictionError("no in-scale integer in reply for " + key.pair_id +
                            "/" + to_string(key.condition) + "/" + key.role);
    return *label;
  }

  int max_concurrent() const override { return client_.config().max_concurrent; }

 private:
  ChatClient client_;
  Language lang_;
};

class BowPredictor : public Predictor {
 public:
  BowPredictor(LabelScale scale, BowModel model)
      : Predictor(scale), model_(std::move(model)) {}
  int predict(const DecisionRecord& variant, const VariantKey&) override {
    return model_.predict(variant);
  }

 private:
  BowModel model_;
};

}  // namespace

std::unique_ptr<Predictor> make_predictor(const PredictorBinding& binding) {
  switch (binding.kind) {
    case BindingKind::table:
      return std::make_unique<TablePredictor>(binding.scale, binding.table_path);
    case BindingKind::remote:
      return std::make_unique<RemotePredictor>(binding.scale, binding.service,
                                               binding.prompt_language);
    case BindingKind::bow_baseline: {
      std::ifstream probe(binding.artifact_path);
      if (!probe && !binding.train_input.empty()) {
        BowConfig cfg;
        cfg.seed = binding.train_seed;
        auto model = BowModel::train(read_records(binding.train_input),
                                     binding.scale, cfg);
        model.save(binding.artifact_path);
        return std::make_unique<BowPredictor>(binding.scale, std::move(model));
      }
      return std::make_unique<BowPredictor>(binding.scale,
                                            BowModel::load(binding.artifact_path));
    }
  }
  throw ConfigError("unknown binding kind");
}

PredictPairedResult predict_paired(const std::vector<CounterfactualPair>& pairs,
                                   const std::vector<Condition>& conditions,
                                   Predictor& predictor) {
  if (conditions.empty()) throw ConfigError("predict_paired: no conditions");

  struct PairJob {
    const CounterfactualPair* pair;
    std::map<Condition, std::pair<int, int>> labels;  // (orig, cf)
    bool ok = true;
    DroppedPair drop;
  };
  std::vector<PairJob> jobs;
  PredictPairedResult result;
  for (const auto& p : pairs) {
    if (p.cf_quality == CfQuality::failed) {
      result.dropped.push_back({p.pair_id, Condition::full, "", "cf_quality=failed"});
      continue;
    }
    jobs.push_back({&p, {}, true, {}});
  }

  std::atomic<std::size_t> next{0};
  std::atomic<bool> aborted{false};
  std::mutex abort_mu;
  std::string abort_message;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size() || aborted.load()) return;
      auto& job = jobs[i];
      for (const auto cond : conditions) {
        try {
          const auto vo = make_variant(job.pair->original, cond);
          const auto vc = make_variant(job.pair->counterfactual, cond);
          const int yo = predictor.predict(
              vo, VariantKey{job.pair->pair_id, cond, "original"});
          const int yc = predictor.predict(
              vc, VariantKey{job.pair->pair_id, cond, "counterfactual"});
          if (!predictor.scale().contains(yo) || !predictor.scale().contains(yc))
            throw PredictionError("label outside scale");
          job.labels[cond] = {yo, yc};
        } catch (const PredictionError& e) {
          job.ok = false;
          job.drop = {job.pair->pair_id, cond, "", e.what()};
          break;
        } catch (const std::exception& e) {
          // Service down / IO failure: abort the whole run, not one pair.
          std::lock_guard<std::mutex> lock(abort_mu);
          if (!aborted.exchange(true)) abort_message = e.what();
          return;
        }
      }
    }
  };

  const int workers = std::max(1, std::min<int>(predictor.max_concurrent(),
                                                static_cast<int>(jobs.size())));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (aborted.load()) throw ServiceError(abort_message);

  auto& set = result.set;
  set.scale = predictor.scale();
  for (auto& job : jobs) {
    if (!job.ok) {
      result.dropped.push_back(job.drop);
      continue;
    }
    set.index_set.ids.push_back(job.pair->pair_id);
    set.directions.push_back(job.pair->direction);
    set.ref_labels.push_back(job.pair->original.label.value_or(-1));
    for (const auto cond : conditions) {
      auto& cp = set.preds[cond];
      cp.y_orig.push_back(job.labels[cond].first);
      cp.y_cf.push_back(job.labels[cond].second);
    }
  }
  return result;
}

namespace {

struct PairMeta {
  Direction direction;
  int ref_label;
};

PredictionSet assemble_impl(const std::vector<PredLine>& preds,
                            const std::map<std::string, PairMeta>& meta,
                            LabelScale scale) {
  struct Slot {
    std::optional<int> orig, cf;
  };
  std::map<Condition, std::map<std::string, Slot>> by_cond;
  std::vector<std::string> order;
  std::set<std::string> seen;
  for (const auto& p : preds) {
    if (!scale.contains(p.label))
      throw DataError("prediction label outside scale for " + p.pair_id);
    auto& slot = by_cond[p.condition][p.pair_id];
    auto& target = p.role == "original" ? slot.orig : slot.cf;
    if (target)
      throw DataError("duplicate prediction for " + p.pair_id + "/" +
                      to_string(p.condition) + "/" + p.role);
    target = p.label;
    if (seen.insert(p.pair_id).second) order.push_back(p.pair_id);
  }
  if (by_cond.empty()) throw DataError("no predictions");

  PredictionSet set;
  set.scale = scale;
  for (const auto& id : order) {
    auto it = meta.find(id);
    if (it == meta.end())
      throw DataError("prediction references unknown pair " + id);
    set.index_set.ids.push_back(id);
    set.directions.push_back(it->second.direction);
    set.ref_labels.push_back(it->second.ref_label);
  }
  for (const auto& [cond, slots] : by_cond) {
    if (slots.size() != order.size())
      throw DataError(std::string("index set mismatch across conditions (") +
                      to_string(cond) + ")");
    auto& cp = set.preds[cond];
    for (const auto& id : order) {
      auto it = slots.find(id);
      if (it == slots.end())
        throw DataError(std::string("index set mismatch across conditions (") +
                        to_string(cond) + "): missing " + id);
      if (!it->second.orig || !it->second.cf)
        throw DataError("pair " + id + " lacks a role under " + to_string(cond));
      cp.y_orig.push_back(*it->second.orig);
      cp.y_cf.push_back(*it->second.cf);
    }
  }
  set.validate();
  return set;
}

}  // namespace

PredictionSet assemble_prediction_set(const std::vector<PredLine>& preds,
                                      const std::vector<CounterfactualPair>& pairs,
                                      LabelScale scale) {
  std::map<std::string, PairMeta> meta;
  for (const auto& p : pairs)
    meta[p.pair_id] = PairMeta{p.direction, p.original.label.value_or(-1)};
  return assemble_impl(preds, meta, scale);
}

PredictionSet assemble_prediction_set(const std::vector<PredLine>& preds,
                                      const std::vector<DecisionRecord>& records,
                                      LabelScale scale) {
  std::map<std::string, PairMeta> meta;
  for (const auto& r : records) {
    if (!r.sex) throw DataError("record " + r.id + " has no sex");
    meta[r.id] = PairMeta{
        *r.sex == Sex::male ? Direction::m_to_f : Direction::f_to_m,
        r.label.value_or(-1)};
  }
  return assemble_impl(preds, meta, scale);
}

void AgreementMatrix::add(int reference, int predicted) {
  if (!scale.contains(reference) || !scale.contains(predicted))
    throw DataError("agreement matrix: label outside scale");
  ++counts[static_cast<std::size_t>(reference - scale.min)]
          [static_cast<std::size_t>(predicted - scale.min)];
}

std::uint64_t AgreementMatrix::total() const {
  std::uint64_t n = 0;
  for (const auto& row : counts)
    for (auto v : row) n += v;
  return n;
}

double weighted_kappa(const AgreementMatrix& matrix) {
  const auto k = static_cast<std::size_t>(matrix.scale.size());
  const auto n = matrix.total();
  if (n == 0) throw DataError("weighted_kappa: empty matrix");
  std::vector<double> row(k, 0.0), col(k, 0.0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      row[i] += static_cast<double>(matrix.counts[i][j]);
      col[j] += static_cast<double>(matrix.counts[i][j]);
    }
  std::size_t ref_classes = 0;
  for (auto r : row) ref_classes += r > 0;
  if (ref_classes < 2)
    throw DataError("weighted_kappa: degenerate marginals (single class)");

  const double denom_w = static_cast<double>((k - 1) * (k - 1));
  double observed = 0.0, expected = 0.0;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      const double d = static_cast<double>(i) - static_cast<double>(j);
      const double w = d * d / denom_w;
      observed += w * static_cast<double>(matrix.counts[i][j]);
      expected += w * row[i] * col[j] / static_cast<double>(n);
    }
  if (expected == 0.0)
    throw DataError("weighted_kappa: degenerate marginals");
  return 1.0 - observed / expected;
}

}  // namespace cfaudit
