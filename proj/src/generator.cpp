#include "cfaudit/generator.hpp"

#include <atomic>
#include <condition_variable>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include <json.hpp>

#include "cfaudit/jsonl.hpp"

namespace cfaudit {

DecisionRecord flip_tabular(const DecisionRecord& record) {
  if (!record.sex) throw DataError("flip_tabular: record " + record.id + " has no sex");
  DecisionRecord out = record;
  out.sex = flip(*record.sex);
  return out;
}

CounterfactualPair assemble_pair(const DecisionRecord& original,
                                 const ParsedGeneration& parsed,
                                 const PromptTemplate& tmpl) {
  CounterfactualPair pair;
  pair.pair_id = original.id;
  pair.original = original;
  pair.counterfactual = flip_tabular(original);
  // Text fields come from the generation; the parsed sex is kept on the
  // candidate so the validator can see what the service actually produced.
  pair.counterfactual.sex = parsed.sex;
  for (std::size_t i = 0; i < tmpl.fields.size() && i < parsed.values.size(); ++i) {
    switch (tmpl.fields[i].second) {
      case TextField::chief_complaint:
        pair.counterfactual.chief_complaint = parsed.values[i];
        break;
      case TextField::hpi:
        pair.counterfactual.hpi = parsed.values[i];
        break;
      case TextField::pmh:
        pair.counterfactual.pmh = parsed.values[i];
        break;
    }
  }
  pair.direction =
      *original.sex == Sex::male ? Direction::m_to_f : Direction::f_to_m;
  pair.condition = Condition::full;
  return pair;
}

namespace {

struct WorkerOutput {
  CounterfactualPair pair;
  GenerationLogEntry log;
  bool ok = false;
};

WorkerOutput process_record(const DecisionRecord& record,
                            const PromptTemplate& tmpl, const ChatClient& client,
                            const GenerateOptions& options) {
  WorkerOutput out;
  out.log.pair_id = record.id;
  auto [sys, user] = tmpl.chat_messages(record);
  const std::string reply = client.complete(sys, user);  // may throw ServiceError
  std::string perr;
  auto parsed = parse_generation(reply, tmpl, &perr);
  if (!parsed) {
    out.pair.pair_id = record.id;
    out.pair.original = record;
    out.pair.counterfactual = flip_tabular(record);
    out.pair.direction =
        *record.sex == Sex::male ? Direction::m_to_f : Direction::f_to_m;
    out.pair.cf_quality = CfQuality::failed;
    out.log.quality = CfQuality::failed;
    out.log.detail = "parse_error: " + perr;
    out.ok = true;
    return out;
  }
  out.pair = assemble_pair(record, *parsed, tmpl);
  if (options.validate) {
    const auto report = validate_cf(record, out.pair.counterfactual,
                                    builtin_markers(tmpl.language),
                                    options.thresholds);
    out.pair.cf_quality = report.quality;
    out.log.quality = report.quality;
    out.log.overlap = report.non_gender_token_overlap;
    if (!report.residual_source_gender_terms.empty()) {
      out.log.detail = "residual:";
      for (const auto& t : report.residual_source_gender_terms)
        out.log.detail += " " + t;
    }
  } else {
    out.pair.cf_quality = CfQuality::unvalidated;
    out.log.quality = CfQuality::unvalidated;
  }
  // Validated pairs carry the deterministic tabular flip regardless of what
  // the service echoed back.
  if (out.pair.cf_quality == CfQuality::correct ||
      out.pair.cf_quality == CfQuality::incomplete ||
      out.pair.cf_quality == CfQuality::unvalidated)
    out.pair.counterfactual.sex = flip(*record.sex);
  out.ok = true;
  return out;
}

std::map<std::string, CounterfactualPair> load_checkpoint(const std::string& path) {
  std::map<std::string, CounterfactualPair> done;
  std::ifstream in(path);
  if (!in) return done;
  for_each_line(in, [&](std::size_t, const std::string& line) {
    try {
      auto pair = pair_from_json(nlohmann::json::parse(line));
      done.emplace(pair.pair_id, std::move(pair));
    } catch (const std::exception&) {
      // Torn tail write from an aborted run; drop the line.
    }
  });
  return done;
}

}  // namespace

GenerateResult generate_pairs(const std::vector<DecisionRecord>& records,
                              const PromptTemplate& tmpl,
                              const GenServiceConfig& service,
                              const GenerateOptions& options) {
  for (const auto& r : records)
    if (!r.sex) throw DataError("generate_pairs: record " + r.id + " has no sex");

  ChatClient client(service);
  std::map<std::string, CounterfactualPair> done;
  if (!options.checkpoint_path.empty())
    done = load_checkpoint(options.checkpoint_path);

  std::vector<const DecisionRecord*> todo;
  for (const auto& r : records)
    if (!done.count(r.id)) todo.push_back(&r);

  std::mutex mu;
  std::map<std::string, WorkerOutput> results;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> aborted{false};
  std::string abort_message;
  std::ofstream ckpt;
  if (!options.checkpoint_path.empty())
    ckpt.open(options.checkpoint_path, std::ios::app);
  std::size_t since_flush = 0;

  auto worker = [&] {
    while (!aborted.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= todo.size()) return;
      try {
        auto out = process_record(*todo[i], tmpl, client, options);
        std::lock_guard<std::mutex> lock(mu);
        if (ckpt.is_open()) {
          ckpt << pair_to_json(out.pair).dump() << '\n';
          if (++since_flush >= options.checkpoint_every) {
            ckpt.flush();
            since_flush = 0;
          }
        }
        results.emplace(out.pair.pair_id, std::move(out));
      } catch (const ServiceError& e) {
        std::lock_guard<std::mutex> lock(mu);
        if (!aborted.exchange(true)) abort_message = e.what();
        return;
      }
    }
  };

  const auto n_workers = static_cast<std::size_t>(
      std::min<int>(service.max_concurrent, static_cast<int>(todo.size()) + 1));
  std::vector<std::thread> threads;
  threads.reserve(n_workers);
  for (std::size_t t = 0; t < n_workers; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (ckpt.is_open()) ckpt.flush();
  if (aborted.load())
    throw ServiceError(abort_message + " (partial checkpoint retained)");

  // Merge deterministically in input order, mixing checkpointed and fresh.
  GenerateResult out;
  for (const auto& r : records) {
    if (auto it = results.find(r.id); it != results.end()) {
      out.pairs.push_back(it->second.pair);
      out.log.push_back(it->second.log);
    } else if (auto dt = done.find(r.id); dt != done.end()) {
      out.pairs.push_back(dt->second);
      GenerationLogEntry entry;
      entry.pair_id = r.id;
      entry.quality = dt->second.cf_quality;
      entry.detail = "from_checkpoint";
      out.log.push_back(entry);
    }
  }
  for (const auto& p : out.pairs)
    ++out.quality_histogram[to_string(p.cf_quality)];
  return out;
}

}  // namespace cfaudit
