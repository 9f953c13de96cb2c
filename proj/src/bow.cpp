#include "cfaudit/bow.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>

#include <json.hpp>

#include "cfaudit/rng.hpp"

namespace cfaudit {

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void tokens_into(const std::string& text, std::vector<std::string>& out) {
  std::string cur;
  for (unsigned char b : text) {
    if (b >= 0x80 || std::isalnum(b)) {
      cur += static_cast<char>(std::tolower(b));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
}

}  // namespace

std::vector<std::pair<std::uint32_t, float>> BowModel::featurize(
    const DecisionRecord& record, int hash_bits) {
  const std::uint64_t mask = (1ULL << hash_bits) - 1;
  std::vector<std::string> toks;
  tokens_into(record.chief_complaint, toks);
  tokens_into(record.hpi, toks);
  tokens_into(record.pmh, toks);
  if (record.sex)
    toks.push_back(std::string("sex=") + to_string(*record.sex));
  if (record.age)
    toks.push_back("age_decade=" +
                   std::to_string(static_cast<int>(*record.age / 10.0)));
  std::map<std::uint32_t, float> counts;
  for (const auto& t : toks)
    counts[static_cast<std::uint32_t>(fnv1a(t) & mask)] += 1.0f;
  return {counts.begin(), counts.end()};
}

BowModel::BowModel(LabelScale scale, int hash_bits)
    : scale_(scale),
      hash_bits_(hash_bits),
      dim_(1ULL << hash_bits),
      weights_(static_cast<std::size_t>(scale.size()) * (dim_ + 1), 0.0f) {}

BowModel BowModel::train(const std::vector<DecisionRecord>& records,
                         LabelScale scale, const BowConfig& cfg) {
  if (records.empty()) throw DataError("bow train: empty training set");
  BowModel model(scale, cfg.hash_bits);
  const auto k = static_cast<std::size_t>(scale.size());
  const std::size_t stride = model.dim_ + 1;

  std::vector<std::vector<std::pair<std::uint32_t, float>>> feats;
  std::vector<int> labels;
  feats.reserve(records.size());
  for (const auto& r : records) {
    if (!r.label) throw DataError("bow train: record " + r.id + " has no label");
    if (!scale.contains(*r.label))
      throw DataError("bow train: label outside scale for " + r.id);
    feats.push_back(featurize(r, cfg.hash_bits));
    labels.push_back(*r.label - scale.min);
  }

  std::vector<std::size_t> order(records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<double> logits(k), probs(k);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng rng(substream_seed(cfg.seed, 0xB0B0, static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.bounded(i)]);
    const double lr = cfg.learning_rate / (1.0 + epoch);
    for (const auto idx : order) {
      const auto& x = feats[idx];
      double norm = 0.0;
      for (const auto& [b, v] : x) norm += v * v;
      const double scale_x = norm > 0 ? 1.0 / std::sqrt(norm) : 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        double z = model.weights_[c * stride + model.dim_];  // bias
        for (const auto& [b, v] : x)
          z += model.weights_[c * stride + b] * v * scale_x;
        logits[c] = z;
      }
      const double zmax = *std::max_element(logits.begin(), logits.end());
      double denom = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        probs[c] = std::exp(logits[c] - zmax);
        denom += probs[c];
      }
      for (std::size_t c = 0; c < k; ++c) {
        const double grad = probs[c] / denom - (static_cast<int>(c) == labels[idx]);
        const auto g = static_cast<float>(lr * grad);
        model.weights_[c * stride + model.dim_] -= g;
        for (const auto& [b, v] : x)
          model.weights_[c * stride + b] -= g * static_cast<float>(v * scale_x);
      }
    }
  }
  return model;
}

int BowModel::predict(const DecisionRecord& record) const {
  const auto x = featurize(record, hash_bits_);
  const auto k = static_cast<std::size_t>(scale_.size());
  const std::size_t stride = dim_ + 1;
  double norm = 0.0;
  for (const auto& [b, v] : x) norm += v * v;
  const double scale_x = norm > 0 ? 1.0 / std::sqrt(norm) : 0.0;
  int best = 0;
  double best_z = -1e300;
  for (std::size_t c = 0; c < k; ++c) {
    double z = weights_[c * stride + dim_];
    for (const auto& [b, v] : x) z += weights_[c * stride + b] * v * scale_x;
    if (z > best_z) {
      best_z = z;
      best = static_cast<int>(c);
    }
  }
  return scale_.min + best;
}

void BowModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  nlohmann::json header{{"magic", "cfaudit-bow"},
                        {"version", 1},
                        {"hash_bits", hash_bits_},
                        {"scale_min", scale_.min},
                        {"scale_max", scale_.max}};
  const std::string h = header.dump();
  out << h << '\n';
  out.write(reinterpret_cast<const char*>(weights_.data()),
            static_cast<std::streamsize>(weights_.size() * sizeof(float)));
}

BowModel BowModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open bow artifact " + path);
  std::string header_line;
  std::getline(in, header_line);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_line);
  } catch (const nlohmann::json::exception&) {
    throw DataError(path + ": not a bow artifact");
  }
  if (header.value("magic", "") != "cfaudit-bow")
    throw DataError(path + ": not a bow artifact");
  BowModel model(LabelScale{header.at("scale_min").get<int>(),
                            header.at("scale_max").get<int>()},
                 header.at("hash_bits").get<int>());
  in.read(reinterpret_cast<char*>(model.weights_.data()),
          static_cast<std::streamsize>(model.weights_.size() * sizeof(float)));
  if (static_cast<std::size_t>(in.gcount()) !=
      model.weights_.size() * sizeof(float))
    throw DataError(path + ": truncated bow artifact");
  return model;
}

}  // namespace cfaudit
