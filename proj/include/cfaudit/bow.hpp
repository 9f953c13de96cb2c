#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cfaudit/types.hpp"

namespace cfaudit {

// Desk-scale text baseline: hashed bag-of-words features into a multinomial
// linear (softmax) classifier trained with plain SGD. Exists so the full
// audit loop runs end to end without any external service.
struct BowConfig {
  int hash_bits = 16;  // 2^16 feature buckets
  int epochs = 5;
  double learning_rate = 0.5;
  std::uint64_t seed = 0;
};

class BowModel {
 public:
  static BowModel train(const std::vector<DecisionRecord>& records,
                        LabelScale scale, const BowConfig& cfg);

  int predict(const DecisionRecord& record) const;

  void save(const std::string& path) const;
  static BowModel load(const std::string& path);

  const LabelScale& scale() const { return scale_; }
  std::size_t dim() const { return dim_; }

  // Sparse (bucket, count) features for one record: hashed text tokens plus
  // sex/age indicator buckets.
  static std::vector<std::pair<std::uint32_t, float>> featurize(
      const DecisionRecord& record, int hash_bits);

 private:
  BowModel(LabelScale scale, int hash_bits);
  LabelScale scale_{1, 5};
  int hash_bits_ = 16;
  std::size_t dim_ = 0;
  std::vector<float> weights_;  // k rows of (dim + 1), last column is bias
};

}  // namespace cfaudit
