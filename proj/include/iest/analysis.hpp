#pragma once

#include <array>
#include <string>
#include <vector>

#include "iest/dataset.hpp"
#include "iest/model.hpp"
#include "iest/pca.hpp"
#include "iest/training.hpp"

namespace iest {

struct EmojiEffect {
  std::string alias;
  std::size_t n = 0;                 // tweets containing the alias
  std::size_t correct_with = 0;
  double accuracy_with = 0.0;        // percent
  std::size_t correct_without = 0;
  double accuracy_without = 0.0;     // percent
  double delta = 0.0;                // stripped - original, percentage points
};

// Restricts to tweets containing `alias`, predicts on the original and on
// the alias-stripped variant, and reports both accuracies (percent).
EmojiEffect emoji_removal_effect(Model<float>& model, const Dataset& ds,
                                 const EmojiDatabase& db, const std::string& alias);

// All aliases present in the dataset, ordered lexicographically.
std::vector<EmojiEffect> emoji_removal_effects(Model<float>& model, const Dataset& ds,
                                               const EmojiDatabase& db,
                                               std::size_t min_count = 1);

struct DataAmountPoint {
  double fraction;
  double accuracy;
  double macro_f1;
};

// One full fit per fraction. Subsampling is seeded and nested: the subset
// for a smaller fraction is a prefix of the one for a larger fraction.
std::vector<DataAmountPoint> data_amount_curve(const Dataset& train,
                                               const std::vector<double>& fractions,
                                               const Dataset& eval,
                                               const ModelConfig& mcfg,
                                               const TrainConfig& tcfg);

struct TriggerPatternReport {
  std::size_t pattern_count = 0;
  std::array<std::size_t, 6> gold_histogram{};
  std::size_t predicted_correct = 0;
  double accuracy = 0.0;
  // 2-means on the 3-d projection of sentence representations
  bool cluster_checked = false;
  std::size_t pattern_in_majority_cluster = 0;  // pattern tweets in their majority cluster
  std::size_t majority_cluster_size = 0;
  double cluster_purity = 0.0;  // pattern share of that cluster
};

// Statistics over tweets matching `un __TRIGGERWORD__`. When a projection is
// given, also checks whether 2-means isolates the pattern tweets.
TriggerPatternReport trigger_pattern_report(const Dataset& ds,
                                            const std::vector<int>& predictions,
                                            const Projection3D* projection = nullptr,
                                            std::uint64_t cluster_seed = 0);

}  // namespace iest
