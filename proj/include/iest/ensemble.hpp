#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "iest/tensor.hpp"

namespace iest {

struct ProbabilityMatrix {
  std::string model_id;
  Tensor<double> probs;  // [examples x 6], rows sum to 1
};

struct SubsetResult {
  std::uint32_t bitmask = 0;  // bit i set = member i included
  double accuracy = 0.0;
  int size = 0;
};

// Arithmetic mean per cell over the member matrices.
Tensor<double> average_probs(const std::vector<const Tensor<double>*>& members);
Tensor<double> average_probs(const std::vector<ProbabilityMatrix>& members,
                             std::uint32_t bitmask);

double subset_accuracy(const std::vector<ProbabilityMatrix>& members,
                       std::uint32_t bitmask, const std::vector<int>& gold);

// Exhaustive 2^n - 1 search. Results sorted by accuracy desc, ties by
// smaller subset, then smaller bitmask. `jobs` bounds worker threads.
std::vector<SubsetResult> search_best_subset(
    const std::vector<ProbabilityMatrix>& members, const std::vector<int>& gold,
    unsigned jobs = 1);

}  // namespace iest
