#include "iest/ensemble.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>
#include <thread>

#include "iest/model.hpp"

namespace iest {

Tensor<double> average_probs(const std::vector<const Tensor<double>*>& members) {
  if (members.empty()) throw std::runtime_error("average_probs: empty member set");
  const auto& first = *members[0];
  Tensor<double> out(first.rows(), first.cols());
  for (const auto* m : members) {
    if (m->shape != first.shape) {
      throw std::runtime_error("average_probs: member shape mismatch " +
                               shape_str(m->shape) + " vs " + shape_str(first.shape));
    }
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += m->data[i];
  }
  const double inv = 1.0 / static_cast<double>(members.size());
  for (auto& v : out.data) v *= inv;
  return out;
}

Tensor<double> average_probs(const std::vector<ProbabilityMatrix>& members,
                             std::uint32_t bitmask) {
  std::vector<const Tensor<double>*> selected;
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (bitmask & (1u << i)) selected.push_back(&members[i].probs);
  }
  return average_probs(selected);
}

double subset_accuracy(const std::vector<ProbabilityMatrix>& members,
                       std::uint32_t bitmask, const std::vector<int>& gold) {
  Tensor<double> avg = average_probs(members, bitmask);
  if (avg.rows() != gold.size())
    throw std::runtime_error("subset_accuracy: label/probability length mismatch");
  auto preds = argmax_rows(avg);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i)
    if (preds[i] == gold[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(gold.size());
}

std::vector<SubsetResult> search_best_subset(
    const std::vector<ProbabilityMatrix>& members, const std::vector<int>& gold,
    unsigned jobs) {
  const std::size_t n = members.size();
  if (n == 0) throw std::runtime_error("search_best_subset: zero members");
  if (n > 20) throw std::runtime_error("search_best_subset: too many members (max 20)");
  for (const auto& m : members) {
    if (m.probs.rows() != gold.size())
      throw std::runtime_error("search_best_subset: member '" + m.model_id +
                               "' size mismatch with gold labels");
  }

  const std::uint32_t total = (1u << n) - 1;
  std::vector<SubsetResult> results(total);

  // Work is partitioned by bitmask range; each slot is written by exactly
  // one worker and the merge is a plain sort, so thread count never affects
  // the ranking.
  auto eval_range = [&](std::uint32_t lo, std::uint32_t hi) {
    for (std::uint32_t mask = lo; mask < hi; ++mask) {
      const std::uint32_t bits = mask + 1;  // skip the empty subset
      results[mask].bitmask = bits;
      results[mask].size = std::popcount(bits);
      results[mask].accuracy = subset_accuracy(members, bits, gold);
    }
  };

  jobs = std::max(1u, jobs);
  if (jobs == 1 || total < 64) {
    eval_range(0, total);
  } else {
    std::vector<std::thread> workers;
    const std::uint32_t chunk = (total + jobs - 1) / jobs;
    for (unsigned w = 0; w < jobs; ++w) {
      const std::uint32_t lo = w * chunk;
      const std::uint32_t hi = std::min(total, lo + chunk);
      if (lo >= hi) break;
      workers.emplace_back(eval_range, lo, hi);
    }
    for (auto& t : workers) t.join();
  }

  std::sort(results.begin(), results.end(), [](const SubsetResult& a, const SubsetResult& b) {
    if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
    if (a.size != b.size) return a.size < b.size;
    return a.bitmask < b.bitmask;
  });
  return results;
}

}  // namespace iest
