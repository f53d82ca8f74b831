#pragma once

#include <array>
#include <string>
#include <vector>

namespace iest {

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct MetricsReport {
  // rows = gold class, columns = predicted class
  std::array<std::array<std::size_t, 6>, 6> confusion{};
  std::array<ClassMetrics, 6> per_class;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  double accuracy = 0.0;
  std::size_t total = 0;
};

// Standard multiclass metrics; zero-division convention: a class with no
// predicted (or gold) positives gets precision (recall) 0, hence F1 0.
MetricsReport compute_metrics(const std::vector<int>& gold,
                              const std::vector<int>& predicted);

std::string metrics_to_tsv(const MetricsReport& r);
std::string metrics_to_json(const MetricsReport& r);

struct GroupEffect {
  std::string group;
  std::size_t count_present = 0;
  double accuracy_present = 0.0;
  std::size_t count_absent = 0;
  double accuracy_absent = 0.0;
};

// Accuracy within the presence/absence partition defined by `present`.
GroupEffect group_effect(const std::string& group_name,
                         const std::vector<bool>& present,
                         const std::vector<int>& gold,
                         const std::vector<int>& predicted);

}  // namespace iest
