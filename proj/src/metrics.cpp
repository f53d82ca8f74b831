#include "iest/metrics.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "iest/tokenizer.hpp"

#include <nlohmann/json.hpp>

namespace iest {

MetricsReport compute_metrics(const std::vector<int>& gold,
                              const std::vector<int>& predicted) {
  if (gold.size() != predicted.size())
    throw std::runtime_error("compute_metrics: length mismatch " +
                             std::to_string(gold.size()) + " vs " +
                             std::to_string(predicted.size()));
  MetricsReport r;
  r.total = gold.size();
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] < 0 || gold[i] >= kNumClasses || predicted[i] < 0 ||
        predicted[i] >= kNumClasses)
      throw std::runtime_error("compute_metrics: label out of range at index " +
                               std::to_string(i));
    r.confusion[gold[i]][predicted[i]] += 1;
  }

  std::size_t trace = 0;
  for (int c = 0; c < kNumClasses; ++c) {
    std::size_t tp = r.confusion[c][c];
    std::size_t gold_pos = 0, pred_pos = 0;
    for (int j = 0; j < kNumClasses; ++j) {
      gold_pos += r.confusion[c][j];
      pred_pos += r.confusion[j][c];
    }
    trace += tp;
    auto& m = r.per_class[c];
    m.support = gold_pos;
    m.precision = pred_pos ? static_cast<double>(tp) / pred_pos : 0.0;
    m.recall = gold_pos ? static_cast<double>(tp) / gold_pos : 0.0;
    m.f1 = (m.precision + m.recall) > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    r.macro_precision += m.precision / kNumClasses;
    r.macro_recall += m.recall / kNumClasses;
    r.macro_f1 += m.f1 / kNumClasses;
  }
  r.accuracy = r.total ? static_cast<double>(trace) / r.total : 0.0;
  return r;
}

namespace {
std::string fmt4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}
}  // namespace

std::string metrics_to_tsv(const MetricsReport& r) {
  std::ostringstream out;
  out << "class\tprecision\trecall\tf1\tsupport\n";
  for (int c = 0; c < kNumClasses; ++c) {
    const auto& m = r.per_class[c];
    out << label_name(static_cast<EmotionLabel>(c)) << '\t' << fmt4(m.precision)
        << '\t' << fmt4(m.recall) << '\t' << fmt4(m.f1) << '\t' << m.support
        << '\n';
  }
  out << "macro\t" << fmt4(r.macro_precision) << '\t' << fmt4(r.macro_recall)
      << '\t' << fmt4(r.macro_f1) << '\t' << r.total << '\n';
  out << "accuracy\t" << fmt4(r.accuracy) << '\n';
  out << "confusion";
  for (int c = 0; c < kNumClasses; ++c)
    out << '\t' << label_name(static_cast<EmotionLabel>(c));
  out << '\n';
  for (int g = 0; g < kNumClasses; ++g) {
    out << label_name(static_cast<EmotionLabel>(g));
    for (int p = 0; p < kNumClasses; ++p) out << '\t' << r.confusion[g][p];
    out << '\n';
  }
  return out.str();
}

std::string metrics_to_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  for (int c = 0; c < kNumClasses; ++c) {
    const auto& m = r.per_class[c];
    j["classes"][label_name(static_cast<EmotionLabel>(c))] = {
        {"precision", m.precision},
        {"recall", m.recall},
        {"f1", m.f1},
        {"support", m.support}};
  }
  j["macro"] = {{"precision", r.macro_precision},
                {"recall", r.macro_recall},
                {"f1", r.macro_f1}};
  j["accuracy"] = r.accuracy;
  j["total"] = r.total;
  auto& conf = j["confusion"];
  for (int g = 0; g < kNumClasses; ++g) {
    conf.push_back(std::vector<std::size_t>(r.confusion[g].begin(),
                                            r.confusion[g].end()));
  }
  return j.dump(2);
}

GroupEffect group_effect(const std::string& group_name,
                         const std::vector<bool>& present,
                         const std::vector<int>& gold,
                         const std::vector<int>& predicted) {
  if (present.size() != gold.size() || gold.size() != predicted.size())
    throw std::runtime_error("group_effect: input length mismatch");
  GroupEffect e;
  e.group = group_name;
  std::size_t correct_p = 0, correct_a = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool correct = gold[i] == predicted[i];
    if (present[i]) {
      ++e.count_present;
      correct_p += correct;
    } else {
      ++e.count_absent;
      correct_a += correct;
    }
  }
  e.accuracy_present = e.count_present ? static_cast<double>(correct_p) / e.count_present : 0.0;
  e.accuracy_absent = e.count_absent ? static_cast<double>(correct_a) / e.count_absent : 0.0;
  return e;
}

}  // namespace iest
