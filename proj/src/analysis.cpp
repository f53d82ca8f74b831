#include "iest/analysis.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

#include "iest/metrics.hpp"

namespace iest {

EmojiEffect emoji_removal_effect(Model<float>& model, const Dataset& ds,
                                 const EmojiDatabase& db, const std::string& alias) {
  std::vector<std::vector<Token>> with_emoji, without_emoji;
  std::vector<int> gold;
  for (const auto& e : ds.examples) {
    auto it = e.features.emoji_aliases.find(alias);
    if (it == e.features.emoji_aliases.end()) continue;
    if (!e.tweet.label) throw std::runtime_error("emoji_removal_effect: unlabeled example");
    with_emoji.push_back(e.tokens);
    without_emoji.push_back(strip_emoji_alias(e.tokens, db, alias));
    gold.push_back(static_cast<int>(*e.tweet.label));
  }
  if (with_emoji.empty())
    throw std::runtime_error("emoji_removal_effect: alias '" + alias +
                             "' matches no tweets");

  EmojiEffect eff;
  eff.alias = alias;
  eff.n = with_emoji.size();
  auto pred_with = argmax_rows(predict_proba(model, with_emoji));
  auto pred_without = argmax_rows(predict_proba(model, without_emoji));
  for (std::size_t i = 0; i < gold.size(); ++i) {
    eff.correct_with += pred_with[i] == gold[i];
    eff.correct_without += pred_without[i] == gold[i];
  }
  eff.accuracy_with = 100.0 * eff.correct_with / static_cast<double>(eff.n);
  eff.accuracy_without = 100.0 * eff.correct_without / static_cast<double>(eff.n);
  eff.delta = eff.accuracy_without - eff.accuracy_with;
  return eff;
}

std::vector<EmojiEffect> emoji_removal_effects(Model<float>& model, const Dataset& ds,
                                               const EmojiDatabase& db,
                                               std::size_t min_count) {
  std::map<std::string, std::size_t> counts;
  for (const auto& e : ds.examples) {
    for (const auto& [alias, k] : e.features.emoji_aliases) counts[alias] += 1;
  }
  std::vector<EmojiEffect> out;
  for (const auto& [alias, n] : counts) {
    if (n < min_count) continue;
    out.push_back(emoji_removal_effect(model, ds, db, alias));
  }
  return out;  // map iteration is already alias-lexicographic
}

std::vector<DataAmountPoint> data_amount_curve(const Dataset& train,
                                               const std::vector<double>& fractions,
                                               const Dataset& eval,
                                               const ModelConfig& mcfg,
                                               const TrainConfig& tcfg) {
  for (double f : fractions) {
    if (f <= 0.0 || f > 1.0)
      throw std::runtime_error("data_amount_curve: fraction out of (0, 1]");
  }
  // One shared shuffled order makes the subsamples nested.
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng = Rng::split(tcfg.seed, "data-amount-subsample");
  rng.shuffle(order);

  std::vector<std::vector<Token>> eval_toks;
  for (const auto& e : eval.examples) eval_toks.push_back(e.tokens);
  const auto eval_gold = eval.labels();

  std::vector<DataAmountPoint> out;
  for (double f : fractions) {
    std::size_t take = f >= 1.0 ? train.size()
                                : std::max<std::size_t>(
                                      1, static_cast<std::size_t>(f * train.size()));
    Dataset sub;
    if (take == train.size()) {
      sub = train;  // fraction 1.0 reproduces a plain fit bit-exactly
    } else {
      for (std::size_t i = 0; i < take; ++i)
        sub.examples.push_back(train.examples[order[i]]);
    }
    Rng init_rng = Rng::split(tcfg.seed, "init");
    auto model = build_model<float>(mcfg, init_rng);
    auto fitres = fit(model, sub, eval, tcfg);
    model.params = fitres.best_params;
    auto preds = argmax_rows(predict_proba(model, eval_toks));
    auto report = compute_metrics(eval_gold, preds);
    out.push_back({f, report.accuracy, report.macro_f1});
  }
  return out;
}

TriggerPatternReport trigger_pattern_report(const Dataset& ds,
                                            const std::vector<int>& predictions,
                                            const Projection3D* projection,
                                            std::uint64_t cluster_seed) {
  if (predictions.size() != ds.size())
    throw std::runtime_error("trigger_pattern_report: prediction count mismatch");
  TriggerPatternReport r;
  std::vector<bool> is_pattern(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& e = ds.examples[i];
    is_pattern[i] = e.features.has_un_trigger;
    if (!is_pattern[i]) continue;
    ++r.pattern_count;
    if (e.tweet.label) {
      r.gold_histogram[static_cast<int>(*e.tweet.label)] += 1;
      r.predicted_correct += predictions[i] == static_cast<int>(*e.tweet.label);
    }
  }
  r.accuracy = r.pattern_count
                   ? static_cast<double>(r.predicted_correct) / r.pattern_count
                   : 0.0;

  if (projection && r.pattern_count > 0 && ds.size() >= 2) {
    auto km = kmeans2(projection->coords, cluster_seed);
    std::size_t in_cluster[2] = {0, 0};
    std::size_t cluster_size[2] = {0, 0};
    for (std::size_t i = 0; i < ds.size(); ++i) {
      cluster_size[km.assignment[i]] += 1;
      if (is_pattern[i]) in_cluster[km.assignment[i]] += 1;
    }
    const int c = in_cluster[1] > in_cluster[0] ? 1 : 0;
    r.cluster_checked = true;
    r.pattern_in_majority_cluster = in_cluster[c];
    r.majority_cluster_size = cluster_size[c];
    r.cluster_purity = cluster_size[c]
                           ? static_cast<double>(in_cluster[c]) / cluster_size[c]
                           : 0.0;
  }
  return r;
}

}  // namespace iest
