#pragma once

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "iest/dataset.hpp"
#include "iest/model.hpp"

namespace iest {

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class OptimizerKind { adam, sgd };

struct TrainConfig {
  std::size_t epochs = 10;
  std::size_t batch_size = 64;
  OptimizerKind optimizer = OptimizerKind::adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  // slanted triangular schedule
  double stlr_cut_frac = 0.1;
  double stlr_ratio = 32.0;
  double eta_max = 0.001;
  double sgd_lr = 0.1;  // constant rate for the SGD ablation
  std::uint64_t seed = 0;

  void validate() const {
    if (epochs < 1) throw std::runtime_error("train config: epochs must be >= 1");
    if (batch_size < 1) throw std::runtime_error("train config: batch_size must be >= 1");
    if (stlr_cut_frac <= 0.0 || stlr_cut_frac >= 1.0)
      throw std::runtime_error("train config: cut_frac must be in (0, 1)");
    if (stlr_ratio <= 1.0) throw std::runtime_error("train config: ratio must be > 1");
  }
};

struct ScheduleState {
  std::size_t total_iters = 0;  // epochs * batches_per_epoch
  std::size_t cut = 0;          // floor(cut_frac * T)

  static ScheduleState make(std::size_t total_iters, double cut_frac) {
    ScheduleState s;
    s.total_iters = total_iters;
    s.cut = static_cast<std::size_t>(std::floor(cut_frac * static_cast<double>(total_iters)));
    // very short runs would otherwise get cut = 0 and divide by zero below
    if (s.cut == 0) s.cut = 1;
    return s;
  }
};

// Piecewise-linear schedule: ramps to eta_max at t = cut, then decays back
// to eta_max / ratio at t = T.
inline double stlr(std::size_t t, const ScheduleState& sched, double cut_frac,
                   double ratio, double eta_max) {
  if (t > sched.total_iters)
    throw std::runtime_error("stlr: iteration " + std::to_string(t) +
                             " beyond schedule end " + std::to_string(sched.total_iters));
  const double cut = static_cast<double>(sched.cut);
  double p;
  if (t < sched.cut) {
    p = static_cast<double>(t) / cut;
  } else {
    p = 1.0 - (static_cast<double>(t) - cut) / (cut * (1.0 / cut_frac - 1.0));
  }
  return eta_max * (1.0 + p * (ratio - 1.0)) / ratio;
}

template <class Real>
struct OptimizerState {
  std::map<std::string, std::vector<Real>> m;  // first moments
  std::map<std::string, std::vector<Real>> v;  // second moments
  std::size_t t = 0;
};

// Bias-corrected Adam over every registered parameter.
template <class Real>
void adam_step(Model<Real>& model, OptimizerState<Real>& state,
               const TrainConfig& cfg, double lr) {
  state.t += 1;
  const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
  for (auto& [name, p] : model.params) {
    if (!p.requires_grad) continue;
    if (p.grad.size() != p.data.size())
      throw std::runtime_error("adam_step: missing gradient for " + name);
    auto& m = state.m[name];
    auto& v = state.v[name];
    if (m.empty()) m.assign(p.data.size(), Real(0));
    if (v.empty()) v.assign(p.data.size(), Real(0));
    for (std::size_t i = 0; i < p.data.size(); ++i) {
      const double g = static_cast<double>(p.grad[i]);
      m[i] = static_cast<Real>(b1 * static_cast<double>(m[i]) + (1.0 - b1) * g);
      v[i] = static_cast<Real>(b2 * static_cast<double>(v[i]) + (1.0 - b2) * g * g);
      const double mhat = static_cast<double>(m[i]) / bc1;
      const double vhat = static_cast<double>(v[i]) / bc2;
      p.data[i] -= static_cast<Real>(lr * mhat / (std::sqrt(vhat) + cfg.adam_eps));
    }
  }
}

template <class Real>
void sgd_step(Model<Real>& model, double lr) {
  for (auto& [name, p] : model.params) {
    if (!p.requires_grad) continue;
    if (p.grad.size() != p.data.size())
      throw std::runtime_error("sgd_step: missing gradient for " + name);
    for (std::size_t i = 0; i < p.data.size(); ++i)
      p.data[i] -= static_cast<Real>(lr) * p.grad[i];
  }
}

struct EpochStats {
  std::size_t epoch;
  double train_loss;
  double val_accuracy;
};

template <class Real>
struct FitResult {
  std::map<std::string, Tensor<Real>> best_params;
  std::size_t best_epoch = 0;
  double best_val_accuracy = 0.0;
  std::vector<EpochStats> history;
};

template <class Real>
double accuracy_on(Model<Real>& model, const Dataset& ds) {
  std::vector<std::vector<Token>> toks;
  toks.reserve(ds.size());
  for (const auto& e : ds.examples) toks.push_back(e.tokens);
  auto preds = argmax_rows(predict_proba(model, toks));
  auto gold = ds.labels();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i)
    if (preds[i] == gold[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

// One full optimization run. Reshuffles each epoch, keeps the short final
// batch in the schedule count, evaluates validation accuracy at epoch end,
// and returns the checkpoint with the best validation accuracy (ties go to
// the earlier epoch).
template <class Real>
FitResult<Real> fit(Model<Real>& model, const Dataset& train, const Dataset& val,
                    const TrainConfig& cfg) {
  cfg.validate();
  if (train.size() == 0 || val.size() == 0)
    throw std::runtime_error("fit: empty dataset");
  const auto targets = train.labels();

  const std::size_t batches_per_epoch =
      (train.size() + cfg.batch_size - 1) / cfg.batch_size;
  const auto sched =
      ScheduleState::make(cfg.epochs * batches_per_epoch, cfg.stlr_cut_frac);

  Rng shuffle_rng = Rng::split(cfg.seed, "shuffle");
  Rng dropout_rng = Rng::split(cfg.seed, "dropout");
  OptimizerState<Real> opt;

  FitResult<Real> result;
  result.best_val_accuracy = -1.0;

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  std::size_t iter = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < batches_per_epoch; ++b) {
      const std::size_t lo = b * cfg.batch_size;
      const std::size_t hi = std::min(lo + cfg.batch_size, train.size());
      std::vector<const std::vector<Token>*> batch;
      std::vector<int> batch_targets;
      batch.reserve(hi - lo);
      for (std::size_t i = lo; i < hi; ++i) {
        batch.push_back(&train.examples[order[i]].tokens);
        batch_targets.push_back(targets[order[i]]);
      }
      model.zero_grads();
      Graph<Real> g;
      auto loss = batch_loss(g, model, batch, batch_targets, Mode::train, dropout_rng);
      const double loss_val = static_cast<double>(g.value(loss).at(0, 0));
      if (!std::isfinite(loss_val)) {
        throw NumericalError("non-finite loss at epoch " + std::to_string(epoch) +
                             " batch " + std::to_string(b));
      }
      loss_sum += loss_val * static_cast<double>(hi - lo);
      g.backward(loss);
      const double lr = cfg.optimizer == OptimizerKind::adam
                            ? stlr(iter, sched, cfg.stlr_cut_frac, cfg.stlr_ratio,
                                   cfg.eta_max)
                            : cfg.sgd_lr;
      if (cfg.optimizer == OptimizerKind::adam) {
        adam_step(model, opt, cfg, lr);
      } else {
        sgd_step(model, lr);
      }
      ++iter;
    }

    const double val_acc = accuracy_on(model, val);
    result.history.push_back(
        {epoch, loss_sum / static_cast<double>(train.size()), val_acc});
    if (val_acc > result.best_val_accuracy) {
      result.best_val_accuracy = val_acc;
      result.best_epoch = epoch;
      result.best_params = model.params;
    }
  }
  return result;
}

}  // namespace iest
