#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "iest/training.hpp"
#include "iest/model.hpp"
#include "iest/rng.hpp"

#include <cmath>
#include <numeric>

using namespace iest;

namespace {

// Scalar Adam reimplemented from the update equations, independent of the
// production code path.
struct ScalarAdam {
  double m = 0, v = 0;
  int t = 0;
  double step(double w, double g, double lr, double b1, double b2, double eps) {
    t += 1;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mhat = m / (1 - std::pow(b1, t));
    const double vhat = v / (1 - std::pow(b2, t));
    return w - lr * mhat / (std::sqrt(vhat) + eps);
  }
};

Model<double> scalar_model(double w0) {
  Model<double> m;
  Tensor<double> t(1, 1, w0);
  t.set_requires_grad(true);
  t.zero_grad();
  m.params.emplace("w", std::move(t));
  return m;
}

ModelConfig tiny_config() {
  ModelConfig cfg;
  cfg.char_vocab = 17;
  cfg.char_emb_dim = 4;
  cfg.cnn_filter_widths = {1, 2};
  cfg.cnn_filter_counts = {4, 4};
  cfg.word_char_cap = 8;
  cfg.word_dim = 8;
  cfg.lstm_hidden = 8;
  cfg.fc_hidden = 8;
  cfg.dropout_word = 0.0;
  cfg.dropout_sentence = 0.0;
  cfg.dropout_fc = 0.0;
  return cfg;
}

// 32 examples where one cue word fully determines the label.
Dataset cue_dataset() {
  static const char* cues[6] = {"grr", "eww", "eek", "yay", "sob", "wow"};
  Dataset ds;
  for (int i = 0; i < 32; ++i) {
    const int c = i % 6;
    Example e;
    e.tweet.label = static_cast<EmotionLabel>(c);
    e.tokens = {{"i", TokenKind::word},
                {"felt", TokenKind::word},
                {cues[c], TokenKind::word}};
    ds.examples.push_back(e);
  }
  return ds;
}

}  // namespace

TEST_CASE("stlr hits the reference endpoints exactly") {
  // 153,383 training examples in batches of 64 over 10 epochs
  const std::size_t bpe = (153383 + 63) / 64;
  CHECK(bpe == 2397);
  auto sched = ScheduleState::make(10 * bpe, 0.1);
  CHECK(sched.total_iters == 23970);
  CHECK(sched.cut == 2397);

  const double eta0 = stlr(0, sched, 0.1, 32.0, 0.001);
  const double eta_cut = stlr(2397, sched, 0.1, 32.0, 0.001);
  const double eta_end = stlr(23970, sched, 0.1, 32.0, 0.001);
  CHECK(std::abs(eta0 - 3.125e-5) < 1e-12);
  CHECK(std::abs(eta_cut - 1e-3) < 1e-12);
  CHECK(std::abs(eta_end - 3.125e-5) < 1e-12);

  CHECK_THROWS(stlr(23971, sched, 0.1, 32.0, 0.001));
}

TEST_CASE("stlr is unimodal with its peak at the cut") {
  auto sched = ScheduleState::make(1000, 0.1);
  double prev = stlr(0, sched, 0.1, 32.0, 0.001);
  for (std::size_t t = 1; t <= sched.cut; ++t) {
    const double cur = stlr(t, sched, 0.1, 32.0, 0.001);
    CHECK(cur > prev);
    prev = cur;
  }
  for (std::size_t t = sched.cut + 1; t <= 1000; ++t) {
    const double cur = stlr(t, sched, 0.1, 32.0, 0.001);
    CHECK(cur < prev);
    prev = cur;
  }
  // peak value is eta_max itself
  CHECK(stlr(sched.cut, sched, 0.1, 32.0, 0.001) == doctest::Approx(0.001).epsilon(1e-12));
}

TEST_CASE("very short schedules stay finite") {
  // cut_frac * T < 1 used to produce cut = 0 and a division by zero
  for (std::size_t T : {1u, 2u, 6u, 9u}) {
    auto sched = ScheduleState::make(T, 0.1);
    CHECK(sched.cut >= 1);
    for (std::size_t t = 0; t <= T; ++t) {
      const double lr = stlr(t, sched, 0.1, 32.0, 0.001);
      CHECK(std::isfinite(lr));
      CHECK(lr > 0.0);
      CHECK(lr <= 0.001 + 1e-15);
    }
  }
}

TEST_CASE("adam first step moves by almost exactly the learning rate") {
  auto m = scalar_model(0.5);
  m.p("w").grad[0] = 0.3;
  OptimizerState<double> st;
  TrainConfig cfg;
  adam_step(m, st, cfg, 0.001);
  // mhat = g, vhat = g^2  =>  step = lr * g / (|g| + eps)
  const double want = 0.5 - 0.001 * 0.3 / (0.3 + cfg.adam_eps);
  CHECK(std::abs(m.p("w").data[0] - want) < 1e-12);
}

TEST_CASE("adam matches an independent scalar implementation over steps") {
  auto m = scalar_model(-0.2);
  OptimizerState<double> st;
  TrainConfig cfg;
  ScalarAdam oracle;
  double w = -0.2;
  const double grads[] = {0.7, -1.3, 0.05, 2.0, -0.4};
  for (double g : grads) {
    m.p("w").grad[0] = g;
    adam_step(m, st, cfg, 0.01);
    w = oracle.step(w, g, 0.01, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
    CHECK(std::abs(m.p("w").data[0] - w) < 1e-12);
  }
}

TEST_CASE("adam leaves parameters alone under zero gradients") {
  auto m = scalar_model(0.25);
  OptimizerState<double> st;
  TrainConfig cfg;
  for (int i = 0; i < 3; ++i) {
    m.p("w").grad[0] = 0.0;
    adam_step(m, st, cfg, 0.01);
  }
  CHECK(m.p("w").data[0] == 0.25);
}

TEST_CASE("sgd applies the plain update rule") {
  auto m = scalar_model(1.0);
  m.p("w").grad[0] = 0.5;
  sgd_step(m, 0.1);
  CHECK(m.p("w").data[0] == doctest::Approx(1.0 - 0.05).epsilon(1e-15));
}

TEST_CASE("optimizers require gradients to be present") {
  Model<double> m;
  Tensor<double> t(1, 1, 0.0);
  t.set_requires_grad(true);
  t.grad.clear();  // simulate a missing backward pass
  m.params.emplace("w", std::move(t));
  OptimizerState<double> st;
  TrainConfig cfg;
  CHECK_THROWS(adam_step(m, st, cfg, 0.01));
  CHECK_THROWS(sgd_step(m, 0.01));
}

TEST_CASE("train config validation") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  TrainConfig bad = cfg;
  bad.epochs = 0;
  CHECK_THROWS(bad.validate());
  bad = cfg;
  bad.stlr_cut_frac = 1.0;
  CHECK_THROWS(bad.validate());
  bad = cfg;
  bad.stlr_ratio = 1.0;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("epoch shuffling is a deterministic permutation") {
  Rng rng = Rng::split(7, "shuffle");
  std::vector<std::size_t> order(16);
  std::iota(order.begin(), order.end(), 0);
  const auto original = order;
  rng.shuffle(order);
  auto first = order;
  rng.shuffle(order);
  auto sorted = order;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == original);  // still a permutation
  CHECK(first != order);      // epochs see different orders

  // same seed stream replays identically
  Rng rng2 = Rng::split(7, "shuffle");
  auto replay = original;
  rng2.shuffle(replay);
  CHECK(replay == first);
}

TEST_CASE("same seed reproduces the exact training trajectory") {
  auto ds = cue_dataset();
  TrainConfig tc;
  tc.epochs = 3;
  tc.batch_size = 8;
  tc.seed = 99;

  auto run = [&] {
    Rng init = Rng::split(tc.seed, "init");
    auto model = build_model<float>(tiny_config(), init);
    return fit(model, ds, ds, tc);
  };
  auto r1 = run();
  auto r2 = run();
  REQUIRE(r1.history.size() == r2.history.size());
  for (std::size_t i = 0; i < r1.history.size(); ++i) {
    CHECK(r1.history[i].train_loss == r2.history[i].train_loss);
    CHECK(r1.history[i].val_accuracy == r2.history[i].val_accuracy);
  }
  CHECK(r1.best_epoch == r2.best_epoch);
  for (const auto& [name, t] : r1.best_params)
    CHECK(t.data == r2.best_params.at(name).data);
}

TEST_CASE("a small model overfits 32 cue examples") {
  auto ds = cue_dataset();
  TrainConfig tc;
  tc.epochs = 200;
  tc.batch_size = 8;
  tc.eta_max = 0.003;
  tc.seed = 12345;

  Rng init = Rng::split(tc.seed, "init");
  auto model = build_model<float>(tiny_config(), init);
  auto result = fit(model, ds, ds, tc);
  CHECK(result.best_val_accuracy == 1.0);
  CHECK(result.best_epoch < 200);
}

TEST_CASE("fit rejects empty datasets") {
  Dataset empty;
  auto ds = cue_dataset();
  TrainConfig tc;
  Rng init = Rng::split(0, "init");
  auto model = build_model<float>(tiny_config(), init);
  CHECK_THROWS(fit(model, empty, ds, tc));
  CHECK_THROWS(fit(model, ds, empty, tc));
}
