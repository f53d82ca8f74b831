#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "iest/checkpoint.hpp"
#include "iest/config.hpp"
#include "iest/rng.hpp"

#include <cstdio>
#include <fstream>
#include <string>

using namespace iest;

namespace {

std::string tmp_path(const std::string& name) {
  return std::string(IEST_TEST_TMP) + "/" + name;
}

ModelConfig tiny_config() {
  ModelConfig cfg;
  cfg.char_vocab = 17;
  cfg.char_emb_dim = 3;
  cfg.cnn_filter_widths = {1, 2};
  cfg.cnn_filter_counts = {2, 2};
  cfg.word_char_cap = 8;
  cfg.word_dim = 4;
  cfg.lstm_hidden = 3;
  cfg.fc_hidden = 4;
  return cfg;
}

}  // namespace

TEST_CASE("key=value text round-trips") {
  KV kv = {{"alpha", "1"}, {"beta", "two words"}, {"gamma", "0.125"}};
  auto back = parse_kv(serialize_kv(kv));
  CHECK(back == kv);
}

TEST_CASE("kv parser handles comments, blanks, and errors") {
  auto kv = parse_kv("# header\n\n a = 1 \nb=2  # not a comment marker mid-line\n");
  CHECK(kv.at("a") == "1");
  CHECK(kv.at("b") == "2  # not a comment marker mid-line");
  CHECK_THROWS(parse_kv("a = 1\na = 2\n"));  // duplicate key
  CHECK_THROWS(parse_kv("no equals sign\n"));
}

TEST_CASE("doubles survive the text format exactly") {
  for (double v : {0.1, 1e-300, 3.141592653589793, -0.0, 12345.6789e10}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("model and train configs round-trip through kv") {
  ModelConfig mc = tiny_config();
  mc.pooling = ModelConfig::Pooling::concat_max_mean_last;
  mc.dropout_word = 0.25;
  std::set<std::string> consumed;
  auto mc2 = model_config_from_kv(model_config_to_kv(mc), &consumed);
  CHECK(mc2.char_vocab == mc.char_vocab);
  CHECK(mc2.cnn_filter_widths == mc.cnn_filter_widths);
  CHECK(mc2.cnn_filter_counts == mc.cnn_filter_counts);
  CHECK(mc2.pooling == mc.pooling);
  CHECK(mc2.dropout_word == mc.dropout_word);

  TrainConfig tc;
  tc.epochs = 7;
  tc.optimizer = OptimizerKind::sgd;
  tc.eta_max = 0.0025;
  tc.seed = 987654321;
  auto tc2 = train_config_from_kv(train_config_to_kv(tc), &consumed);
  CHECK(tc2.epochs == tc.epochs);
  CHECK(tc2.optimizer == tc.optimizer);
  CHECK(tc2.eta_max == tc.eta_max);
  CHECK(tc2.seed == tc.seed);
}

TEST_CASE("unknown config keys are rejected") {
  CHECK_THROWS(parse_config_text("epochs = 3\nnot_a_real_key = 1\n"));
  CHECK_NOTHROW(parse_config_text("epochs = 3\nword_dim = 16\n"));
}

TEST_CASE("overrides replace or add keys") {
  KV kv = {{"epochs", "3"}};
  apply_override(kv, "epochs=5");
  CHECK(kv.at("epochs") == "5");
  apply_override(kv, "eta_max=0.01");
  CHECK(kv.at("eta_max") == "0.01");
  CHECK_THROWS(apply_override(kv, "missing-equals"));
}

TEST_CASE("checkpoint container round-trips tensors and blob") {
  Checkpoint ck;
  ck.config = {{"note", "fixture"}, {"epochs", "3"}};
  Rng rng(11);
  Tensor<float> a(3, 5);
  for (auto& v : a.data) v = static_cast<float>(rng.uniform(-2.0, 2.0));
  Tensor<float> b(1, 7, 0.5f);
  ck.tensors.emplace("a", a);
  ck.tensors.emplace("b", b);

  const auto path = tmp_path("container.ckpt");
  save_checkpoint(ck, path);
  auto back = load_checkpoint(path);
  CHECK(back.config == ck.config);
  REQUIRE(back.tensors.size() == 2);
  CHECK(back.tensors.at("a").shape == a.shape);
  CHECK(back.tensors.at("a").data == a.data);
  CHECK(back.tensors.at("b").data == b.data);
}

TEST_CASE("corrupted files are rejected") {
  const auto path = tmp_path("corrupt.ckpt");
  {
    std::ofstream out(path, std::ios::binary);
    out << "IESTM2 this is not a checkpoint";
  }
  CHECK_THROWS(load_checkpoint(path));
  {
    std::ofstream out(path, std::ios::binary);
    out << "IE";  // truncated before the magic completes
  }
  CHECK_THROWS(load_checkpoint(path));
  CHECK_THROWS(load_checkpoint(tmp_path("does_not_exist.ckpt")));
}

TEST_CASE("a model survives save and load bit-for-bit") {
  Rng rng(21);
  auto model = build_model<float>(tiny_config(), rng);
  const auto path = tmp_path("model.ckpt");
  save_model(model, path);
  auto back = load_model(path);

  REQUIRE(back.params.size() == model.params.size());
  for (const auto& [name, t] : model.params) {
    CHECK(back.params.at(name).shape == t.shape);
    CHECK(back.params.at(name).data == t.data);
  }
  CHECK(back.config.char_vocab == model.config.char_vocab);
  CHECK(back.config.cnn_filter_widths == model.config.cnn_filter_widths);
  CHECK(back.config.word_dim == model.config.word_dim);
}

TEST_CASE("word vocabulary persists with lookup models") {
  ModelConfig cfg = tiny_config();
  cfg.encoder = ModelConfig::Encoder::embedding_lookup;
  cfg.word_vocab = 3;
  Rng rng(23);
  auto model = build_model<float>(cfg, rng);
  model.word_vocab = {"one", "two", "three"};
  model.rebuild_word_index();

  const auto path = tmp_path("lookup.ckpt");
  save_model(model, path);
  auto back = load_model(path);
  CHECK(back.word_vocab == model.word_vocab);
  CHECK(back.word_index.at("three") == 3);
  CHECK(back.params.at("word_emb").data == model.params.at("word_emb").data);
}

TEST_CASE("probability caches round-trip with their digest") {
  Tensor<double> probs(4, 6);
  Rng rng(31);
  for (std::size_t i = 0; i < 4; ++i) {
    double sum = 0;
    for (std::size_t j = 0; j < 6; ++j) {
      probs.at(i, j) = rng.uniform(0.0, 1.0);
      sum += probs.at(i, j);
    }
    for (std::size_t j = 0; j < 6; ++j) probs.at(i, j) /= sum;
  }
  const auto path = tmp_path("probs.ckpt");
  save_probability_matrix(probs, "deadbeef01234567", path);
  std::string digest;
  auto back = load_probability_matrix(path, &digest);
  CHECK(digest == "deadbeef01234567");
  REQUIRE(back.shape == probs.shape);
  // float32 storage: equal after the same down-conversion
  for (std::size_t i = 0; i < probs.data.size(); ++i)
    CHECK(back.data[i] == static_cast<double>(static_cast<float>(probs.data[i])));
}
