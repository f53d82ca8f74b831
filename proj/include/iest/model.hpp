#pragma once

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "iest/graph.hpp"
#include "iest/tokenizer.hpp"
#include "iest/unicode.hpp"

namespace iest {

struct ModelConfig {
  enum class Encoder { char_cnn, embedding_lookup };
  enum class Pooling { max, concat_max_mean_last };

  Encoder encoder = Encoder::char_cnn;
  // char-CNN encoder
  std::size_t char_vocab = 512;  // hashed codepoint buckets, id 0 = pad
  std::size_t char_emb_dim = 16;
  std::vector<std::size_t> cnn_filter_widths = {1, 2, 3, 4, 5};
  std::vector<std::size_t> cnn_filter_counts = {16, 16, 16, 16, 16};
  std::size_t word_char_cap = 64;  // longer words are truncated
  // embedding-lookup encoder (the pretrained-embedding ablation)
  std::size_t word_vocab = 0;  // set when the vocabulary is built

  std::size_t word_dim = 64;
  std::size_t lstm_hidden = 128;  // per direction
  Pooling pooling = Pooling::max;
  std::size_t fc_hidden = 64;
  std::size_t num_classes = kNumClasses;

  double dropout_word = 0.5;
  double dropout_sentence = 0.1;
  double dropout_fc = 0.5;

  std::size_t pooled_dim() const {
    const std::size_t base = 2 * lstm_hidden;
    return pooling == Pooling::max ? base : 3 * base;
  }
  std::size_t total_filters() const {
    std::size_t n = 0;
    for (auto c : cnn_filter_counts) n += c;
    return n;
  }

  void validate() const;
};

// Named parameter tensors plus the word vocabulary (embedding-lookup mode).
// std::map keeps registration order deterministic for the optimizer and the
// checkpoint writer.
template <class Real>
struct Model {
  ModelConfig config;
  std::map<std::string, Tensor<Real>> params;
  std::vector<std::string> word_vocab;  // row i+1 of word_emb; row 0 = unknown
  std::unordered_map<std::string, int> word_index;

  Tensor<Real>& p(const std::string& name) {
    auto it = params.find(name);
    if (it == params.end()) throw std::runtime_error("unknown parameter: " + name);
    return it->second;
  }
  const Tensor<Real>& p(const std::string& name) const {
    auto it = params.find(name);
    if (it == params.end()) throw std::runtime_error("unknown parameter: " + name);
    return it->second;
  }

  void rebuild_word_index() {
    word_index.clear();
    for (std::size_t i = 0; i < word_vocab.size(); ++i)
      word_index[word_vocab[i]] = static_cast<int>(i) + 1;
  }

  void zero_grads() {
    for (auto& [name, t] : params) t.zero_grad();
  }
};

inline void ModelConfig::validate() const {
  auto positive = [](std::size_t v, const char* what) {
    if (v == 0) throw std::runtime_error(std::string("config: ") + what + " must be positive");
  };
  positive(word_dim, "word_dim");
  positive(lstm_hidden, "lstm_hidden");
  positive(fc_hidden, "fc_hidden");
  if (num_classes != static_cast<std::size_t>(kNumClasses))
    throw std::runtime_error("config: num_classes must be 6");
  if (encoder == Encoder::char_cnn) {
    positive(char_vocab, "char_vocab");
    positive(char_emb_dim, "char_emb_dim");
    if (cnn_filter_widths.empty() ||
        cnn_filter_widths.size() != cnn_filter_counts.size())
      throw std::runtime_error("config: filter widths/counts mismatch");
  }
  for (double p : {dropout_word, dropout_sentence, dropout_fc}) {
    if (p < 0.0 || p >= 1.0) throw std::runtime_error("config: dropout must be in [0,1)");
  }
}

namespace detail {
inline const char* kGateNames[4] = {"i", "f", "o", "g"};
}

// Builds parameter tensors with uniform(-1/sqrt(fan_in), +1/sqrt(fan_in))
// init; biases zero except the LSTM forget bias, which starts at 1.
template <class Real>
Model<Real> build_model(const ModelConfig& cfg, Rng& rng) {
  cfg.validate();
  Model<Real> m;
  m.config = cfg;
  auto add = [&](const std::string& name, std::size_t r, std::size_t c,
                 std::size_t fan_in) {
    Tensor<Real> t(r, c);
    if (fan_in > 0) t.init_uniform(rng, fan_in);
    t.set_requires_grad(true);
    m.params.emplace(name, std::move(t));
  };

  if (cfg.encoder == ModelConfig::Encoder::char_cnn) {
    add("char_emb", cfg.char_vocab, cfg.char_emb_dim, cfg.char_emb_dim);
    for (std::size_t k = 0; k < cfg.cnn_filter_widths.size(); ++k) {
      const std::size_t w = cfg.cnn_filter_widths[k];
      const std::size_t n = cfg.cnn_filter_counts[k];
      add("conv_w" + std::to_string(w), w * cfg.char_emb_dim, n,
          w * cfg.char_emb_dim);
      add("conv_b" + std::to_string(w), 1, n, 0);
    }
    add("proj_w", cfg.total_filters(), cfg.word_dim, cfg.total_filters());
    add("proj_b", 1, cfg.word_dim, 0);
  } else {
    if (cfg.word_vocab == 0)
      throw std::runtime_error("config: embedding_lookup needs word_vocab > 0");
    // row 0 is the shared unknown-word vector
    add("word_emb", cfg.word_vocab + 1, cfg.word_dim, cfg.word_dim);
  }

  for (const char* dir : {"fwd", "bwd"}) {
    for (const char* gate : detail::kGateNames) {
      std::string base = std::string("lstm_") + dir + "_";
      add(base + "W" + gate, cfg.word_dim, cfg.lstm_hidden, cfg.word_dim);
      add(base + "U" + gate, cfg.lstm_hidden, cfg.lstm_hidden, cfg.lstm_hidden);
      Tensor<Real> b(1, cfg.lstm_hidden,
                     std::string(gate) == "f" ? Real(1) : Real(0));
      b.set_requires_grad(true);
      m.params.emplace(base + "b" + gate, std::move(b));
    }
  }

  add("fc_w1", cfg.pooled_dim(), cfg.fc_hidden, cfg.pooled_dim());
  add("fc_b1", 1, cfg.fc_hidden, 0);
  add("fc_w2", cfg.fc_hidden, cfg.num_classes, cfg.fc_hidden);
  add("fc_b2", 1, cfg.num_classes, 0);
  return m;
}

// Characters hash into a fixed bucket table, so any unseen word still maps
// to a usable id sequence. id 0 is reserved for padding.
inline std::vector<int> char_ids(const std::string& word, const ModelConfig& cfg) {
  std::vector<int> ids;
  auto cps = utf8_decode(word);
  if (cps.size() > cfg.word_char_cap) cps.resize(cfg.word_char_cap);
  ids.reserve(cps.size());
  for (char32_t cp : cps)
    ids.push_back(1 + static_cast<int>(cp % (cfg.char_vocab - 1)));
  // pad so the widest filter always fits
  std::size_t min_len = 1;
  for (auto w : cfg.cnn_filter_widths) min_len = std::max(min_len, w);
  while (ids.size() < min_len) ids.push_back(0);
  return ids;
}

template <class Real>
class ModelForward {
 public:
  using Var = typename Graph<Real>::Var;

  ModelForward(Graph<Real>& g, Model<Real>& model, Mode mode, Rng& rng)
      : g_(g), model_(model), cfg_(model.config), mode_(mode), rng_(rng) {
    for (auto& [name, t] : model_.params) leaves_.emplace(name, g_.leaf(&t));
  }

  Var param(const std::string& name) const { return leaves_.at(name); }

  // One word -> [1 x word_dim].
  Var encode_word(const Token& tok) {
    if (cfg_.encoder == ModelConfig::Encoder::char_cnn) {
      auto ids = char_ids(tok.text, cfg_);
      Var emb = g_.embedding(param("char_emb"), ids);
      Var feat = -1;
      for (std::size_t k = 0; k < cfg_.cnn_filter_widths.size(); ++k) {
        const std::size_t w = cfg_.cnn_filter_widths[k];
        Var conv = g_.conv_max_over_time(emb, param("conv_w" + std::to_string(w)), w);
        conv = g_.add(conv, param("conv_b" + std::to_string(w)));
        feat = feat < 0 ? conv : g_.concat_cols(feat, conv);
      }
      feat = g_.relu(feat);
      return g_.add(g_.matmul(feat, param("proj_w")), param("proj_b"));
    }
    auto it = model_.word_index.find(tok.text);
    int id = it == model_.word_index.end() ? 0 : it->second;
    return g_.embedding(param("word_emb"), {id});
  }

  // Token sequence -> word vectors with word-level dropout in train mode.
  std::vector<Var> encode_words(const std::vector<Token>& tokens) {
    if (tokens.empty()) throw std::runtime_error("encode_words: empty token sequence");
    std::vector<Var> words;
    words.reserve(tokens.size());
    for (const auto& t : tokens) {
      words.push_back(
          g_.dropout(encode_word(t), cfg_.dropout_word, mode_, rng_));
    }
    return words;
  }

  // i = sigma(x W_i + h U_i + b_i), f, o likewise; g = tanh(...);
  // c = f.c_prev + i.g; h = o.tanh(c)
  std::pair<Var, Var> lstm_cell(Var x, Var h_prev, Var c_prev,
                                const std::string& prefix) {
    auto gate = [&](const char* name) {
      return g_.add(g_.add(g_.matmul(x, param(prefix + "W" + name)),
                           g_.matmul(h_prev, param(prefix + "U" + name))),
                    param(prefix + "b" + name));
    };
    Var i = g_.sigmoid(gate("i"));
    Var f = g_.sigmoid(gate("f"));
    Var o = g_.sigmoid(gate("o"));
    Var gg = g_.tanh(gate("g"));
    Var c = g_.add(g_.mul(f, c_prev), g_.mul(i, gg));
    Var h = g_.mul(o, g_.tanh(c));
    return {h, c};
  }

  // [T x 2h]: forward direction reads t = 0..T-1, backward reads T-1..0;
  // per-timestep concatenation of the two hidden states.
  Var bilstm(const std::vector<Var>& words) {
    const std::size_t T = words.size();
    Var h0 = g_.constant(Tensor<Real>(1, cfg_.lstm_hidden));
    Var c0 = g_.constant(Tensor<Real>(1, cfg_.lstm_hidden));

    std::vector<Var> fwd(T), bwd(T);
    Var h = h0, c = c0;
    for (std::size_t t = 0; t < T; ++t) {
      std::tie(h, c) = lstm_cell(words[t], h, c, "lstm_fwd_");
      fwd[t] = h;
    }
    h = h0;
    c = c0;
    for (std::size_t t = T; t-- > 0;) {
      std::tie(h, c) = lstm_cell(words[t], h, c, "lstm_bwd_");
      bwd[t] = h;
    }
    std::vector<Var> rows(T);
    for (std::size_t t = 0; t < T; ++t) rows[t] = g_.concat_cols(fwd[t], bwd[t]);
    return g_.stack_rows(rows);
  }

  // [1 x D] sentence vector with sentence-level dropout in train mode.
  Var pool(Var states, std::size_t valid_len) {
    Var pooled;
    if (cfg_.pooling == ModelConfig::Pooling::max) {
      pooled = g_.masked_max_pool(states, valid_len);
    } else {
      Var mx = g_.masked_max_pool(states, valid_len);
      Var mean = g_.masked_mean_pool(states, valid_len);
      Var last = g_.select_row(states, valid_len - 1);
      pooled = g_.concat_cols(g_.concat_cols(mx, mean), last);
    }
    return g_.dropout(pooled, cfg_.dropout_sentence, mode_, rng_);
  }

  // logits = W2 . dropout(relu(W1 . pooled + b1)) + b2
  Var classify(Var pooled) {
    Var hidden = g_.relu(g_.add(g_.matmul(pooled, param("fc_w1")), param("fc_b1")));
    hidden = g_.dropout(hidden, cfg_.dropout_fc, mode_, rng_);
    return g_.add(g_.matmul(hidden, param("fc_w2")), param("fc_b2"));
  }

  // Full pipeline for one example -> [1 x 6] logits.
  Var forward(const std::vector<Token>& tokens) {
    auto words = encode_words(tokens);
    Var states = bilstm(words);
    return classify(pool(states, words.size()));
  }

 private:
  Graph<Real>& g_;
  Model<Real>& model_;
  const ModelConfig& cfg_;
  Mode mode_;
  Rng& rng_;
  std::map<std::string, Var> leaves_;
};

// Mean cross-entropy over a batch of examples. Returns the scalar loss Var.
template <class Real>
typename Graph<Real>::Var batch_loss(Graph<Real>& g, Model<Real>& model,
                                     const std::vector<const std::vector<Token>*>& batch,
                                     const std::vector<int>& targets, Mode mode,
                                     Rng& rng) {
  ModelForward<Real> fw(g, model, mode, rng);
  std::vector<typename Graph<Real>::Var> losses;
  losses.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    auto logits = fw.forward(*batch[i]);
    losses.push_back(g.softmax_cross_entropy(logits, {targets[i]}));
  }
  return g.mean_scalars(losses);
}

// Eval-mode class probabilities, one row per example; rows sum to 1.
template <class Real>
Tensor<double> predict_proba(Model<Real>& model,
                             const std::vector<std::vector<Token>>& examples) {
  Tensor<double> out(examples.size(), model.config.num_classes);
  Rng rng(0);  // unused in eval mode
  for (std::size_t i = 0; i < examples.size(); ++i) {
    Graph<Real> g(/*grad_enabled=*/false);
    ModelForward<Real> fw(g, model, Mode::eval, rng);
    auto logits = g.value(fw.forward(examples[i]));
    Tensor<Real> probs = softmax_rows(logits);
    for (std::size_t j = 0; j < out.cols(); ++j)
      out.at(i, j) = static_cast<double>(probs.at(0, j));
  }
  return out;
}

// Eval-mode pooled sentence vectors, one row per example.
template <class Real>
Tensor<double> sentence_representations(
    Model<Real>& model, const std::vector<std::vector<Token>>& examples) {
  Tensor<double> out(examples.size(), model.config.pooled_dim());
  Rng rng(0);
  for (std::size_t i = 0; i < examples.size(); ++i) {
    Graph<Real> g(/*grad_enabled=*/false);
    ModelForward<Real> fw(g, model, Mode::eval, rng);
    auto words = fw.encode_words(examples[i]);
    auto pooled = g.value(fw.pool(fw.bilstm(words), words.size()));
    for (std::size_t j = 0; j < out.cols(); ++j)
      out.at(i, j) = static_cast<double>(pooled.at(0, j));
  }
  return out;
}

// argmax with lowest-index tie-break.
template <class Real>
std::vector<int> argmax_rows(const Tensor<Real>& probs) {
  std::vector<int> out(probs.rows());
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    int best = 0;
    for (std::size_t j = 1; j < probs.cols(); ++j)
      if (probs.at(i, j) > probs.at(i, best)) best = static_cast<int>(j);
    out[i] = best;
  }
  return out;
}

// Builds the embedding-lookup vocabulary from a token stream, most frequent
// first, ties by lexicographic order.
std::vector<std::string> build_word_vocab(
    const std::vector<std::vector<Token>>& examples, std::size_t max_size);

// Text-format vector loader: one `word v1 v2 ... vd` per line. Rows of the
// table whose word is found are overwritten; returns the number applied.
template <class Real>
std::size_t apply_word_vectors(Model<Real>& model,
                               const std::map<std::string, std::vector<double>>& vecs) {
  auto& table = model.p("word_emb");
  std::size_t applied = 0;
  for (const auto& [word, vec] : vecs) {
    auto it = model.word_index.find(word);
    if (it == model.word_index.end()) continue;
    if (vec.size() != table.cols())
      throw std::runtime_error("word vector dimension mismatch for '" + word + "'");
    for (std::size_t j = 0; j < table.cols(); ++j)
      table.at(it->second, j) = static_cast<Real>(vec[j]);
    ++applied;
  }
  return applied;
}

std::map<std::string, std::vector<double>> load_word_vectors(const std::string& path);

}  // namespace iest
