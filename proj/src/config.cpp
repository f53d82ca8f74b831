#include "iest/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace iest {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

std::size_t to_size(const std::string& key, const std::string& v) {
  try {
    return static_cast<std::size_t>(std::stoull(v));
  } catch (...) {
    throw std::runtime_error("config: bad integer for " + key + ": '" + v + "'");
  }
}

double to_double(const std::string& key, const std::string& v) {
  try {
    return std::stod(v);
  } catch (...) {
    throw std::runtime_error("config: bad number for " + key + ": '" + v + "'");
  }
}

std::vector<std::size_t> to_size_list(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  std::istringstream ss(v);
  std::string part;
  while (std::getline(ss, part, ',')) {
    part = trim(part);
    if (!part.empty()) out.push_back(to_size(key, part));
  }
  if (out.empty()) throw std::runtime_error("config: empty list for " + key);
  return out;
}

std::string join_sizes(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

// Fetch helper: record the key as consumed whether present or not.
const std::string* get(const KV& kv, const std::string& key,
                       std::set<std::string>* consumed) {
  if (consumed) consumed->insert(key);
  auto it = kv.find(key);
  return it == kv.end() ? nullptr : &it->second;
}

}  // namespace

KV parse_kv(std::string_view text) {
  KV kv;
  std::size_t pos = 0;
  std::size_t lineno = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string line = trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++lineno;
    if (line.empty() || line[0] == '#') {
      if (pos > text.size()) break;
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": expected key = value");
    }
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw std::runtime_error("config line " + std::to_string(lineno) + ": empty key");
    if (kv.count(key)) throw std::runtime_error("config: duplicate key '" + key + "'");
    kv[key] = value;
    if (pos > text.size()) break;
  }
  return kv;
}

std::string serialize_kv(const KV& kv) {
  std::string out;
  for (const auto& [k, v] : kv) {
    out += k;
    out += " = ";
    out += v;
    out += '\n';
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

ModelConfig model_config_from_kv(const KV& kv, std::set<std::string>* consumed) {
  ModelConfig cfg;
  if (const auto* v = get(kv, "encoder", consumed)) {
    if (*v == "char_cnn") cfg.encoder = ModelConfig::Encoder::char_cnn;
    else if (*v == "embedding_lookup") cfg.encoder = ModelConfig::Encoder::embedding_lookup;
    else throw std::runtime_error("config: unknown encoder '" + *v + "'");
  }
  if (const auto* v = get(kv, "char_vocab", consumed)) cfg.char_vocab = to_size("char_vocab", *v);
  if (const auto* v = get(kv, "char_emb_dim", consumed)) cfg.char_emb_dim = to_size("char_emb_dim", *v);
  if (const auto* v = get(kv, "cnn_filter_widths", consumed))
    cfg.cnn_filter_widths = to_size_list("cnn_filter_widths", *v);
  if (const auto* v = get(kv, "cnn_filter_counts", consumed))
    cfg.cnn_filter_counts = to_size_list("cnn_filter_counts", *v);
  if (const auto* v = get(kv, "word_char_cap", consumed)) cfg.word_char_cap = to_size("word_char_cap", *v);
  if (const auto* v = get(kv, "word_vocab", consumed)) cfg.word_vocab = to_size("word_vocab", *v);
  if (const auto* v = get(kv, "word_dim", consumed)) cfg.word_dim = to_size("word_dim", *v);
  if (const auto* v = get(kv, "lstm_hidden", consumed)) cfg.lstm_hidden = to_size("lstm_hidden", *v);
  if (const auto* v = get(kv, "pooling", consumed)) {
    if (*v == "max") cfg.pooling = ModelConfig::Pooling::max;
    else if (*v == "concat") cfg.pooling = ModelConfig::Pooling::concat_max_mean_last;
    else throw std::runtime_error("config: unknown pooling '" + *v + "'");
  }
  if (const auto* v = get(kv, "fc_hidden", consumed)) cfg.fc_hidden = to_size("fc_hidden", *v);
  if (const auto* v = get(kv, "num_classes", consumed)) cfg.num_classes = to_size("num_classes", *v);
  if (const auto* v = get(kv, "dropout_word", consumed)) cfg.dropout_word = to_double("dropout_word", *v);
  if (const auto* v = get(kv, "dropout_sentence", consumed))
    cfg.dropout_sentence = to_double("dropout_sentence", *v);
  if (const auto* v = get(kv, "dropout_fc", consumed)) cfg.dropout_fc = to_double("dropout_fc", *v);
  return cfg;
}

KV model_config_to_kv(const ModelConfig& cfg) {
  KV kv;
  kv["encoder"] =
      cfg.encoder == ModelConfig::Encoder::char_cnn ? "char_cnn" : "embedding_lookup";
  kv["char_vocab"] = std::to_string(cfg.char_vocab);
  kv["char_emb_dim"] = std::to_string(cfg.char_emb_dim);
  kv["cnn_filter_widths"] = join_sizes(cfg.cnn_filter_widths);
  kv["cnn_filter_counts"] = join_sizes(cfg.cnn_filter_counts);
  kv["word_char_cap"] = std::to_string(cfg.word_char_cap);
  kv["word_vocab"] = std::to_string(cfg.word_vocab);
  kv["word_dim"] = std::to_string(cfg.word_dim);
  kv["lstm_hidden"] = std::to_string(cfg.lstm_hidden);
  kv["pooling"] = cfg.pooling == ModelConfig::Pooling::max ? "max" : "concat";
  kv["fc_hidden"] = std::to_string(cfg.fc_hidden);
  kv["num_classes"] = std::to_string(cfg.num_classes);
  kv["dropout_word"] = format_double(cfg.dropout_word);
  kv["dropout_sentence"] = format_double(cfg.dropout_sentence);
  kv["dropout_fc"] = format_double(cfg.dropout_fc);
  return kv;
}

TrainConfig train_config_from_kv(const KV& kv, std::set<std::string>* consumed) {
  TrainConfig cfg;
  if (const auto* v = get(kv, "epochs", consumed)) cfg.epochs = to_size("epochs", *v);
  if (const auto* v = get(kv, "batch_size", consumed)) cfg.batch_size = to_size("batch_size", *v);
  if (const auto* v = get(kv, "optimizer", consumed)) {
    if (*v == "adam") cfg.optimizer = OptimizerKind::adam;
    else if (*v == "sgd") cfg.optimizer = OptimizerKind::sgd;
    else throw std::runtime_error("config: unknown optimizer '" + *v + "'");
  }
  if (const auto* v = get(kv, "adam_beta1", consumed)) cfg.adam_beta1 = to_double("adam_beta1", *v);
  if (const auto* v = get(kv, "adam_beta2", consumed)) cfg.adam_beta2 = to_double("adam_beta2", *v);
  if (const auto* v = get(kv, "adam_eps", consumed)) cfg.adam_eps = to_double("adam_eps", *v);
  if (const auto* v = get(kv, "stlr_cut_frac", consumed)) cfg.stlr_cut_frac = to_double("stlr_cut_frac", *v);
  if (const auto* v = get(kv, "stlr_ratio", consumed)) cfg.stlr_ratio = to_double("stlr_ratio", *v);
  if (const auto* v = get(kv, "eta_max", consumed)) cfg.eta_max = to_double("eta_max", *v);
  if (const auto* v = get(kv, "sgd_lr", consumed)) cfg.sgd_lr = to_double("sgd_lr", *v);
  if (const auto* v = get(kv, "seed", consumed)) cfg.seed = to_size("seed", *v);
  return cfg;
}

KV train_config_to_kv(const TrainConfig& cfg) {
  KV kv;
  kv["epochs"] = std::to_string(cfg.epochs);
  kv["batch_size"] = std::to_string(cfg.batch_size);
  kv["optimizer"] = cfg.optimizer == OptimizerKind::adam ? "adam" : "sgd";
  kv["adam_beta1"] = format_double(cfg.adam_beta1);
  kv["adam_beta2"] = format_double(cfg.adam_beta2);
  kv["adam_eps"] = format_double(cfg.adam_eps);
  kv["stlr_cut_frac"] = format_double(cfg.stlr_cut_frac);
  kv["stlr_ratio"] = format_double(cfg.stlr_ratio);
  kv["eta_max"] = format_double(cfg.eta_max);
  kv["sgd_lr"] = format_double(cfg.sgd_lr);
  kv["seed"] = std::to_string(cfg.seed);
  return kv;
}

FullConfig parse_config_text(std::string_view text) {
  KV kv = parse_kv(text);
  std::set<std::string> consumed;
  FullConfig fc;
  fc.model = model_config_from_kv(kv, &consumed);
  fc.train = train_config_from_kv(kv, &consumed);
  for (const auto& [k, v] : kv) {
    if (!consumed.count(k)) throw std::runtime_error("config: unknown key '" + k + "'");
  }
  return fc;
}

FullConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void apply_override(KV& kv, std::string_view assignment) {
  std::size_t eq = assignment.find('=');
  if (eq == std::string_view::npos)
    throw std::runtime_error("override must be key=value: '" + std::string(assignment) + "'");
  std::string key = trim(assignment.substr(0, eq));
  std::string value = trim(assignment.substr(eq + 1));
  kv[key] = value;
}

}  // namespace iest
