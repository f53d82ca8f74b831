#include "iest/dataset.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace iest {

bool Dataset::labeled() const {
  for (const auto& e : examples) {
    if (!e.tweet.label) return false;
  }
  return !examples.empty();
}

std::vector<int> Dataset::labels() const {
  std::vector<int> out;
  out.reserve(examples.size());
  for (const auto& e : examples) {
    if (!e.tweet.label) throw std::runtime_error("dataset is not fully labeled");
    out.push_back(static_cast<int>(*e.tweet.label));
  }
  return out;
}

Dataset load_dataset(const std::string& path, const EmojiDatabase& db,
                     bool apply_substitutions, bool strip_emoji_tokens) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open dataset: " + path);
  Dataset ds;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    Example ex;
    std::size_t tab = line.find('\t');
    std::string text;
    if (tab != std::string::npos) {
      auto label = label_from_name(line.substr(0, tab));
      if (!label) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": unknown label '" + line.substr(0, tab) + "'");
      }
      ex.tweet.label = *label;
      text = line.substr(tab + 1);
    } else {
      text = line;
    }
    ex.tweet.text = apply_substitutions ? preprocess_substitute(text) : text;
    ex.tokens = tokenize(ex.tweet.text, db);
    if (strip_emoji_tokens) ex.tokens = strip_emoji(ex.tokens);
    ex.features = extract_features(ex.tokens, db);
    ds.examples.push_back(std::move(ex));
  }
  return ds;
}

void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write dataset: " + path);
  for (const auto& e : ds.examples) {
    if (e.tweet.label) out << label_name(*e.tweet.label) << '\t';
    out << detokenize(e.tokens) << '\n';
  }
}

std::vector<int> load_label_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open label file: " + path);
  std::vector<int> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    // Accept either a bare label or label<TAB>text.
    std::string name = line.substr(0, line.find('\t'));
    auto label = label_from_name(name);
    if (!label) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": unknown label '" + name + "'");
    }
    out.push_back(static_cast<int>(*label));
  }
  return out;
}

void save_label_file(const std::vector<int>& labels, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write label file: " + path);
  for (int c : labels) out << label_name(static_cast<EmotionLabel>(c)) << '\n';
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file for digest: " + path);
  std::uint64_t h = 1469598103934665603ULL;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
    if (!in) break;
  }
  std::ostringstream ss;
  ss << std::hex << h;
  return ss.str();
}

}  // namespace iest
