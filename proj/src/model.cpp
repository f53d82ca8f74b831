#include "iest/model.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace iest {

std::vector<std::string> build_word_vocab(
    const std::vector<std::vector<Token>>& examples, std::size_t max_size) {
  std::map<std::string, std::size_t> counts;
  for (const auto& toks : examples) {
    for (const auto& t : toks) counts[t.text] += 1;
  }
  std::vector<std::pair<std::string, std::size_t>> entries(counts.begin(),
                                                           counts.end());
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (entries.size() > max_size) entries.resize(max_size);
  std::vector<std::string> vocab;
  vocab.reserve(entries.size());
  for (auto& [word, n] : entries) vocab.push_back(word);
  return vocab;
}

std::map<std::string, std::vector<double>> load_word_vectors(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open word vectors: " + path);
  std::map<std::string, std::vector<double>> out;
  std::string line;
  std::size_t dim = 0;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    std::vector<double> vec;
    double v;
    while (ss >> v) vec.push_back(v);
    if (vec.empty()) continue;
    if (dim == 0) dim = vec.size();
    if (vec.size() != dim) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": inconsistent vector dimension");
    }
    out[word] = std::move(vec);
  }
  return out;
}

}  // namespace iest
