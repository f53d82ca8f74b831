#pragma once

#include <string>
#include <vector>

#include "iest/tokenizer.hpp"

namespace iest {

// One dataset line after preprocessing: label<TAB>text, or bare text.
struct Example {
  RawTweet tweet;
  std::vector<Token> tokens;
  TweetFeatures features;
};

struct Dataset {
  std::vector<Example> examples;

  std::size_t size() const { return examples.size(); }
  bool labeled() const;
  std::vector<int> labels() const;  // class indices, requires labeled()
};

// Reads `label<TAB>text` lines; lines without a tab (or with an unknown
// label) are treated as unlabeled text. Throws std::runtime_error on I/O
// failure or on a tab-prefixed line whose label is malformed.
Dataset load_dataset(const std::string& path, const EmojiDatabase& db,
                     bool apply_substitutions = true, bool strip_emoji_tokens = false);

void save_dataset(const Dataset& ds, const std::string& path);

// Streams of `label` or bare prediction lines.
std::vector<int> load_label_file(const std::string& path);
void save_label_file(const std::vector<int>& labels, const std::string& path);

// SHA-like content digest (FNV-1a 64, hex) used by run manifests.
std::string file_digest(const std::string& path);

}  // namespace iest
