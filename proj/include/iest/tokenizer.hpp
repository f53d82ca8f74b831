#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "iest/emoji.hpp"

namespace iest {

// The six task classes, in canonical (alphabetical) order.
enum class EmotionLabel { anger = 0, disgust, fear, joy, sad, surprise };
inline constexpr int kNumClasses = 6;

const char* label_name(EmotionLabel label);
std::optional<EmotionLabel> label_from_name(std::string_view name);

struct RawTweet {
  std::string text;
  std::optional<EmotionLabel> label;
};

enum class TokenKind {
  word,
  emoji,
  hashtag,
  placeholder_trigger,
  placeholder_username,
  placeholder_newline,
  placeholder_url,
  punctuation,
};

struct Token {
  std::string text;
  TokenKind kind;

  bool operator==(const Token&) const = default;
};

struct TweetFeatures {
  bool has_emoji = false;
  bool has_hashtag = false;
  bool has_un_trigger = false;
  // alias -> occurrence count
  std::map<std::string, int> emoji_aliases;
};

inline constexpr std::string_view kTriggerPlaceholder = "__TRIGGERWORD__";
inline constexpr std::string_view kUsernamePlaceholder = "__USERNAME__";
inline constexpr std::string_view kNewlinePlaceholder = "__NEWLINE__";
inline constexpr std::string_view kUrlPlaceholder = "__URL__";

// Replaces the dataset's special markers with their placeholder tokens.
// Total and idempotent.
std::string preprocess_substitute(std::string_view text);

// Emoji-aware tokenization. Longest-match priority: placeholder literals,
// emoji sequences, hashtags, URL-like remnants, words, punctuation.
std::vector<Token> tokenize(std::string_view text, const EmojiDatabase& db);

// Drops emoji-kind tokens, preserving order.
std::vector<Token> strip_emoji(const std::vector<Token>& tokens);

// Removes only emoji whose alias matches; used by the per-emoji analyses.
std::vector<Token> strip_emoji_alias(const std::vector<Token>& tokens,
                                     const EmojiDatabase& db,
                                     std::string_view alias);

TweetFeatures extract_features(const std::vector<Token>& tokens,
                               const EmojiDatabase& db);

// Token texts joined by single spaces.
std::string detokenize(const std::vector<Token>& tokens);

}  // namespace iest
