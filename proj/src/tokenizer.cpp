#include "iest/tokenizer.hpp"

#include <array>
#include <cctype>

#include "iest/unicode.hpp"

namespace iest {

namespace {

constexpr std::array<const char*, kNumClasses> kLabelNames = {
    "anger", "disgust", "fear", "joy", "sad", "surprise"};

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

bool is_word_cp(char32_t cp) {
  if (is_space_cp(cp)) return false;
  if (cp < 0x80) {
    return std::isalnum(static_cast<unsigned char>(cp)) || cp == U'_' ||
           cp == U'\'' || cp == U'-';
  }
  // Non-ASCII, non-space defaults to word unless the emoji database claims it.
  return true;
}

bool starts_with_at(const std::vector<char32_t>& cps, std::size_t pos,
                    std::string_view ascii) {
  if (cps.size() - pos < ascii.size()) return false;
  for (std::size_t i = 0; i < ascii.size(); ++i) {
    if (cps[pos + i] != static_cast<char32_t>(ascii[i])) return false;
  }
  return true;
}

struct Placeholder {
  std::string_view literal;
  TokenKind kind;
};

constexpr std::array<Placeholder, 4> kPlaceholders = {{
    {"__TRIGGERWORD__", TokenKind::placeholder_trigger},
    {"__USERNAME__", TokenKind::placeholder_username},
    {"__NEWLINE__", TokenKind::placeholder_newline},
    {"__URL__", TokenKind::placeholder_url},
}};

}  // namespace

const char* label_name(EmotionLabel label) {
  return kLabelNames[static_cast<int>(label)];
}

std::optional<EmotionLabel> label_from_name(std::string_view name) {
  for (int i = 0; i < kNumClasses; ++i) {
    if (name == kLabelNames[i]) return static_cast<EmotionLabel>(i);
  }
  return std::nullopt;
}

std::string preprocess_substitute(std::string_view text) {
  std::string s(text);
  replace_all(s, "[#TRIGGERWORD#]", kTriggerPlaceholder);
  replace_all(s, "@USERNAME", kUsernamePlaceholder);
  replace_all(s, "[NEWLINE]", kNewlinePlaceholder);
  replace_all(s, "http://url.removed", kUrlPlaceholder);
  return s;
}

std::vector<Token> tokenize(std::string_view text, const EmojiDatabase& db) {
  const std::vector<char32_t> cps = utf8_decode(text);
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = cps.size();

  auto slice = [&](std::size_t begin, std::size_t end) {
    std::string s;
    for (std::size_t k = begin; k < end; ++k) utf8_append(s, cps[k]);
    return s;
  };

  while (i < n) {
    if (is_space_cp(cps[i])) {
      ++i;
      continue;
    }

    bool matched_placeholder = false;
    for (const auto& ph : kPlaceholders) {
      if (starts_with_at(cps, i, ph.literal)) {
        out.push_back({std::string(ph.literal), ph.kind});
        i += ph.literal.size();
        matched_placeholder = true;
        break;
      }
    }
    if (matched_placeholder) continue;

    if (std::size_t len = db.match_at(cps, i); len > 0) {
      out.push_back({slice(i, i + len), TokenKind::emoji});
      i += len;
      continue;
    }

    if (cps[i] == U'#' && i + 1 < n && is_word_cp(cps[i + 1]) &&
        db.match_at(cps, i + 1) == 0) {
      std::size_t j = i + 1;
      while (j < n && is_word_cp(cps[j]) && db.match_at(cps, j) == 0) ++j;
      out.push_back({slice(i, j), TokenKind::hashtag});
      i = j;
      continue;
    }

    // URL-like remnant: consume up to whitespace as a single word token.
    if (starts_with_at(cps, i, "http://") || starts_with_at(cps, i, "https://")) {
      std::size_t j = i;
      while (j < n && !is_space_cp(cps[j])) ++j;
      out.push_back({slice(i, j), TokenKind::word});
      i = j;
      continue;
    }

    if (is_word_cp(cps[i])) {
      std::size_t j = i;
      while (j < n && is_word_cp(cps[j]) && db.match_at(cps, j) == 0) ++j;
      out.push_back({slice(i, j), TokenKind::word});
      i = j;
      continue;
    }

    out.push_back({slice(i, i + 1), TokenKind::punctuation});
    ++i;
  }
  return out;
}

std::vector<Token> strip_emoji(const std::vector<Token>& tokens) {
  std::vector<Token> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (t.kind != TokenKind::emoji) out.push_back(t);
  }
  return out;
}

std::vector<Token> strip_emoji_alias(const std::vector<Token>& tokens,
                                     const EmojiDatabase& db,
                                     std::string_view alias) {
  std::vector<Token> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (t.kind == TokenKind::emoji) {
      auto a = db.alias_of_utf8(t.text);
      if (a && *a == alias) continue;
    }
    out.push_back(t);
  }
  return out;
}

TweetFeatures extract_features(const std::vector<Token>& tokens,
                               const EmojiDatabase& db) {
  TweetFeatures f;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& t = tokens[i];
    switch (t.kind) {
      case TokenKind::emoji: {
        f.has_emoji = true;
        auto a = db.alias_of_utf8(t.text);
        f.emoji_aliases[a ? *a : t.text] += 1;
        break;
      }
      case TokenKind::hashtag:
        f.has_hashtag = true;
        break;
      case TokenKind::word:
        if (t.text == "un" && i + 1 < tokens.size() &&
            tokens[i + 1].kind == TokenKind::placeholder_trigger) {
          f.has_un_trigger = true;
        }
        break;
      default:
        break;
    }
  }
  return f;
}

std::string detokenize(const std::vector<Token>& tokens) {
  std::string s;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) s.push_back(' ');
    s += tokens[i].text;
  }
  return s;
}

}  // namespace iest
