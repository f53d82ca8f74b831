#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "iest/dataset.hpp"
#include "iest/emoji.hpp"
#include "iest/rng.hpp"
#include "iest/tokenizer.hpp"
#include "iest/unicode.hpp"

#include <algorithm>
#include <map>

using namespace iest;

namespace {

const EmojiDatabase& db() { return EmojiDatabase::builtin(); }

std::vector<Token> random_tokens(Rng& rng) {
  static const std::vector<Token> pool = {
      {"so", TokenKind::word},
      {"sad", TokenKind::word},
      {"un", TokenKind::word},
      {"\U0001F62D", TokenKind::emoji},
      {"\U0001F637", TokenKind::emoji},
      {"#mood", TokenKind::hashtag},
      {std::string(kTriggerPlaceholder), TokenKind::placeholder_trigger},
      {"!", TokenKind::punctuation},
  };
  std::vector<Token> out;
  const std::size_t n = rng.next_below(12);
  for (std::size_t i = 0; i < n; ++i) out.push_back(pool[rng.next_below(pool.size())]);
  return out;
}

}  // namespace

TEST_CASE("substitutions follow the replacement table") {
  CHECK(preprocess_substitute("I feel [#TRIGGERWORD#] today") ==
        "I feel __TRIGGERWORD__ today");
  CHECK(preprocess_substitute("@USERNAME check http://url.removed") ==
        "__USERNAME__ check __URL__");
  CHECK(preprocess_substitute("a[NEWLINE]b") == "a__NEWLINE__b");
  CHECK(preprocess_substitute("") == "");
}

TEST_CASE("substitution is idempotent") {
  Rng rng(7);
  const std::vector<std::string> fixtures = {
      "[#TRIGGERWORD#] @USERNAME [NEWLINE] http://url.removed",
      "plain text with no markers",
      "[#TRIGGERWORD#][#TRIGGERWORD#]",
      "@USERNAME@USERNAME",
  };
  for (const auto& s : fixtures) {
    auto once = preprocess_substitute(s);
    CHECK(preprocess_substitute(once) == once);
  }
}

TEST_CASE("hashtag emoji vs hashtag word") {
  auto toks = tokenize("#happy #️⃣", db());
  REQUIRE(toks.size() == 2);
  CHECK(toks[0].kind == TokenKind::hashtag);
  CHECK(toks[0].text == "#happy");
  CHECK(toks[1].kind == TokenKind::emoji);
  CHECK(toks[1].text == "#️⃣");
}

TEST_CASE("conflict resolution drops the bare glyph but keeps the sequence") {
  CHECK(db().match_at(utf8_decode("#"), 0) == 0);
  CHECK(db().match_at(utf8_decode("#️⃣"), 0) == 3);
  CHECK(db().alias_of_utf8("#️⃣").has_value());
}

TEST_CASE("un trigger pattern tokenizes as word + placeholder") {
  auto toks = tokenize("un __TRIGGERWORD__", db());
  REQUIRE(toks.size() == 2);
  CHECK(toks[0] == Token{"un", TokenKind::word});
  CHECK(toks[1] == Token{"__TRIGGERWORD__", TokenKind::placeholder_trigger});
}

TEST_CASE("adjacent emoji split into separate tokens") {
  // reference twokenize behavior on back-to-back emoji
  auto toks = tokenize("\U0001F62D\U0001F62D", db());
  REQUIRE(toks.size() == 2);
  CHECK(toks[0] == Token{"\U0001F62D", TokenKind::emoji});
  CHECK(toks[1] == Token{"\U0001F62D", TokenKind::emoji});
}

TEST_CASE("emoji inside a word breaks the word") {
  auto toks = tokenize("so\U0001F602happy", db());
  REQUIRE(toks.size() == 3);
  CHECK(toks[0].text == "so");
  CHECK(toks[1].kind == TokenKind::emoji);
  CHECK(toks[2].text == "happy");
}

TEST_CASE("tokens never contain whitespace and codepoints are conserved") {
  Rng rng(11);
  const std::vector<std::string> fixtures = {
      "I'm so  happy!! \U0001F602\U0001F602 #blessed",
      "un __TRIGGERWORD__ ... why \U0001F62D",
      "__USERNAME__ look: https://example.com/x?y=1",
      "mixed spaces\tand\nnewlines",
      "\U0001F637\U0001F621 #a#b !!!",
  };
  for (const auto& s : fixtures) {
    auto toks = tokenize(s, db());
    std::map<char32_t, int> in_counts, out_counts;
    for (char32_t cp : utf8_decode(s)) {
      if (!is_space_cp(cp)) in_counts[cp] += 1;
    }
    for (const auto& t : toks) {
      for (char32_t cp : utf8_decode(t.text)) {
        INFO("fixture [", s, "] token [", t.text, "] cp ", static_cast<unsigned>(cp));
        CHECK(!is_space_cp(cp));
        out_counts[cp] += 1;
      }
    }
    CHECK(in_counts == out_counts);
  }
}

TEST_CASE("strip_emoji removes exactly the emoji tokens") {
  std::vector<Token> toks = {{"so", TokenKind::word},
                             {"sad", TokenKind::word},
                             {"\U0001F62D", TokenKind::emoji}};
  auto stripped = strip_emoji(toks);
  REQUIRE(stripped.size() == 2);
  CHECK(stripped[0].text == "so");
  CHECK(stripped[1].text == "sad");

  std::vector<Token> no_emoji = {{"hi", TokenKind::word}};
  CHECK(strip_emoji(no_emoji) == no_emoji);
}

TEST_CASE("strip_emoji is idempotent and consistent with tokenize") {
  Rng rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    auto toks = random_tokens(rng);
    auto once = strip_emoji(toks);
    CHECK(strip_emoji(once) == once);
    for (const auto& t : once) CHECK(t.kind != TokenKind::emoji);

    // strip(tokenize(x)) equals tokenize(x) minus emoji tokens
    auto text = detokenize(toks);
    auto full = tokenize(text, db());
    auto stripped = strip_emoji(full);
    std::vector<Token> expected;
    std::copy_if(full.begin(), full.end(), std::back_inserter(expected),
                 [](const Token& t) { return t.kind != TokenKind::emoji; });
    CHECK(stripped == expected);
  }
}

TEST_CASE("feature extraction") {
  SUBCASE("un trigger flag") {
    auto toks = tokenize("un __TRIGGERWORD__", db());
    CHECK(extract_features(toks, db()).has_un_trigger);
  }
  SUBCASE("plain word has no flags") {
    auto f = extract_features(tokenize("hello", db()), db());
    CHECK(!f.has_emoji);
    CHECK(!f.has_hashtag);
    CHECK(!f.has_un_trigger);
    CHECK(f.emoji_aliases.empty());
  }
  SUBCASE("mask alias resolves") {
    auto f = extract_features(tokenize("stay safe \U0001F637", db()), db());
    CHECK(f.has_emoji);
    CHECK(f.emoji_aliases.count("mask") == 1);
  }
  SUBCASE("has_emoji iff aliases non-empty") {
    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
      auto f = extract_features(random_tokens(rng), db());
      CHECK(f.has_emoji == !f.emoji_aliases.empty());
    }
  }
  SUBCASE("un not followed by trigger is not the pattern") {
    auto f = extract_features(tokenize("un happy day", db()), db());
    CHECK(!f.has_un_trigger);
  }
}

TEST_CASE("label names round-trip") {
  for (int c = 0; c < kNumClasses; ++c) {
    auto l = static_cast<EmotionLabel>(c);
    auto back = label_from_name(label_name(l));
    REQUIRE(back.has_value());
    CHECK(*back == l);
  }
  CHECK(!label_from_name("happiness").has_value());
}

TEST_CASE("emoji database file matches the builtin snapshot") {
  auto file_db = EmojiDatabase::load_file(IEST_DATA_DIR "/emoji.txt");
  CHECK(file_db.size() == db().size());
  CHECK(file_db.alias_of_utf8("\U0001F637") == db().alias_of_utf8("\U0001F637"));
}
