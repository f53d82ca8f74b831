#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "iest/dataset.hpp"
#include "iest/emoji.hpp"
#include "iest/synth.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

using namespace iest;

namespace {

const EmojiDatabase& db() { return EmojiDatabase::builtin(); }

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("spec validation") {
  SynthSpec s;
  CHECK_NOTHROW(s.validate());
  SynthSpec bad = s;
  bad.num_examples = 5;
  CHECK_THROWS(bad.validate());
  bad = s;
  bad.cue_signal = 1.5;
  CHECK_THROWS(bad.validate());
  bad = s;
  bad.un_trigger_noise = -0.1;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("classes are balanced to within one example") {
  for (std::size_t n : {600u, 601u, 7u}) {
    SynthSpec s;
    s.num_examples = n;
    auto ds = generate_synthetic(s, db());
    REQUIRE(ds.size() == n);
    std::map<int, std::size_t> counts;
    for (const auto& e : ds.examples)
      counts[static_cast<int>(*e.tweet.label)] += 1;
    std::size_t lo = n, hi = 0;
    for (int c = 0; c < 6; ++c) {
      lo = std::min(lo, counts[c]);
      hi = std::max(hi, counts[c]);
    }
    CHECK(hi - lo <= 1);
  }
}

TEST_CASE("same spec writes byte-identical files") {
  SynthSpec s;
  s.num_examples = 120;
  s.seed = 9;
  const std::string p1 = std::string(IEST_TEST_TMP) + "/synth_a.tsv";
  const std::string p2 = std::string(IEST_TEST_TMP) + "/synth_b.tsv";
  write_synthetic(s, p1, db());
  write_synthetic(s, p2, db());
  CHECK(slurp(p1) == slurp(p2));

  SynthSpec other = s;
  other.seed = 10;
  write_synthetic(other, p2, db());
  CHECK(slurp(p1) != slurp(p2));
}

TEST_CASE("written files round-trip through the dataset loader") {
  SynthSpec s;
  s.num_examples = 60;
  s.seed = 3;
  const std::string path = std::string(IEST_TEST_TMP) + "/synth_rt.tsv";
  write_synthetic(s, path, db());
  auto loaded = load_dataset(path, db());
  auto direct = generate_synthetic(s, db());
  REQUIRE(loaded.size() == direct.size());
  CHECK(loaded.labeled());
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    CHECK(*loaded.examples[i].tweet.label == *direct.examples[i].tweet.label);
    CHECK(loaded.examples[i].tokens == direct.examples[i].tokens);
  }
}

TEST_CASE("full cue signal makes every class identifiable by lookup") {
  SynthSpec s;
  s.num_examples = 300;
  s.seed = 21;
  s.cue_signal = 1.0;
  auto ds = generate_synthetic(s, db());

  // token -> set of classes it appears under
  std::map<std::string, std::set<int>> token_classes;
  for (const auto& e : ds.examples)
    for (const auto& t : e.tokens)
      token_classes[t.text].insert(static_cast<int>(*e.tweet.label));

  // every example carries at least one token exclusive to its class, so a
  // lookup classifier scores 100%
  for (const auto& e : ds.examples) {
    bool has_exclusive = false;
    for (const auto& t : e.tokens) {
      const auto& cls = token_classes[t.text];
      if (cls.size() == 1 && *cls.begin() == static_cast<int>(*e.tweet.label))
        has_exclusive = true;
    }
    CHECK(has_exclusive);
  }
}

TEST_CASE("trigger pattern share responds to the knobs") {
  SynthSpec all;
  all.num_examples = 120;
  all.seed = 5;
  all.un_trigger_share = 1.0;
  auto ds_all = generate_synthetic(all, db());
  for (const auto& e : ds_all.examples) {
    const bool is_joy = *e.tweet.label == EmotionLabel::joy;
    CHECK(e.features.has_un_trigger == is_joy);
  }

  SynthSpec none = all;
  none.un_trigger_share = 0.0;
  auto ds_none = generate_synthetic(none, db());
  for (const auto& e : ds_none.examples) CHECK(!e.features.has_un_trigger);
}

TEST_CASE("emoji features follow the emoji signal") {
  SynthSpec s;
  s.num_examples = 120;
  s.seed = 8;
  s.emoji_signal = 1.0;
  auto ds = generate_synthetic(s, db());
  for (const auto& e : ds.examples) CHECK(e.features.has_emoji);

  s.emoji_signal = 0.0;
  auto ds0 = generate_synthetic(s, db());
  for (const auto& e : ds0.examples) CHECK(!e.features.has_emoji);
}
