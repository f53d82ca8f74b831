#include "iest/synth.hpp"

#include <array>
#include <fstream>
#include <stdexcept>

#include "iest/rng.hpp"

namespace iest {

namespace {

// class order: anger, disgust, fear, joy, sad, surprise
const std::array<std::vector<const char*>, 6> kCueWords = {{
    {"furious", "livid", "irate", "seething"},
    {"gross", "revolting", "nasty", "vile"},
    {"terrified", "dreading", "spooked", "panicking"},
    {"delighted", "thrilled", "cheerful", "grinning"},
    {"heartbroken", "mourning", "gloomy", "weeping"},
    {"astonished", "stunned", "baffled", "speechless"},
}};

const std::array<std::vector<const char*>, 6> kCueEmoji = {{
    {"\U0001F621", "\U0001F620"},  // rage, angry
    {"\U0001F922", "\U0001F637"},  // nauseated_face, mask
    {"\U0001F628", "\U0001F631"},  // fearful, scream
    {"\U0001F602", "\U0001F60D"},  // joy, heart_eyes
    {"\U0001F62D", "\U0001F622"},  // sob, cry
    {"\U0001F632", "\U0001F62E"},  // astonished, open_mouth
}};

const std::vector<const char*> kFiller = {
    "today",  "again",   "really", "about", "the",    "this",  "that",
    "because", "honestly", "just",  "when",  "after",  "still", "literally",
    "my",     "friend",  "work",   "school", "morning", "night", "weekend",
    "everyone", "nobody", "thing",  "whole",  "time",   "feeling", "so",
    "much",   "right",   "now"};

const std::vector<const char*> kHashtags = {
    "#mood", "#life", "#feels", "#mondays", "#nofilter", "#real"};

}  // namespace

void SynthSpec::validate() const {
  if (num_examples < 6)
    throw std::runtime_error("synthetic generator needs at least 6 examples");
  for (double p : {cue_signal, emoji_signal, hashtag_rate, un_trigger_share,
                   un_trigger_noise}) {
    if (p < 0.0 || p > 1.0)
      throw std::runtime_error("synthetic generator rates must be in [0, 1]");
  }
}

Dataset generate_synthetic(const SynthSpec& spec, const EmojiDatabase& db) {
  spec.validate();
  Rng rng = Rng::split(spec.seed, "synthetic");

  Dataset ds;
  for (std::size_t i = 0; i < spec.num_examples; ++i) {
    const int cls = static_cast<int>(i % kNumClasses);  // balanced to +-1
    const bool is_joy = cls == static_cast<int>(EmotionLabel::joy);
    const double pattern_rate = is_joy ? spec.un_trigger_share : spec.un_trigger_noise;
    const bool pattern = rng.bernoulli(pattern_rate);
    const bool cue = rng.bernoulli(spec.cue_signal);
    const bool emoji = rng.bernoulli(spec.emoji_signal);
    const bool hashtag = rng.bernoulli(spec.hashtag_rate);

    std::string text = "i felt";
    if (pattern) text += " un";
    text += " ";
    text += kTriggerPlaceholder;
    if (cue) {
      text += " and ";
      text += kCueWords[cls][rng.next_below(kCueWords[cls].size())];
    }
    const std::size_t fillers = 2 + rng.next_below(4);
    for (std::size_t f = 0; f < fillers; ++f) {
      text += " ";
      text += kFiller[rng.next_below(kFiller.size())];
    }
    if (hashtag) {
      text += " ";
      text += kHashtags[rng.next_below(kHashtags.size())];
    }
    if (emoji) {
      text += " ";
      text += kCueEmoji[cls][rng.next_below(kCueEmoji[cls].size())];
    }

    Example ex;
    ex.tweet.text = text;
    ex.tweet.label = static_cast<EmotionLabel>(cls);
    ex.tokens = tokenize(text, db);
    ex.features = extract_features(ex.tokens, db);
    ds.examples.push_back(std::move(ex));
  }
  return ds;
}

void write_synthetic(const SynthSpec& spec, const std::string& path,
                     const EmojiDatabase& db) {
  Dataset ds = generate_synthetic(spec, db);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write dataset: " + path);
  for (const auto& e : ds.examples) {
    out << label_name(*e.tweet.label) << '\t' << e.tweet.text << '\n';
  }
}

}  // namespace iest
