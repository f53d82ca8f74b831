#pragma once

#include <cstdint>
#include <string>

#include "iest/dataset.hpp"

namespace iest {

// Synthetic 6-class tweet generator. Class-correlated cue words and emoji
// are injected with configurable strength; a configurable share of joy
// examples carries the `un __TRIGGERWORD__` pattern.
struct SynthSpec {
  std::size_t num_examples = 600;  // must be >= 6; classes balanced to +-1
  std::uint64_t seed = 0;
  double cue_signal = 0.9;       // probability of a class cue word
  double emoji_signal = 0.5;     // probability of a class emoji
  double hashtag_rate = 0.2;
  double un_trigger_share = 0.3;   // share of joy examples with the pattern
  double un_trigger_noise = 0.0;   // share of non-joy examples with the pattern

  void validate() const;
};

Dataset generate_synthetic(const SynthSpec& spec, const EmojiDatabase& db);

// Writes `label<TAB>text` lines; byte-identical for a fixed spec.
void write_synthetic(const SynthSpec& spec, const std::string& path,
                     const EmojiDatabase& db);

}  // namespace iest
