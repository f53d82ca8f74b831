#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace iest {

// Snapshot of an emoji database: codepoint sequences mapped to alias names.
// Single-codepoint entries that collide with common ASCII glyphs (e.g. '#',
// which also appears inside the keycap sequence U+0023 U+FE0F U+20E3) are
// dropped at load time; multi-codepoint sequences are always kept.
class EmojiDatabase {
 public:
  // File format: one record per line, `hex[-hex...]<TAB>alias`.
  // Lines starting with '#' and blank lines are ignored.
  static EmojiDatabase load_file(const std::string& path);
  static EmojiDatabase parse(std::string_view text);

  // Built-in snapshot, used when no file is given.
  static const EmojiDatabase& builtin();

  void add(std::vector<char32_t> seq, std::string alias);

  // Longest emoji sequence starting at cps[pos]; 0 if none.
  std::size_t match_at(const std::vector<char32_t>& cps, std::size_t pos) const;

  std::optional<std::string> alias_of(const std::vector<char32_t>& seq) const;
  std::optional<std::string> alias_of_utf8(std::string_view emoji) const;

  std::size_t size() const { return entries_.size(); }
  bool conflict_resolved() const { return conflict_resolved_; }

 private:
  // Ordered map gives deterministic iteration and prefix queries.
  std::map<std::vector<char32_t>, std::string> entries_;
  std::size_t max_len_ = 0;
  bool conflict_resolved_ = true;
};

}  // namespace iest
