#include "iest/emoji.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "iest/unicode.hpp"

namespace iest {

namespace {

std::vector<char32_t> parse_hex_seq(std::string_view field) {
  std::vector<char32_t> seq;
  std::size_t start = 0;
  while (start <= field.size()) {
    std::size_t dash = field.find('-', start);
    std::string_view part = field.substr(
        start, dash == std::string_view::npos ? std::string_view::npos : dash - start);
    if (!part.empty()) {
      seq.push_back(static_cast<char32_t>(std::stoul(std::string(part), nullptr, 16)));
    }
    if (dash == std::string_view::npos) break;
    start = dash + 1;
  }
  return seq;
}

}  // namespace

EmojiDatabase EmojiDatabase::parse(std::string_view text) {
  EmojiDatabase db;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    if (line.empty() || line.front() == '#') continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos) continue;
    auto seq = parse_hex_seq(line.substr(0, tab));
    std::string alias(line.substr(tab + 1));
    while (!alias.empty() && (alias.back() == '\r' || alias.back() == ' ')) alias.pop_back();
    if (seq.empty() || alias.empty()) continue;
    db.add(std::move(seq), std::move(alias));
  }
  return db;
}

EmojiDatabase EmojiDatabase::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open emoji database: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void EmojiDatabase::add(std::vector<char32_t> seq, std::string alias) {
  // Conflict rule: a lone codepoint below U+00FF is a common glyph, not an
  // emoji; sequences containing such codepoints stay.
  if (seq.size() == 1 && seq[0] < 0xFF) return;
  max_len_ = std::max(max_len_, seq.size());
  entries_[std::move(seq)] = std::move(alias);
}

std::size_t EmojiDatabase::match_at(const std::vector<char32_t>& cps,
                                    std::size_t pos) const {
  std::size_t limit = std::min(max_len_, cps.size() - pos);
  std::vector<char32_t> probe;
  probe.reserve(limit);
  std::size_t best = 0;
  for (std::size_t len = 1; len <= limit; ++len) {
    probe.push_back(cps[pos + len - 1]);
    if (entries_.count(probe)) best = len;
  }
  return best;
}

std::optional<std::string> EmojiDatabase::alias_of(
    const std::vector<char32_t>& seq) const {
  auto it = entries_.find(seq);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> EmojiDatabase::alias_of_utf8(std::string_view emoji) const {
  return alias_of(utf8_decode(emoji));
}

namespace detail {
extern const char* kBuiltinEmojiTable;
}

const EmojiDatabase& EmojiDatabase::builtin() {
  static const EmojiDatabase db = parse(detail::kBuiltinEmojiTable);
  return db;
}

}  // namespace iest
