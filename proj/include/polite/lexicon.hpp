#pragma once

// Category lexica (PoliteLex JSON, LIWC .dic, EmoLex word-level) and the
// compiled matcher that applies them to tokenized posts.

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "polite/common.hpp"
#include "polite/tokenizer.hpp"

namespace polite {

enum class PatternKind { literal_token, token_phrase, stem_wildcard, anchored };

std::string_view to_string(PatternKind kind);

/// One lexicon entry after expansion.
///
/// `tokens` holds the folded atoms. An atom with a trailing `*` is a stem
/// (only in stem_wildcard and anchored patterns). For Chinese substring
/// lexica the atoms are contiguous pieces separated by a 1-6 code point gap.
struct Pattern {
  PatternKind kind = PatternKind::literal_token;
  std::string surface;
  std::vector<std::string> tokens;

  /// Shortest text this pattern matches (gaps filled with one character).
  std::string canonical_text(Lang lang) const;

  friend bool operator==(const Pattern&, const Pattern&) = default;
};

enum class LexiconLanguage { en, zh, bilingual };

/// How Chinese entries are applied: against segmented tokens (LIWC-style
/// word lists) or as substrings of the post text (PoliteLex).
enum class ZhMatchMode { tokens, substring };

using CategoryMap = std::map<std::string, std::vector<Pattern>>;

struct Lexicon {
  std::string name;
  LexiconLanguage language = LexiconLanguage::en;
  ZhMatchMode zh_mode = ZhMatchMode::tokens;
  std::map<Lang, CategoryMap> categories;
  std::vector<std::string> warnings;

  /// Sorted union of category names over all languages.
  std::vector<std::string> category_names() const;
  std::size_t pattern_count() const;
  bool has_language(Lang lang) const { return categories.count(lang) != 0; }
};

/// Expands one raw entry. `^` anchors at sentence start with `|`
/// alternation; a trailing `+` on an atom repeats its last character 1-5
/// times; a trailing `*` marks a stem; `…` is a gap in Chinese substring
/// entries. Throws DataError on malformed input.
std::vector<Pattern> expand_entry(std::string_view entry, Lang lang, ZhMatchMode mode);

Lexicon parse_politelex(const std::filesystem::path& path);
Lexicon parse_politelex(std::istream& in, const std::string& source);

/// LIWC `.dic`: `%` line, `id<TAB>name` lines, `%` line, then
/// `entry<TAB>id<TAB>id...` lines.
Lexicon parse_liwc_dic(const std::filesystem::path& path, Lang lang = Lang::en);
Lexicon parse_liwc_dic(std::istream& in, const std::string& name, Lang lang,
                       const std::string& source);

/// EmoLex word-level: `word<TAB>category<TAB>0|1`.
Lexicon parse_emolex(const std::filesystem::path& path);
Lexicon parse_emolex(std::istream& in, const std::string& name, const std::string& source);

/// Format chosen by extension: .json PoliteLex, .dic LIWC, anything else
/// EmoLex. A `politelex:`, `liwc:` or `emolex:` prefix overrides.
Lexicon load_lexicon(std::string_view spec, Lang liwc_lang = Lang::en);

/// Matched units for one category of one post.
enum class MatchUnit { tokens, codepoints, sentences };

struct CategoryMatches {
  MatchUnit unit = MatchUnit::tokens;
  /// Sorted, unique token indices / code point offsets / sentence indices.
  std::vector<std::size_t> positions;
};

/// Code point view of a segmented Chinese post used by substring matching.
/// Meta-tokens collapse to U+FFFC; punctuation is not countable.
struct ZhTextView {
  std::u32string text;
  std::vector<bool> countable;
  std::vector<std::size_t> token_offsets;  // size = tokens + 1
  std::size_t countable_total = 0;
};

ZhTextView make_zh_view(const TokenizedPost& post);

class CompiledMatcher {
 public:
  explicit CompiledMatcher(const Lexicon& lexicon);
  ~CompiledMatcher();
  CompiledMatcher(CompiledMatcher&&) noexcept;
  CompiledMatcher& operator=(CompiledMatcher&&) noexcept;

  const std::string& name() const noexcept { return name_; }
  /// Lexicographic; match results are aligned with this order.
  const std::vector<std::string>& categories() const noexcept { return categories_; }
  bool is_anchored(std::size_t category) const { return anchored_[category]; }
  bool handles(Lang lang) const;

  /// One entry per category, in categories() order.
  std::vector<CategoryMatches> match(const TokenizedPost& post) const;

  /// Categories (lexicographic) with at least one hit in the post.
  std::vector<std::string> matched_categories(const TokenizedPost& post) const;

  /// Single-token lookup (literal and stem entries only).
  std::vector<std::string> match_token(std::string_view token, Lang lang) const;

 private:
  struct LanguageIndex;

  std::string name_;
  std::vector<std::string> categories_;
  std::vector<bool> anchored_;
  std::map<Lang, std::unique_ptr<LanguageIndex>> index_;
};

CompiledMatcher compile(const Lexicon& lexicon);

}  // namespace polite
