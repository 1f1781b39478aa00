#pragma once

// Microblog tokenization: meta-token normalization shared by both
// languages, English word/punctuation splitting, Chinese forward maximum
// matching segmentation, and sentence splitting.

#include <cstddef>
#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "polite/common.hpp"

namespace polite {

namespace meta {
inline constexpr std::string_view url = "<url>";
inline constexpr std::string_view email = "<email>";
inline constexpr std::string_view user = "<user>";
inline constexpr std::string_view percent = "<percent>";
inline constexpr std::string_view money = "<money>";
inline constexpr std::string_view phone = "<phone>";
inline constexpr std::string_view time = "<time>";
inline constexpr std::string_view date = "<date>";
inline constexpr std::string_view emoticon = "<emoticon>";

bool is_meta_token(std::string_view token);
}  // namespace meta

/// Half-open token range [begin, end).
struct SentenceSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  friend bool operator==(const SentenceSpan&, const SentenceSpan&) = default;
};

struct TokenizedPost {
  std::string post_id;
  Lang lang = Lang::en;
  std::vector<std::string> tokens;
  std::vector<SentenceSpan> sentences;

  std::size_t token_count() const noexcept { return tokens.size(); }
};

/// Word-frequency dictionary for Chinese segmentation
/// (`word<SPACE>frequency` per line, UTF-8).
class ZhDictionary {
 public:
  ZhDictionary() = default;

  static ZhDictionary load(const std::filesystem::path& path);
  static ZhDictionary parse(std::istream& in, const std::string& source = "<stream>");

  void add(std::u32string_view word, long frequency);
  bool contains(std::u32string_view word) const;
  long frequency(std::u32string_view word) const;
  std::size_t max_word_length() const noexcept { return max_len_; }
  std::size_t size() const noexcept { return words_.size(); }

 private:
  std::unordered_map<std::u32string, long> words_;
  std::size_t max_len_ = 1;
};

/// English microblog tokenizer. Structured entities become meta-tokens,
/// Latin text is lowercased, punctuation is kept one code point per token.
TokenizedPost tokenize_en(std::string_view text, std::string post_id = {});

/// Chinese segmentation: meta-token normalization first, then forward
/// maximum matching over Han runs. Out-of-vocabulary Han characters become
/// single-character tokens; Latin/digit runs stay whole.
TokenizedPost segment_zh(std::string_view text, const ZhDictionary& dict,
                         std::string post_id = {});

/// Forward maximum matching over one run of Han characters.
std::vector<std::u32string> forward_maximum_match(std::u32string_view run,
                                                  const ZhDictionary& dict);

/// Splits after terminal punctuation. A run of terminals stays with the
/// sentence it closes; a post without terminals is one sentence.
std::vector<SentenceSpan> split_sentences(std::span<const std::string> tokens, Lang lang);

bool is_sentence_terminal(std::string_view token, Lang lang);

/// Dispatches on `lang`. `dict` is only consulted for Chinese.
TokenizedPost tokenize(std::string_view text, Lang lang, const ZhDictionary& dict,
                       std::string post_id = {});

}  // namespace polite
