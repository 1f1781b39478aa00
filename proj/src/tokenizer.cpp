#include "polite/tokenizer.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <optional>
#include <regex>

#include "polite/unicode.hpp"

namespace polite {

namespace meta {
bool is_meta_token(std::string_view token) {
  return token == url || token == email || token == user || token == percent ||
         token == money || token == phone || token == time || token == date ||
         token == emoticon;
}
}  // namespace meta

// --- ZhDictionary ----------------------------------------------------------

ZhDictionary ZhDictionary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dictionary " + path.string());
  return parse(in, path.string());
}

ZhDictionary ZhDictionary::parse(std::istream& in, const std::string& source) {
  ZhDictionary dict;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto body = utf8::trim(line);
    if (body.empty()) continue;
    const auto sep = body.find(' ');
    if (sep == std::string_view::npos) {
      throw ParseError(source, line_no, "expected 'word frequency'");
    }
    const auto word = body.substr(0, sep);
    const auto freq_text = utf8::trim(body.substr(sep + 1));
    long freq = 0;
    try {
      std::size_t used = 0;
      freq = std::stol(std::string(freq_text), &used);
      if (used != freq_text.size() || freq < 0) throw std::invalid_argument("freq");
    } catch (const std::exception&) {
      throw ParseError(source, line_no, "bad frequency '" + std::string(freq_text) + "'");
    }
    dict.add(utf8::decode(word), freq);
  }
  return dict;
}

void ZhDictionary::add(std::u32string_view word, long frequency) {
  if (word.empty()) return;
  words_[std::u32string(word)] = frequency;
  max_len_ = std::max(max_len_, word.size());
}

bool ZhDictionary::contains(std::u32string_view word) const {
  return words_.find(std::u32string(word)) != words_.end();
}

long ZhDictionary::frequency(std::u32string_view word) const {
  const auto it = words_.find(std::u32string(word));
  return it == words_.end() ? 0 : it->second;
}

std::vector<std::u32string> forward_maximum_match(std::u32string_view run,
                                                  const ZhDictionary& dict) {
  std::vector<std::u32string> out;
  std::size_t i = 0;
  while (i < run.size()) {
    std::size_t take = 1;
    const std::size_t longest = std::min(dict.max_word_length(), run.size() - i);
    for (std::size_t len = longest; len >= 2; --len) {
      if (dict.contains(run.substr(i, len))) {
        take = len;
        break;
      }
    }
    out.emplace_back(run.substr(i, take));
    i += take;
  }
  return out;
}

// --- Sentence splitting ----------------------------------------------------

bool is_sentence_terminal(std::string_view token, Lang lang) {
  if (lang == Lang::en) {
    return token == "." || token == "!" || token == "?" || token == "…";
  }
  return token == "。" || token == "！" || token == "？" ||
         token == "；" || token == "…";
}

std::vector<SentenceSpan> split_sentences(std::span<const std::string> tokens, Lang lang) {
  std::vector<SentenceSpan> spans;
  std::size_t begin = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!is_sentence_terminal(tokens[i], lang)) continue;
    const bool run_continues =
        i + 1 < tokens.size() && is_sentence_terminal(tokens[i + 1], lang);
    if (run_continues) continue;
    spans.push_back({begin, i + 1});
    begin = i + 1;
  }
  if (begin < tokens.size()) spans.push_back({begin, tokens.size()});
  return spans;
}

// --- Scanner -----------------------------------------------------------------

namespace {

constexpr std::size_t kWindow = 48;

struct Patterns {
  std::regex phone{R"(^(?:\+?1[-. ]?)?(?:\(\d{3}\) ?|\d{3}[-. ]?)\d{3}[-. ]\d{4}(?!\d))"};
  std::regex date{R"(^\d{1,4}[-/.]\d{1,2}[-/.]\d{1,4}(?![\d.])|^\d{1,2}/\d{1,2}(?![\d/]))"};
  std::regex time{R"(^(?:\d{1,2}:\d{2}(?::\d{2})?(?: ?[ap]\.?m\.?)?|\d{1,2} ?[ap]\.?m\.?)(?![a-z0-9]))",
                  std::regex::ECMAScript | std::regex::icase};
  std::regex money{
      R"(^(?:(?:\$|£|€|¥|￥) ?\d+(?:[.,]\d+)*(?: ?(?:k|m|bn|million|billion)(?![a-z]))?|\d+(?:[.,]\d+)* ?(?:\$|£|€|¥|元|块|dollars?|usd|bucks|euros?)(?![a-z])))",
      std::regex::ECMAScript | std::regex::icase};
  std::regex percent{R"(^\d+(?:[.,]\d+)? ?(?:%|％|percent(?![a-z])|pct(?![a-z])))",
                     std::regex::ECMAScript | std::regex::icase};
};

const Patterns& patterns() {
  static const Patterns p;
  return p;
}

// Longest entries first so ":-)" wins over ":-".
constexpr std::array<std::u32string_view, 49> kEmoticons = {
    U">:-(", U">:(",  U":'-(", U":'-)", U"</3",  U":-)",  U":-(",  U":-D", U":-P",
    U":-p",  U":-/",  U":-O",  U":-o",  U":-|",  U";-)",  U";-D",  U"^_^", U"-_-",
    U"T_T",  U"o_O",  U"O_o",  U"^^",   U":)",   U":(",   U":D",   U":P",  U":p",
    U":/",   U":O",   U":o",   U":|",   U":*",   U":]",   U":[",   U":3",  U":'(",
    U":')",  U";)",   U";D",   U";P",   U"=)",   U"=(",   U"=D",   U"<3",  U"XD",
    U"xD",   U"=P",   U":-*",  U"(:"};

bool is_word_char(char32_t cp, Lang) {
  if (utf8::is_space(cp) || utf8::is_punct(cp) || utf8::is_emoji(cp) ||
      utf8::is_emoji_modifier(cp)) {
    return false;
  }
  // Han is segmented separately in zh and split per character in en.
  return !utf8::is_han(cp);
}

bool is_alnum(char32_t cp) {
  return utf8::is_ascii_alpha(cp) || utf8::is_ascii_digit(cp) || utf8::is_latin_letter(cp);
}

bool is_abbreviation(std::u32string_view folded) {
  static constexpr std::array<std::u32string_view, 8> kAbbrev = {
      U"mr", U"mrs", U"ms", U"dr", U"prof", U"jr", U"sr", U"vs"};
  return std::find(kAbbrev.begin(), kAbbrev.end(), folded) != kAbbrev.end();
}

class Scanner {
 public:
  Scanner(std::u32string_view text, Lang lang) : text_(text), lang_(lang) {}

  // Emits tokens; Han runs are handed to `on_han` for segmentation.
  template <typename HanFn>
  std::vector<std::string> run(HanFn&& on_han) {
    std::vector<std::string> out;
    const auto n = text_.size();
    std::size_t i = 0;
    while (i < n) {
      const char32_t cp = text_[i];
      if (utf8::is_space(cp)) {
        ++i;
        continue;
      }
      if (auto len = match_url(i)) {
        out.emplace_back(meta::url);
        i += len;
      } else if (auto len2 = match_email(i)) {
        out.emplace_back(meta::email);
        i += len2;
      } else if (auto len3 = match_mention(i)) {
        out.emplace_back(meta::user);
        i += len3;
      } else if (auto numeric = match_numeric(i)) {
        out.emplace_back(numeric->first);
        i += numeric->second;
      } else if (auto len4 = match_emoticon(i)) {
        out.emplace_back(meta::emoticon);
        i += len4;
      } else if (utf8::is_emoji(cp)) {
        out.emplace_back(meta::emoticon);
        i = skip_emoji(i);
      } else if (utf8::is_han(cp)) {
        std::size_t j = i;
        while (j < n && utf8::is_han(text_[j])) ++j;
        if (lang_ == Lang::zh) {
          on_han(text_.substr(i, j - i), out);
        } else {
          for (std::size_t k = i; k < j; ++k) out.push_back(utf8::encode(text_[k]));
        }
        i = j;
      } else if (is_word_char(cp, lang_)) {
        const std::size_t j = word_end(i);
        out.push_back(utf8::encode(utf8::fold(text_.substr(i, j - i))));
        i = j;
      } else if (utf8::is_emoji_modifier(cp)) {
        ++i;  // stray joiner or variation selector
      } else {
        out.push_back(utf8::encode(utf8::fold(cp)));
        ++i;
      }
    }
    return out;
  }

 private:
  char32_t at(std::size_t i) const { return i < text_.size() ? text_[i] : U'\0'; }

  bool prev_is_alnum(std::size_t i) const { return i > 0 && is_alnum(text_[i - 1]); }

  std::string window(std::size_t i) const {
    return utf8::encode(text_.substr(i, kWindow));
  }

  bool starts_with_ci(std::size_t i, std::u32string_view prefix) const {
    if (i + prefix.size() > text_.size()) return false;
    for (std::size_t k = 0; k < prefix.size(); ++k) {
      if (utf8::fold(text_[i + k]) != prefix[k]) return false;
    }
    return true;
  }

  std::size_t match_url(std::size_t i) const {
    if (prev_is_alnum(i)) return 0;
    if (!starts_with_ci(i, U"http://") && !starts_with_ci(i, U"https://") &&
        !starts_with_ci(i, U"www.")) {
      return 0;
    }
    std::size_t j = i;
    while (j < text_.size() && text_[j] > 0x20 && text_[j] < 0x7F) ++j;
    static constexpr std::u32string_view kTrail = U".,!?;:'\")]}>";
    while (j > i && kTrail.find(text_[j - 1]) != std::u32string_view::npos) --j;
    return j - i;
  }

  static bool is_email_local(char32_t cp) {
    return utf8::is_ascii_alpha(cp) || utf8::is_ascii_digit(cp) || cp == '.' ||
           cp == '_' || cp == '%' || cp == '+' || cp == '-';
  }

  std::size_t match_email(std::size_t i) const {
    if (prev_is_alnum(i)) return 0;
    std::size_t j = i;
    while (j < text_.size() && is_email_local(text_[j])) ++j;
    if (j == i || at(j) != '@') return 0;
    std::size_t k = j + 1;
    while (k < text_.size() &&
           (utf8::is_ascii_alpha(text_[k]) || utf8::is_ascii_digit(text_[k]) ||
            text_[k] == '.' || text_[k] == '-')) {
      ++k;
    }
    while (k > j + 1 && (text_[k - 1] == '.' || text_[k - 1] == '-')) --k;
    const auto domain = text_.substr(j + 1, k - j - 1);
    const auto dot = domain.rfind(U'.');
    if (dot == std::u32string_view::npos || dot == 0) return 0;
    const auto tld = domain.substr(dot + 1);
    if (tld.size() < 2) return 0;
    for (char32_t c : tld) {
      if (!utf8::is_ascii_alpha(c)) return 0;
    }
    return k - i;
  }

  std::size_t match_mention(std::size_t i) const {
    if (text_[i] != '@' || prev_is_alnum(i)) return 0;
    std::size_t j = i + 1;
    while (j < text_.size()) {
      const char32_t c = text_[j];
      const bool ok = utf8::is_ascii_alpha(c) || utf8::is_ascii_digit(c) || c == '_' ||
                      (lang_ == Lang::zh && (utf8::is_han(c) || c == '-'));
      if (!ok) break;
      ++j;
    }
    return j > i + 1 ? j - i : 0;
  }

  std::optional<std::pair<std::string_view, std::size_t>> match_numeric(std::size_t i) const {
    const char32_t c = text_[i];
    const bool digit = utf8::is_ascii_digit(c);
    const bool currency = c == '$' || c == U'£' || c == U'€' || c == U'¥' || c == U'￥';
    if (!digit && !currency && c != '+' && c != '(') return std::nullopt;
    if (prev_is_alnum(i)) return std::nullopt;
    const auto w = window(i);
    const auto& p = patterns();
    std::smatch m;
    auto try_one = [&](const std::regex& re, std::string_view token)
        -> std::optional<std::pair<std::string_view, std::size_t>> {
      if (std::regex_search(w, m, re, std::regex_constants::match_continuous)) {
        return std::pair{token, utf8::length(m.str(0))};
      }
      return std::nullopt;
    };
    if (digit || c == '+' || c == '(') {
      if (auto r = try_one(p.phone, meta::phone)) return r;
    }
    if (digit) {
      if (auto r = try_one(p.date, meta::date)) return r;
      if (auto r = try_one(p.time, meta::time)) return r;
      if (auto r = try_one(p.percent, meta::percent)) return r;
    }
    if (digit || currency) {
      if (auto r = try_one(p.money, meta::money)) return r;
    }
    return std::nullopt;
  }

  std::size_t match_emoticon(std::size_t i) const {
    for (auto emo : kEmoticons) {
      if (text_.compare(i, emo.size(), emo) != 0) continue;
      if (is_alnum(emo.front()) && prev_is_alnum(i)) continue;
      if (is_alnum(emo.back()) && is_alnum(at(i + emo.size()))) continue;
      return emo.size();
    }
    return 0;
  }

  std::size_t skip_emoji(std::size_t i) const {
    const bool regional = text_[i] >= 0x1F1E6 && text_[i] <= 0x1F1FF;
    std::size_t j = i + 1;
    if (regional && j < text_.size() && text_[j] >= 0x1F1E6 && text_[j] <= 0x1F1FF) ++j;
    while (j < text_.size() && utf8::is_emoji_modifier(text_[j])) {
      if (text_[j] == 0x200D && j + 1 < text_.size() && utf8::is_emoji(text_[j + 1])) {
        j += 2;
      } else {
        ++j;
      }
    }
    return j;
  }

  // Word run with internal apostrophes/hyphens between letters and
  // internal separators between digits; title abbreviations keep their dot.
  std::size_t word_end(std::size_t i) const {
    std::size_t j = i;
    const auto n = text_.size();
    while (j < n) {
      const char32_t c = text_[j];
      if (is_word_char(c, lang_)) {
        ++j;
        continue;
      }
      const bool inside = j > i && j + 1 < n && is_word_char(text_[j + 1], lang_);
      if (inside && (c == '\'' || c == U'’' || c == '-') &&
          !utf8::is_ascii_digit(text_[j - 1])) {
        ++j;
        continue;
      }
      if (inside && (c == '.' || c == ',') && utf8::is_ascii_digit(text_[j - 1]) &&
          utf8::is_ascii_digit(text_[j + 1])) {
        ++j;
        continue;
      }
      break;
    }
    if (at(j) == '.' && is_abbreviation(utf8::fold(text_.substr(i, j - i)))) ++j;
    return j;
  }

  std::u32string_view text_;
  Lang lang_;
};

}  // namespace

TokenizedPost tokenize_en(std::string_view text, std::string post_id) {
  const auto cps = utf8::decode(text);
  TokenizedPost post;
  post.post_id = std::move(post_id);
  post.lang = Lang::en;
  post.tokens = Scanner(cps, Lang::en).run([](std::u32string_view, auto&) {});
  post.sentences = split_sentences(post.tokens, Lang::en);
  return post;
}

TokenizedPost segment_zh(std::string_view text, const ZhDictionary& dict,
                         std::string post_id) {
  const auto cps = utf8::decode(text);
  TokenizedPost post;
  post.post_id = std::move(post_id);
  post.lang = Lang::zh;
  post.tokens = Scanner(cps, Lang::zh).run(
      [&dict](std::u32string_view run, std::vector<std::string>& out) {
        for (const auto& word : forward_maximum_match(run, dict)) {
          out.push_back(utf8::encode(word));
        }
      });
  post.sentences = split_sentences(post.tokens, Lang::zh);
  return post;
}

TokenizedPost tokenize(std::string_view text, Lang lang, const ZhDictionary& dict,
                       std::string post_id) {
  return lang == Lang::en ? tokenize_en(text, std::move(post_id))
                          : segment_zh(text, dict, std::move(post_id));
}

}  // namespace polite
