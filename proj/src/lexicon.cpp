#include "polite/lexicon.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "polite/unicode.hpp"

namespace polite {

namespace {

constexpr char32_t kGap = U'…';
constexpr std::size_t kMaxRepeat = 5;
constexpr std::size_t kMinGap = 1;
constexpr std::size_t kMaxGap = 6;
constexpr char32_t kMetaPlaceholder = 0xFFFC;

bool is_stem_atom(std::string_view atom) { return !atom.empty() && atom.back() == '*'; }

std::vector<std::string> split_ws(std::string_view text) {
  std::vector<std::string> out;
  const auto cps = utf8::decode(text);
  std::u32string cur;
  for (char32_t cp : cps) {
    if (utf8::is_space(cp)) {
      if (!cur.empty()) out.push_back(utf8::encode(cur));
      cur.clear();
    } else {
      cur.push_back(cp);
    }
  }
  if (!cur.empty()) out.push_back(utf8::encode(cur));
  return out;
}

std::vector<std::string_view> split_on(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    out.push_back(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void malformed(std::string_view entry, const std::string& why) {
  throw DataError("malformed entry '" + std::string(entry) + "': " + why);
}

// Expands `pls+` into pls, plss, ... (last character repeated 1-5 times)
// and validates wildcard placement.
std::vector<std::string> expand_atom(std::string_view entry, const std::string& atom) {
  std::string body = atom;
  if (body.find("…") != std::string::npos) {
    malformed(entry, "gap marker is only supported in Chinese entries");
  }
  const auto stars = std::count(body.begin(), body.end(), '*');
  if (stars > 1 || (stars == 1 && body.back() != '*')) {
    malformed(entry, "wildcard '*' must appear once, at the end");
  }
  if (stars == 1 && utf8::length(body) < 3) {
    malformed(entry, "wildcard needs at least two preceding characters");
  }
  if (body.size() > 1 && body.back() == '+') {
    body.pop_back();
    if (body.empty() || body.back() == '*') malformed(entry, "dangling repetition");
    const auto cps = utf8::decode(body);
    const std::u32string stem(cps.begin(), cps.end() - 1);
    std::vector<std::string> out;
    for (std::size_t r = 1; r <= kMaxRepeat; ++r) {
      out.push_back(utf8::encode(stem + std::u32string(r, cps.back())));
    }
    return out;
  }
  return {body};
}

// Cartesian product of per-atom expansions.
std::vector<std::vector<std::string>> expand_sequence(std::string_view entry,
                                                      const std::vector<std::string>& atoms) {
  std::vector<std::vector<std::string>> seqs{{}};
  for (const auto& atom : atoms) {
    const auto variants = expand_atom(entry, atom);
    std::vector<std::vector<std::string>> next;
    for (const auto& seq : seqs) {
      for (const auto& v : variants) {
        auto s = seq;
        s.push_back(v);
        next.push_back(std::move(s));
      }
    }
    seqs = std::move(next);
  }
  return seqs;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::vector<std::string> zh_pieces(std::string_view entry, std::string_view body) {
  std::u32string compact;
  for (char32_t cp : utf8::decode(body)) {
    if (!utf8::is_space(cp)) compact.push_back(utf8::fold(cp));
  }
  if (compact.find(U'*') != std::u32string::npos) {
    malformed(entry, "wildcards are not supported in substring entries");
  }
  std::vector<std::string> pieces;
  std::u32string cur;
  for (char32_t cp : compact) {
    if (cp == kGap) {
      if (cur.empty()) malformed(entry, "gap marker needs text on both sides");
      pieces.push_back(utf8::encode(cur));
      cur.clear();
    } else {
      cur.push_back(cp);
    }
  }
  if (cur.empty()) malformed(entry, pieces.empty() ? "empty entry" : "gap marker needs text on both sides");
  pieces.push_back(utf8::encode(cur));
  return pieces;
}

}  // namespace

std::string_view to_string(PatternKind kind) {
  switch (kind) {
    case PatternKind::literal_token: return "literal_token";
    case PatternKind::token_phrase: return "token_phrase";
    case PatternKind::stem_wildcard: return "stem_wildcard";
    case PatternKind::anchored: return "anchored";
  }
  return "?";
}

std::string Pattern::canonical_text(Lang lang) const {
  std::vector<std::string> parts;
  for (const auto& t : tokens) parts.push_back(is_stem_atom(t) ? t.substr(0, t.size() - 1) : t);
  if (lang == Lang::zh && !parts.empty() && surface.find("…") != std::string::npos) {
    return join(parts, "以");
  }
  return join(parts, lang == Lang::zh && surface.find(' ') == std::string::npos ? "" : " ");
}

std::vector<Pattern> expand_entry(std::string_view raw, Lang lang, ZhMatchMode mode) {
  const auto entry = utf8::trim(raw);
  if (entry.empty()) malformed(raw, "empty entry");
  const bool anchored = entry.front() == '^';
  const auto body = anchored ? entry.substr(1) : entry;
  std::vector<Pattern> out;

  if (lang == Lang::zh && mode == ZhMatchMode::substring) {
    if (anchored) {
      for (auto alt : split_on(body, '|')) {
        Pattern p;
        p.kind = PatternKind::anchored;
        p.tokens = zh_pieces(entry, alt);
        p.surface = join(p.tokens, "…");
        out.push_back(std::move(p));
      }
      return out;
    }
    Pattern p;
    p.tokens = zh_pieces(entry, body);
    p.kind = p.tokens.size() == 1 ? PatternKind::literal_token : PatternKind::token_phrase;
    p.surface = join(p.tokens, "…");
    out.push_back(std::move(p));
    return out;
  }

  if (anchored) {
    for (auto alt : split_on(body, '|')) {
      const auto atoms = split_ws(utf8::fold(alt));
      if (atoms.empty()) malformed(entry, "empty alternative in anchored pattern");
      for (auto& seq : expand_sequence(entry, atoms)) {
        Pattern p;
        p.kind = PatternKind::anchored;
        p.surface = join(seq, " ");
        p.tokens = std::move(seq);
        out.push_back(std::move(p));
      }
    }
    return out;
  }

  if (body.find('|') != std::string_view::npos) {
    malformed(entry, "alternation is only allowed in anchored patterns");
  }
  const auto atoms = split_ws(utf8::fold(body));
  for (auto& seq : expand_sequence(entry, atoms)) {
    Pattern p;
    if (seq.size() == 1) {
      p.kind = is_stem_atom(seq[0]) ? PatternKind::stem_wildcard : PatternKind::literal_token;
    } else {
      if (std::any_of(seq.begin(), seq.end(), [](const auto& a) { return is_stem_atom(a); })) {
        malformed(entry, "wildcards are not allowed inside phrases");
      }
      p.kind = PatternKind::token_phrase;
    }
    p.surface = join(seq, " ");
    p.tokens = std::move(seq);
    out.push_back(std::move(p));
  }
  return out;
}

// --- Lexicon ------------------------------------------------------------------

std::vector<std::string> Lexicon::category_names() const {
  std::set<std::string> names;
  for (const auto& [lang, cats] : categories) {
    for (const auto& [name, _] : cats) names.insert(name);
  }
  return {names.begin(), names.end()};
}

std::size_t Lexicon::pattern_count() const {
  std::size_t n = 0;
  for (const auto& [lang, cats] : categories) {
    for (const auto& [_, pats] : cats) n += pats.size();
  }
  return n;
}

namespace {

void add_entry(CategoryMap& cats, const std::string& category, std::string_view entry,
               Lang lang, ZhMatchMode mode) {
  auto& list = cats[category];
  for (auto& p : expand_entry(entry, lang, mode)) {
    if (std::find(list.begin(), list.end(), p) == list.end()) list.push_back(std::move(p));
  }
}

void check_uniform_anchoring(const CategoryMap& cats, Lang lang) {
  for (const auto& [name, pats] : cats) {
    const auto anchored = std::count_if(pats.begin(), pats.end(), [](const Pattern& p) {
      return p.kind == PatternKind::anchored;
    });
    if (anchored != 0 && anchored != static_cast<long>(pats.size())) {
      throw DataError("category '" + name + "' (" + std::string(to_string(lang)) +
                      ") mixes anchored and unanchored entries");
    }
  }
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

}  // namespace

Lexicon parse_politelex(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse_politelex(in, path.string());
}

Lexicon parse_politelex(std::istream& in, const std::string& source) {
  using nlohmann::json;
  std::stringstream buf;
  buf << in.rdbuf();
  const auto text = buf.str();
  if (utf8::trim(text).empty()) throw ParseError(source, 1, "empty lexicon file");
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto upto = text.substr(0, std::min<std::size_t>(e.byte, text.size()));
    const auto line = static_cast<std::size_t>(std::count(upto.begin(), upto.end(), '\n')) + 1;
    throw ParseError(source, line, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError(source, 1, "top level must be an object");
  if (!doc.contains("languages") || !doc["languages"].is_object() || doc["languages"].empty()) {
    throw DataError(source + ": missing or empty 'languages' object");
  }

  Lexicon lex;
  lex.name = doc.value("name", std::string("politelex"));
  if (lex.name.empty()) throw DataError(source + ": empty lexicon name");
  lex.zh_mode = ZhMatchMode::substring;

  for (const auto& [key, cats] : doc["languages"].items()) {
    Lang lang;
    try {
      lang = parse_lang(key);
    } catch (const DataError&) {
      throw DataError(source + ": unknown language key '" + key + "'");
    }
    if (!cats.is_object()) throw DataError(source + ": language '" + key + "' must map categories");
    auto& table = lex.categories[lang];
    for (const auto& [category, entries] : cats.items()) {
      if (category.empty()) throw DataError(source + ": empty category name");
      if (!entries.is_array() || entries.empty()) {
        throw DataError(source + ": empty category '" + category + "' (" + key + ")");
      }
      for (const auto& e : entries) {
        if (!e.is_string()) {
          throw DataError(source + ": non-string entry in '" + category + "'");
        }
        try {
          add_entry(table, category, e.get<std::string>(), lang, lex.zh_mode);
        } catch (const DataError& err) {
          throw DataError(source + ": " + category + " (" + key + "): " + err.what());
        }
      }
    }
    check_uniform_anchoring(table, lang);
  }

  if (lex.categories.size() == 2) {
    lex.language = LexiconLanguage::bilingual;
    std::vector<std::string> en_names, zh_names;
    for (const auto& [n, _] : lex.categories.at(Lang::en)) en_names.push_back(n);
    for (const auto& [n, _] : lex.categories.at(Lang::zh)) zh_names.push_back(n);
    if (en_names != zh_names) {
      throw DataError(source + ": en and zh category names differ");
    }
  } else {
    lex.language = lex.categories.begin()->first == Lang::en ? LexiconLanguage::en
                                                              : LexiconLanguage::zh;
  }
  return lex;
}

Lexicon parse_liwc_dic(const std::filesystem::path& path, Lang lang) {
  auto in = open_or_throw(path);
  return parse_liwc_dic(in, "liwc", lang, path.string());
}

Lexicon parse_liwc_dic(std::istream& in, const std::string& name, Lang lang,
                       const std::string& source) {
  Lexicon lex;
  lex.name = name;
  lex.language = lang == Lang::en ? LexiconLanguage::en : LexiconLanguage::zh;
  lex.zh_mode = ZhMatchMode::tokens;
  auto& table = lex.categories[lang];

  std::map<std::string, std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  int delimiters = 0;
  std::size_t body_lines = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    const auto text = utf8::trim(line);
    if (text.empty()) continue;
    if (text == "%") {
      if (++delimiters > 2) throw ParseError(source, line_no, "unexpected third '%' delimiter");
      continue;
    }
    if (delimiters == 0) throw ParseError(source, line_no, "expected '%' before the category header");
    if (delimiters == 1) {
      const auto fields = split_ws(text);
      if (fields.size() != 2) throw ParseError(source, line_no, "header line must be 'id name'");
      if (ids.count(fields[0])) throw ParseError(source, line_no, "duplicate category id " + fields[0]);
      ids[fields[0]] = fields[1];
      table[fields[1]];
      continue;
    }
    // Body: entry, then category ids. Tab-separated when tabs are present
    // (entries may contain spaces), otherwise whitespace-separated with the
    // trailing numeric fields taken as ids.
    std::string entry;
    std::vector<std::string> refs;
    if (text.find('\t') != std::string_view::npos) {
      auto cols = split_on(text, '\t');
      entry = std::string(utf8::trim(cols[0]));
      for (std::size_t k = 1; k < cols.size(); ++k) {
        const auto id = utf8::trim(cols[k]);
        if (!id.empty()) refs.emplace_back(id);
      }
    } else {
      auto fields = split_ws(text);
      while (fields.size() > 1 && std::all_of(fields.back().begin(), fields.back().end(),
                                              [](char c) { return c >= '0' && c <= '9'; })) {
        refs.insert(refs.begin(), fields.back());
        fields.pop_back();
      }
      entry = join(fields, " ");
    }
    if (refs.empty()) throw ParseError(source, line_no, "entry '" + entry + "' has no category ids");
    for (const auto& id : refs) {
      const auto it = ids.find(id);
      if (it == ids.end()) {
        throw ParseError(source, line_no, "category id " + id + " not declared in header");
      }
      try {
        add_entry(table, it->second, entry, lang, lex.zh_mode);
      } catch (const DataError& err) {
        throw ParseError(source, line_no, err.what());
      }
    }
    ++body_lines;
  }
  if (delimiters < 2) throw ParseError(source, line_no, "missing '%' delimiters");
  if (ids.empty()) throw ParseError(source, line_no, "no categories declared");
  if (body_lines == 0) lex.warnings.push_back(source + ": dictionary has no entries");
  for (const auto& [cat, pats] : table) {
    if (pats.empty() && body_lines != 0) lex.warnings.push_back(source + ": category '" + cat + "' is empty");
  }
  return lex;
}

Lexicon parse_emolex(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse_emolex(in, "emolex", path.string());
}

Lexicon parse_emolex(std::istream& in, const std::string& name, const std::string& source) {
  Lexicon lex;
  lex.name = name;
  lex.language = LexiconLanguage::en;
  auto& table = lex.categories[Lang::en];
  std::string line;
  std::size_t line_no = 0;
  std::set<std::string> seen_categories;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (utf8::trim(line).empty()) continue;
    auto cols = line.find('\t') != std::string::npos ? split_on(line, '\t') : std::vector<std::string_view>{};
    std::vector<std::string> fields;
    if (cols.empty()) {
      fields = split_ws(line);
    } else {
      for (auto c : cols) fields.emplace_back(utf8::trim(c));
    }
    if (fields.size() != 3) {
      throw ParseError(source, line_no, "expected 3 columns (word, category, flag), got " +
                                            std::to_string(fields.size()));
    }
    if (fields[2] != "0" && fields[2] != "1") {
      throw ParseError(source, line_no, "flag must be 0 or 1, got '" + fields[2] + "'");
    }
    if (fields[0].empty() || fields[1].empty()) throw ParseError(source, line_no, "empty field");
    seen_categories.insert(fields[1]);
    if (fields[2] == "0") continue;
    auto pats = expand_entry(fields[0], Lang::en, ZhMatchMode::tokens);
    for (auto& p : pats) {
      if (p.kind != PatternKind::literal_token) {
        throw ParseError(source, line_no, "EmoLex entries must be single words");
      }
      auto& list = table[fields[1]];
      if (std::find(list.begin(), list.end(), p) == list.end()) list.push_back(std::move(p));
    }
  }
  if (seen_categories.empty()) throw ParseError(source, line_no, "empty EmoLex file");
  // Categories that only ever appear with flag 0 still exist as columns.
  for (const auto& c : seen_categories) table[c];
  return lex;
}

Lexicon load_lexicon(std::string_view spec, Lang liwc_lang) {
  std::string format;
  std::string path(spec);
  for (std::string_view prefix : {"politelex:", "liwc:", "emolex:"}) {
    if (spec.substr(0, prefix.size()) == prefix) {
      format = std::string(prefix.substr(0, prefix.size() - 1));
      path = std::string(spec.substr(prefix.size()));
    }
  }
  const std::filesystem::path p(path);
  if (!std::filesystem::exists(p)) throw UsageError("lexicon not found: " + path);
  if (format.empty()) {
    const auto ext = p.extension().string();
    format = ext == ".json" ? "politelex" : ext == ".dic" ? "liwc" : "emolex";
  }
  if (format == "politelex") return parse_politelex(p);
  if (format == "liwc") return parse_liwc_dic(p, liwc_lang);
  return parse_emolex(p);
}

// --- Compiled matcher -----------------------------------------------------------

namespace {

struct StemTrie {
  struct Node {
    std::map<unsigned char, int> next;
    std::vector<std::size_t> categories;
  };
  std::vector<Node> nodes{Node{}};

  void insert(std::string_view stem, std::size_t category) {
    int cur = 0;
    for (unsigned char c : stem) {
      auto it = nodes[cur].next.find(c);
      if (it == nodes[cur].next.end()) {
        nodes.push_back({});
        const int id = static_cast<int>(nodes.size()) - 1;
        nodes[cur].next[c] = id;
        cur = id;
      } else {
        cur = it->second;
      }
    }
    auto& cats = nodes[cur].categories;
    if (std::find(cats.begin(), cats.end(), category) == cats.end()) cats.push_back(category);
  }

  template <typename Fn>
  void for_each_prefix(std::string_view token, Fn&& fn) const {
    int cur = 0;
    for (unsigned char c : token) {
      const auto it = nodes[cur].next.find(c);
      if (it == nodes[cur].next.end()) return;
      cur = it->second;
      for (auto cat : nodes[cur].categories) fn(cat);
    }
  }
};

// Aho-Corasick automaton over code points.
struct SubstringAutomaton {
  struct Node {
    std::map<char32_t, int> next;
    int fail = 0;
    std::vector<std::size_t> outputs;  // piece ids ending here
  };
  std::vector<Node> nodes{Node{}};
  std::vector<std::size_t> piece_lengths;

  std::size_t add(std::u32string_view piece) {
    int cur = 0;
    for (char32_t c : piece) {
      auto it = nodes[cur].next.find(c);
      if (it == nodes[cur].next.end()) {
        nodes.push_back({});
        const int id = static_cast<int>(nodes.size()) - 1;
        nodes[cur].next[c] = id;
        cur = id;
      } else {
        cur = it->second;
      }
    }
    const auto id = piece_lengths.size();
    piece_lengths.push_back(piece.size());
    nodes[cur].outputs.push_back(id);
    return id;
  }

  void build() {
    std::vector<int> queue;
    for (const auto& [c, child] : nodes[0].next) {
      nodes[child].fail = 0;
      queue.push_back(child);
    }
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const int u = queue[head];
      for (const auto& [c, v] : nodes[u].next) {
        int f = nodes[u].fail;
        while (f != 0 && !nodes[f].next.count(c)) f = nodes[f].fail;
        const auto it = nodes[f].next.find(c);
        nodes[v].fail = (it != nodes[f].next.end() && it->second != v) ? it->second : 0;
        const auto& inherited = nodes[nodes[v].fail].outputs;
        nodes[v].outputs.insert(nodes[v].outputs.end(), inherited.begin(), inherited.end());
        queue.push_back(v);
      }
    }
  }

  // fn(piece_id, start_offset)
  template <typename Fn>
  void scan(std::u32string_view text, Fn&& fn) const {
    int cur = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
      const char32_t c = text[i];
      while (cur != 0 && !nodes[cur].next.count(c)) cur = nodes[cur].fail;
      const auto it = nodes[cur].next.find(c);
      cur = it == nodes[cur].next.end() ? 0 : it->second;
      for (auto piece : nodes[cur].outputs) fn(piece, i + 1 - piece_lengths[piece]);
    }
  }
};

struct Phrase {
  std::size_t category;
  std::vector<std::string> tokens;
};

struct SubstringPattern {
  std::size_t category;
  std::vector<std::u32string> pieces;
};

bool atom_matches(const std::string& atom, const std::string& token) {
  if (is_stem_atom(atom)) {
    return token.size() >= atom.size() - 1 &&
           token.compare(0, atom.size() - 1, atom, 0, atom.size() - 1) == 0;
  }
  return atom == token;
}

std::string fold_token(const std::string& token) {
  const bool plain = std::none_of(token.begin(), token.end(), [](char c) {
    return (c >= 'A' && c <= 'Z') || (static_cast<unsigned char>(c) & 0x80);
  });
  return plain ? token : utf8::fold(token);
}

// Matches pieces at `start` with a 1-6 code point gap between pieces.
// Appends covered offsets; returns false when no placement fits.
bool match_pieces(std::u32string_view text, std::size_t start, std::size_t limit,
                  const std::vector<std::u32string>& pieces, std::size_t k,
                  std::vector<std::size_t>& covered) {
  const auto& piece = pieces[k];
  if (start + piece.size() > limit || text.compare(start, piece.size(), piece) != 0) {
    return false;
  }
  const auto mark = covered.size();
  for (std::size_t i = 0; i < piece.size(); ++i) covered.push_back(start + i);
  if (k + 1 == pieces.size()) return true;
  const std::size_t after = start + piece.size();
  for (std::size_t gap = kMinGap; gap <= kMaxGap; ++gap) {
    if (match_pieces(text, after + gap, limit, pieces, k + 1, covered)) return true;
  }
  covered.resize(mark);
  return false;
}

}  // namespace

struct CompiledMatcher::LanguageIndex {
  Lang lang = Lang::en;
  bool substring = false;
  // Token mode.
  std::unordered_map<std::string, std::vector<std::size_t>> tokens;
  StemTrie stems;
  std::unordered_map<std::string, std::vector<Phrase>> phrases;  // longest first
  std::vector<std::vector<std::vector<std::string>>> anchored;   // per category
  // Substring mode.
  SubstringAutomaton automaton;
  std::vector<SubstringPattern> substring_patterns;
  std::vector<std::size_t> first_piece_owner;  // piece id -> pattern id or npos
  std::vector<std::vector<std::vector<std::u32string>>> anchored_pieces;  // per category
  std::vector<bool> category_anchored;
};

CompiledMatcher compile(const Lexicon& lexicon) { return CompiledMatcher(lexicon); }

CompiledMatcher::~CompiledMatcher() = default;
CompiledMatcher::CompiledMatcher(CompiledMatcher&&) noexcept = default;
CompiledMatcher& CompiledMatcher::operator=(CompiledMatcher&&) noexcept = default;

CompiledMatcher::CompiledMatcher(const Lexicon& lexicon)
    : name_(lexicon.name), categories_(lexicon.category_names()) {
  anchored_.assign(categories_.size(), false);
  auto category_id = [this](const std::string& name) {
    return static_cast<std::size_t>(
        std::lower_bound(categories_.begin(), categories_.end(), name) - categories_.begin());
  };

  for (const auto& [lang, cats] : lexicon.categories) {
    auto idx = std::make_unique<LanguageIndex>();
    idx->lang = lang;
    idx->substring = lang == Lang::zh && lexicon.zh_mode == ZhMatchMode::substring;
    idx->anchored.resize(categories_.size());
    idx->anchored_pieces.resize(categories_.size());
    idx->category_anchored.assign(categories_.size(), false);

    for (const auto& [cat_name, patterns] : cats) {
      const auto cat = category_id(cat_name);
      for (const auto& p : patterns) {
        if (p.kind == PatternKind::anchored) {
          anchored_[cat] = true;
          idx->category_anchored[cat] = true;
        }
        if (idx->substring) {
          std::vector<std::u32string> pieces;
          for (const auto& t : p.tokens) pieces.push_back(utf8::decode(t));
          if (p.kind == PatternKind::anchored) {
            idx->anchored_pieces[cat].push_back(std::move(pieces));
          } else {
            idx->substring_patterns.push_back({cat, std::move(pieces)});
          }
          continue;
        }
        switch (p.kind) {
          case PatternKind::literal_token: {
            auto& list = idx->tokens[p.tokens[0]];
            if (std::find(list.begin(), list.end(), cat) == list.end()) list.push_back(cat);
            break;
          }
          case PatternKind::stem_wildcard:
            idx->stems.insert(std::string_view(p.tokens[0]).substr(0, p.tokens[0].size() - 1), cat);
            break;
          case PatternKind::token_phrase:
            idx->phrases[p.tokens[0]].push_back({cat, p.tokens});
            break;
          case PatternKind::anchored:
            idx->anchored[cat].push_back(p.tokens);
            break;
        }
      }
    }
    for (auto& [first, list] : idx->phrases) {
      std::stable_sort(list.begin(), list.end(), [](const Phrase& a, const Phrase& b) {
        return a.tokens.size() > b.tokens.size();
      });
    }
    if (idx->substring) {
      for (std::size_t pid = 0; pid < idx->substring_patterns.size(); ++pid) {
        const auto piece = idx->automaton.add(idx->substring_patterns[pid].pieces.front());
        idx->first_piece_owner.resize(piece + 1, static_cast<std::size_t>(-1));
        idx->first_piece_owner[piece] = pid;
      }
      idx->automaton.build();
    }
    index_[lang] = std::move(idx);
  }
}

bool CompiledMatcher::handles(Lang lang) const { return index_.count(lang) != 0; }

ZhTextView make_zh_view(const TokenizedPost& post) {
  ZhTextView view;
  view.token_offsets.reserve(post.tokens.size() + 1);
  for (const auto& token : post.tokens) {
    view.token_offsets.push_back(view.text.size());
    if (meta::is_meta_token(token)) {
      view.text.push_back(kMetaPlaceholder);
      view.countable.push_back(true);
      continue;
    }
    for (char32_t cp : utf8::decode(token)) {
      view.text.push_back(utf8::fold(cp));
      view.countable.push_back(!utf8::is_punct(cp) && !utf8::is_space(cp));
    }
  }
  view.token_offsets.push_back(view.text.size());
  view.countable_total =
      static_cast<std::size_t>(std::count(view.countable.begin(), view.countable.end(), true));
  return view;
}

std::vector<CategoryMatches> CompiledMatcher::match(const TokenizedPost& post) const {
  std::vector<CategoryMatches> out(categories_.size());
  const auto it = index_.find(post.lang);
  for (std::size_t c = 0; c < out.size(); ++c) {
    out[c].unit = anchored_[c] ? MatchUnit::sentences
                  : (it != index_.end() && it->second->substring) ? MatchUnit::codepoints
                                                                  : MatchUnit::tokens;
  }
  if (it == index_.end()) return out;
  const auto& idx = *it->second;

  if (idx.substring) {
    const auto view = make_zh_view(post);
    std::vector<std::size_t> covered;
    idx.automaton.scan(view.text, [&](std::size_t piece, std::size_t start) {
      if (piece >= idx.first_piece_owner.size()) return;
      const auto pid = idx.first_piece_owner[piece];
      if (pid == static_cast<std::size_t>(-1)) return;
      const auto& pat = idx.substring_patterns[pid];
      covered.clear();
      if (match_pieces(view.text, start, view.text.size(), pat.pieces, 0, covered)) {
        for (auto pos : covered) {
          if (view.countable[pos]) out[pat.category].positions.push_back(pos);
        }
      }
    });
    for (std::size_t s = 0; s < post.sentences.size(); ++s) {
      const auto begin = view.token_offsets[post.sentences[s].begin];
      const auto end = view.token_offsets[post.sentences[s].end];
      for (std::size_t c = 0; c < categories_.size(); ++c) {
        for (const auto& pieces : idx.anchored_pieces[c]) {
          covered.clear();
          if (match_pieces(view.text, begin, end, pieces, 0, covered)) {
            out[c].positions.push_back(s);
            break;
          }
        }
      }
    }
  } else {
    std::vector<std::string> folded;
    folded.reserve(post.tokens.size());
    for (const auto& t : post.tokens) folded.push_back(fold_token(t));

    std::vector<std::size_t> phrase_cursor(categories_.size(), 0);
    for (std::size_t i = 0; i < folded.size(); ++i) {
      const auto& tok = folded[i];
      if (const auto lit = idx.tokens.find(tok); lit != idx.tokens.end()) {
        for (auto c : lit->second) out[c].positions.push_back(i);
      }
      idx.stems.for_each_prefix(tok, [&](std::size_t c) { out[c].positions.push_back(i); });
      const auto ph = idx.phrases.find(tok);
      if (ph == idx.phrases.end()) continue;
      // Greedy, non-overlapping, longest first within each category.
      for (const auto& phrase : ph->second) {
        const auto c = phrase.category;
        if (phrase_cursor[c] > i) continue;
        const auto len = phrase.tokens.size();
        if (i + len > folded.size()) continue;
        if (!std::equal(phrase.tokens.begin(), phrase.tokens.end(), folded.begin() + i)) continue;
        for (std::size_t k = 0; k < len; ++k) out[c].positions.push_back(i + k);
        phrase_cursor[c] = i + len;
      }
    }
    for (std::size_t s = 0; s < post.sentences.size(); ++s) {
      const auto span = post.sentences[s];
      for (std::size_t c = 0; c < categories_.size(); ++c) {
        for (const auto& seq : idx.anchored[c]) {
          if (span.begin + seq.size() > span.end) continue;
          bool ok = true;
          for (std::size_t k = 0; k < seq.size() && ok; ++k) {
            ok = atom_matches(seq[k], folded[span.begin + k]);
          }
          if (ok) {
            out[c].positions.push_back(s);
            break;
          }
        }
      }
    }
  }

  for (auto& m : out) {
    std::sort(m.positions.begin(), m.positions.end());
    m.positions.erase(std::unique(m.positions.begin(), m.positions.end()), m.positions.end());
  }
  return out;
}

std::vector<std::string> CompiledMatcher::matched_categories(const TokenizedPost& post) const {
  std::vector<std::string> names;
  const auto hits = match(post);
  for (std::size_t c = 0; c < hits.size(); ++c) {
    if (!hits[c].positions.empty()) names.push_back(categories_[c]);
  }
  return names;
}

std::vector<std::string> CompiledMatcher::match_token(std::string_view token, Lang lang) const {
  std::vector<std::string> names;
  const auto it = index_.find(lang);
  if (it == index_.end() || it->second->substring) return names;
  const auto folded = fold_token(std::string(token));
  std::set<std::size_t> cats;
  if (const auto lit = it->second->tokens.find(folded); lit != it->second->tokens.end()) {
    cats.insert(lit->second.begin(), lit->second.end());
  }
  it->second->stems.for_each_prefix(folded, [&](std::size_t c) { cats.insert(c); });
  for (auto c : cats) names.push_back(categories_[c]);
  return names;
}

}  // namespace polite
