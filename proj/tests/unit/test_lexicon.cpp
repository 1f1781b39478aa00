#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "../support/category_examples.hpp"
#include "polite/lexicon.hpp"
#include "polite/tokenizer.hpp"

using namespace polite;
using Names = std::vector<std::string>;

namespace {

const ZhDictionary& dict() {
  static const ZhDictionary d = ZhDictionary::load(POLITENESS_DATA_DIR "/zh_dict.txt");
  return d;
}

const Lexicon& politelex() {
  static const Lexicon lex = parse_politelex(POLITENESS_DATA_DIR "/politelex.json");
  return lex;
}

const CompiledMatcher& politelex_matcher() {
  static const CompiledMatcher m = compile(politelex());
  return m;
}

bool has(const Names& names, const std::string& n) {
  return std::find(names.begin(), names.end(), n) != names.end();
}

Lexicon politelex_from(const std::string& json) {
  std::istringstream in(json);
  return parse_politelex(in, "test.json");
}

Lexicon liwc_from(const std::string& text) {
  std::istringstream in(text);
  return parse_liwc_dic(in, "liwc", Lang::en, "test.dic");
}

Lexicon emolex_from(const std::string& text) {
  std::istringstream in(text);
  return parse_emolex(in, "emolex", "test.txt");
}

}  // namespace

TEST_CASE("shipped PoliteLex has 26 categories with bilingual parity") {
  const auto& lex = politelex();
  REQUIRE(lex.has_language(Lang::en));
  REQUIRE(lex.has_language(Lang::zh));
  CHECK(lex.categories.at(Lang::en).size() == 26);
  Names en, zh;
  for (const auto& [k, v] : lex.categories.at(Lang::en)) en.push_back(k);
  for (const auto& [k, v] : lex.categories.at(Lang::zh)) zh.push_back(k);
  CHECK(en == zh);
  Names table;
  for (const auto& row : fixtures::category_examples()) table.push_back(row.category);
  std::sort(table.begin(), table.end());
  CHECK(en == table);
}

TEST_CASE("category examples self-match in both languages") {
  const auto& m = politelex_matcher();
  for (const auto& row : fixtures::category_examples()) {
    for (const auto& text : row.en) {
      INFO(row.category << " <- " << text);
      CHECK(has(m.matched_categories(tokenize_en(text)), row.category));
    }
    for (const auto& text : row.zh) {
      INFO(row.category << " <- " << text);
      CHECK(has(m.matched_categories(segment_zh(text, dict())), row.category));
    }
  }
}

TEST_CASE("property: every shipped pattern matches its own canonical text") {
  const auto& m = politelex_matcher();
  for (const auto& [lang, cats] : politelex().categories) {
    for (const auto& [cat, patterns] : cats) {
      for (const auto& p : patterns) {
        const auto text = p.canonical_text(lang);
        INFO(cat << " <- " << p.surface << " as '" << text << "'");
        const auto post = lang == Lang::en ? tokenize_en(text) : segment_zh(text, dict());
        CHECK(has(m.matched_categories(post), cat));
      }
    }
  }
}

TEST_CASE("worked examples activate their markers") {
  const auto& m = politelex_matcher();
  CHECK(has(m.matched_categories(tokenize_en("@user thanks dawgggg")), "gratitude"));
  const auto zh = m.matched_categories(segment_zh("谢谢分享！马上下来试试", dict()));
  CHECK(has(zh, "gratitude"));
  CHECK(has(zh, "emergency"));
}

TEST_CASE("entry expansion") {
  const auto plz = expand_entry("plz+", Lang::en, ZhMatchMode::tokens);
  REQUIRE(plz.size() == 5);
  CHECK(plz.front().tokens == Names{"plz"});
  CHECK(plz.back().tokens == Names{"plzzzzz"});
  CHECK(plz.front().kind == PatternKind::literal_token);

  const auto start = expand_entry("^please|pls+", Lang::en, ZhMatchMode::tokens);
  CHECK(start.size() == 6);
  for (const auto& p : start) CHECK(p.kind == PatternKind::anchored);

  CHECK(expand_entry("happ*", Lang::en, ZhMatchMode::tokens).front().kind ==
        PatternKind::stem_wildcard);
  CHECK(expand_entry("by the way", Lang::en, ZhMatchMode::tokens).front().kind ==
        PatternKind::token_phrase);
  CHECK(expand_entry("Mr.", Lang::en, ZhMatchMode::tokens).front().tokens == Names{"mr."});

  CHECK_THROWS_AS(expand_entry("a*", Lang::en, ZhMatchMode::tokens), DataError);
  CHECK_THROWS_AS(expand_entry("*", Lang::en, ZhMatchMode::tokens), DataError);
  CHECK_THROWS_AS(expand_entry("", Lang::en, ZhMatchMode::tokens), DataError);
  CHECK_THROWS_AS(expand_entry("^", Lang::en, ZhMatchMode::tokens), DataError);
  CHECK_THROWS_AS(expand_entry("can…do", Lang::en, ZhMatchMode::tokens), DataError);
  CHECK_THROWS_AS(expand_entry("good stu*", Lang::en, ZhMatchMode::tokens), DataError);
}

TEST_CASE("PoliteLex parsing") {
  const auto lex = politelex_from(
      R"({"name":"p","languages":{"en":{"gratitude":["thanks","thx"],"start_please":["^please"]},)"
      R"("zh":{"gratitude":["谢谢"],"start_please":["^请"]}}})");
  CHECK(lex.zh_mode == ZhMatchMode::substring);
  CHECK(lex.categories.at(Lang::en).at("start_please").front().kind == PatternKind::anchored);
  const auto m = compile(lex);
  CHECK(m.matched_categories(tokenize_en("thx")) == Names{"gratitude"});
  CHECK(m.matched_categories(segment_zh("谢谢", dict())) == Names{"gratitude"});

  CHECK_THROWS_AS(politelex_from(""), ParseError);
  CHECK_THROWS_AS(politelex_from("{"), ParseError);
  CHECK_THROWS_AS(politelex_from(R"({"name":"p","languages":{"fr":{"a":["b"]}}})"), DataError);
  CHECK_THROWS_AS(politelex_from(R"({"name":"p","languages":{"en":{"a":[]}}})"), DataError);
  CHECK_THROWS_AS(
      politelex_from(R"({"name":"p","languages":{"en":{"a":["x"]},"zh":{"b":["y"]}}})"),
      DataError);
  CHECK_THROWS_AS(politelex_from(R"({"name":"p","languages":{"en":{"a":["^x","y"]}}})"),
                  DataError);
}

TEST_CASE("LIWC dictionary parsing") {
  const auto lex = liwc_from("%\n1\tposemo\n2\tnegemo\n%\nhapp*\t1\ngood\t1\nsad\t2\n");
  const auto& cats = lex.categories.at(Lang::en);
  CHECK(cats.at("posemo").front().kind == PatternKind::stem_wildcard);
  const auto m = compile(lex);
  CHECK(m.match_token("happiness", Lang::en) == Names{"posemo"});
  CHECK(m.match_token("sad", Lang::en) == Names{"negemo"});
  CHECK(m.match_token("hap", Lang::en).empty());

  try {
    liwc_from("%\n1\tposemo\n%\ngood\t1\t2\n");
    FAIL("undeclared id accepted");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
  const auto empty = liwc_from("%\n1\tposemo\n%\n");
  CHECK(empty.pattern_count() == 0);
  CHECK_FALSE(empty.warnings.empty());
  CHECK_THROWS_AS(liwc_from("1\tposemo\ngood\t1\n"), ParseError);
  CHECK_THROWS_AS(liwc_from("%\n1\tposemo\ngood\t1\n"), ParseError);
}

TEST_CASE("EmoLex parsing") {
  const auto lex = emolex_from("abandon\tfear\t1\nabandon\tjoy\t0\n");
  const auto& cats = lex.categories.at(Lang::en);
  CHECK(cats.at("fear").size() == 1);
  CHECK(cats.at("joy").empty());
  CHECK(compile(lex).match_token("abandon", Lang::en) == Names{"fear"});
  try {
    emolex_from("abandon\tfear\t1\nabandon\tfear\n");
    FAIL("two-column line accepted");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(emolex_from("abandon\tfear\t2\n"), ParseError);
}

TEST_CASE("compiled phrase, stem and overlap behaviour") {
  const auto& m = politelex_matcher();
  CHECK(has(m.matched_categories(tokenize_en("by the way")), "indirect_btw"));
  CHECK(has(m.matched_categories(tokenize_en("what the fuckkk")), "taboo"));
  // One token may feed several categories.
  const auto you = m.matched_categories(tokenize_en("you rock"));
  CHECK(has(you, "you_direct"));
  CHECK(has(you, "start_you"));
  // Anchoring applies at every sentence start, not mid-sentence.
  CHECK(has(m.matched_categories(tokenize_en("ok. please go")), "start_please"));
  CHECK_FALSE(has(m.matched_categories(tokenize_en("go, please")), "start_please"));
}

TEST_CASE("property: stem matches everything its literal prefix matches") {
  const auto lex = liwc_from("%\n1\tliteral\n2\tstem\n%\nhappy\t1\nhapp*\t2\n");
  const auto m = compile(lex);
  std::mt19937_64 rng(3);
  const std::string letters = "ahpyines";
  for (int trial = 0; trial < 2000; ++trial) {
    std::string tok = (rng() % 2) ? "happ" : "";
    const auto extra = rng() % 5;
    for (std::size_t k = 0; k < extra; ++k) tok += letters[rng() % letters.size()];
    if (tok.empty()) continue;
    const auto hits = m.match_token(tok, Lang::en);
    if (has(hits, "literal")) CHECK(has(hits, "stem"));
    CHECK(has(hits, "stem") == (tok.rfind("happ", 0) == 0));
  }
}

TEST_CASE("property: matching is identical across threads") {
  const auto& m = politelex_matcher();
  const std::vector<std::string> texts{"thanks so much, mr. smith!", "please help me asap",
                                       "wtf is this shit", "by the way we did it together"};
  std::vector<TokenizedPost> posts;
  for (const auto& t : texts) posts.push_back(tokenize_en(t));
  std::vector<Names> serial;
  for (const auto& p : posts) serial.push_back(m.matched_categories(p));
  std::vector<std::vector<Names>> parallel(4);
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (int rep = 0; rep < 50; ++rep) {
        parallel[t].clear();
        for (const auto& p : posts) parallel[t].push_back(m.matched_categories(p));
      }
    });
  }
  for (auto& t : threads) t.join();
  for (const auto& r : parallel) CHECK(r == serial);
}
