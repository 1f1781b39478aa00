#include "polite/corpus_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "polite/unicode.hpp"

namespace polite {

namespace {

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

void strip_bom(std::string& line) {
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
}

}  // namespace

// --- Corpus ---------------------------------------------------------------------

Corpus::Corpus(std::vector<Post> posts) : posts_(std::move(posts)) {
  std::unordered_set<std::string> seen;
  for (const auto& p : posts_) {
    if (p.id.empty()) throw DataError("post with empty id");
    if (!seen.insert(p.id).second) throw DataError("duplicate post id '" + p.id + "'");
    if (utf8::trim(p.text).empty()) throw DataError("post '" + p.id + "' has blank text");
  }
}

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format) {
  auto in = open_or_throw(path);
  return format == CorpusFormat::jsonl ? read_corpus_jsonl(in, path.string())
                                       : read_corpus_csv(in, path.string());
}

namespace {

// Validates one record and appends it; errors carry the record's line.
void append_post(std::vector<Post>& posts, std::unordered_set<std::string>& seen,
                 std::string id, std::string_view lang, std::string text,
                 const std::string& source, std::size_t line) {
  if (id.empty()) throw ParseError(source, line, "empty id");
  Lang parsed;
  try {
    parsed = parse_lang(lang);
  } catch (const DataError& e) {
    throw ParseError(source, line, e.what());
  }
  if (utf8::trim(text).empty()) throw ParseError(source, line, "blank text for id '" + id + "'");
  if (!seen.insert(id).second) throw ParseError(source, line, "duplicate id '" + id + "'");
  posts.push_back({std::move(id), parsed, std::move(text)});
}

}  // namespace

Corpus read_corpus_jsonl(std::istream& in, const std::string& source) {
  using nlohmann::json;
  std::vector<Post> posts;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line_no == 1) strip_bom(line);
    if (utf8::trim(line).empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(source, line_no, std::string("malformed JSON record: ") + e.what());
    }
    if (!rec.is_object()) throw ParseError(source, line_no, "record must be a JSON object");
    for (const char* key : {"id", "lang", "text"}) {
      if (!rec.contains(key) || !rec[key].is_string()) {
        throw ParseError(source, line_no, std::string("missing string field '") + key + "'");
      }
    }
    append_post(posts, seen, rec["id"].get<std::string>(), rec["lang"].get<std::string>(),
                rec["text"].get<std::string>(), source, line_no);
  }
  return Corpus(std::move(posts));
}

Corpus read_corpus_csv(std::istream& in, const std::string& source) {
  const auto records = read_csv(in, source);
  if (records.empty()) return Corpus{};
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < records[0].fields.size(); ++i) col[records[0].fields[i]] = i;
  for (const char* key : {"id", "lang", "text"}) {
    if (!col.count(key)) {
      throw ParseError(source, records[0].line, std::string("header lacks column '") + key + "'");
    }
  }
  std::vector<Post> posts;
  std::unordered_set<std::string> seen;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != records[0].fields.size()) {
      throw ParseError(source, rec.line, "expected " + std::to_string(records[0].fields.size()) +
                                             " fields, got " + std::to_string(rec.fields.size()));
    }
    append_post(posts, seen, rec.fields[col["id"]], rec.fields[col["lang"]],
                rec.fields[col["text"]], source, rec.line);
  }
  return Corpus(std::move(posts));
}

void write_corpus_jsonl(std::ostream& out, const Corpus& corpus) {
  for (const auto& p : corpus) {
    nlohmann::ordered_json rec;
    rec["id"] = p.id;
    rec["lang"] = std::string(to_string(p.lang));
    rec["text"] = p.text;
    out << rec.dump() << '\n';
  }
}

// --- CSV ----------------------------------------------------------------------------

std::vector<CsvRecord> read_csv(std::istream& in, const std::string& source, char sep) {
  std::vector<CsvRecord> records;
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  strip_bom(content);
  std::size_t line = 1;
  std::size_t i = 0;
  const auto n = content.size();
  while (i < n) {
    CsvRecord rec;
    rec.line = line;
    std::string field;
    bool in_quotes = false;
    bool field_quoted = false;
    bool done = false;
    while (!done) {
      if (i >= n) {
        if (in_quotes) throw ParseError(source, rec.line, "unterminated quoted field");
        rec.fields.push_back(std::move(field));
        break;
      }
      const char c = content[i];
      if (in_quotes) {
        if (c == '"') {
          if (i + 1 < n && content[i + 1] == '"') {
            field.push_back('"');
            i += 2;
          } else {
            in_quotes = false;
            ++i;
          }
        } else {
          if (c == '\n') ++line;
          field.push_back(c);
          ++i;
        }
        continue;
      }
      if (c == '"' && field.empty() && !field_quoted) {
        in_quotes = true;
        field_quoted = true;
        ++i;
      } else if (c == sep) {
        rec.fields.push_back(std::move(field));
        field.clear();
        field_quoted = false;
        ++i;
      } else if (c == '\r' && i + 1 < n && content[i + 1] == '\n') {
        i += 2;
        ++line;
        rec.fields.push_back(std::move(field));
        done = true;
      } else if (c == '\n') {
        ++i;
        ++line;
        rec.fields.push_back(std::move(field));
        done = true;
      } else {
        if (field_quoted) throw ParseError(source, line, "text after closing quote");
        field.push_back(c);
        ++i;
      }
    }
    const bool blank = rec.fields.size() == 1 && rec.fields[0].empty();
    if (!blank) records.push_back(std::move(rec));
  }
  return records;
}

// --- Annotations ----------------------------------------------------------------------

AnnotationTable::AnnotationTable(std::vector<std::string> post_ids,
                                 std::vector<std::string> annotator_ids)
    : post_ids_(std::move(post_ids)),
      annotator_ids_(std::move(annotator_ids)),
      scores_(post_ids_.size() * annotator_ids_.size()) {}

void AnnotationTable::set(std::size_t row, std::size_t col, std::optional<int> score) {
  if (score && (*score < kMinScore || *score > kMaxScore)) {
    throw DataError("score " + std::to_string(*score) + " outside [-3, 3]");
  }
  scores_[row * annotator_ids_.size() + col] = score;
}

std::size_t AnnotationTable::present_in_row(std::size_t row) const {
  std::size_t n = 0;
  for (std::size_t c = 0; c < cols(); ++c) n += at(row, c).has_value();
  return n;
}

std::size_t AnnotationTable::present_in_column(std::size_t col) const {
  std::size_t n = 0;
  for (std::size_t r = 0; r < rows(); ++r) n += at(r, col).has_value();
  return n;
}

bool AnnotationTable::is_complete() const {
  for (const auto& s : scores_) {
    if (!s) return false;
  }
  return !scores_.empty();
}

Eigen::MatrixXd AnnotationTable::to_matrix() const {
  if (!is_complete()) throw DataError("annotation table has missing cells");
  Eigen::MatrixXd m(rows(), cols());
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::size_t c = 0; c < cols(); ++c) m(r, c) = *at(r, c);
  }
  return m;
}

AnnotationTable load_annotations(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return read_annotations_csv(in, path.string());
}

AnnotationTable read_annotations_csv(std::istream& in, const std::string& source) {
  const auto records = read_csv(in, source);
  if (records.empty()) throw ParseError(source, 1, "empty annotation file");
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < records[0].fields.size(); ++i) {
    col[std::string(utf8::trim(records[0].fields[i]))] = i;
  }
  for (const char* key : {"post_id", "annotator_id", "score"}) {
    if (!col.count(key)) {
      throw ParseError(source, records[0].line, std::string("header lacks column '") + key + "'");
    }
  }
  if (records.size() == 1) throw ParseError(source, records[0].line, "no annotation rows");

  struct Cell {
    std::size_t post, annotator;
    int score;
  };
  std::vector<std::string> posts, annotators;
  std::unordered_map<std::string, std::size_t> post_index, annotator_index;
  std::vector<Cell> cells;
  std::unordered_set<std::string> pairs;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != records[0].fields.size()) {
      throw ParseError(source, rec.line, "expected " + std::to_string(records[0].fields.size()) +
                                             " fields, got " + std::to_string(rec.fields.size()));
    }
    const std::string post(utf8::trim(rec.fields[col["post_id"]]));
    const std::string annotator(utf8::trim(rec.fields[col["annotator_id"]]));
    const std::string score_text(utf8::trim(rec.fields[col["score"]]));
    if (post.empty() || annotator.empty()) throw ParseError(source, rec.line, "empty id");
    int score = 0;
    const char* first = score_text.data();
    const char* last = first + score_text.size();
    if (first != last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, score);
    if (ec != std::errc{} || ptr != last || score_text.empty()) {
      throw ParseError(source, rec.line, "non-integer score '" + score_text + "'");
    }
    if (score < kMinScore || score > kMaxScore) {
      throw ParseError(source, rec.line, "score " + score_text + " outside [-3, 3]");
    }
    if (!pairs.insert(post + '\x1f' + annotator).second) {
      throw ParseError(source, rec.line,
                       "duplicate score for post '" + post + "' by annotator '" + annotator + "'");
    }
    auto [pit, pnew] = post_index.try_emplace(post, posts.size());
    if (pnew) posts.push_back(post);
    auto [ait, anew] = annotator_index.try_emplace(annotator, annotators.size());
    if (anew) annotators.push_back(annotator);
    cells.push_back({pit->second, ait->second, score});
  }
  AnnotationTable table(std::move(posts), std::move(annotators));
  for (const auto& c : cells) table.set(c.post, c.annotator, c.score);
  return table;
}

void write_annotations_csv(std::ostream& out, const AnnotationTable& table) {
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + '"';
  };
  out << "post_id,annotator_id,score\n";
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t c = 0; c < table.cols(); ++c) {
      if (const auto s = table.at(r, c)) {
        out << quote(table.post_ids()[r]) << ',' << quote(table.annotator_ids()[c]) << ',' << *s
            << '\n';
      }
    }
  }
}

// --- Feature TSV --------------------------------------------------------------------

std::string format_value(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

void write_feature_tsv(std::ostream& out, const FeatureMatrix& features,
                       const std::vector<std::string>& comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
  out << "post_id";
  for (const auto& c : features.categories) out << '\t' << c;
  out << '\n';
  for (Eigen::Index r = 0; r < features.rows(); ++r) {
    out << features.post_ids[r];
    for (Eigen::Index c = 0; c < features.cols(); ++c) out << '\t' << format_value(features.values(r, c));
    out << '\n';
  }
}

FeatureMatrix read_feature_tsv(std::istream& in, const std::string& source) {
  FeatureMatrix fm;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::vector<std::vector<double>> rows;
  auto split_tabs = [](const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
      const auto pos = s.find('\t', start);
      out.push_back(s.substr(start, pos == std::string::npos ? pos : pos - start));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    return out;
  };
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_tabs(line);
    if (!have_header) {
      if (fields.empty() || fields[0] != "post_id") {
        throw ParseError(source, line_no, "feature header must start with 'post_id'");
      }
      fm.categories.assign(fields.begin() + 1, fields.end());
      have_header = true;
      continue;
    }
    if (fields.size() != fm.categories.size() + 1) {
      throw ParseError(source, line_no, "expected " + std::to_string(fm.categories.size() + 1) +
                                            " columns, got " + std::to_string(fields.size()));
    }
    std::vector<double> row;
    for (std::size_t k = 1; k < fields.size(); ++k) {
      char* end = nullptr;
      const double v = std::strtod(fields[k].c_str(), &end);
      if (fields[k].empty() || *end != '\0' || !std::isfinite(v)) {
        throw ParseError(source, line_no, "bad value '" + fields[k] + "'");
      }
      row.push_back(v);
    }
    fm.post_ids.push_back(fields[0]);
    rows.push_back(std::move(row));
  }
  if (!have_header) throw ParseError(source, line_no, "missing feature header");
  fm.values.resize(static_cast<Eigen::Index>(rows.size()),
                   static_cast<Eigen::Index>(fm.categories.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) fm.values(r, c) = rows[r][c];
  }
  return fm;
}

}  // namespace polite
