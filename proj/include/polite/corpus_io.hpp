#pragma once

// Corpus and annotation ingestion, plus the TSV serializations other
// modules exchange through files.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "polite/common.hpp"
#include "polite/feature_matrix.hpp"

namespace polite {

struct Post {
  std::string id;
  Lang lang = Lang::en;
  std::string text;

  friend bool operator==(const Post&, const Post&) = default;
};

/// Ordered posts with unique, non-empty ids and non-blank text.
class Corpus {
 public:
  Corpus() = default;
  /// Throws DataError on an empty/duplicate id or blank text.
  explicit Corpus(std::vector<Post> posts);

  const std::vector<Post>& posts() const noexcept { return posts_; }
  std::size_t size() const noexcept { return posts_.size(); }
  bool empty() const noexcept { return posts_.empty(); }
  const Post& operator[](std::size_t i) const { return posts_[i]; }
  auto begin() const noexcept { return posts_.begin(); }
  auto end() const noexcept { return posts_.end(); }

  friend bool operator==(const Corpus&, const Corpus&) = default;

 private:
  std::vector<Post> posts_;
};

enum class CorpusFormat { jsonl, csv };

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format);
Corpus read_corpus_jsonl(std::istream& in, const std::string& source = "<stream>");
Corpus read_corpus_csv(std::istream& in, const std::string& source = "<stream>");
void write_corpus_jsonl(std::ostream& out, const Corpus& corpus);

inline constexpr int kMinScore = -3;
inline constexpr int kMaxScore = 3;

/// Posts x annotators, raw integer scores in [-3, 3], absent cells allowed.
class AnnotationTable {
 public:
  AnnotationTable() = default;
  AnnotationTable(std::vector<std::string> post_ids, std::vector<std::string> annotator_ids);

  const std::vector<std::string>& post_ids() const noexcept { return post_ids_; }
  const std::vector<std::string>& annotator_ids() const noexcept { return annotator_ids_; }
  std::size_t rows() const noexcept { return post_ids_.size(); }
  std::size_t cols() const noexcept { return annotator_ids_.size(); }

  std::optional<int> at(std::size_t row, std::size_t col) const {
    return scores_[row * annotator_ids_.size() + col];
  }
  /// Throws DataError when the score is outside [-3, 3].
  void set(std::size_t row, std::size_t col, std::optional<int> score);

  std::size_t present_in_row(std::size_t row) const;
  std::size_t present_in_column(std::size_t col) const;
  bool is_complete() const;

  /// Dense copy; requires is_complete().
  Eigen::MatrixXd to_matrix() const;

  friend bool operator==(const AnnotationTable&, const AnnotationTable&) = default;

 private:
  std::vector<std::string> post_ids_;
  std::vector<std::string> annotator_ids_;
  std::vector<std::optional<int>> scores_;
};

/// Long-format CSV with header `post_id,annotator_id,score`. Rows and
/// columns appear in first-seen order.
AnnotationTable load_annotations(const std::filesystem::path& path);
AnnotationTable read_annotations_csv(std::istream& in, const std::string& source = "<stream>");
void write_annotations_csv(std::ostream& out, const AnnotationTable& table);

/// TSV: optional `#` comment lines, header `post_id<TAB>cat...`, one row per
/// post with 6-significant-digit values.
void write_feature_tsv(std::ostream& out, const FeatureMatrix& features,
                       const std::vector<std::string>& comments = {});
FeatureMatrix read_feature_tsv(std::istream& in, const std::string& source = "<stream>");

/// Formats with %.6g.
std::string format_value(double value);

/// RFC 4180 CSV record reader (quoted fields, doubled quotes, embedded
/// newlines). Records carry the line they start on.
struct CsvRecord {
  std::size_t line = 0;
  std::vector<std::string> fields;
};
std::vector<CsvRecord> read_csv(std::istream& in, const std::string& source, char sep = ',');

}  // namespace polite
