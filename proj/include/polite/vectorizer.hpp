#pragma once

// Per-category proportion features for tokenized posts.

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "polite/common.hpp"
#include "polite/corpus_io.hpp"
#include "polite/feature_matrix.hpp"
#include "polite/lexicon.hpp"
#include "polite/tokenizer.hpp"

namespace polite {

class EmptyPostError : public DataError {
 public:
  explicit EmptyPostError(std::string post_id)
      : DataError("post '" + post_id + "' has no tokens"), post_id_(std::move(post_id)) {}
  const std::string& post_id() const noexcept { return post_id_; }

 private:
  std::string post_id_;
};

struct FeatureVector {
  std::string post_id;
  std::map<std::string, double> values;
};

/// Column layout over several matchers. A category name shared by two
/// lexica is qualified as `lexicon.category` in both; columns are sorted.
class FeatureExtractor {
 public:
  explicit FeatureExtractor(std::span<const CompiledMatcher> matchers);

  const std::vector<std::string>& columns() const noexcept { return columns_; }

  /// Writes one row of proportions into `row` (size columns()).
  void extract_into(const TokenizedPost& post, std::span<double> row) const;
  FeatureVector extract(const TokenizedPost& post) const;

  /// Rows follow `posts`. `workers` = 0 picks the hardware concurrency; the
  /// result does not depend on it.
  FeatureMatrix extract_all(std::span<const TokenizedPost> posts, std::size_t workers = 0) const;

 private:
  std::span<const CompiledMatcher> matchers_;
  std::vector<std::string> columns_;
  // column_[m][c] = output column of category c of matcher m
  std::vector<std::vector<std::size_t>> column_;
};

FeatureVector extract(const TokenizedPost& post, std::span<const CompiledMatcher> matchers);

FeatureMatrix extract_corpus(std::span<const TokenizedPost> posts,
                             std::span<const CompiledMatcher> matchers, std::size_t workers = 0);

/// Tokenizes (in each post's language) and extracts.
FeatureMatrix extract_corpus(const Corpus& corpus, const ZhDictionary& dict,
                             std::span<const CompiledMatcher> matchers, std::size_t workers = 0);

/// Runs `fn(i)` for i in [0, n) on up to `workers` threads. If any call
/// throws, the exception from the smallest i is rethrown.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace polite
