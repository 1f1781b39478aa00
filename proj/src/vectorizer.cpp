#include "polite/vectorizer.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <unordered_map>

namespace polite {

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t failed_at = n;
  std::exception_ptr failure;
  auto run = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

FeatureExtractor::FeatureExtractor(std::span<const CompiledMatcher> matchers)
    : matchers_(matchers) {
  std::unordered_map<std::string, std::size_t> owners;
  for (const auto& m : matchers_) {
    for (const auto& c : m.categories()) ++owners[c];
  }
  std::vector<std::vector<std::string>> names(matchers_.size());
  for (std::size_t m = 0; m < matchers_.size(); ++m) {
    for (const auto& c : matchers_[m].categories()) {
      names[m].push_back(owners[c] > 1 ? matchers_[m].name() + "." + c : c);
      columns_.push_back(names[m].back());
    }
  }
  std::sort(columns_.begin(), columns_.end());
  if (const auto dup = std::adjacent_find(columns_.begin(), columns_.end()); dup != columns_.end()) {
    throw DataError("feature column '" + *dup + "' is defined twice (two lexica of the same kind?)");
  }
  column_.resize(matchers_.size());
  for (std::size_t m = 0; m < matchers_.size(); ++m) {
    for (const auto& n : names[m]) {
      column_[m].push_back(static_cast<std::size_t>(
          std::lower_bound(columns_.begin(), columns_.end(), n) - columns_.begin()));
    }
  }
}

void FeatureExtractor::extract_into(const TokenizedPost& post, std::span<double> row) const {
  if (post.token_count() == 0) throw EmptyPostError(post.post_id);
  std::fill(row.begin(), row.end(), 0.0);
  std::optional<std::size_t> codepoints;
  for (std::size_t m = 0; m < matchers_.size(); ++m) {
    const auto hits = matchers_[m].match(post);
    for (std::size_t c = 0; c < hits.size(); ++c) {
      const auto matched = hits[c].positions.size();
      if (matched == 0) continue;
      std::size_t denom = 0;
      switch (hits[c].unit) {
        case MatchUnit::tokens:
          denom = post.token_count();
          break;
        case MatchUnit::sentences:
          denom = post.sentences.size();
          break;
        case MatchUnit::codepoints:
          if (!codepoints) codepoints = make_zh_view(post).countable_total;
          denom = *codepoints;
          break;
      }
      row[column_[m][c]] = denom == 0 ? 0.0 : std::min(1.0, double(matched) / double(denom));
    }
  }
}

FeatureVector FeatureExtractor::extract(const TokenizedPost& post) const {
  std::vector<double> row(columns_.size());
  extract_into(post, row);
  FeatureVector fv{post.post_id, {}};
  for (std::size_t c = 0; c < columns_.size(); ++c) fv.values.emplace(columns_[c], row[c]);
  return fv;
}

FeatureMatrix FeatureExtractor::extract_all(std::span<const TokenizedPost> posts,
                                            std::size_t workers) const {
  FeatureMatrix fm;
  fm.categories = columns_;
  fm.post_ids.reserve(posts.size());
  for (const auto& p : posts) fm.post_ids.push_back(p.post_id);
  // Row-major scratch so each worker writes a contiguous slice.
  std::vector<double> cells(posts.size() * columns_.size());
  parallel_for(posts.size(), workers, [&](std::size_t i) {
    extract_into(posts[i], std::span<double>(cells).subspan(i * columns_.size(), columns_.size()));
  });
  fm.values = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      cells.data(), static_cast<Eigen::Index>(posts.size()),
      static_cast<Eigen::Index>(columns_.size()));
  return fm;
}

FeatureVector extract(const TokenizedPost& post, std::span<const CompiledMatcher> matchers) {
  return FeatureExtractor(matchers).extract(post);
}

FeatureMatrix extract_corpus(std::span<const TokenizedPost> posts,
                             std::span<const CompiledMatcher> matchers, std::size_t workers) {
  return FeatureExtractor(matchers).extract_all(posts, workers);
}

FeatureMatrix extract_corpus(const Corpus& corpus, const ZhDictionary& dict,
                             std::span<const CompiledMatcher> matchers, std::size_t workers) {
  std::vector<TokenizedPost> tokenized(corpus.size());
  parallel_for(corpus.size(), workers, [&](std::size_t i) {
    const auto& p = corpus[i];
    tokenized[i] = tokenize(p.text, p.lang, dict, p.id);
  });
  return extract_corpus(tokenized, matchers, workers);
}

}  // namespace polite
