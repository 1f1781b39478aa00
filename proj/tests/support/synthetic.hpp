#pragma once

// Seeded synthetic microblog corpora with a known politeness signal.
//
// Each post has a latent politeness s ~ N(0, 1), scored by annotators as
// round(1.5 s + noise) clipped to [-3, 3]; by default two annotator pairs
// split the posts. The top quarter by standardized score carries gratitude /
// best-wishes / honorific markers and the bottom quarter taboo markers, each
// at `marker_rate`. Every post also picks up an unrelated marker of either
// polarity at `stray_rate`.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "polite/common.hpp"
#include "polite/corpus_io.hpp"

namespace synthetic {

struct Options {
  polite::Lang lang = polite::Lang::en;
  std::size_t posts = 4000;
  double marker_rate = 0.95;
  double stray_rate = 0.03;
  double annotator_noise = 0.5;
  // All four annotators score every post instead of one pair per post.
  bool full_panel = false;
  std::uint64_t seed = 1;
};

struct Data {
  polite::Corpus corpus;
  polite::AnnotationTable annotations;
  std::vector<double> latent;
  std::vector<int> cls;  // +1 top quarter, -1 bottom quarter, 0 otherwise
};

Data generate(const Options& options);

}  // namespace synthetic
