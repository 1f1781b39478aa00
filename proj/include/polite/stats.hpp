#pragma once

// Score standardization, inter-rater reliability, and feature-score
// correlation with Bonferroni correction.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polite/corpus_io.hpp"
#include "polite/feature_matrix.hpp"

namespace polite {

/// Standardized politeness per post, averaged over that post's annotators.
struct ScoreVector {
  std::vector<std::string> post_ids;
  Eigen::VectorXd scores;

  std::size_t size() const noexcept { return post_ids.size(); }
};

/// z-scores each annotator column (sample SD over present cells) and
/// averages per post. Posts without any score are left out. Throws
/// DataError naming the annotator when a column has fewer than two scores
/// or zero variance.
ScoreVector standardize_scores(const AnnotationTable& table);

struct Correlation {
  double r = 0;
  double p = 1;
};

/// Product-moment r and two-tailed p (t-distribution, n - 2 df). Requires
/// n >= 3 and nonzero variance in both inputs.
Correlation pearson(const Eigen::Ref<const Eigen::VectorXd>& x,
                    const Eigen::Ref<const Eigen::VectorXd>& y);

/// Two-tailed p-value for r with n observations.
double pearson_p_value(double r, std::size_t n);

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// mask[i] = p[i] < alpha / m with m = pvalues.size().
std::vector<bool> bonferroni(const std::vector<double>& pvalues, double alpha);

/// Interval-metric alpha over the coincidence matrix; units with fewer than
/// two scores are not pairable and ignored.
double krippendorff_alpha_interval(const AnnotationTable& table);

/// Two-way random effects, average measures, absolute agreement.
double icc2k(const Eigen::Ref<const Eigen::MatrixXd>& ratings);

struct CategoryCorrelation {
  std::string category;
  bool testable = false;  // false when the column is constant over scored posts
  double r = 0;
  double p = 1;
  bool significant = false;
};

struct CorrelationReport {
  double alpha = 0.01;
  std::size_t tested = 0;  // Bonferroni m
  std::size_t posts = 0;   // rows present in both inputs
  std::vector<CategoryCorrelation> rows;  // feature column order

  double threshold() const { return tested == 0 ? alpha : alpha / double(tested); }
};

CorrelationReport correlate_features(const FeatureMatrix& features, const ScoreVector& scores,
                                     double alpha = 0.01, std::size_t workers = 0);

/// `category, r, p, significant` rows for testable categories, then an
/// `# untestable:` comment listing the rest.
void write_correlation_tsv(std::ostream& out, const CorrelationReport& report,
                           const std::vector<std::string>& comments = {});

/// Horizontal bars of the significant categories, sorted by r.
void write_correlation_svg(std::ostream& out, const CorrelationReport& report,
                           const std::string& title);

}  // namespace polite
