#pragma once

// Quartile-extreme labeling, linear SVM training and model selection,
// prediction, and classification metrics.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polite/feature_matrix.hpp"
#include "polite/stats.hpp"

namespace polite {

inline constexpr int kPolite = 1;
inline constexpr int kRude = -1;

/// Ids and labels of the kept extremes.
struct QuartileSplit {
  std::vector<std::string> post_ids;
  std::vector<int> labels;  // kPolite / kRude
  /// True when a score equal to a cut-off score was dropped, so ids decided
  /// which posts were kept.
  bool boundary_tie = false;
  std::vector<std::string> warnings;
};

/// Orders posts by (score, post id); the lowest floor(n/4) are rude and the
/// highest floor(n/4) polite. Requires at least 8 posts.
QuartileSplit quartile_split(const ScoreVector& scores);

struct LabeledSet {
  std::vector<std::string> post_ids;
  std::vector<std::string> feature_names;
  Eigen::MatrixXd features;
  Eigen::VectorXd labels;  // +1 polite, -1 rude

  std::size_t size() const noexcept { return post_ids.size(); }
};

/// Joins a split with the feature rows of the same posts.
LabeledSet make_labeled_set(const FeatureMatrix& features, const QuartileSplit& split);

/// Rows `rows` of `data`.
LabeledSet subset(const LabeledSet& data, const std::vector<std::size_t>& rows);

struct LinearModel {
  std::vector<std::string> feature_names;
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;
  Eigen::VectorXd weights;
  double bias = 0;
  double C = 0.02;
  double tol = 1e-3;
  std::vector<std::string> dropped;  // zero-variance training features

  std::size_t posts = 0;
  std::size_t polite = 0;
  std::size_t rude = 0;
  std::string data_hash;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Result of the dual solver on already-scaled data.
struct SvmSolution {
  Eigen::VectorXd w;
  double b = 0;
  Eigen::VectorXd alpha;
  double primal = 0;
  double dual = 0;
  std::size_t iterations = 0;
  bool converged = false;
  /// 0.5|w|^2 - sum(alpha) after every update (non-increasing).
  std::vector<double> dual_trace;
};

/// Minimizes 0.5|w|^2 + C sum hinge(1 - y_i (w.x_i + b)) with an
/// unregularized bias. Two-coordinate dual descent on the maximal violating
/// pair; stops once the duality gap is at most `tol`.
SvmSolution solve_svm_dual(const Eigen::Ref<const Eigen::MatrixXd>& x,
                           const Eigen::Ref<const Eigen::VectorXd>& y, double C, double tol,
                           std::size_t max_iterations = 0);

double svm_primal_objective(const Eigen::Ref<const Eigen::MatrixXd>& x,
                            const Eigen::Ref<const Eigen::VectorXd>& y,
                            const Eigen::Ref<const Eigen::VectorXd>& w, double b, double C);

/// Bias minimizing the hinge sum for a fixed w: midpoint of the optimal
/// interval.
double optimal_bias(const Eigen::Ref<const Eigen::MatrixXd>& x,
                    const Eigen::Ref<const Eigen::VectorXd>& y,
                    const Eigen::Ref<const Eigen::VectorXd>& w);

/// Standardizes with the training mean and population SD, drops
/// zero-variance features, and solves.
LinearModel train_linear_svm(const LabeledSet& data, double C, double tol = 1e-3);

struct GridPoint {
  double C = 0;
  std::vector<double> fold_f1;
  double mean_f1 = 0;
};

struct GridResult {
  double best_C = 0;
  std::vector<GridPoint> points;  // ascending C
};

/// Stratified k-fold; best C maximizes mean weighted F1, ties go to the
/// smaller C.
GridResult grid_search(const LabeledSet& data, std::vector<double> c_grid, std::size_t folds,
                       std::uint64_t seed, double tol = 1e-3, std::size_t workers = 0);

/// Fold index per row; each class is shuffled and dealt round-robin.
std::vector<std::size_t> stratified_folds(const Eigen::VectorXd& labels, std::size_t folds,
                                          std::uint64_t seed);

/// Stratified holdout: `test_fraction` of each class (rounded) to the test side.
void stratified_holdout(const Eigen::VectorXd& labels, double test_fraction, std::uint64_t seed,
                        std::vector<std::size_t>& train_rows, std::vector<std::size_t>& test_rows);

struct Predictions {
  std::vector<std::string> post_ids;
  Eigen::VectorXd margins;
  std::vector<int> labels;  // kPolite iff margin > 0
  std::vector<std::string> warnings;
};

Predictions predict(const LinearModel& model, const FeatureMatrix& features,
                    std::size_t workers = 0);
/// Margins for every row of `data`, columns matched by name.
Eigen::VectorXd margins(const LinearModel& model, const LabeledSet& data);

/// `raw_row` is aligned with model.feature_names (dropped columns already
/// removed); throws DataError on a length mismatch. Use predict() to map a
/// feature matrix by column name.
double margin(const LinearModel& model, const Eigen::Ref<const Eigen::RowVectorXd>& raw_row);

struct Metrics {
  double f1 = 0;
  double precision = 0;
  double recall = 0;
  double roc_auc = 0;
  double accuracy = 0;
};

/// Support-weighted precision/recall/F1, accuracy, and ROC-AUC from margin
/// ranks (ties averaged). Throws when y_true holds a single class.
Metrics evaluate(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                 const Eigen::Ref<const Eigen::VectorXd>& margins);

double roc_auc(const std::vector<int>& y_true, const Eigen::Ref<const Eigen::VectorXd>& margins);
double weighted_f1(const std::vector<int>& y_true, const std::vector<int>& y_pred);
double macro_f1(const std::vector<int>& y_true, const std::vector<int>& y_pred);

std::string label_name(int label);
int parse_label(const std::string& text);

void write_model_json(std::ostream& out, const LinearModel& model);
LinearModel read_model_json(std::istream& in, const std::string& source = "<stream>");
void save_model(const std::filesystem::path& path, const LinearModel& model);
LinearModel load_model(const std::filesystem::path& path);

/// FNV-1a 64 over ids, feature names, values and labels, as 16 hex digits.
std::string data_hash(const LabeledSet& data);

struct MetricsRow {
  std::string feature_set;
  Metrics metrics;
};
void write_metrics_tsv(std::ostream& out, const std::vector<MetricsRow>& rows,
                       const std::vector<std::string>& comments = {});

}  // namespace polite
