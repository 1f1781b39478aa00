#include "polite/learner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <unordered_map>

#include <json.hpp>

#include "polite/vectorizer.hpp"

namespace polite {

// --- labeling -------------------------------------------------------------------

QuartileSplit quartile_split(const ScoreVector& scores) {
  const auto n = scores.size();
  if (n < 8) throw DataError("quartile split needs at least 8 scored posts, got " + std::to_string(n));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double sa = scores.scores[Eigen::Index(a)], sb = scores.scores[Eigen::Index(b)];
    if (sa != sb) return sa < sb;
    return scores.post_ids[a] < scores.post_ids[b];
  });
  const auto q = n / 4;
  std::vector<int> label(n, 0);
  for (std::size_t k = 0; k < q; ++k) {
    label[order[k]] = kRude;
    label[order[n - 1 - k]] = kPolite;
  }
  auto score_at = [&](std::size_t k) { return scores.scores[Eigen::Index(order[k])]; };
  QuartileSplit split;
  split.boundary_tie = score_at(q - 1) == score_at(q) || score_at(n - q) == score_at(n - q - 1);
  if (split.boundary_tie) {
    split.warnings.push_back("scores tie at a quartile boundary; kept posts were chosen by post id");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] == 0) continue;
    split.post_ids.push_back(scores.post_ids[i]);
    split.labels.push_back(label[i]);
  }
  return split;
}

LabeledSet make_labeled_set(const FeatureMatrix& features, const QuartileSplit& split) {
  std::unordered_map<std::string, Eigen::Index> row_of;
  for (std::size_t i = 0; i < features.post_ids.size(); ++i) {
    row_of.emplace(features.post_ids[i], static_cast<Eigen::Index>(i));
  }
  LabeledSet set;
  set.post_ids = split.post_ids;
  set.feature_names = features.categories;
  set.features.resize(static_cast<Eigen::Index>(split.post_ids.size()), features.cols());
  set.labels.resize(static_cast<Eigen::Index>(split.post_ids.size()));
  for (std::size_t i = 0; i < split.post_ids.size(); ++i) {
    const auto it = row_of.find(split.post_ids[i]);
    if (it == row_of.end()) {
      throw DataError("post '" + split.post_ids[i] + "' has scores but no feature row");
    }
    set.features.row(Eigen::Index(i)) = features.values.row(it->second);
    set.labels[Eigen::Index(i)] = split.labels[i];
  }
  return set;
}

LabeledSet subset(const LabeledSet& data, const std::vector<std::size_t>& rows) {
  LabeledSet out;
  out.feature_names = data.feature_names;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), data.features.cols());
  out.labels.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.post_ids.push_back(data.post_ids[rows[k]]);
    out.features.row(Eigen::Index(k)) = data.features.row(Eigen::Index(rows[k]));
    out.labels[Eigen::Index(k)] = data.labels[Eigen::Index(rows[k])];
  }
  return out;
}

// --- solver ---------------------------------------------------------------------

namespace {

void check_problem(const Eigen::Ref<const Eigen::MatrixXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (x.rows() != y.size()) throw DataError("svm: feature rows and labels differ in length");
  bool pos = false, neg = false;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] == 1) pos = true;
    else if (y[i] == -1) neg = true;
    else throw DataError("svm: labels must be +1 or -1");
  }
  if (!pos || !neg) throw DataError("svm: training data holds a single class");
  if (!x.allFinite()) throw DataError("svm: non-finite feature value");
}

}  // namespace

double optimal_bias(const Eigen::Ref<const Eigen::MatrixXd>& x,
                    const Eigen::Ref<const Eigen::VectorXd>& y,
                    const Eigen::Ref<const Eigen::VectorXd>& w) {
  // With t_i = y_i - w.x_i the hinge sum has slope k - P between the k-th
  // and (k+1)-th smallest t, P = number of positives.
  const Eigen::VectorXd t = y - x * w;
  std::vector<double> sorted(t.data(), t.data() + t.size());
  std::sort(sorted.begin(), sorted.end());
  const auto p = static_cast<std::size_t>((y.array() > 0).count());
  if (p == 0) return sorted.front() - 1.0;
  if (p == sorted.size()) return sorted.back() + 1.0;
  return 0.5 * (sorted[p - 1] + sorted[p]);
}

double svm_primal_objective(const Eigen::Ref<const Eigen::MatrixXd>& x,
                            const Eigen::Ref<const Eigen::VectorXd>& y,
                            const Eigen::Ref<const Eigen::VectorXd>& w, double b, double C) {
  const Eigen::ArrayXd f = (x * w).array() + b;
  const double hinge = (1.0 - y.array() * f).max(0.0).sum();
  return 0.5 * w.squaredNorm() + C * hinge;
}

SvmSolution solve_svm_dual(const Eigen::Ref<const Eigen::MatrixXd>& x_in,
                           const Eigen::Ref<const Eigen::VectorXd>& y, double C, double tol,
                           std::size_t max_iterations) {
  if (!(C > 0)) throw DataError("svm: C must be positive");
  if (!(tol > 0)) throw DataError("svm: tol must be positive");
  check_problem(x_in, y);
  using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const RowMatrix x = x_in;
  const auto n = x.rows();
  if (max_iterations == 0) max_iterations = std::max<std::size_t>(1'000'000, 200 * std::size_t(n));

  SvmSolution s;
  s.alpha = Eigen::VectorXd::Zero(n);
  s.w = Eigen::VectorXd::Zero(x.cols());
  const Eigen::VectorXd diag = x.rowwise().squaredNorm();
  Eigen::VectorXd xw = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd ki(n), kj(n);
  double sum_alpha = 0;
  constexpr double tau = 1e-12;

  auto gap = [&] {
    xw.noalias() = x * s.w;
    s.b = optimal_bias(x_in, y, s.w);
    s.primal = svm_primal_objective(x_in, y, s.w, s.b, C);
    s.dual = s.alpha.sum() - 0.5 * s.w.squaredNorm();
    return s.primal - s.dual;
  };

  for (std::size_t iter = 0;; ++iter) {
    // Maximal violation for the stopping test, second-order choice of j.
    Eigen::Index i = -1;
    double m = -std::numeric_limits<double>::infinity();
    double big_m = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      const double v = -y[t] * (y[t] * xw[t] - 1.0);
      const bool up = y[t] > 0 ? s.alpha[t] < C : s.alpha[t] > 0;
      const bool low = y[t] > 0 ? s.alpha[t] > 0 : s.alpha[t] < C;
      if (up && v > m) m = v, i = t;
      if (low && v < big_m) big_m = v;
    }
    const double violation = m - big_m;
    if (i < 0 || violation < 1e-12) {
      s.converged = true;
      s.iterations = iter;
      break;
    }
    if ((iter % 100 == 0 || violation < tol) && gap() <= tol) {
      s.converged = true;
      s.iterations = iter;
      break;
    }
    if (iter >= max_iterations) {
      s.iterations = iter;
      break;
    }

    ki.noalias() = x * x.row(i).transpose();
    Eigen::Index j = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      const bool low = y[t] > 0 ? s.alpha[t] > 0 : s.alpha[t] < C;
      if (!low) continue;
      const double v = -y[t] * (y[t] * xw[t] - 1.0);
      const double diff = m - v;
      if (diff <= 0) continue;
      double a = diag[i] + diag[t] - 2.0 * ki[t];
      if (a <= 0) a = tau;
      const double score = -diff * diff / a;
      if (score < best) best = score, j = t;
    }
    if (j < 0) {
      s.converged = true;
      s.iterations = iter;
      break;
    }
    const double vj = -y[j] * (y[j] * xw[j] - 1.0);
    double a = diag[i] + diag[j] - 2.0 * ki[j];
    if (a <= 0) a = tau;
    double step = (m - vj) / a;
    step = std::min(step, y[i] > 0 ? C - s.alpha[i] : s.alpha[i]);
    step = std::min(step, y[j] > 0 ? s.alpha[j] : C - s.alpha[j]);
    // alpha_i moves by y_i*step, alpha_j by -y_j*step; w by step*(x_i - x_j).
    s.alpha[i] = std::clamp(s.alpha[i] + y[i] * step, 0.0, C);
    s.alpha[j] = std::clamp(s.alpha[j] - y[j] * step, 0.0, C);
    sum_alpha += (y[i] - y[j]) * step;
    s.w.noalias() += step * (x.row(i) - x.row(j)).transpose();
    kj.noalias() = x * x.row(j).transpose();
    xw.noalias() += step * (ki - kj);
    s.dual_trace.push_back(0.5 * s.w.squaredNorm() - sum_alpha);
  }
  gap();
  return s;
}

// --- training -------------------------------------------------------------------

LinearModel train_linear_svm(const LabeledSet& data, double C, double tol) {
  if (data.features.cols() != Eigen::Index(data.feature_names.size())) {
    throw DataError("labeled set: feature names do not match the matrix");
  }
  check_problem(data.features, data.labels);
  const auto n = data.features.rows();
  LinearModel model;
  model.C = C;
  model.tol = tol;
  model.posts = std::size_t(n);
  model.polite = std::size_t((data.labels.array() > 0).count());
  model.rude = model.posts - model.polite;
  model.data_hash = data_hash(data);

  const Eigen::RowVectorXd mean = data.features.colwise().mean();
  const Eigen::RowVectorXd sd =
      ((data.features.rowwise() - mean).array().square().colwise().sum() / double(n)).sqrt();
  std::vector<Eigen::Index> kept;
  for (Eigen::Index c = 0; c < data.features.cols(); ++c) {
    if (sd[c] > 1e-12) kept.push_back(c);
    else model.dropped.push_back(data.feature_names[std::size_t(c)]);
  }
  const auto d = Eigen::Index(kept.size());
  Eigen::MatrixXd x(n, d);
  model.mean.resize(d);
  model.sd.resize(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const auto c = kept[std::size_t(k)];
    model.feature_names.push_back(data.feature_names[std::size_t(c)]);
    model.mean[k] = mean[c];
    model.sd[k] = sd[c];
    x.col(k) = (data.features.col(c).array() - mean[c]) / sd[c];
  }
  if (d == 0) {
    // Nothing to separate on: the bias alone fits the majority side.
    model.weights = Eigen::VectorXd::Zero(0);
    model.bias = optimal_bias(x, data.labels, model.weights);
    model.converged = true;
    return model;
  }
  const auto sol = solve_svm_dual(x, data.labels, C, tol);
  model.weights = sol.w;
  model.bias = sol.b;
  model.iterations = sol.iterations;
  model.converged = sol.converged;
  return model;
}

// --- folds and grid search ----------------------------------------------------------

namespace {

// Fisher-Yates on mt19937_64 so fold assignment is identical on every
// standard library.
void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t k = v.size(); k > 1; --k) {
    const auto j = static_cast<std::size_t>(rng() % k);
    std::swap(v[k - 1], v[j]);
  }
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> by_class(const Eigen::VectorXd& y) {
  std::vector<std::size_t> pos, neg;
  for (Eigen::Index i = 0; i < y.size(); ++i) (y[i] > 0 ? pos : neg).push_back(std::size_t(i));
  return {pos, neg};
}

}  // namespace

std::vector<std::size_t> stratified_folds(const Eigen::VectorXd& labels, std::size_t folds,
                                          std::uint64_t seed) {
  if (folds < 2) throw DataError("need at least 2 folds");
  auto [pos, neg] = by_class(labels);
  if (pos.size() < folds || neg.size() < folds) {
    throw DataError("cannot stratify " + std::to_string(folds) + " folds: classes have " +
                    std::to_string(pos.size()) + " polite and " + std::to_string(neg.size()) +
                    " rude posts");
  }
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> fold(std::size_t(labels.size()));
  for (auto* cls : {&pos, &neg}) {
    shuffle(*cls, rng);
    for (std::size_t k = 0; k < cls->size(); ++k) fold[(*cls)[k]] = k % folds;
  }
  return fold;
}

void stratified_holdout(const Eigen::VectorXd& labels, double test_fraction, std::uint64_t seed,
                        std::vector<std::size_t>& train_rows, std::vector<std::size_t>& test_rows) {
  if (!(test_fraction > 0 && test_fraction < 1)) throw DataError("test fraction must be in (0, 1)");
  auto [pos, neg] = by_class(labels);
  std::mt19937_64 rng(seed);
  train_rows.clear();
  test_rows.clear();
  for (auto* cls : {&pos, &neg}) {
    shuffle(*cls, rng);
    const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * double(cls->size())));
    if (n_test == 0 || n_test == cls->size()) throw DataError("class too small for a holdout split");
    test_rows.insert(test_rows.end(), cls->begin(), cls->begin() + std::ptrdiff_t(n_test));
    train_rows.insert(train_rows.end(), cls->begin() + std::ptrdiff_t(n_test), cls->end());
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());
}

GridResult grid_search(const LabeledSet& data, std::vector<double> c_grid, std::size_t folds,
                       std::uint64_t seed, double tol, std::size_t workers) {
  if (c_grid.empty()) throw DataError("empty C grid");
  for (double c : c_grid) {
    if (!(c > 0) || !std::isfinite(c)) throw DataError("C values must be positive");
  }
  std::sort(c_grid.begin(), c_grid.end());
  c_grid.erase(std::unique(c_grid.begin(), c_grid.end()), c_grid.end());
  const auto fold = stratified_folds(data.labels, folds, seed);

  GridResult result;
  for (double c : c_grid) result.points.push_back({c, std::vector<double>(folds, 0.0), 0.0});
  parallel_for(c_grid.size() * folds, workers, [&](std::size_t task) {
    const auto g = task / folds, f = task % folds;
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < fold.size(); ++i) (fold[i] == f ? test : train).push_back(i);
    const auto model = train_linear_svm(subset(data, train), c_grid[g], tol);
    const auto held = subset(data, test);
    const Eigen::VectorXd m = margins(model, held);
    std::vector<int> truth, pred;
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      truth.push_back(held.labels[i] > 0 ? kPolite : kRude);
      pred.push_back(m[i] > 0 ? kPolite : kRude);
    }
    result.points[g].fold_f1[f] = weighted_f1(truth, pred);
  });
  double best = -1;
  for (auto& p : result.points) {
    p.mean_f1 = std::accumulate(p.fold_f1.begin(), p.fold_f1.end(), 0.0) / double(folds);
    if (p.mean_f1 > best + 1e-12) {
      best = p.mean_f1;
      result.best_C = p.C;
    }
  }
  return result;
}

// --- prediction -------------------------------------------------------------------

double margin(const LinearModel& model, const Eigen::Ref<const Eigen::RowVectorXd>& raw_row) {
  if (raw_row.size() != model.weights.size()) {
    throw DataError("margin: row has " + std::to_string(raw_row.size()) + " values, model has " +
                    std::to_string(model.weights.size()) + " features");
  }
  const Eigen::VectorXd z = (raw_row.transpose() - model.mean).cwiseQuotient(model.sd);
  return model.weights.dot(z) + model.bias;
}

Eigen::VectorXd margins(const LinearModel& model, const LabeledSet& data) {
  return predict(model, FeatureMatrix{data.post_ids, data.feature_names, data.features}, 1).margins;
}

Predictions predict(const LinearModel& model, const FeatureMatrix& features, std::size_t workers) {
  Predictions out;
  const auto d = Eigen::Index(model.feature_names.size());
  std::vector<std::optional<Eigen::Index>> source(static_cast<std::size_t>(d));
  std::vector<std::string> missing;
  std::size_t found = 0;
  for (Eigen::Index k = 0; k < d; ++k) {
    source[std::size_t(k)] = features.column_of(model.feature_names[std::size_t(k)]);
    if (source[std::size_t(k)]) ++found;
    else missing.push_back(model.feature_names[std::size_t(k)]);
  }
  if (d > 0 && found == 0) throw DataError("feature matrix shares no columns with the model");
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    out.warnings.push_back("missing feature columns filled with 0: " + list);
  }
  const auto n = features.rows();
  out.post_ids = features.post_ids;
  out.margins.resize(n);
  out.labels.resize(std::size_t(n));
  parallel_for(std::size_t(n), workers, [&](std::size_t r) {
    Eigen::RowVectorXd raw(d);
    for (Eigen::Index k = 0; k < d; ++k) {
      const auto& s = source[std::size_t(k)];
      raw[k] = s ? features.values(Eigen::Index(r), *s) : 0.0;
    }
    const double m = margin(model, raw);
    out.margins[Eigen::Index(r)] = m;
    out.labels[r] = m > 0 ? kPolite : kRude;
  });
  return out;
}

// --- metrics ---------------------------------------------------------------------

namespace {

struct ClassScores {
  double precision = 0, recall = 0, f1 = 0;
  std::size_t support = 0;
};

ClassScores class_scores(const std::vector<int>& y_true, const std::vector<int>& y_pred, int cls) {
  std::size_t tp = 0, predicted = 0, actual = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    tp += y_true[i] == cls && y_pred[i] == cls;
    predicted += y_pred[i] == cls;
    actual += y_true[i] == cls;
  }
  ClassScores s;
  s.support = actual;
  s.precision = predicted == 0 ? 0.0 : double(tp) / double(predicted);
  s.recall = actual == 0 ? 0.0 : double(tp) / double(actual);
  s.f1 = s.precision + s.recall == 0 ? 0.0 : 2 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

void check_labels(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
  if (y_true.size() != y_pred.size()) throw DataError("label vectors differ in length");
  if (y_true.empty()) throw DataError("no labels to evaluate");
  for (const auto* v : {&y_true, &y_pred}) {
    for (int l : *v) {
      if (l != kPolite && l != kRude) throw DataError("labels must be polite or rude");
    }
  }
}

}  // namespace

double weighted_f1(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
  check_labels(y_true, y_pred);
  double f1 = 0;
  for (int cls : {kPolite, kRude}) {
    const auto s = class_scores(y_true, y_pred, cls);
    f1 += s.f1 * double(s.support);
  }
  return f1 / double(y_true.size());
}

double macro_f1(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
  check_labels(y_true, y_pred);
  return 0.5 * (class_scores(y_true, y_pred, kPolite).f1 + class_scores(y_true, y_pred, kRude).f1);
}

double roc_auc(const std::vector<int>& y_true, const Eigen::Ref<const Eigen::VectorXd>& margins) {
  if (Eigen::Index(y_true.size()) != margins.size()) {
    throw DataError("labels and margins differ in length");
  }
  if (!margins.allFinite()) throw DataError("margins must be finite");
  const auto n = y_true.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return margins[Eigen::Index(a)] < margins[Eigen::Index(b)]; });
  // Mann-Whitney U with average ranks; ranks are half-integers, so the sum is exact.
  double rank_sum = 0;
  std::size_t pos = 0;
  for (std::size_t k = 0; k < n;) {
    std::size_t e = k;
    while (e + 1 < n && margins[Eigen::Index(order[e + 1])] == margins[Eigen::Index(order[k])]) ++e;
    const double avg_rank = 0.5 * double(k + 1 + e + 1);
    for (std::size_t t = k; t <= e; ++t) {
      if (y_true[order[t]] == kPolite) rank_sum += avg_rank;
    }
    k = e + 1;
  }
  for (int l : y_true) pos += l == kPolite;
  const auto neg = n - pos;
  if (pos == 0 || neg == 0) throw DataError("ROC-AUC undefined: only one class present");
  const double u = rank_sum - double(pos) * double(pos + 1) / 2.0;
  return u / (double(pos) * double(neg));
}

Metrics evaluate(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                 const Eigen::Ref<const Eigen::VectorXd>& margins) {
  check_labels(y_true, y_pred);
  Metrics m;
  m.roc_auc = roc_auc(y_true, margins);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) correct += y_true[i] == y_pred[i];
  const double n = double(y_true.size());
  m.accuracy = double(correct) / n;
  for (int cls : {kPolite, kRude}) {
    const auto s = class_scores(y_true, y_pred, cls);
    const double w = double(s.support) / n;
    m.precision += w * s.precision;
    m.recall += w * s.recall;
    m.f1 += w * s.f1;
  }
  return m;
}

std::string label_name(int label) { return label == kPolite ? "polite" : "rude"; }

int parse_label(const std::string& text) {
  if (text == "polite" || text == "1" || text == "+1") return kPolite;
  if (text == "rude" || text == "-1" || text == "0") return kRude;
  throw DataError("unknown label '" + text + "'");
}

// --- persistence ------------------------------------------------------------------

namespace {

constexpr const char* kModelFormat = "politeness-linear-svm";
constexpr int kModelVersion = 1;

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), Eigen::Index(v.size()));
}

}  // namespace

std::string data_hash(const LabeledSet& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&](const void* p, std::size_t len) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t k = 0; k < len; ++k) {
      h ^= b[k];
      h *= 0x100000001b3ULL;
    }
  };
  auto feed_str = [&](const std::string& s) { feed(s.data(), s.size() + 1); };
  for (const auto& f : data.feature_names) feed_str(f);
  for (Eigen::Index i = 0; i < data.features.rows(); ++i) {
    feed_str(data.post_ids[std::size_t(i)]);
    for (Eigen::Index c = 0; c < data.features.cols(); ++c) feed_str(format_value(data.features(i, c)));
    feed_str(data.labels[i] > 0 ? "+" : "-");
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_model_json(std::ostream& out, const LinearModel& model) {
  nlohmann::ordered_json j;
  j["format"] = kModelFormat;
  j["version"] = kModelVersion;
  j["features"] = model.feature_names;
  j["mean"] = to_std(model.mean);
  j["sd"] = to_std(model.sd);
  j["weights"] = to_std(model.weights);
  j["bias"] = model.bias;
  j["C"] = model.C;
  j["tol"] = model.tol;
  j["dropped"] = model.dropped;
  j["training"] = {{"posts", model.posts},
                   {"polite", model.polite},
                   {"rude", model.rude},
                   {"data_hash", model.data_hash},
                   {"iterations", model.iterations},
                   {"converged", model.converged}};
  out << j.dump(2) << '\n';
}

LinearModel read_model_json(std::istream& in, const std::string& source) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
    if (j.value("format", "") != kModelFormat) throw DataError(source + ": not a model file");
    if (j.value("version", 0) != kModelVersion) {
      throw DataError(source + ": unsupported model version " + j["version"].dump());
    }
    LinearModel m;
    m.feature_names = j.at("features").get<std::vector<std::string>>();
    m.mean = to_eigen(j.at("mean").get<std::vector<double>>());
    m.sd = to_eigen(j.at("sd").get<std::vector<double>>());
    m.weights = to_eigen(j.at("weights").get<std::vector<double>>());
    m.bias = j.at("bias").get<double>();
    m.C = j.at("C").get<double>();
    m.tol = j.at("tol").get<double>();
    m.dropped = j.at("dropped").get<std::vector<std::string>>();
    const auto& t = j.at("training");
    m.posts = t.at("posts").get<std::size_t>();
    m.polite = t.at("polite").get<std::size_t>();
    m.rude = t.at("rude").get<std::size_t>();
    m.data_hash = t.at("data_hash").get<std::string>();
    m.iterations = t.at("iterations").get<std::size_t>();
    m.converged = t.at("converged").get<bool>();
    const auto d = Eigen::Index(m.feature_names.size());
    if (m.mean.size() != d || m.sd.size() != d || m.weights.size() != d) {
      throw DataError(source + ": model vectors differ in length from the feature list");
    }
    if ((m.sd.array() <= 0).any()) throw DataError(source + ": model has a non-positive SD");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(source + ": malformed model: " + e.what());
  }
}

void save_model(const std::filesystem::path& path, const LinearModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_model_json(out, model);
}

LinearModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return read_model_json(in, path.string());
}

void write_metrics_tsv(std::ostream& out, const std::vector<MetricsRow>& rows,
                       const std::vector<std::string>& comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
  out << "feature_set\tf1\tprecision\trecall\trocauc\taccuracy\n";
  char buf[256];
  for (const auto& r : rows) {
    const auto& m = r.metrics;
    std::snprintf(buf, sizeof buf, "\t%.4f\t%.4f\t%.4f\t%.4f\t%.4f\n", m.f1, m.precision, m.recall,
                  m.roc_auc, m.accuracy);
    out << r.feature_set << buf;
  }
}

}  // namespace polite
