#include "polite/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <unordered_map>

#include "polite/vectorizer.hpp"

namespace polite {

ScoreVector standardize_scores(const AnnotationTable& table) {
  const auto rows = table.rows();
  const auto cols = table.cols();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(rows));
  std::vector<std::size_t> count(rows, 0);
  for (std::size_t c = 0; c < cols; ++c) {
    const auto& who = table.annotator_ids()[c];
    std::vector<std::pair<std::size_t, double>> cells;
    for (std::size_t r = 0; r < rows; ++r) {
      if (const auto s = table.at(r, c)) cells.emplace_back(r, *s);
    }
    if (cells.size() < 2) {
      throw DataError("annotator '" + who + "' has fewer than two scores");
    }
    double mean = 0;
    for (const auto& [r, v] : cells) mean += v;
    mean /= double(cells.size());
    double ss = 0;
    for (const auto& [r, v] : cells) ss += (v - mean) * (v - mean);
    if (ss == 0) throw DataError("annotator '" + who + "' gave every post the same score");
    const double sd = std::sqrt(ss / double(cells.size() - 1));
    for (const auto& [r, v] : cells) {
      sum[static_cast<Eigen::Index>(r)] += (v - mean) / sd;
      ++count[r];
    }
  }
  ScoreVector out;
  std::vector<double> values;
  for (std::size_t r = 0; r < rows; ++r) {
    if (count[r] == 0) continue;
    out.post_ids.push_back(table.post_ids()[r]);
    values.push_back(sum[static_cast<Eigen::Index>(r)] / double(count[r]));
  }
  out.scores = Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  return out;
}

namespace {

// Continued fraction for I_x(a, b), modified Lentz.
double beta_continued_fraction(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  double c = 1.0;
  double d = 1.0 - (a + b) * x / (a + 1.0);
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double num = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
    d = 1.0 + num * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + num / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    num = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0));
    d = 1.0 + num * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + num / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < eps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0) || !(b > 0)) throw DataError("incomplete beta needs a, b > 0");
  if (x <= 0) return 0.0;
  if (x >= 1) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double pearson_p_value(double r, std::size_t n) {
  if (n < 3) throw DataError("p-value needs at least 3 observations");
  if (std::fabs(r) >= 1.0) return 0.0;
  const double df = double(n - 2);
  // df / (df + t^2) reduces to 1 - r^2.
  const double x = (1.0 - r) * (1.0 + r);
  return std::clamp(incomplete_beta(df / 2.0, 0.5, x), 0.0, 1.0);
}

Correlation pearson(const Eigen::Ref<const Eigen::VectorXd>& x,
                    const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (x.size() != y.size()) throw DataError("pearson: inputs differ in length");
  const auto n = static_cast<std::size_t>(x.size());
  if (n < 3) throw DataError("pearson: need at least 3 observations");
  double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double k = double(i + 1);
    const double dx = x[Eigen::Index(i)] - mx;
    const double dy = y[Eigen::Index(i)] - my;
    mx += dx / k;
    my += dy / k;
    sxx += dx * (x[Eigen::Index(i)] - mx);
    syy += dy * (y[Eigen::Index(i)] - my);
    sxy += dx * (y[Eigen::Index(i)] - my);
  }
  if (sxx <= 0 || syy <= 0) throw DataError("pearson: zero variance input");
  Correlation c;
  c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  c.p = pearson_p_value(c.r, n);
  return c;
}

std::vector<bool> bonferroni(const std::vector<double>& pvalues, double alpha) {
  if (pvalues.empty()) throw DataError("bonferroni: no p-values");
  if (!(alpha > 0 && alpha < 1)) throw DataError("bonferroni: alpha must lie in (0, 1)");
  const double threshold = alpha / double(pvalues.size());
  std::vector<bool> mask;
  mask.reserve(pvalues.size());
  for (double p : pvalues) {
    if (!(p >= 0 && p <= 1)) throw DataError("bonferroni: p-value outside [0, 1]");
    mask.push_back(p < threshold);
  }
  return mask;
}

double krippendorff_alpha_interval(const AnnotationTable& table) {
  if (table.cols() < 2) throw DataError("krippendorff alpha needs at least two annotators");
  // Per unit, sum over ordered pairs i != j of (v_i - v_j)^2 equals
  // 2 m sum (v - mean)^2; the same identity gives the expected term.
  double observed = 0;
  double total = 0;
  double total_sq = 0;
  std::size_t pairable = 0;
  std::vector<double> unit;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    unit.clear();
    for (std::size_t c = 0; c < table.cols(); ++c) {
      if (const auto s = table.at(r, c)) unit.push_back(*s);
    }
    if (unit.size() < 2) continue;
    double mean = 0;
    for (double v : unit) mean += v;
    mean /= double(unit.size());
    double ss = 0;
    for (double v : unit) ss += (v - mean) * (v - mean);
    observed += 2.0 * double(unit.size()) * ss / double(unit.size() - 1);
    pairable += unit.size();
    for (double v : unit) total += v;
  }
  if (pairable == 0) throw DataError("krippendorff alpha: no pairable values");
  const double grand = total / double(pairable);
  for (std::size_t r = 0; r < table.rows(); ++r) {
    if (table.present_in_row(r) < 2) continue;
    for (std::size_t c = 0; c < table.cols(); ++c) {
      if (const auto s = table.at(r, c)) total_sq += (*s - grand) * (*s - grand);
    }
  }
  const double n = double(pairable);
  const double d_o = observed / n;
  const double d_e = 2.0 * n * total_sq / (n * (n - 1.0));
  if (d_e == 0) throw DataError("krippendorff alpha undefined: all pairable values are equal");
  return 1.0 - d_o / d_e;
}

double icc2k(const Eigen::Ref<const Eigen::MatrixXd>& ratings) {
  const auto n = ratings.rows();
  const auto k = ratings.cols();
  if (n < 2 || k < 2) throw DataError("icc(2,k) needs at least 2 posts and 2 annotators");
  if (!ratings.allFinite()) throw DataError("icc(2,k): ratings must be finite");
  const double grand = ratings.mean();
  const Eigen::VectorXd row_means = ratings.rowwise().mean();
  const Eigen::RowVectorXd col_means = ratings.colwise().mean();
  const double ss_total = (ratings.array() - grand).square().sum();
  const double ss_rows = double(k) * (row_means.array() - grand).square().sum();
  const double ss_cols = double(n) * (col_means.array() - grand).square().sum();
  const double ss_error = std::max(0.0, ss_total - ss_rows - ss_cols);
  if (ss_rows <= 1e-12 * std::max(1.0, ss_total)) {
    throw DataError("icc(2,k) undefined: no between-post variance");
  }
  const double ms_rows = ss_rows / double(n - 1);
  const double ms_cols = ss_cols / double(k - 1);
  const double ms_error = ss_error / double((n - 1) * (k - 1));
  return (ms_rows - ms_error) / (ms_rows + (ms_cols - ms_error) / double(n));
}

CorrelationReport correlate_features(const FeatureMatrix& features, const ScoreVector& scores,
                                     double alpha, std::size_t workers) {
  if (!(alpha > 0 && alpha < 1)) throw DataError("alpha must lie in (0, 1)");
  std::unordered_map<std::string, Eigen::Index> score_row;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    score_row.emplace(scores.post_ids[i], static_cast<Eigen::Index>(i));
  }
  std::vector<Eigen::Index> feat_rows;
  std::vector<double> y;
  for (std::size_t i = 0; i < features.post_ids.size(); ++i) {
    if (const auto it = score_row.find(features.post_ids[i]); it != score_row.end()) {
      feat_rows.push_back(static_cast<Eigen::Index>(i));
      y.push_back(scores.scores[it->second]);
    }
  }
  if (feat_rows.empty()) throw DataError("no post ids shared by features and annotations");
  if (feat_rows.size() < 3) throw DataError("need at least 3 scored posts to correlate");
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
  if ((yv.array() == yv[0]).all()) throw DataError("politeness scores have zero variance");

  CorrelationReport report;
  report.alpha = alpha;
  report.posts = feat_rows.size();
  report.rows.resize(features.categories.size());
  parallel_for(report.rows.size(), workers, [&](std::size_t c) {
    auto& row = report.rows[c];
    row.category = features.categories[c];
    Eigen::VectorXd x(static_cast<Eigen::Index>(feat_rows.size()));
    for (std::size_t i = 0; i < feat_rows.size(); ++i) {
      x[Eigen::Index(i)] = features.values(feat_rows[i], Eigen::Index(c));
    }
    if ((x.array() == x[0]).all()) return;
    const auto corr = pearson(x, yv);
    row.testable = true;
    row.r = corr.r;
    row.p = corr.p;
  });
  for (const auto& row : report.rows) report.tested += row.testable;
  for (auto& row : report.rows) row.significant = row.testable && row.p < report.threshold();
  return report;
}

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void write_correlation_tsv(std::ostream& out, const CorrelationReport& report,
                           const std::vector<std::string>& comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
  out << "# posts: " << report.posts << '\n';
  out << "# tested: " << report.tested << '\n';
  out << "# threshold: " << format_value(report.alpha) << '/' << report.tested << " = "
      << format_value(report.threshold()) << '\n';
  out << "category\tr\tp\tsignificant\n";
  std::vector<std::string> untestable;
  for (const auto& row : report.rows) {
    if (!row.testable) {
      untestable.push_back(row.category);
      continue;
    }
    out << row.category << '\t' << fmt("%.6f", row.r) << '\t' << fmt("%.6g", row.p) << '\t'
        << (row.significant ? "true" : "false") << '\n';
  }
  out << "# untestable:";
  for (const auto& u : untestable) out << ' ' << u;
  out << '\n';
}

void write_correlation_svg(std::ostream& out, const CorrelationReport& report,
                           const std::string& title) {
  std::vector<const CategoryCorrelation*> bars;
  for (const auto& row : report.rows) {
    if (row.significant) bars.push_back(&row);
  }
  std::stable_sort(bars.begin(), bars.end(),
                   [](const auto* a, const auto* b) { return a->r > b->r; });
  constexpr int bar_h = 18, gap = 4, label_w = 200, plot_w = 400, top = 40, pad = 20;
  const int height = top + int(bars.size()) * (bar_h + gap) + pad;
  const int width = label_w + plot_w + 2 * pad;
  const double zero_x = label_w + pad + plot_w / 2.0;
  const double scale = plot_w / 2.0;  // r = 1 spans half the plot
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "  <text x=\"" << pad << "\" y=\"20\" font-size=\"14\">" << xml_escape(title)
      << "</text>\n";
  out << "  <line x1=\"" << zero_x << "\" y1=\"" << top - 5 << "\" x2=\"" << zero_x << "\" y2=\""
      << height - pad + 5 << "\" stroke=\"#333\"/>\n";
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const auto& b = *bars[i];
    const int y = top + int(i) * (bar_h + gap);
    const double len = std::fabs(b.r) * scale;
    const double x = b.r >= 0 ? zero_x : zero_x - len;
    out << "  <text x=\"" << label_w + pad - 6 << "\" y=\"" << y + bar_h - 5
        << "\" text-anchor=\"end\">" << xml_escape(b.category) << "</text>\n";
    out << "  <rect x=\"" << fmt("%.2f", x) << "\" y=\"" << y << "\" width=\"" << fmt("%.2f", len)
        << "\" height=\"" << bar_h << "\" fill=\"" << (b.r >= 0 ? "#4878a8" : "#c0504d")
        << "\"><title>r = " << fmt("%.4f", b.r) << "</title></rect>\n";
  }
  out << "</svg>\n";
}

}  // namespace polite
