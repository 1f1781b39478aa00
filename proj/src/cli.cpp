#include "polite/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "polite/corpus_io.hpp"
#include "polite/learner.hpp"
#include "polite/lexicon.hpp"
#include "polite/stats.hpp"
#include "polite/tokenizer.hpp"
#include "polite/vectorizer.hpp"

namespace polite {

namespace fs = std::filesystem;

namespace {

#ifndef POLITENESS_DATA_DIR
#define POLITENESS_DATA_DIR "data"
#endif

struct RunConfig {
  std::string command;
  std::uint64_t seed = 42;
  std::string lang = "en";
  std::string out_dir;
  std::vector<std::string> lexica;
  double alpha = 0.01;
  std::vector<double> c_grid{0.01, 0.05, 0.1, 0.25, 0.5};
  std::size_t folds = 5;
  std::size_t workers = 0;

  std::string corpus;
  std::string format;
  std::string dict = std::string(POLITENESS_DATA_DIR) + "/zh_dict.txt";
  std::string annotations;
  std::string features;
  std::string model;
  std::string predictions;
  std::string labels;
  std::string svg;
  std::string feature_set = "all";
  double tol = 1e-3;
  double holdout = 0.0;
};

std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : ",") + format_value(x);
  return s;
}

// Resolved configuration echoed at the top of every output.
std::vector<std::string> header(const RunConfig& cfg) {
  std::vector<std::string> h{"politeness " + cfg.command, "seed: " + std::to_string(cfg.seed),
                             "lang: " + cfg.lang};
  auto add = [&](const char* key, const std::string& v) {
    if (!v.empty()) h.push_back(std::string(key) + ": " + v);
  };
  if (cfg.command == "extract") {
    add("corpus", cfg.corpus);
    for (const auto& l : cfg.lexica) add("lexicon", l);
    if (cfg.lang == "zh") add("dict", cfg.dict);
  }
  if (cfg.command == "reliability" || cfg.command == "correlate" || cfg.command == "train") {
    add("annotations", cfg.annotations);
  }
  if (cfg.command == "correlate" || cfg.command == "train" || cfg.command == "predict") {
    add("features", cfg.features);
  }
  if (cfg.command == "correlate") add("alpha", format_value(cfg.alpha));
  if (cfg.command == "train") {
    add("c_grid", join_doubles(cfg.c_grid));
    add("folds", std::to_string(cfg.folds));
    add("tol", format_value(cfg.tol));
    add("holdout", format_value(cfg.holdout));
  }
  if (cfg.command == "predict") add("model", cfg.model);
  if (cfg.command == "evaluate") {
    add("predictions", cfg.predictions);
    add("labels", cfg.labels);
    add("annotations", cfg.annotations);
  }
  return h;
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw UsageError(std::string("missing --") + what);
  if (!fs::is_regular_file(path)) throw UsageError(std::string(what) + " not found: " + path);
}

// Writes to <out_dir>/<name> or, without --out, to the given stream.
class Sink {
 public:
  Sink(const RunConfig& cfg, const std::string& name, std::ostream& fallback) {
    if (cfg.out_dir.empty()) {
      stream_ = &fallback;
      return;
    }
    fs::create_directories(cfg.out_dir);
    path_ = (fs::path(cfg.out_dir) / name).string();
    file_ = std::make_unique<std::ofstream>(path_, std::ios::binary);
    if (!*file_) throw DataError("cannot write " + path_);
    stream_ = file_.get();
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::string path_;
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
};

FeatureMatrix load_features(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return read_feature_tsv(in, path);
}

int cmd_extract(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  require_file(cfg.corpus, "corpus");
  const Lang lang = parse_lang(cfg.lang);
  std::vector<std::string> specs = cfg.lexica;
  if (specs.empty()) specs.push_back(std::string(POLITENESS_DATA_DIR) + "/politelex.json");
  std::vector<CompiledMatcher> matchers;
  for (const auto& s : specs) matchers.push_back(compile(load_lexicon(s, lang)));

  CorpusFormat format = CorpusFormat::jsonl;
  const auto fmt = cfg.format.empty() ? fs::path(cfg.corpus).extension().string() : "." + cfg.format;
  if (fmt == ".csv") format = CorpusFormat::csv;
  else if (fmt != ".jsonl" && fmt != ".json") throw UsageError("unknown corpus format '" + fmt + "'");
  const auto corpus = load_corpus(cfg.corpus, format);
  for (const auto& p : corpus) {
    if (p.lang != lang) {
      throw DataError("post '" + p.id + "' is " + std::string(to_string(p.lang)) +
                      " but --lang is " + cfg.lang);
    }
  }
  ZhDictionary dict;
  if (lang == Lang::zh) {
    require_file(cfg.dict, "dict");
    dict = ZhDictionary::load(cfg.dict);
  }
  const auto fm = extract_corpus(corpus, dict, matchers, cfg.workers);
  Sink sink(cfg, "features.tsv", out);
  write_feature_tsv(*sink, fm, header(cfg));
  return kExitOk;
}

int cmd_reliability(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  require_file(cfg.annotations, "annotations");
  const auto table = load_annotations(cfg.annotations);
  Sink sink(cfg, "reliability.tsv", out);
  for (const auto& h : header(cfg)) *sink << "# " << h << '\n';
  *sink << "# posts: " << table.rows() << '\n' << "# annotators: " << table.cols() << '\n';
  *sink << "metric\tvalue\n";
  *sink << "krippendorff_alpha_interval\t" << format_value(krippendorff_alpha_interval(table))
        << '\n';
  if (table.is_complete()) *sink << "icc2k\t" << format_value(icc2k(table.to_matrix())) << '\n';
  else *sink << "# icc2k: skipped, table has missing cells\n";
  return kExitOk;
}

int cmd_correlate(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  require_file(cfg.features, "features");
  require_file(cfg.annotations, "annotations");
  const auto fm = load_features(cfg.features);
  const auto scores = standardize_scores(load_annotations(cfg.annotations));
  const auto report = correlate_features(fm, scores, cfg.alpha, cfg.workers);
  {
    Sink sink(cfg, "correlations.tsv", out);
    write_correlation_tsv(*sink, report, header(cfg));
  }
  std::string svg = cfg.svg;
  if (svg.empty() && !cfg.out_dir.empty()) svg = (fs::path(cfg.out_dir) / "correlations.svg").string();
  if (!svg.empty()) {
    std::ofstream f(svg, std::ios::binary);
    if (!f) throw DataError("cannot write " + svg);
    write_correlation_svg(f, report, "Pearson r with politeness (" + cfg.lang + ")");
  }
  return kExitOk;
}

int cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  require_file(cfg.features, "features");
  require_file(cfg.annotations, "annotations");
  if (cfg.model.empty() && cfg.out_dir.empty()) throw UsageError("train needs --model or --out");
  const auto fm = load_features(cfg.features);
  const auto split = quartile_split(standardize_scores(load_annotations(cfg.annotations)));
  for (const auto& w : split.warnings) err << "warning: " << w << '\n';
  const auto data = make_labeled_set(fm, split);

  LabeledSet train = data, test;
  if (cfg.holdout > 0) {
    std::vector<std::size_t> tr, te;
    stratified_holdout(data.labels, cfg.holdout, cfg.seed, tr, te);
    train = subset(data, tr);
    test = subset(data, te);
  }
  const auto grid = grid_search(train, cfg.c_grid, cfg.folds, cfg.seed, cfg.tol, cfg.workers);
  const auto model = train_linear_svm(train, grid.best_C, cfg.tol);
  if (!model.converged) err << "warning: solver stopped before reaching tol\n";
  for (const auto& d : model.dropped) err << "warning: dropped constant feature " << d << '\n';

  const auto model_path =
      cfg.model.empty() ? (fs::path(cfg.out_dir) / "model.json").string() : cfg.model;
  if (fs::path(model_path).has_parent_path()) fs::create_directories(fs::path(model_path).parent_path());
  save_model(model_path, model);

  const auto& eval_set = cfg.holdout > 0 ? test : train;
  std::vector<int> truth, pred;
  const Eigen::VectorXd margins = polite::margins(model, eval_set);
  for (Eigen::Index i = 0; i < eval_set.features.rows(); ++i) {
    truth.push_back(eval_set.labels[i] > 0 ? kPolite : kRude);
    pred.push_back(margins[i] > 0 ? kPolite : kRude);
  }
  auto comments = header(cfg);
  comments.push_back("labeled posts: " + std::to_string(data.size()) +
                     (split.boundary_tie ? " (quartile boundary tie broken by post id)" : ""));
  for (const auto& p : grid.points) {
    comments.push_back("cv C=" + format_value(p.C) + " mean_f1=" + format_value(p.mean_f1));
  }
  comments.push_back("best C: " + format_value(grid.best_C));
  comments.push_back(std::string("evaluated on: ") +
                     (cfg.holdout > 0 ? "held-out " + std::to_string(test.size()) + " posts"
                                      : "training posts"));
  Sink sink(cfg, "metrics.tsv", out);
  write_metrics_tsv(*sink, {{cfg.feature_set, evaluate(truth, pred, margins)}}, comments);
  return kExitOk;
}

int cmd_predict(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  require_file(cfg.model, "model");
  require_file(cfg.features, "features");
  const auto model = load_model(cfg.model);
  const auto pred = predict(model, load_features(cfg.features), cfg.workers);
  for (const auto& w : pred.warnings) err << "warning: " << w << '\n';
  Sink sink(cfg, "predictions.tsv", out);
  for (const auto& h : header(cfg)) *sink << "# " << h << '\n';
  *sink << "post_id\tmargin\tlabel\n";
  char buf[64];
  for (std::size_t i = 0; i < pred.post_ids.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.9g", pred.margins[Eigen::Index(i)]);
    *sink << pred.post_ids[i] << '\t' << buf << '\t' << label_name(pred.labels[i]) << '\n';
  }
  return kExitOk;
}

struct PredictionRow {
  double margin;
  int label;
};

int cmd_evaluate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  require_file(cfg.predictions, "predictions");
  if (cfg.labels.empty() == cfg.annotations.empty()) {
    throw UsageError("evaluate needs exactly one of --labels or --annotations");
  }
  std::vector<std::pair<std::string, int>> truth;
  if (!cfg.labels.empty()) {
    require_file(cfg.labels, "labels");
    std::ifstream in(cfg.labels, std::ios::binary);
    const char sep = fs::path(cfg.labels).extension() == ".csv" ? ',' : '\t';
    auto records = read_csv(in, cfg.labels, sep);
    std::erase_if(records, [](const CsvRecord& r) { return !r.fields.empty() && r.fields[0].rfind('#', 0) == 0; });
    if (records.empty() || records[0].fields.size() < 2 || records[0].fields[0] != "post_id") {
      throw DataError(cfg.labels + ": header must be post_id, label");
    }
    for (std::size_t r = 1; r < records.size(); ++r) {
      if (records[r].fields.size() < 2) throw ParseError(cfg.labels, records[r].line, "missing label");
      truth.emplace_back(records[r].fields[0], parse_label(records[r].fields[1]));
    }
  } else {
    require_file(cfg.annotations, "annotations");
    const auto split = quartile_split(standardize_scores(load_annotations(cfg.annotations)));
    for (const auto& w : split.warnings) err << "warning: " << w << '\n';
    for (std::size_t i = 0; i < split.post_ids.size(); ++i) {
      truth.emplace_back(split.post_ids[i], split.labels[i]);
    }
  }

  std::unordered_map<std::string, PredictionRow> predicted;
  {
    std::ifstream in(cfg.predictions, std::ios::binary);
    auto records = read_csv(in, cfg.predictions, '\t');
    std::erase_if(records, [](const CsvRecord& r) { return !r.fields.empty() && r.fields[0].rfind('#', 0) == 0; });
    if (records.empty() || records[0].fields.size() != 3 || records[0].fields[0] != "post_id") {
      throw DataError(cfg.predictions + ": header must be post_id, margin, label");
    }
    for (std::size_t r = 1; r < records.size(); ++r) {
      const auto& f = records[r].fields;
      if (f.size() != 3) throw ParseError(cfg.predictions, records[r].line, "expected 3 fields");
      char* end = nullptr;
      const double m = std::strtod(f[1].c_str(), &end);
      if (f[1].empty() || *end != '\0') throw ParseError(cfg.predictions, records[r].line, "bad margin");
      predicted[f[0]] = {m, parse_label(f[2])};
    }
  }
  std::vector<int> y_true, y_pred;
  std::vector<double> margins;
  std::size_t unmatched = 0;
  for (const auto& [id, label] : truth) {
    const auto it = predicted.find(id);
    if (it == predicted.end()) {
      ++unmatched;
      continue;
    }
    y_true.push_back(label);
    y_pred.push_back(it->second.label);
    margins.push_back(it->second.margin);
  }
  if (y_true.empty()) throw DataError("no labeled post has a prediction");
  if (unmatched > 0) err << "warning: " << unmatched << " labeled posts have no prediction\n";
  const Eigen::Map<const Eigen::VectorXd> mv(margins.data(), Eigen::Index(margins.size()));
  auto comments = header(cfg);
  comments.push_back("evaluated posts: " + std::to_string(y_true.size()));
  Sink sink(cfg, "metrics.tsv", out);
  write_metrics_tsv(*sink, {{cfg.feature_set, evaluate(y_true, y_pred, mv)}}, comments);
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Lexicon-based politeness analysis for English and Chinese microblog posts",
               "politeness"};
  app.set_config("--config", "", "TOML/INI file with option defaults");
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  app.add_option("--seed", cfg.seed, "Seed for fold and holdout shuffles");
  app.add_option("--lang", cfg.lang, "Corpus language")->check(CLI::IsMember({"en", "zh"}));
  app.add_option("--out", cfg.out_dir, "Output directory (default: standard output)");
  app.add_option("--lexicon", cfg.lexica,
                 "Lexicon file, repeatable; .json PoliteLex, .dic LIWC, other EmoLex, or a "
                 "politelex:/liwc:/emolex: prefix")
      ->take_all()
      ->allow_extra_args(false);
  app.add_option("--alpha", cfg.alpha, "Family-wise significance level")
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--c-grid", cfg.c_grid, "Comma-separated C values")->delimiter(',');
  app.add_option("--folds", cfg.folds, "Cross-validation folds")->check(CLI::Range(2, 1000));
  app.add_option("--workers", cfg.workers, "Worker threads, 0 = all cores");

  auto* extract = app.add_subcommand("extract", "Corpus to feature matrix TSV");
  extract->add_option("--corpus", cfg.corpus, "Corpus file (.jsonl or .csv)")->required();
  extract->add_option("--format", cfg.format, "Override corpus format")
      ->check(CLI::IsMember({"jsonl", "csv"}));
  extract->add_option("--dict", cfg.dict, "Chinese segmentation dictionary");

  auto* reliability = app.add_subcommand("reliability", "Krippendorff alpha and ICC(2,k)");
  reliability->add_option("--annotations", cfg.annotations, "Annotation CSV")->required();

  auto* correlate = app.add_subcommand("correlate", "Feature-politeness correlations");
  correlate->add_option("--features", cfg.features, "Feature TSV")->required();
  correlate->add_option("--annotations", cfg.annotations, "Annotation CSV")->required();
  correlate->add_option("--svg", cfg.svg, "Bar chart output path");

  auto* train = app.add_subcommand("train", "Quartile split, grid search, final fit");
  train->add_option("--features", cfg.features, "Feature TSV")->required();
  train->add_option("--annotations", cfg.annotations, "Annotation CSV")->required();
  train->add_option("--model", cfg.model, "Model output path");
  train->add_option("--tol", cfg.tol, "Duality-gap tolerance")->check(CLI::PositiveNumber);
  train->add_option("--holdout", cfg.holdout, "Stratified test fraction, 0 = none")
      ->check(CLI::Range(0.0, 0.9));
  train->add_option("--feature-set", cfg.feature_set, "Row name in the metrics table");

  auto* predict_cmd = app.add_subcommand("predict", "Apply a model to a feature TSV");
  predict_cmd->add_option("--model", cfg.model, "Model JSON")->required();
  predict_cmd->add_option("--features", cfg.features, "Feature TSV")->required();

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Metrics for predictions");
  evaluate_cmd->add_option("--predictions", cfg.predictions, "Predictions TSV")->required();
  evaluate_cmd->add_option("--labels", cfg.labels, "post_id,label file");
  evaluate_cmd->add_option("--annotations", cfg.annotations, "Derive labels by quartile split");
  evaluate_cmd->add_option("--feature-set", cfg.feature_set, "Row name in the metrics table");

  app.require_subcommand(1);
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    cfg.command = app.get_subcommands().front()->get_name();
    if (cfg.c_grid.empty()) throw UsageError("--c-grid is empty");
    for (const auto& l : cfg.lexica) {
      auto path = l;
      for (std::string_view p : {"politelex:", "liwc:", "emolex:"}) {
        if (path.rfind(p, 0) == 0) path = path.substr(p.size());
      }
      require_file(path, "lexicon");
    }
    if (cfg.command == "extract") return cmd_extract(cfg, out, err);
    if (cfg.command == "reliability") return cmd_reliability(cfg, out, err);
    if (cfg.command == "correlate") return cmd_correlate(cfg, out, err);
    if (cfg.command == "train") return cmd_train(cfg, out, err);
    if (cfg.command == "predict") return cmd_predict(cfg, out, err);
    return cmd_evaluate(cfg, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace polite
