// Copyright 2026 The cmlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cmlab/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "cmlab/agreement.hpp"
#include "cmlab/config.hpp"
#include "cmlab/corpus.hpp"
#include "cmlab/csv.hpp"
#include "cmlab/curation.hpp"
#include "cmlab/error.hpp"
#include "cmlab/metrics.hpp"
#include "cmlab/predictor.hpp"
#include "cmlab/report.hpp"
#include "cmlab/stats.hpp"
#include "cmlab/translator.hpp"

namespace cmlab::cli {
namespace fs = std::filesystem;

namespace {

class Console {
 public:
  Console(std::ostream& out, std::ostream& err, bool quiet)
      : out_(out), err_(err), quiet_(quiet) {}

  void result(const std::string& line) { out_ << line << '\n'; }
  void info(const std::string& line) {
    if (!quiet_) err_ << line << '\n';
  }
  void warn(const std::string& line) {
    if (!quiet_) err_ << "warning: " << line << '\n';
  }

 private:
  std::ostream& out_;
  std::ostream& err_;
  bool quiet_;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

template <typename Fn>
void write_stream(const fs::path& path, Fn&& fn) {
  std::ostringstream buffer;
  fn(buffer);
  write_text(path, buffer.str());
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::string num(double v, int decimals = 4) { return csv::format_fixed(v, decimals); }

std::string subset_label(Source s) { return s == Source::kSynthetic ? "GCM" : "OSN"; }

// ---------------------------------------------------------------------------
// Shared loaders

std::vector<TaggedSentence> read_corpus(const fs::path& path, Console& console) {
  auto load = load_corpus(path);
  for (const auto& w : load.warnings) console.warn(w);
  return std::move(load.sentences);
}

std::vector<MetricRow> read_metrics_file(const fs::path& path) {
  auto in = open_input(path);
  return read_metric_rows(in, path.string());
}

struct RatedSample {
  std::string id;
  AnnotationTriple triple;
  RatingSummary summary;
};

struct RatingsLoad {
  std::vector<RatedSample> kept;
  std::size_t total = 0;
};

RatingsLoad read_ratings(const fs::path& path) {
  RatingsLoad load;
  for (auto& t : load_annotations(path)) {
    ++load.total;
    if (!keep_for_analysis(t)) continue;
    const RatingSummary s = summarize(t);
    load.kept.push_back({t.sample_id, std::move(t), s});
  }
  return load;
}

std::map<std::string, MetricRow, std::less<>> index_metrics(
    std::vector<MetricRow> rows, std::string_view origin) {
  std::map<std::string, MetricRow, std::less<>> index;
  for (auto& r : rows) {
    const std::string id = r.sample_id;
    if (!index.emplace(id, std::move(r)).second) {
      throw ValidationError(std::string(origin) + ": duplicate id '" + id + "'");
    }
  }
  return index;
}

std::vector<LabeledRow> join_labeled(
    const std::vector<RatedSample>& samples,
    const std::map<std::string, MetricRow, std::less<>>& metrics,
    std::string_view metrics_origin) {
  std::vector<LabeledRow> rows;
  rows.reserve(samples.size());
  for (const auto& s : samples) {
    const auto it = metrics.find(s.id);
    if (it == metrics.end()) {
      throw ValidationError("sample '" + s.id + "' has ratings but no row in " +
                            std::string(metrics_origin));
    }
    rows.push_back({it->second, s.summary.average, s.summary.disagreement});
  }
  return rows;
}

// Splits ids into subsets by corpus source; a single "all" subset when no
// corpus is given.
using SubsetOf = std::map<std::string, std::string, std::less<>>;

SubsetOf subsets_from_corpus(const std::optional<fs::path>& corpus_path,
                             Console& console) {
  SubsetOf subset;
  if (!corpus_path) return subset;
  for (const auto& s : read_corpus(*corpus_path, console)) {
    subset.emplace(s.id, subset_label(s.source));
  }
  return subset;
}

std::string subset_for(const SubsetOf& subsets, const std::string& id) {
  if (subsets.empty()) return "all";
  const auto it = subsets.find(id);
  if (it == subsets.end()) {
    throw ValidationError("sample '" + id + "' is not in the corpus");
  }
  return it->second;
}

template <typename T, typename IdOf>
std::vector<report::Named<std::vector<T>>> group_by_subset(
    const std::vector<T>& items, const SubsetOf& subsets, IdOf id_of) {
  std::vector<report::Named<std::vector<T>>> groups;
  for (const auto& item : items) {
    const std::string name = subset_for(subsets, id_of(item));
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const auto& g) { return g.first == name; });
    if (it == groups.end()) {
      groups.push_back({name, {}});
      it = std::prev(groups.end());
    }
    it->second.push_back(item);
  }
  std::sort(groups.begin(), groups.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return groups;
}

TrainConfig train_config(const RunConfig& config) {
  TrainConfig tc;
  tc.hidden_width = static_cast<std::size_t>(config.get_int("hidden_width"));
  tc.learning_rate = config.get_double("learning_rate");
  tc.max_epochs = static_cast<int>(config.get_int("max_epochs"));
  tc.patience = static_cast<int>(config.get_int("patience"));
  tc.batch_size = static_cast<std::size_t>(config.get_int("batch_size"));
  tc.seed = config.seed();
  return tc;
}

// ---------------------------------------------------------------------------
// Subcommands

struct MetricsArgs {
  std::string in;
  std::string out;
  std::string external;
  std::string vocab;
};

std::optional<double> cmd_metrics(const MetricsArgs& a, Console& console) {
  const auto sentences = read_corpus(a.in, console);
  ExternalScores scores;
  if (!a.external.empty()) {
    auto in = open_input(a.external);
    scores = read_external_scores(in, a.external);
  }
  const auto rows = metric_rows(sentences, a.external.empty() ? nullptr : &scores);
  write_stream(a.out, [&](std::ostream& o) { write_metric_rows(o, rows); });
  console.info("wrote " + std::to_string(rows.size()) + " metric rows to " + a.out);
  if (a.vocab.empty()) return std::nullopt;
  const auto segmenter = WordPieceSegmenter::from_file(a.vocab);
  const double f = fertility(sentences, segmenter);
  console.result("fertility: " + num(f));
  return f;
}

struct PerturbArgs {
  std::string in;
  std::string out;
  std::string kind;
  std::optional<int> count;
  std::string offline_stub;
};

void cmd_perturb(const PerturbArgs& a, const RunConfig& config, Console& console) {
  PerturbSpec spec;
  spec.seed = config.seed();
  std::unique_ptr<Translator> translator;
  if (a.kind == "swap") {
    spec.kind = SwapKind{static_cast<int>(config.get_int("swap_pairs"))};
  } else if (a.kind == "delete") {
    spec.kind = DeleteKind{a.count, config.get_double("delete_fraction")};
  } else if (a.kind == "backtranslate") {
    spec.kind = BackTranslateKind{};
    if (!a.offline_stub.empty()) {
      translator = std::make_unique<DictionaryTranslator>(
          DictionaryTranslator::from_tsv(a.offline_stub));
    } else if (const char* url = std::getenv("CMLAB_TRANSLATOR_URL"); url && *url) {
      translator = std::make_unique<HttpTranslator>(url);
    } else {
      throw ValidationError(
          "backtranslate needs --offline-stub or CMLAB_TRANSLATOR_URL");
    }
  } else {
    throw ValidationError("unknown perturbation kind '" + a.kind + "'");
  }
  const auto corpus = read_corpus(a.in, console);
  const auto result = perturb_corpus(corpus, spec, translator.get());
  for (const auto& s : result.skipped) console.warn(s);
  write_stream(a.out, [&](std::ostream& o) { write_corpus(o, result.sentences); });
  console.info("perturbed " + std::to_string(result.sentences.size()) + " of " +
               std::to_string(corpus.size()) + " sentences");
}

struct NgramArgs {
  std::string in;
  std::string out;
  std::size_t top = 0;
};

void cmd_ngrams(const NgramArgs& a, const RunConfig& config, Console& console) {
  const auto corpus = read_corpus(a.in, console);
  const int n = static_cast<int>(config.get_int("ngram_n"));
  const auto grams = extract_mixed_ngrams(corpus, n);
  const std::size_t limit = a.top == 0 ? grams.size() : std::min(a.top, grams.size());
  write_stream(a.out, [&](std::ostream& o) {
    o << "ngram,frequency\n";
    for (std::size_t i = 0; i < limit; ++i) {
      std::string text;
      for (const auto& w : grams[i].gram) text += (text.empty() ? "" : " ") + w;
      o << csv::join({text, std::to_string(grams[i].frequency)}) << '\n';
    }
  });
  console.info("wrote " + std::to_string(limit) + " code-mixed " +
               std::to_string(n) + "-grams to " + a.out);
}

struct AgreeArgs {
  std::string ratings;
  std::string out;
  std::string corpus;
  std::string pruned;
};

std::string cmd_agree(const AgreeArgs& a, const RunConfig& config, Console& console) {
  const auto load = read_ratings(a.ratings);
  const std::optional<fs::path> corpus =
      a.corpus.empty() ? std::nullopt : std::optional<fs::path>(a.corpus);
  const auto subsets = subsets_from_corpus(corpus, console);
  const auto groups = group_by_subset(load.kept, subsets,
                                      [](const RatedSample& s) { return s.id; });
  std::vector<report::Named<std::vector<ReliabilityRow>>> tables;
  for (const auto& [name, samples] : groups) {
    std::vector<ReliabilityRecord> records;
    for (const auto& s : samples) records.push_back({s.summary, s.triple.ratings()});
    tables.push_back({name, reliability_table(records)});
  }
  std::string table = report::reliability_table(tables);
  const bool negative = std::any_of(tables.begin(), tables.end(), [](const auto& t) {
    return std::any_of(t.second.begin(), t.second.end(),
                       [](const ReliabilityRow& r) { return r.icc1k && *r.icc1k < 0.0; });
  });
  if (negative) table += "\nNegative ICC1k values are reported as computed, not clamped to 0.\n";

  if (fs::path(a.out).extension() == ".csv") {
    write_stream(a.out, [&](std::ostream& o) {
      o << "subset,bin,icc1k,coverage,samples\n";
      for (const auto& [name, rows] : tables) {
        for (const auto& r : rows) {
          o << csv::join({name, r.label, csv::format_optional(r.icc1k, 6),
                          num(r.coverage, 6), std::to_string(r.samples)})
            << '\n';
        }
      }
    });
  } else {
    std::string md = "# Inter-annotator reliability\n\n" + report::stamp(config) + "\n";
    md += table;
    md += "\nSamples with an exclusion label dropped: " +
          std::to_string(load.total - load.kept.size()) + " of " +
          std::to_string(load.total) + "\n";
    write_text(a.out, md);
  }

  if (!a.pruned.empty()) {
    const int threshold = static_cast<int>(config.get_int("disagreement_threshold"));
    std::vector<AnnotationTriple> keep;
    for (const auto& s : load.kept) {
      if (s.summary.disagreement <= threshold) keep.push_back(s.triple);
    }
    write_stream(a.pruned, [&](std::ostream& o) { write_annotations(o, keep); });
    console.info("kept " + std::to_string(keep.size()) + " of " +
                 std::to_string(load.kept.size()) +
                 " samples with disagreement <= " + std::to_string(threshold));
  }
  console.info("wrote reliability table to " + a.out);
  return table;
}

struct SplitArgs {
  std::string metrics;
  std::string ratings;
  std::string out_dir;
};

std::array<std::size_t, 3> cmd_split(const SplitArgs& a, const RunConfig& config,
                                     Console& console) {
  const auto metrics = index_metrics(read_metrics_file(a.metrics), a.metrics);
  const auto load = read_ratings(a.ratings);
  const int threshold = static_cast<int>(config.get_int("disagreement_threshold"));

  std::vector<RatedSample> pruned;
  for (const auto& s : load.kept) {
    if (s.summary.disagreement <= threshold) pruned.push_back(s);
  }
  const auto labeled = join_labeled(pruned, metrics, a.metrics);
  std::vector<std::pair<std::string, RatingSummary>> records;
  for (const auto& s : pruned) records.emplace_back(s.id, s.summary);

  SplitOptions options;
  options.ratios = config.split_ratios();
  options.seed = config.seed();
  const auto split = stratified_split(records, options);
  for (const auto& w : split.warnings) console.warn(w);

  std::array<std::vector<LabeledRow>, 3> parts;
  for (const auto& row : labeled) {
    parts[static_cast<std::size_t>(split.assignment.at(row.metrics.sample_id))]
        .push_back(row);
  }
  ensure_dir(a.out_dir);
  constexpr std::array<std::string_view, 3> kFiles = {"train.csv", "dev.csv", "test.csv"};
  std::array<std::size_t, 3> sizes{};
  for (std::size_t k = 0; k < 3; ++k) {
    write_stream(fs::path(a.out_dir) / kFiles[k],
                 [&](std::ostream& o) { write_feature_table(o, parts[k]); });
    sizes[k] = parts[k].size();
  }
  console.result("train: " + std::to_string(sizes[0]) + ", dev: " +
                 std::to_string(sizes[1]) + ", test: " + std::to_string(sizes[2]));
  return sizes;
}

struct TrainArgs {
  std::string features;
  std::string dev;
  std::string out;
  std::string history;
};

TrainedPredictor cmd_train(const TrainArgs& a, const RunConfig& config,
                           Console& console) {
  const auto train_rows = load_feature_table(a.features);
  const auto dev_rows = load_feature_table(a.dev);
  const Dataset train_raw = make_dataset(train_rows);
  const bool external = train_raw.width() == feature_names(true).size();
  const Dataset dev_raw = make_dataset(dev_rows, external);
  const Normalizer norm = Normalizer::fit(train_raw);
  const auto result =
      train(norm.apply(train_raw), norm.apply(dev_raw), train_config(config));
  TrainedPredictor predictor{result.model, norm};
  save_model(a.out, predictor);
  if (!a.history.empty()) {
    write_stream(a.history, [&](std::ostream& o) {
      o << "epoch,train_mse,dev_rmse,best_dev_rmse\n";
      for (const auto& h : result.history) {
        o << h.epoch << ',' << num(h.train_mse, 6) << ',' << num(h.dev_rmse, 6)
          << ',' << num(h.best_dev_rmse, 6) << '\n';
      }
    });
  }
  const auto& best = result.history[static_cast<std::size_t>(result.best_epoch - 1)];
  console.result("epochs: " + std::to_string(result.history.size()) +
                 ", best epoch: " + std::to_string(result.best_epoch) +
                 ", dev RMSE: " + num(best.dev_rmse));
  return predictor;
}

struct EvalArgs {
  std::string model;
  std::string features;
  std::string out;
};

EvalResult cmd_eval(const EvalArgs& a, Console& console) {
  const TrainedPredictor predictor = load_model(a.model);
  const auto rows = load_feature_table(a.features);
  const auto& names = predictor.normalizer.names();
  const bool external =
      std::find(names.begin(), names.end(), "external_score") != names.end();
  const Dataset data = predictor.normalizer.apply(make_dataset(rows, external));
  if (data.size() == 0) throw ValidationError(a.features + " has no rows");
  const auto predictions = predictor.model.predict(data);
  const EvalResult result = evaluate(predictions, data.y);
  if (!a.out.empty()) {
    write_stream(a.out, [&](std::ostream& o) {
      o << "id,prediction,truth\n";
      for (std::size_t i = 0; i < data.size(); ++i) {
        o << csv::join({data.ids[i], num(predictions[i], 6), num(data.y[i], 6)})
          << '\n';
      }
    });
  }
  console.result("rmse: " + num(result.rmse) + ", mae: " + num(result.mae) +
                 ", n: " + std::to_string(result.n));
  return result;
}

struct BaselineArgs {
  std::string kind;
  std::string features;
  std::string ratings;
};

EvalResult cmd_baseline(const BaselineArgs& a, const RunConfig& config,
                        Console& console) {
  EvalResult result;
  if (a.kind == "random") {
    if (a.features.empty()) throw ValidationError("--kind random needs --features");
    std::vector<double> targets;
    for (const auto& r : load_feature_table(a.features)) targets.push_back(r.average_rating);
    result = random_baseline(targets, config.seed());
  } else if (a.kind == "human") {
    if (a.ratings.empty()) throw ValidationError("--kind human needs --ratings");
    std::vector<AnnotationTriple> triples;
    for (auto& s : read_ratings(a.ratings).kept) triples.push_back(std::move(s.triple));
    result = human_baseline(triples);
  } else {
    throw ValidationError("unknown baseline kind '" + a.kind + "'");
  }
  console.result("rmse: " + num(result.rmse) + ", mae: " + num(result.mae) +
                 ", n: " + std::to_string(result.n));
  return result;
}

struct AnalyzeArgs {
  std::string metrics;
  std::string ratings;
  std::string out;
  std::string predictions;
  std::string corpus;
};

struct Prediction {
  std::string id;
  double prediction = 0.0;
  double truth = 0.0;
};

std::vector<Prediction> read_predictions(const fs::path& path) {
  const auto table = csv::read_file(path);
  const std::string origin = path.string();
  const auto id = table.require_column("id", origin);
  const auto pred = table.require_column("prediction", origin);
  const auto truth = table.require_column("truth", origin);
  std::vector<Prediction> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    try {
      out.push_back({table.rows[r][id],
                     csv::parse_double(table.rows[r][pred], "prediction"),
                     csv::parse_double(table.rows[r][truth], "truth")});
    } catch (const ValidationError& e) {
      throw ValidationError(origin + ":" + std::to_string(table.line_numbers[r]) +
                            ": " + e.what());
    }
  }
  return out;
}

std::string cmd_analyze(const AnalyzeArgs& a, const RunConfig& config,
                        Console& console) {
  const auto metrics = index_metrics(read_metrics_file(a.metrics), a.metrics);
  const auto load = read_ratings(a.ratings);
  const std::optional<fs::path> corpus =
      a.corpus.empty() ? std::nullopt : std::optional<fs::path>(a.corpus);
  const auto subsets = subsets_from_corpus(corpus, console);
  const auto labeled = join_labeled(load.kept, metrics, a.metrics);
  const auto groups = group_by_subset(
      labeled, subsets, [](const LabeledRow& r) { return r.metrics.sample_id; });

  const fs::path out(a.out);
  const fs::path dir = out.parent_path().empty() ? fs::path(".") : out.parent_path();
  const std::string stem = out.stem().string();
  auto artifact = [&](const std::string& subset, const std::string& suffix) {
    return dir / (stem + "." + subset + "." + suffix);
  };

  std::string md = "# Metric and acceptability analysis\n\n" + report::stamp(config);
  md += "\nSamples analysed: " + std::to_string(labeled.size()) + " of " +
        std::to_string(load.total) + " (exclusion labels dropped)\n";

  std::vector<report::Named<stats::RegressionReport>> regressions;
  std::vector<std::string> regression_notes;
  std::vector<std::string> figures;
  md += "\n## Metric correlations\n";
  for (const auto& [name, rows] : groups) {
    std::vector<MetricRow> metric_only;
    stats::Series rating{"average_rating", {}};
    stats::Series disagreement{"disagreement", {}};
    for (const auto& r : rows) {
      metric_only.push_back(r.metrics);
      rating.values.emplace_back(r.average_rating);
      disagreement.values.emplace_back(r.disagreement);
    }
    const auto features = stats::metric_feature_series(metric_only);
    const std::vector<stats::Series> targets = {rating, disagreement};
    const auto matrix = stats::correlation_matrix(features, targets);
    md += "\n### " + name + " (n = " + std::to_string(rows.size()) + ")\n\n" +
          report::correlation_table(matrix);
    write_stream(artifact(name, "correlations.csv"),
                 [&](std::ostream& o) { report::write_correlation_csv(o, matrix); });

    std::vector<double> ratings_values;
    std::vector<double> disagreement_values;
    for (const auto& r : rows) {
      ratings_values.push_back(r.average_rating);
      disagreement_values.push_back(r.disagreement);
    }
    const auto rating_svg = artifact(name, "ratings.svg");
    const auto disagreement_svg = artifact(name, "disagreement.svg");
    report::render_histogram(ratings_values, config.get_double("rating_bin_width"),
                             rating_svg, name + " average ratings", "average rating");
    report::render_histogram(disagreement_values, 1.0, disagreement_svg,
                             name + " disagreement scores", "disagreement");
    figures.push_back(rating_svg.filename().string());
    figures.push_back(disagreement_svg.filename().string());

    const std::vector<std::string> names = {"cmi", "switch_points", "burstiness",
                                            "symcom_sentence", "length"};
    std::vector<std::vector<double>> columns(names.size());
    std::vector<double> y;
    for (const auto& r : rows) {
      if (!r.metrics.burstiness || !r.metrics.symcom_sentence) continue;
      columns[0].push_back(r.metrics.cmi);
      columns[1].push_back(r.metrics.switch_points);
      columns[2].push_back(*r.metrics.burstiness);
      columns[3].push_back(*r.metrics.symcom_sentence);
      columns[4].push_back(r.metrics.length);
      y.push_back(r.average_rating);
    }
    try {
      regressions.push_back({name, stats::normalized_ols_fit(names, columns, y)});
    } catch (const ValidationError& e) {
      regression_notes.push_back(name + ": " + e.what());
    } catch (const NumericalError& e) {
      regression_notes.push_back(name + ": " + e.what());
    }
  }

  md += "\n## Regression of average rating on normalised metrics\n\n";
  md += "Complete cases only (burstiness and sentence SyMCoM defined). "
        "*** p < 0.005, ** p < 0.05, * p < 0.1.\n\n";
  md += report::regression_table(regressions);
  for (const auto& note : regression_notes) md += "\nRegression unavailable for " + note + "\n";

  if (!a.predictions.empty()) {
    const auto predictions = read_predictions(a.predictions);
    std::vector<report::Named<stats::ErrorReport>> errors;
    std::vector<EvalResult> fits;
    const auto by_subset = group_by_subset(
        predictions, subsets, [](const Prediction& p) { return p.id; });
    stats::ErrorAnalysisOptions options;
    options.bin_width = config.get_double("error_bin_width");
    for (const auto& [name, preds] : by_subset) {
      std::vector<double> p;
      std::vector<double> t;
      std::vector<MetricRow> rows;
      for (const auto& pr : preds) {
        const auto it = metrics.find(pr.id);
        if (it == metrics.end()) {
          throw ValidationError("prediction for unknown sample '" + pr.id + "'");
        }
        p.push_back(pr.prediction);
        t.push_back(pr.truth);
        rows.push_back(it->second);
      }
      errors.push_back({name, stats::error_analysis(p, t, rows, options)});
      fits.push_back(evaluate(p, t));
    }
    md += "\n## Prediction errors\n";
    std::vector<report::Named<std::vector<stats::PosAnova>>> anova;
    for (std::size_t g = 0; g < errors.size(); ++g) {
      const auto& [name, e] = errors[g];
      const EvalResult& ev = fits[g];
      const auto svg = artifact(name, "errors.svg");
      write_text(svg, report::histogram_svg(e.histogram, name + " prediction errors",
                                            "truth - prediction"));
      figures.push_back(svg.filename().string());
      md += "\n### " + name + " (n = " + std::to_string(e.errors.size()) +
            ", RMSE " + num(ev.rmse, 3) + ", MAE " + num(ev.mae, 3) + ")\n\n";
      md += report::correlation_table(e.correlations);
      md += "\n| Rating bin | n | Mean error | Mean absolute error |\n| --- | ---: | ---: | ---: |\n";
      for (const auto& b : e.by_rating) {
        md += "| [" + num(b.lo, 1) + ", " + num(b.hi, 1) + ") | " +
              std::to_string(b.count) + " | " + num(b.mean_error, 3) + " | " +
              num(b.mean_abs_error, 3) + " |\n";
      }
      anova.push_back({name, e.anova});
    }
    md += "\n### One-way ANOVA of error over SyMCoM categories\n\n";
    md += "Categories per PoS tag: Monolingual, Mixed, Absent. "
          "Stars follow the regression convention.\n\n";
    md += report::anova_table(anova);
  }

  md += "\n## Figures\n\n";
  for (const auto& f : figures) md += "- [" + f + "](" + f + ")\n";
  write_text(out, md);
  console.info("wrote analysis to " + a.out);
  return md;
}

struct ReportArgs {
  std::string corpus;
  std::string ratings;
  std::string out_dir;
  std::string external;
  std::string vocab;
};

void cmd_report(const ReportArgs& a, const RunConfig& config, Console& console) {
  const fs::path dir(a.out_dir);
  ensure_dir(dir);
  auto path = [&](const char* name) { return (dir / name).string(); };

  const auto fertility_value =
      cmd_metrics({a.corpus, path("metrics.csv"), a.external, a.vocab}, console);
  const std::string reliability =
      cmd_agree({a.ratings, path("reliability.md"), a.corpus, ""}, config, console);
  const auto sizes = cmd_split({path("metrics.csv"), a.ratings, a.out_dir}, config, console);
  cmd_train({path("train.csv"), path("dev.csv"), path("model.cmlab"), path("history.csv")},
            config, console);
  const EvalResult model_eval =
      cmd_eval({path("model.cmlab"), path("test.csv"), path("predictions.csv")}, console);

  std::vector<double> test_targets;
  std::set<std::string, std::less<>> test_ids;
  for (const auto& r : load_feature_table(path("test.csv"))) {
    test_targets.push_back(r.average_rating);
    test_ids.insert(r.metrics.sample_id);
  }
  const EvalResult random_eval = random_baseline(test_targets, config.seed());
  std::vector<AnnotationTriple> test_triples;
  for (auto& s : read_ratings(a.ratings).kept) {
    if (test_ids.contains(s.id)) test_triples.push_back(std::move(s.triple));
  }
  const EvalResult human_eval = human_baseline(test_triples);

  cmd_analyze({path("metrics.csv"), a.ratings, path("analysis.md"),
               path("predictions.csv"), a.corpus},
              config, console);

  std::string md = "# cmlab pipeline report\n\n" + report::stamp(config);
  md += "\n## Inter-annotator reliability\n\n" + reliability;
  md += "\n## Split\n\ntrain " + std::to_string(sizes[0]) + ", dev " +
        std::to_string(sizes[1]) + ", test " + std::to_string(sizes[2]) + "\n";
  md += "\n## Test-set evaluation\n\n";
  const std::vector<report::Named<EvalResult>> evals = {
      {"Feature FFN", model_eval}, {"Random baseline", random_eval},
      {"Human baseline", human_eval}};
  md += report::eval_table(evals);
  if (fertility_value) {
    md += "\n## Tokenizer fertility\n\n" + num(*fertility_value) + " pieces per word\n";
  }
  md += "\nCorrelations, regression and error analysis: [analysis.md](analysis.md)\n";
  write_text(dir / "report.md", md);
  console.result("report: " + (dir / "report.md").string());
}

// Binds a string flag that overrides a configuration key when given.
struct Tunables {
  std::vector<std::pair<CLI::Option*, std::string>> bound;
  std::map<std::string, std::string> values;

  void add(CLI::App* app, const std::string& flag, const std::string& key,
           const std::string& help) {
    auto* opt = app->add_option(flag, values[flag + "\x1f" + key], help);
    bound.emplace_back(opt, key);
  }
  void apply(RunConfig& config) {
    for (const auto& [opt, key] : bound) {
      if (opt->count() > 0) config.set(key, opt->as<std::string>());
    }
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"cmlab: code-mixing corpus analysis toolkit", "cmlab"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(kToolkitVersion));

  std::string seed;
  std::string config_path;
  bool quiet = false;
  auto* seed_opt = app.add_option("--seed", seed, "Global random seed (unsigned 64-bit)");
  app.add_option("--config", config_path, "key=value configuration file");
  app.add_flag("--quiet", quiet, "Suppress progress and warnings on stderr");

  Tunables tunables;

  MetricsArgs metrics_args;
  auto* metrics = app.add_subcommand("metrics", "Per-sentence code-mixing metrics");
  metrics->add_option("--in", metrics_args.in, "Corpus JSONL")->required();
  metrics->add_option("--out", metrics_args.out, "Metric CSV")->required();
  metrics->add_option("--scores,--external", metrics_args.external, "CSV id,score of external scores");
  metrics->add_option("--vocab", metrics_args.vocab, "WordPiece vocabulary for fertility");

  PerturbArgs perturb_args;
  std::optional<int> delete_count_flag;
  auto* perturb = app.add_subcommand("perturb", "Create perturbed negative samples");
  perturb->add_option("--in", perturb_args.in, "Corpus JSONL")->required();
  perturb->add_option("--out", perturb_args.out, "Perturbed corpus JSONL")->required();
  perturb->add_option("--kind", perturb_args.kind, "swap | delete | backtranslate")
      ->required()
      ->check(CLI::IsMember({"swap", "delete", "backtranslate"}));
  tunables.add(perturb, "--pairs", "swap_pairs", "Position pairs to swap");
  tunables.add(perturb, "--fraction", "delete_fraction", "Fraction of tokens to delete");
  perturb->add_option("--count", delete_count_flag, "Tokens to delete (overrides --fraction)");
  perturb->add_option("--offline-stub", perturb_args.offline_stub,
                      "Tab-separated l1/l2 dictionary used instead of a translation service");

  NgramArgs ngram_args;
  auto* ngrams = app.add_subcommand("ngrams", "Frequent code-mixed n-grams");
  ngrams->add_option("--in", ngram_args.in, "Corpus JSONL")->required();
  ngrams->add_option("--out", ngram_args.out, "CSV ngram,frequency")->required();
  tunables.add(ngrams, "--n", "ngram_n", "n in 2..4");
  ngrams->add_option("--top", ngram_args.top, "Keep only the most frequent K");

  AgreeArgs agree_args;
  auto* agree = app.add_subcommand("agree", "ICC1k reliability by disagreement bin");
  agree->add_option("--in,--ratings", agree_args.ratings, "Annotation CSV")->required();
  agree->add_option("--out", agree_args.out, "Reliability table (.csv, otherwise markdown)")->required();
  agree->add_option("--corpus", agree_args.corpus, "Corpus JSONL for per-source columns");
  agree->add_option("--pruned", agree_args.pruned, "Write annotations within the threshold");
  tunables.add(agree, "--threshold", "disagreement_threshold", "Maximum disagreement kept");

  SplitArgs split_args;
  auto* split = app.add_subcommand("split", "Stratified train/dev/test feature tables");
  split->add_option("--metrics", split_args.metrics, "Metric CSV")->required();
  split->add_option("--ratings", split_args.ratings, "Annotation CSV")->required();
  split->add_option("--out-dir", split_args.out_dir, "Output directory")->required();
  tunables.add(split, "--ratios", "split_ratios", "train,dev,test ratios");
  tunables.add(split, "--threshold", "disagreement_threshold", "Maximum disagreement kept");

  AnalyzeArgs analyze_args;
  auto* analyze = app.add_subcommand("analyze", "Correlation, regression and error analysis");
  analyze->add_option("--metrics", analyze_args.metrics, "Metric CSV")->required();
  analyze->add_option("--ratings", analyze_args.ratings, "Annotation CSV")->required();
  analyze->add_option("--out", analyze_args.out, "Markdown report")->required();
  analyze->add_option("--predictions", analyze_args.predictions, "CSV id,prediction,truth");
  analyze->add_option("--corpus", analyze_args.corpus, "Corpus JSONL for per-source columns");

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train the feature predictor");
  train_cmd->add_option("--features", train_args.features, "Training feature table")->required();
  train_cmd->add_option("--dev", train_args.dev, "Dev feature table")->required();
  train_cmd->add_option("--out", train_args.out, "Model file")->required();
  train_cmd->add_option("--history", train_args.history, "Per-epoch loss CSV");
  tunables.add(train_cmd, "--hidden", "hidden_width", "Hidden units");
  tunables.add(train_cmd, "--lr", "learning_rate", "Adam learning rate");
  tunables.add(train_cmd, "--epochs", "max_epochs", "Epoch budget");
  tunables.add(train_cmd, "--patience", "patience", "Early-stopping patience");
  tunables.add(train_cmd, "--batch-size", "batch_size", "Mini-batch size");

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "Evaluate a trained model");
  eval->add_option("--model", eval_args.model, "Model file")->required();
  eval->add_option("--features", eval_args.features, "Feature table")->required();
  eval->add_option("--out", eval_args.out, "Predictions CSV id,prediction,truth");

  BaselineArgs baseline_args;
  auto* baseline = app.add_subcommand("baseline", "Random or inter-annotator baseline");
  baseline->add_option("--kind", baseline_args.kind, "random | human")
      ->required()
      ->check(CLI::IsMember({"random", "human"}));
  baseline->add_option("--features", baseline_args.features, "Feature table (random)");
  baseline->add_option("--ratings", baseline_args.ratings, "Annotation CSV (human)");

  ReportArgs report_args;
  auto* report_cmd = app.add_subcommand("report", "Run the full pipeline");
  report_cmd->add_option("--corpus", report_args.corpus, "Corpus JSONL")->required();
  report_cmd->add_option("--ratings", report_args.ratings, "Annotation CSV")->required();
  report_cmd->add_option("--out-dir", report_args.out_dir, "Output directory")->required();
  report_cmd->add_option("--scores,--external", report_args.external, "CSV id,score of external scores");
  report_cmd->add_option("--vocab", report_args.vocab, "WordPiece vocabulary for fertility");
  tunables.add(report_cmd, "--ratios", "split_ratios", "train,dev,test ratios");
  tunables.add(report_cmd, "--threshold", "disagreement_threshold", "Maximum disagreement kept");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolkitVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitValidation;
  }

  Console console(out, err, quiet);
  try {
    RunConfig config;
    if (!config_path.empty()) config.merge_file(config_path);
    if (seed_opt->count() > 0) config.set("seed", seed);
    tunables.apply(config);

    if (metrics->parsed()) {
      cmd_metrics(metrics_args, console);
    } else if (perturb->parsed()) {
      perturb_args.count = delete_count_flag;
      cmd_perturb(perturb_args, config, console);
    } else if (ngrams->parsed()) {
      cmd_ngrams(ngram_args, config, console);
    } else if (agree->parsed()) {
      cmd_agree(agree_args, config, console);
    } else if (split->parsed()) {
      cmd_split(split_args, config, console);
    } else if (analyze->parsed()) {
      cmd_analyze(analyze_args, config, console);
    } else if (train_cmd->parsed()) {
      cmd_train(train_args, config, console);
    } else if (eval->parsed()) {
      cmd_eval(eval_args, console);
    } else if (baseline->parsed()) {
      cmd_baseline(baseline_args, config, console);
    } else if (report_cmd->parsed()) {
      cmd_report(report_args, config, console);
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace cmlab::cli
