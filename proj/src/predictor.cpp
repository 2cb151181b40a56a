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

#include "cmlab/predictor.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "cmlab/csv.hpp"
#include "cmlab/error.hpp"
#include "cmlab/rng.hpp"

namespace cmlab {
namespace {

constexpr std::string_view kModelHeader = "cmlab-model v1";

std::vector<std::size_t> all_rows(const Dataset& data,
                                  std::span<const std::size_t> rows) {
  if (!rows.empty()) return {rows.begin(), rows.end()};
  std::vector<std::size_t> out(data.size());
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

// Which hidden units are active for each row, row-major.
std::vector<bool> activation_pattern(const PredictorModel& model,
                                     const Dataset& data) {
  const std::size_t d = model.input_width();
  const std::size_t h = model.hidden_width();
  const auto params = model.parameters();
  std::vector<bool> out;
  out.reserve(data.size() * h);
  for (const auto& x : data.x) {
    for (std::size_t j = 0; j < h; ++j) {
      double z = params[h * d + j];
      for (std::size_t k = 0; k < d; ++k) z += params[j * d + k] * x[k];
      out.push_back(z > 0.0);
    }
  }
  return out;
}

// A central difference that straddles a rectifier kink measures neither
// one-sided slope, so the step is halved until no unit changes state.
constexpr int kMaxStepHalvings = 20;

void check_dataset(const Dataset& data, std::size_t width, const char* what) {
  if (data.size() == 0) throw ValidationError(std::string(what) + " is empty");
  if (data.x.size() != data.y.size()) {
    throw ValidationError(std::string(what) + ": features and targets differ in length");
  }
  for (const auto& row : data.x) {
    if (row.size() != width) {
      throw ValidationError(std::string(what) + ": row has " +
                            std::to_string(row.size()) + " features, expected " +
                            std::to_string(width));
    }
  }
}

std::string format_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

double parse_real(const std::string& s, std::string_view origin) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ValidationError(std::string(origin) + ": bad number '" + s + "'");
  }
  return v;
}

// Reads "key v1 v2 ..." and returns the values, checking key and count.
std::vector<std::string> read_record(std::istream& in, std::string_view key,
                                     std::size_t count, std::string_view origin) {
  std::string line;
  if (!std::getline(in, line)) {
    throw ValidationError(std::string(origin) + ": missing '" +
                          std::string(key) + "' record");
  }
  auto fields = split_ws(line);
  if (fields.empty() || fields.front() != key) {
    throw ValidationError(std::string(origin) + ": expected '" +
                          std::string(key) + "' record");
  }
  fields.erase(fields.begin());
  if (fields.size() != count) {
    throw ValidationError(std::string(origin) + ": '" + std::string(key) +
                          "' has " + std::to_string(fields.size()) +
                          " values, expected " + std::to_string(count));
  }
  return fields;
}

std::size_t parse_size(const std::string& s, std::string_view origin) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v == 0) {
    throw ValidationError(std::string(origin) + ": bad dimension '" + s + "'");
  }
  return v;
}

}  // namespace

void write_feature_table(std::ostream& out, std::span<const LabeledRow> rows) {
  auto header = metric_csv_header();
  header.emplace_back("average_rating");
  header.emplace_back("disagreement");
  out << csv::join(header) << '\n';
  for (const LabeledRow& r : rows) {
    auto fields = metric_csv_fields(r.metrics);
    fields.push_back(csv::format_fixed(r.average_rating, 6));
    fields.push_back(std::to_string(r.disagreement));
    out << csv::join(fields) << '\n';
  }
}

std::vector<LabeledRow> read_feature_table(std::istream& in,
                                           std::string_view origin) {
  const std::string text{std::istreambuf_iterator<char>(in), {}};
  std::istringstream metrics_in(text);
  const auto metrics = read_metric_rows(metrics_in, origin);
  std::istringstream table_in(text);
  const csv::Table table = csv::read(table_in, origin);
  const std::size_t avg_col = table.require_column("average_rating", origin);
  const std::size_t dis_col = table.require_column("disagreement", origin);

  std::vector<LabeledRow> rows(metrics.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    rows[r].metrics = metrics[r];
    try {
      rows[r].average_rating =
          csv::parse_double(table.rows[r][avg_col], "average_rating");
      rows[r].disagreement = static_cast<int>(
          csv::parse_double(table.rows[r][dis_col], "disagreement"));
    } catch (const ValidationError& e) {
      throw ValidationError(std::string(origin) + ":" +
                            std::to_string(table.line_numbers[r]) + ": " +
                            e.what());
    }
  }
  return rows;
}

std::vector<LabeledRow> load_feature_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_feature_table(in, path.string());
}

std::vector<std::string> feature_names(bool with_external) {
  std::vector<std::string> names = {"length",     "cmi",
                                    "switch_points", "burstiness",
                                    "burstiness_absent", "symcom_sentence"};
  if (with_external) names.emplace_back("external_score");
  return names;
}

std::vector<double> raw_features(const MetricRow& row, bool with_external) {
  std::vector<double> x = {static_cast<double>(row.length),
                           row.cmi,
                           static_cast<double>(row.switch_points),
                           row.burstiness.value_or(0.0),
                           row.burstiness ? 0.0 : 1.0,
                           row.symcom_sentence.value_or(0.0)};
  if (with_external) {
    if (!row.external_score) {
      throw ValidationError("sample '" + row.sample_id +
                            "' has no external score");
    }
    x.push_back(*row.external_score);
  }
  return x;
}

Dataset make_dataset(std::span<const LabeledRow> rows) {
  const bool external =
      !rows.empty() &&
      std::all_of(rows.begin(), rows.end(), [](const LabeledRow& r) {
        return r.metrics.external_score.has_value();
      });
  return make_dataset(rows, external);
}

Dataset make_dataset(std::span<const LabeledRow> rows, bool with_external) {
  Dataset data;
  data.feature_names = feature_names(with_external);
  data.ids.reserve(rows.size());
  data.x.reserve(rows.size());
  data.y.reserve(rows.size());
  for (const LabeledRow& r : rows) {
    data.ids.push_back(r.metrics.sample_id);
    data.x.push_back(raw_features(r.metrics, with_external));
    data.y.push_back(r.average_rating);
  }
  return data;
}

Normalizer::Normalizer(std::vector<std::string> names, std::vector<double> mins,
                       std::vector<double> scales)
    : names_(std::move(names)), mins_(std::move(mins)), scales_(std::move(scales)) {
  if (mins_.size() != names_.size() || scales_.size() != names_.size()) {
    throw ValidationError("normaliser statistics do not match feature count");
  }
  for (double s : scales_) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw ValidationError("normaliser scale must be positive and finite");
    }
  }
}

Normalizer Normalizer::fit(const Dataset& train) {
  check_dataset(train, train.width(), "training set");
  const std::size_t d = train.width();
  std::vector<double> lo(d, 0.0);
  std::vector<double> hi(d, 0.0);
  for (std::size_t k = 0; k < d; ++k) lo[k] = hi[k] = train.x[0][k];
  for (const auto& row : train.x) {
    for (std::size_t k = 0; k < d; ++k) {
      lo[k] = std::min(lo[k], row[k]);
      hi[k] = std::max(hi[k], row[k]);
    }
  }
  std::vector<double> scale(d, 1.0);
  for (std::size_t k = 0; k < d; ++k) {
    if (hi[k] > lo[k]) scale[k] = hi[k] - lo[k];
  }
  return Normalizer(train.feature_names, std::move(lo), std::move(scale));
}

std::vector<double> Normalizer::apply(std::span<const double> x) const {
  if (x.size() != mins_.size()) {
    throw ValidationError("feature vector has " + std::to_string(x.size()) +
                          " values, normaliser expects " +
                          std::to_string(mins_.size()));
  }
  std::vector<double> out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    out[k] = (x[k] - mins_[k]) / scales_[k];
  }
  return out;
}

Dataset Normalizer::apply(const Dataset& data) const {
  if (data.feature_names != names_) {
    std::string expected;
    for (const auto& n : names_) expected += (expected.empty() ? "" : ",") + n;
    throw ValidationError("feature schema mismatch; expected " + expected);
  }
  Dataset out = data;
  for (auto& row : out.x) row = apply(row);
  return out;
}

PredictorModel::PredictorModel(std::size_t input_width, std::size_t hidden_width)
    : d_(input_width), h_(hidden_width),
      params_(hidden_width * input_width + 2 * hidden_width + 1, 0.0) {
  if (d_ == 0 || h_ == 0) {
    throw ValidationError("model dimensions must be positive");
  }
}

PredictorModel PredictorModel::initialized(std::size_t input_width,
                                           std::size_t hidden_width,
                                           std::uint64_t seed) {
  PredictorModel m(input_width, hidden_width);
  Rng rng(splitmix64(seed));
  const double limit1 = std::sqrt(6.0 / static_cast<double>(input_width + hidden_width));
  const double limit2 = std::sqrt(6.0 / static_cast<double>(hidden_width + 1));
  const std::size_t w1 = hidden_width * input_width;
  for (std::size_t i = 0; i < w1; ++i) {
    m.params_[i] = limit1 * (2.0 * unit_uniform(rng) - 1.0);
  }
  const std::size_t w2 = w1 + hidden_width;
  for (std::size_t j = 0; j < hidden_width; ++j) {
    m.params_[w2 + j] = limit2 * (2.0 * unit_uniform(rng) - 1.0);
  }
  return m;
}

double PredictorModel::forward(std::span<const double> x) const {
  if (x.size() != d_) {
    throw ValidationError("input has " + std::to_string(x.size()) +
                          " features, model expects " + std::to_string(d_));
  }
  const double* w1 = params_.data();
  const double* b1 = w1 + h_ * d_;
  const double* w2 = b1 + h_;
  double out = w2[h_];
  for (std::size_t j = 0; j < h_; ++j) {
    double z = b1[j];
    for (std::size_t k = 0; k < d_; ++k) z += w1[j * d_ + k] * x[k];
    if (z > 0.0) out += w2[j] * z;
  }
  return out;
}

std::vector<double> PredictorModel::predict(const Dataset& data) const {
  std::vector<double> out;
  out.reserve(data.size());
  for (const auto& row : data.x) out.push_back(forward(row));
  return out;
}

double PredictorModel::loss(const Dataset& data,
                            std::span<const std::size_t> rows) const {
  const auto idx = all_rows(data, rows);
  if (idx.empty()) throw ValidationError("loss over an empty batch");
  double sum = 0.0;
  for (std::size_t i : idx) {
    const double e = forward(data.x[i]) - data.y[i];
    sum += e * e;
  }
  return sum / static_cast<double>(idx.size());
}

std::vector<double> PredictorModel::gradient(
    const Dataset& data, std::span<const std::size_t> rows) const {
  const auto idx = all_rows(data, rows);
  if (idx.empty()) throw ValidationError("gradient over an empty batch");
  std::vector<double> grad(params_.size(), 0.0);
  const double* w1 = params_.data();
  const double* b1 = w1 + h_ * d_;
  const double* w2 = b1 + h_;
  double* g_w1 = grad.data();
  double* g_b1 = g_w1 + h_ * d_;
  double* g_w2 = g_b1 + h_;
  double* g_b2 = g_w2 + h_;

  std::vector<double> z(h_);
  const double inv_n = 1.0 / static_cast<double>(idx.size());
  for (std::size_t i : idx) {
    const auto& x = data.x[i];
    if (x.size() != d_) throw ValidationError("batch row width mismatch");
    double out = w2[h_];
    for (std::size_t j = 0; j < h_; ++j) {
      double s = b1[j];
      for (std::size_t k = 0; k < d_; ++k) s += w1[j * d_ + k] * x[k];
      z[j] = s;
      if (s > 0.0) out += w2[j] * s;
    }
    const double g = 2.0 * (out - data.y[i]) * inv_n;
    *g_b2 += g;
    for (std::size_t j = 0; j < h_; ++j) {
      if (z[j] <= 0.0) continue;
      g_w2[j] += g * z[j];
      const double gz = g * w2[j];
      g_b1[j] += gz;
      for (std::size_t k = 0; k < d_; ++k) g_w1[j * d_ + k] += gz * x[k];
    }
  }
  return grad;
}

double gradient_check(const PredictorModel& model, const Dataset& batch,
                      double h) {
  check_dataset(batch, model.input_width(), "gradient-check batch");
  const auto analytic = model.gradient(batch);
  PredictorModel probe = model;
  auto params = probe.parameters();
  const auto base_pattern = activation_pattern(probe, batch);
  double worst = 0.0;
  for (std::size_t p = 0; p < params.size(); ++p) {
    const double saved = params[p];
    double step = h;
    double numeric = 0.0;
    for (int attempt = 0; attempt < kMaxStepHalvings; ++attempt) {
      params[p] = saved + step;
      const double up = probe.loss(batch);
      const bool up_same = activation_pattern(probe, batch) == base_pattern;
      params[p] = saved - step;
      const double down = probe.loss(batch);
      const bool down_same = activation_pattern(probe, batch) == base_pattern;
      numeric = (up - down) / (2.0 * step);
      if (up_same && down_same) break;
      step /= 2.0;
    }
    params[p] = saved;
    const double denom =
        std::max({std::abs(analytic[p]), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic[p] - numeric) / denom);
  }
  return worst;
}

TrainResult train(const Dataset& train_set, const Dataset& dev_set,
                  const TrainConfig& config) {
  const std::size_t d = train_set.width();
  check_dataset(train_set, d, "training set");
  check_dataset(dev_set, d, "dev set");
  if (dev_set.feature_names != train_set.feature_names) {
    throw ValidationError("train and dev feature schemas differ");
  }
  if (config.max_epochs < 1 || config.patience < 1 || config.batch_size == 0 ||
      !(config.learning_rate > 0.0)) {
    throw ValidationError("invalid training configuration");
  }

  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEpsilon = 1e-8;

  PredictorModel model =
      PredictorModel::initialized(d, config.hidden_width, config.seed);
  // Start the output bias at the mean target so early epochs fit the
  // feature-dependent part instead of the offset.
  model.parameters().back() =
      std::accumulate(train_set.y.begin(), train_set.y.end(), 0.0) /
      static_cast<double>(train_set.size());
  std::vector<double> m(model.parameter_count(), 0.0);
  std::vector<double> v(model.parameter_count(), 0.0);
  Rng shuffler(splitmix64(config.seed ^ 0x5348554646ULL));
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result{model, {}, 0};
  double best = std::numeric_limits<double>::infinity();
  int stale = 0;
  std::uint64_t step = 0;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    shuffle(std::span(order), shuffler);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const std::span<const std::size_t> batch(order.data() + start, end - start);
      const auto grad = model.gradient(train_set, batch);
      ++step;
      const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      auto params = model.parameters();
      for (std::size_t p = 0; p < params.size(); ++p) {
        m[p] = kBeta1 * m[p] + (1.0 - kBeta1) * grad[p];
        v[p] = kBeta2 * v[p] + (1.0 - kBeta2) * grad[p] * grad[p];
        params[p] -= config.learning_rate * (m[p] / c1) /
                     (std::sqrt(v[p] / c2) + kEpsilon);
      }
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_mse = model.loss(train_set);
    rec.dev_rmse = std::sqrt(model.loss(dev_set));
    if (!std::isfinite(rec.train_mse) || !std::isfinite(rec.dev_rmse)) {
      throw NumericalError("training diverged at epoch " + std::to_string(epoch));
    }
    if (rec.dev_rmse < best) {
      best = rec.dev_rmse;
      result.model = model;
      result.best_epoch = epoch;
      stale = 0;
    } else {
      ++stale;
    }
    rec.best_dev_rmse = best;
    result.history.push_back(rec);
    if (stale >= config.patience) break;
  }
  return result;
}

EvalResult evaluate(std::span<const double> predictions,
                    std::span<const double> truths) {
  if (predictions.size() != truths.size()) {
    throw ValidationError("predictions and truths differ in length");
  }
  if (truths.empty()) throw ValidationError("evaluation of an empty set");
  double se = 0.0;
  double ae = 0.0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const double e = predictions[i] - truths[i];
    se += e * e;
    ae += std::abs(e);
  }
  const auto n = static_cast<double>(truths.size());
  return {std::sqrt(se / n), ae / n, truths.size()};
}

EvalResult random_baseline(std::span<const double> targets, std::uint64_t seed) {
  if (targets.empty()) throw ValidationError("random baseline of no targets");
  Rng rng(splitmix64(seed));
  std::vector<double> guesses(targets.size());
  for (double& g : guesses) g = 1.0 + 4.0 * unit_uniform(rng);
  return evaluate(guesses, targets);
}

EvalResult human_baseline(std::span<const AnnotationTriple> triples) {
  if (triples.empty()) throw ValidationError("human baseline of no samples");
  std::array<std::vector<double>, 3> by_rater;
  for (const AnnotationTriple& t : triples) {
    if (t.has_exclusion()) {
      throw ValidationError("sample '" + t.sample_id +
                            "' carries an exclusion label");
    }
    const auto r = t.ratings();
    for (std::size_t k = 0; k < 3; ++k) by_rater[k].push_back(r[k]);
  }
  constexpr std::array<std::pair<int, int>, 3> kPairs = {{{0, 1}, {0, 2}, {1, 2}}};
  EvalResult mean{0.0, 0.0, triples.size()};
  for (const auto& [a, b] : kPairs) {
    const EvalResult e = evaluate(by_rater[a], by_rater[b]);
    mean.rmse += e.rmse / 3.0;
    mean.mae += e.mae / 3.0;
  }
  return mean;
}

EvalResult transfer_evaluate(const TrainedPredictor& predictor,
                             const Dataset& foreign) {
  if (foreign.size() == 0) throw ValidationError("transfer set is empty");
  const Dataset normalized = predictor.normalizer.apply(foreign);
  return evaluate(predictor.model.predict(normalized), normalized.y);
}

void write_model(std::ostream& out, const TrainedPredictor& predictor) {
  const PredictorModel& m = predictor.model;
  const Normalizer& norm = predictor.normalizer;
  if (norm.names().size() != m.input_width()) {
    throw ValidationError("normaliser width does not match model input width");
  }
  const std::size_t d = m.input_width();
  const std::size_t h = m.hidden_width();
  const auto params = m.parameters();
  auto emit = [&](std::string_view key, std::size_t from, std::size_t count) {
    out << key;
    for (std::size_t i = from; i < from + count; ++i) out << ' ' << format_g17(params[i]);
    out << '\n';
  };
  out << kModelHeader << '\n';
  out << "input_width " << d << '\n';
  out << "hidden_width " << h << '\n';
  out << "features";
  for (const auto& n : norm.names()) out << ' ' << n;
  out << '\n';
  out << "norm_min";
  for (double v : norm.mins()) out << ' ' << format_g17(v);
  out << '\n';
  out << "norm_scale";
  for (double v : norm.scales()) out << ' ' << format_g17(v);
  out << '\n';
  emit("W1", 0, h * d);
  emit("b1", h * d, h);
  emit("w2", h * d + h, h);
  emit("b2", h * d + 2 * h, 1);
}

TrainedPredictor read_model(std::istream& in, std::string_view origin) {
  std::string line;
  if (!std::getline(in, line) || line != kModelHeader) {
    throw ValidationError(std::string(origin) + ": not a cmlab model file");
  }
  const std::size_t d = parse_size(read_record(in, "input_width", 1, origin)[0], origin);
  const std::size_t h = parse_size(read_record(in, "hidden_width", 1, origin)[0], origin);
  auto names = read_record(in, "features", d, origin);
  auto to_reals = [&](const std::vector<std::string>& fields) {
    std::vector<double> out;
    out.reserve(fields.size());
    for (const auto& f : fields) out.push_back(parse_real(f, origin));
    return out;
  };
  auto mins = to_reals(read_record(in, "norm_min", d, origin));
  auto scales = to_reals(read_record(in, "norm_scale", d, origin));

  PredictorModel model(d, h);
  auto params = model.parameters();
  std::size_t at = 0;
  const std::pair<std::string_view, std::size_t> blocks[] = {
      {"W1", h * d}, {"b1", h}, {"w2", h}, {"b2", 1}};
  for (const auto& [key, count] : blocks) {
    for (double v : to_reals(read_record(in, key, count, origin))) params[at++] = v;
  }
  try {
    return {std::move(model),
            Normalizer(std::move(names), std::move(mins), std::move(scales))};
  } catch (const ValidationError& e) {
    throw ValidationError(std::string(origin) + ": " + e.what());
  }
}

void save_model(const std::filesystem::path& path,
                const TrainedPredictor& predictor) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_model(out, predictor);
  if (!out) throw IoError("failed writing " + path.string());
}

TrainedPredictor load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_model(in, path.string());
}

}  // namespace cmlab
