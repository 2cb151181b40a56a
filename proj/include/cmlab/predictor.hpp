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

// Metric-feature acceptability regressor: a one-hidden-layer ReLU network
// trained with Adam on mean squared error, plus the random and
// inter-annotator baselines it is compared against.

#ifndef CMLAB_PREDICTOR_HPP_
#define CMLAB_PREDICTOR_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cmlab/corpus.hpp"
#include "cmlab/metrics.hpp"

namespace cmlab {

// A metric row joined with its aggregated human rating. This is the row
// format of the feature tables written by `cmlab split`.
struct LabeledRow {
  MetricRow metrics;
  double average_rating = 0.0;
  int disagreement = 0;
};

// Metric columns followed by average_rating,disagreement.
void write_feature_table(std::ostream& out, std::span<const LabeledRow> rows);
std::vector<LabeledRow> read_feature_table(std::istream& in,
                                           std::string_view origin);
std::vector<LabeledRow> load_feature_table(const std::filesystem::path& path);

// length, cmi, switch_points, burstiness, burstiness_absent,
// symcom_sentence and optionally external_score.
std::vector<std::string> feature_names(bool with_external);

// Absent burstiness and SyMCoM are imputed as 0; burstiness_absent flags the
// former. A missing external score is a ValidationError when requested.
std::vector<double> raw_features(const MetricRow& row, bool with_external);

struct Dataset {
  std::vector<std::string> feature_names;
  std::vector<std::string> ids;
  std::vector<std::vector<double>> x;
  std::vector<double> y;

  std::size_t size() const { return y.size(); }
  std::size_t width() const { return feature_names.size(); }
};

// External scores are used only when every row has one.
Dataset make_dataset(std::span<const LabeledRow> rows);
Dataset make_dataset(std::span<const LabeledRow> rows, bool with_external);

// Per-column min-max statistics fitted on training data and then frozen.
// Constant columns get scale 1 so they map to 0 instead of dividing by 0.
class Normalizer {
 public:
  Normalizer() = default;
  Normalizer(std::vector<std::string> names, std::vector<double> mins,
             std::vector<double> scales);

  static Normalizer fit(const Dataset& train);

  const std::vector<std::string>& names() const { return names_; }
  const std::vector<double>& mins() const { return mins_; }
  const std::vector<double>& scales() const { return scales_; }

  std::vector<double> apply(std::span<const double> x) const;
  // Throws ValidationError when the feature schema differs.
  Dataset apply(const Dataset& data) const;

 private:
  std::vector<std::string> names_;
  std::vector<double> mins_;
  std::vector<double> scales_;
};

class PredictorModel {
 public:
  // All-zero parameters.
  PredictorModel(std::size_t input_width, std::size_t hidden_width);
  // Glorot-uniform weights, zero biases.
  static PredictorModel initialized(std::size_t input_width,
                                    std::size_t hidden_width,
                                    std::uint64_t seed);

  std::size_t input_width() const { return d_; }
  std::size_t hidden_width() const { return h_; }
  std::size_t parameter_count() const { return params_.size(); }

  // Flat layout: W1 (H x d, row-major), b1 (H), w2 (H), b2.
  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  double forward(std::span<const double> x) const;
  std::vector<double> predict(const Dataset& data) const;

  // Mean squared error over the rows listed in `rows` (all rows if empty).
  double loss(const Dataset& data, std::span<const std::size_t> rows = {}) const;
  // Analytic gradient of loss() with respect to parameters().
  std::vector<double> gradient(const Dataset& data,
                               std::span<const std::size_t> rows = {}) const;

  bool operator==(const PredictorModel&) const = default;

 private:
  std::size_t d_;
  std::size_t h_;
  std::vector<double> params_;
};

// Maximum over parameters of |analytic - numeric| / max(|analytic|,
// |numeric|, 1e-6), numeric by central differences with step h. The step is
// halved for any parameter whose perturbation switches a hidden unit on or
// off, so the difference never spans a rectifier kink.
double gradient_check(const PredictorModel& model, const Dataset& batch,
                      double h = 1e-5);

struct TrainConfig {
  std::size_t hidden_width = 32;
  double learning_rate = 1e-3;
  int max_epochs = 500;
  int patience = 10;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_mse = 0.0;
  double dev_rmse = 0.0;
  double best_dev_rmse = 0.0;
};

struct TrainResult {
  PredictorModel model;  // best-dev checkpoint
  std::vector<EpochRecord> history;
  int best_epoch = 0;
};

// Both datasets must already be normalised. Divergence raises
// NumericalError naming the epoch.
TrainResult train(const Dataset& train_set, const Dataset& dev_set,
                  const TrainConfig& config);

struct EvalResult {
  double rmse = 0.0;
  double mae = 0.0;
  std::size_t n = 0;
};

EvalResult evaluate(std::span<const double> predictions,
                    std::span<const double> truths);

// Predictions drawn uniformly from [1, 5].
EvalResult random_baseline(std::span<const double> targets, std::uint64_t seed);

// Mean over the three annotator pairs of their pairwise RMSE and MAE.
EvalResult human_baseline(std::span<const AnnotationTriple> triples);

struct TrainedPredictor {
  PredictorModel model;
  Normalizer normalizer;
};

// Applies a trained model and its frozen normalisation to raw features.
EvalResult transfer_evaluate(const TrainedPredictor& predictor,
                             const Dataset& foreign);

// Text format: a "cmlab-model v1" header, dimensions, feature names,
// normalisation statistics, then parameters in row-major order.
void write_model(std::ostream& out, const TrainedPredictor& predictor);
TrainedPredictor read_model(std::istream& in, std::string_view origin);
void save_model(const std::filesystem::path& path,
                const TrainedPredictor& predictor);
TrainedPredictor load_model(const std::filesystem::path& path);

}  // namespace cmlab

#endif  // CMLAB_PREDICTOR_HPP_
