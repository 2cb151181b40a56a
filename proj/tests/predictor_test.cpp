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

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "cmlab/error.hpp"
#include "cmlab/rng.hpp"
#include "test_util.hpp"

namespace cmlab {
namespace {

Dataset random_dataset(std::size_t n, std::size_t d, std::uint64_t seed,
                       double (*law)(const std::vector<double>&)) {
  Rng rng(seed);
  Dataset out;
  for (std::size_t j = 0; j < d; ++j) out.feature_names.push_back("f" + std::to_string(j));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x(d);
    for (double& v : x) v = unit_uniform(rng);
    out.ids.push_back("r" + std::to_string(i));
    out.y.push_back(law(x));
    out.x.push_back(std::move(x));
  }
  return out;
}

double constant_law(const std::vector<double>&) { return 3.0; }
double first_feature_law(const std::vector<double>& x) { return 2.0 * x[0]; }
double mixed_law(const std::vector<double>& x) {
  return 1.0 + 2.0 * x[0] + std::max(0.0, x[1] - 0.5);
}

void expect_mae_le_rmse(const EvalResult& e) { EXPECT_LE(e.mae, e.rmse + 1e-12); }

TEST(Forward, TinyModels) {
  EXPECT_EQ(PredictorModel(3, 4).forward(std::vector<double>{1, 2, 3}), 0.0);
  PredictorModel m(1, 1);
  auto p = m.parameters();  // W1, b1, w2, b2
  p[0] = 1.0;
  p[2] = 1.0;
  EXPECT_EQ(m.forward(std::vector<double>{-2.0}), 0.0);
  EXPECT_EQ(m.forward(std::vector<double>{3.0}), 3.0);
  EXPECT_THROW(m.forward(std::vector<double>{1.0, 2.0}), ValidationError);
  EXPECT_EQ(PredictorModel(5, 7).parameter_count(), 7u * 5 + 7 + 7 + 1);
}

TEST(Gradient, MatchesFiniteDifferencesAcrossSeeds) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto model = PredictorModel::initialized(6, 8, seed);
    const auto batch = random_dataset(16, 6, 100 + seed, mixed_law);
    EXPECT_LT(gradient_check(model, batch), 1e-4) << "seed " << seed;
  }
}

TEST(Gradient, ZeroWhenOutputsMatchTargets) {
  const auto model = PredictorModel::initialized(3, 5, 2);
  auto batch = random_dataset(10, 3, 3, constant_law);
  for (std::size_t i = 0; i < batch.size(); ++i) batch.y[i] = model.forward(batch.x[i]);
  EXPECT_EQ(model.loss(batch), 0.0);
  for (double g : model.gradient(batch)) EXPECT_EQ(g, 0.0);
}

TEST(Gradient, SingleParameterCentralDifference) {
  PredictorModel model = PredictorModel::initialized(2, 3, 4);
  const auto batch = random_dataset(8, 2, 5, mixed_law);
  const auto grad = model.gradient(batch);
  const double h = 1e-6;
  for (std::size_t k = 0; k < model.parameter_count(); ++k) {
    PredictorModel plus = model, minus = model;
    plus.parameters()[k] += h;
    minus.parameters()[k] -= h;
    const double numeric = (plus.loss(batch) - minus.loss(batch)) / (2 * h);
    EXPECT_NEAR(grad[k], numeric, 1e-6) << k;
  }
}

TEST(Training, ConstantTargetIsLearned) {
  const auto train_set = random_dataset(400, 5, 6, constant_law);
  const auto dev_set = random_dataset(50, 5, 7, constant_law);
  TrainConfig cfg;
  cfg.seed = 1;
  const auto result = train(train_set, dev_set, cfg);
  EXPECT_LT(result.history.back().best_dev_rmse, 1e-2);
  const auto preds = result.model.predict(dev_set);
  EXPECT_NEAR(std::accumulate(preds.begin(), preds.end(), 0.0) / preds.size(), 3.0, 1e-2);
}

TEST(Training, LinearLawIsLearned) {
  const auto train_set = random_dataset(300, 3, 8, first_feature_law);
  const auto dev_set = random_dataset(60, 3, 9, first_feature_law);
  TrainConfig cfg;
  cfg.seed = 2;
  const auto result = train(train_set, dev_set, cfg);
  EXPECT_LT(evaluate(result.model.predict(dev_set), dev_set.y).rmse, 0.05);
}

TEST(Training, BitDeterministicPerSeed) {
  const auto train_set = random_dataset(120, 4, 10, mixed_law);
  const auto dev_set = random_dataset(30, 4, 11, mixed_law);
  TrainConfig cfg;
  cfg.seed = 3;
  cfg.max_epochs = 60;
  const auto a = train(train_set, dev_set, cfg);
  const auto b = train(train_set, dev_set, cfg);
  EXPECT_EQ(a.model, b.model);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].train_mse, b.history[i].train_mse);
    EXPECT_EQ(a.history[i].dev_rmse, b.history[i].dev_rmse);
  }
  cfg.seed = 4;
  EXPECT_NE(train(train_set, dev_set, cfg).model, a.model);
}

TEST(Training, CheckpointIsBestDevAndMonotone) {
  const auto train_set = random_dataset(100, 4, 12, mixed_law);
  const auto dev_set = random_dataset(30, 4, 13, mixed_law);
  TrainConfig cfg;
  cfg.seed = 5;
  cfg.max_epochs = 80;
  const auto r = train(train_set, dev_set, cfg);
  double best = INFINITY;
  for (const auto& e : r.history) {
    best = std::min(best, e.dev_rmse);
    EXPECT_EQ(e.best_dev_rmse, best);
  }
  EXPECT_NEAR(evaluate(r.model.predict(dev_set), dev_set.y).rmse,
              r.history[r.best_epoch - 1].dev_rmse, 1e-12);
  EXPECT_LE(static_cast<int>(r.history.size()), r.best_epoch + cfg.patience);
}

TEST(Training, RejectsBadConfigAndDivergence) {
  const auto train_set = random_dataset(20, 2, 14, mixed_law);
  TrainConfig cfg;
  cfg.batch_size = 0;
  EXPECT_THROW(train(train_set, train_set, cfg), ValidationError);
  TrainConfig wild;
  wild.learning_rate = 1e200;
  wild.max_epochs = 50;
  try {
    auto big = train_set;
    for (double& y : big.y) y *= 1e300;
    train(big, big, wild);
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
  }
}

TEST(Evaluate, WorkedExamples) {
  const std::vector<double> t = {1, 2, 3};
  auto e = evaluate(t, t);
  EXPECT_EQ(e.rmse, 0.0);
  EXPECT_EQ(e.mae, 0.0);
  e = evaluate(std::vector<double>{2, 3, 4}, t);
  EXPECT_DOUBLE_EQ(e.rmse, 1.0);
  EXPECT_DOUBLE_EQ(e.mae, 1.0);
  e = evaluate(std::vector<double>{0, 3, 1}, t);  // errors 1, -1, 2
  EXPECT_NEAR(e.rmse, std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(e.mae, 4.0 / 3.0, 1e-12);
  EXPECT_EQ(e.n, 3u);
  EXPECT_THROW(evaluate(std::vector<double>{}, std::vector<double>{}), ValidationError);
}

TEST(RandomBaseline, ClosedFormExpectations) {
  Rng rng(15);
  std::vector<double> uniform(100000), constant(100000, 3.0);
  for (double& v : uniform) v = 1 + 4 * unit_uniform(rng);
  const auto u = random_baseline(uniform, 1);
  EXPECT_NEAR(u.rmse, std::sqrt(8.0 / 3.0), 0.02);
  expect_mae_le_rmse(u);
  const auto c = random_baseline(constant, 2);
  EXPECT_NEAR(c.rmse, std::sqrt(4.0 / 3.0), 0.02);
  expect_mae_le_rmse(c);
  const auto again = random_baseline(uniform, 1);
  EXPECT_EQ(again.rmse, u.rmse);
  EXPECT_EQ(again.mae, u.mae);
}

TEST(HumanBaseline, PairwiseAverages) {
  auto triple = [](std::string id, int a, int b, int c) {
    return AnnotationTriple{std::move(id), {Label{a}, Label{b}, Label{c}}};
  };
  const std::vector<AnnotationTriple> agree = {triple("a", 2, 2, 2), triple("b", 4, 4, 4)};
  EXPECT_EQ(human_baseline(agree).rmse, 0.0);
  const std::vector<AnnotationTriple> two = {triple("a", 2, 3, 4), triple("b", 5, 5, 5)};
  const auto e = human_baseline(two);
  EXPECT_NEAR(e.rmse, (2 * std::sqrt(0.5) + std::sqrt(2.0)) / 3, 1e-12);
  EXPECT_NEAR(e.rmse, 0.943, 5e-4);
  EXPECT_NEAR(e.mae, 2.0 / 3.0, 1e-12);
  const std::vector<AnnotationTriple> one = {triple("a", 1, 2, 3)};
  EXPECT_NEAR(human_baseline(one).rmse, 4.0 / 3.0, 1e-12);
  EXPECT_NEAR(human_baseline(one).mae, 4.0 / 3.0, 1e-12);
  const std::vector<AnnotationTriple> excluded = {
      {"x", {Label{1}, Label{Exclusion::kMonolingual}, Label{3}}}};
  EXPECT_THROW(human_baseline(excluded), ValidationError);
}

TEST(Normalizer, FrozenStatisticsAndSchemaChecks) {
  Dataset d;
  d.feature_names = {"a", "b"};
  d.x = {{1, 5}, {3, 5}, {5, 5}};
  d.y = {0, 0, 0};
  d.ids = {"x", "y", "z"};
  const auto norm = Normalizer::fit(d);
  EXPECT_EQ(norm.apply(std::vector<double>{3, 5}), (std::vector<double>{0.5, 0.0}));
  EXPECT_EQ(norm.apply(std::vector<double>{9, 6}), (std::vector<double>{2.0, 1.0}));
  Dataset other = d;
  other.feature_names = {"a", "c"};
  EXPECT_THROW(norm.apply(other), ValidationError);
  EXPECT_THROW(Normalizer({"a"}, {0.0}, {0.0}), ValidationError);
}

TEST(Normalizer, PredictionsInvariantUnderPositiveAffineRescaling) {
  auto train_raw = random_dataset(80, 3, 16, mixed_law);
  auto test_raw = random_dataset(20, 3, 17, mixed_law);
  TrainConfig cfg;
  cfg.seed = 6;
  cfg.max_epochs = 40;
  auto fit_and_predict = [&](const Dataset& tr, const Dataset& te) {
    const auto norm = Normalizer::fit(tr);
    const auto r = train(norm.apply(tr), norm.apply(tr), cfg);
    return r.model.predict(norm.apply(te));
  };
  const auto base = fit_and_predict(train_raw, test_raw);
  for (auto* d : {&train_raw, &test_raw}) {
    for (auto& row : d->x) row[1] = 4.0 * row[1] + 7.0;
  }
  const auto scaled = fit_and_predict(train_raw, test_raw);
  for (std::size_t i = 0; i < base.size(); ++i) EXPECT_NEAR(base[i], scaled[i], 1e-6);
}

LabeledRow labeled(const TaggedSentence& s, double rating) {
  return LabeledRow{metric_row(s), rating, 0};
}

TEST(Features, ImputationAndTableRoundTrip) {
  const auto corpus = testing::synthetic_corpus(30, 18);
  std::vector<LabeledRow> rows;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    rows.push_back(labeled(corpus[i], 1.0 + static_cast<double>(i % 5)));
  }
  MetricRow mono;
  mono.sample_id = "m";
  mono.length = 2;
  const auto f = raw_features(mono, false);
  EXPECT_EQ(f.size(), feature_names(false).size());
  EXPECT_EQ(f[3], 0.0);  // burstiness
  EXPECT_EQ(f[4], 1.0);  // burstiness_absent
  EXPECT_THROW(raw_features(mono, true), ValidationError);

  const auto data = make_dataset(rows);
  EXPECT_EQ(data.feature_names, feature_names(false));
  EXPECT_EQ(data.size(), rows.size());

  std::ostringstream out;
  write_feature_table(out, rows);
  std::istringstream in(out.str());
  const auto back = read_feature_table(in, "f.csv");
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].metrics.sample_id, rows[i].metrics.sample_id);
    EXPECT_EQ(back[i].average_rating, rows[i].average_rating);
  }
}

TEST(Transfer, IdentityAndBeatsRandom) {
  const auto train_raw = random_dataset(300, 3, 19, mixed_law);
  const auto dev_raw = random_dataset(60, 3, 20, mixed_law);
  const auto foreign = random_dataset(200, 3, 21, mixed_law);
  const auto norm = Normalizer::fit(train_raw);
  TrainConfig cfg;
  cfg.seed = 7;
  const auto r = train(norm.apply(train_raw), norm.apply(dev_raw), cfg);
  const TrainedPredictor predictor{r.model, norm};

  const auto direct = evaluate(r.model.predict(norm.apply(dev_raw)), dev_raw.y);
  const auto via = transfer_evaluate(predictor, dev_raw);
  EXPECT_EQ(direct.rmse, via.rmse);
  EXPECT_EQ(direct.mae, via.mae);
  expect_mae_le_rmse(via);

  const auto transfer = transfer_evaluate(predictor, foreign);
  const auto random = random_baseline(foreign.y, 8);
  EXPECT_LT(transfer.rmse, random.rmse);
  expect_mae_le_rmse(transfer);
  expect_mae_le_rmse(random);

  Dataset empty;
  empty.feature_names = foreign.feature_names;
  EXPECT_THROW(transfer_evaluate(predictor, empty), ValidationError);
}

TEST(ModelFile, RoundTripIsExact) {
  const auto train_raw = random_dataset(40, 3, 22, mixed_law);
  const auto norm = Normalizer::fit(train_raw);
  const TrainedPredictor p{PredictorModel::initialized(3, 6, 9), norm};
  std::ostringstream out;
  write_model(out, p);
  std::istringstream in(out.str());
  const auto back = read_model(in, "m.model");
  EXPECT_EQ(back.model, p.model);
  EXPECT_EQ(back.normalizer.names(), norm.names());
  EXPECT_EQ(back.normalizer.mins(), norm.mins());
  EXPECT_EQ(back.normalizer.scales(), norm.scales());

  std::istringstream junk("not a model\n");
  EXPECT_THROW(read_model(junk, "junk"), ValidationError);
  EXPECT_THROW(load_model("/nonexistent/cmlab.model"), IoError);
}

}  // namespace
}  // namespace cmlab
