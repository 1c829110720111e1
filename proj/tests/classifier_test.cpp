// Copyright 2026 The AFR Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "afr/classifier.hpp"
#include "afr/errors.hpp"
#include "test_util.hpp"

namespace afr {
namespace {

using testing::finite_difference;
using testing::max_rel_error;
using testing::random_matrix;

// Two Gaussian blobs around (+-2, 0).
void two_blobs(std::size_t per_class, Rng& rng, Matrix& x, std::vector<int>& y) {
  std::normal_distribution<double> noise(0.0, 0.3);
  x = Matrix(2 * per_class, 2);
  y.clear();
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    const int c = i < per_class ? 4 : 9;
    x(i, 0) = (c == 4 ? -2.0 : 2.0) + noise(rng);
    x(i, 1) = noise(rng);
    y.push_back(c);
  }
}

PrototypeTable table(std::vector<int> ids, Matrix protos) {
  PrototypeTable t;
  t.class_ids = std::move(ids);
  t.prototypes = std::move(protos);
  return t;
}

// --- softmax ---------------------------------------------------------------

TEST(SoftmaxFit, SeparatesTwoBlobs) {
  Rng rng(1);
  Matrix x;
  std::vector<int> y;
  two_blobs(30, rng, x, y);
  const SoftmaxModel m = softmax_fit(x, y);
  EXPECT_EQ(m.class_ids, (std::vector<int>{4, 9}));
  EXPECT_EQ(classify(m, x), y);
}

TEST(SoftmaxFit, DuplicatingSamplesKeepsOptimum) {
  Rng rng(2);
  Matrix x;
  std::vector<int> y;
  two_blobs(10, rng, x, y);
  x(0, 0) = 1.5;  // one overlapping point keeps the optimum finite-ish
  Matrix xx(2 * x.rows(), x.cols());
  std::vector<int> yy;
  for (std::size_t r = 0; r < 2 * x.rows(); ++r) {
    for (std::size_t j = 0; j < x.cols(); ++j) xx(r, j) = x(r % x.rows(), j);
    yy.push_back(y[r % x.rows()]);
  }
  SoftmaxConfig config;
  config.max_iterations = 300;
  const SoftmaxModel a = softmax_fit(x, y, config);
  const SoftmaxModel b = softmax_fit(xx, yy, config);
  EXPECT_LE(max_rel_error(a.weights, b.weights, 1e-6), 1e-9);
}

TEST(SoftmaxLossTest, GradientMatchesFiniteDifferences) {
  Rng rng(3);
  Matrix w = random_matrix(4, 6, rng);
  const Matrix x = random_matrix(9, 5, rng);
  std::vector<std::size_t> targets = {0, 1, 2, 3, 0, 1, 2, 3, 3};
  const SoftmaxLoss loss = softmax_loss(w, x, targets);
  const Matrix fd = finite_difference(w, [&] { return softmax_loss(w, x, targets).value; });
  EXPECT_LE(max_rel_error(loss.gradient, fd, 1e-6), 1e-5);
}

TEST(SoftmaxLossTest, UniformWeightsGiveLogClassCount) {
  const Matrix x = {{1.0, 2.0}, {3.0, -1.0}};
  const std::vector<std::size_t> targets = {0, 2};
  EXPECT_NEAR(softmax_loss(Matrix(3, 3), x, targets).value, std::log(3.0), 1e-15);
}

TEST(SoftmaxFit, Errors) {
  const Matrix x = {{1.0}, {2.0}};
  const std::vector<int> one = {1, 1};
  EXPECT_THROW(softmax_fit(x, one), DataError);
  const std::vector<int> two = {1, 2};
  const std::vector<int> wanted = {1, 2, 3};
  try {
    softmax_fit(x, two, {}, wanted);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("class 3"), std::string::npos);
  }
}

// --- classify ----------------------------------------------------------------

TEST(Classify, ZeroWeightsPickLowestId) {
  SoftmaxModel m;
  m.class_ids = {7, 3, 5};
  m.weights = Matrix(3, 3);
  Rng rng(4);
  for (int c : classify(m, random_matrix(5, 2, rng))) EXPECT_EQ(c, 3);
}

TEST(Classify, SharedRowOffsetAndPositiveScaleDoNotChangeDecisions) {
  Rng rng(5);
  SoftmaxModel m;
  m.class_ids = {0, 1, 2, 3};
  m.weights = random_matrix(4, 4, rng);
  const Matrix x = random_matrix(50, 3, rng);
  const std::vector<int> base = classify(m, x);
  SoftmaxModel shifted = m;
  const Matrix offset = random_matrix(1, 4, rng);
  for (std::size_t k = 0; k < 4; ++k)
    for (std::size_t j = 0; j < 4; ++j) shifted.weights(k, j) += offset(0, j);
  EXPECT_EQ(classify(shifted, x), base);
  EXPECT_EQ(classify(SoftmaxModel{scale(m.weights, 3.5), m.class_ids}, x), base);
}

TEST(Classify, MatchesBruteForceArgmax) {
  Rng rng(6);
  SoftmaxModel m;
  m.class_ids = {10, 20, 30, 40, 50};
  m.weights = random_matrix(5, 4, rng);
  const Matrix x = random_matrix(40, 3, rng);
  const std::vector<int> got = classify(m, x);
  for (std::size_t i = 0; i < 40; ++i) {
    double best = -1e300;
    int arg = -1;
    for (std::size_t k = 0; k < 5; ++k) {
      double s = m.weights(k, 3);
      for (std::size_t j = 0; j < 3; ++j) s += x(i, j) * m.weights(k, j);
      if (s > best) best = s, arg = m.class_ids[k];
    }
    EXPECT_EQ(got[i], arg);
  }
}

TEST(Classify, CandidatesRestrictTheArgmax) {
  SoftmaxModel m;
  m.class_ids = {0, 1, 2};
  m.weights = {{0, 10.0}, {0, 5.0}, {0, 1.0}};  // constant scores 10 > 5 > 1
  const Matrix x = {{0.3}};
  const std::vector<int> unseen = {2, 1};
  EXPECT_EQ(classify(m, x)[0], 0);
  EXPECT_EQ(classify(m, x, unseen)[0], 1);
  const std::vector<int> unknown = {8};
  EXPECT_THROW(classify(m, x, unknown), DataError);
  EXPECT_THROW(classify(m, Matrix(1, 2)), DimensionError);
}

// --- nn1 -------------------------------------------------------------------

TEST(Nn1Classify, ExactPrototypeAndTies) {
  const PrototypeTable t = table({5, 2}, Matrix{{1.0, 0.0}, {-1.0, 0.0}});
  EXPECT_EQ(nn1_classify(t, Matrix{{1.0, 0.0}})[0], 5);
  EXPECT_EQ(nn1_classify(t, Matrix{{0.0, 3.0}})[0], 2);  // equidistant
  EXPECT_THROW(nn1_classify(t, Matrix(1, 3)), DimensionError);
  EXPECT_THROW(nn1_classify(PrototypeTable{}, Matrix(1, 2)), DataError);
}

TEST(Nn1Classify, MatchesBruteForceNearest) {
  Rng rng(7);
  const PrototypeTable t = table({0, 1, 2, 3, 4, 5}, random_matrix(6, 4, rng));
  const Matrix x = random_matrix(60, 4, rng);
  const std::vector<int> got = nn1_classify(t, x);
  for (std::size_t i = 0; i < 60; ++i) {
    double best = 1e300;
    int arg = -1;
    for (std::size_t k = 0; k < 6; ++k) {
      double d = 0.0;
      for (std::size_t j = 0; j < 4; ++j) d += std::pow(x(i, j) - t.prototypes(k, j), 2);
      if (d < best) best = d, arg = static_cast<int>(k);
    }
    EXPECT_EQ(got[i], arg);
  }
}

TEST(Nn1Classify, UsesCompactViewWhenSelectionIsAttached) {
  PrototypeTable t = table({0, 1}, Matrix{{0.0, 100.0}, {1.0, -100.0}});
  t.selection = std::vector<std::size_t>{0};
  EXPECT_EQ(nn1_classify(t, Matrix{{0.9}})[0], 1);
}

TEST(Nn1Classify, AgreesWithSoftmaxBuiltFromPrototypes) {
  // Scores w.x - |w|^2 / 2 rank classes exactly as distance does.
  Rng rng(8);
  const Matrix p = scale(random_matrix(4, 3, rng), 5.0);
  const PrototypeTable t = table({0, 1, 2, 3}, p);
  SoftmaxModel m;
  m.class_ids = t.class_ids;
  m.weights = Matrix(4, 4);
  for (std::size_t k = 0; k < 4; ++k) {
    double n2 = 0.0;
    for (std::size_t j = 0; j < 3; ++j) m.weights(k, j) = p(k, j), n2 += p(k, j) * p(k, j);
    m.weights(k, 3) = -0.5 * n2;
  }
  Matrix x(40, 3);
  std::normal_distribution<double> jitter(0.0, 0.01);
  for (std::size_t i = 0; i < 40; ++i)
    for (std::size_t j = 0; j < 3; ++j) x(i, j) = p(i % 4, j) + jitter(rng);
  EXPECT_EQ(classify(m, x), nn1_classify(t, x));
}

// --- metrics ---------------------------------------------------------------

TEST(PerClassTop1, AllCorrectAndClassBalanced) {
  const std::vector<int> classes = {0, 1};
  std::vector<int> labels(10, 0);
  labels.insert(labels.end(), 90, 1);
  EXPECT_DOUBLE_EQ(per_class_top1(labels, labels, classes), 100.0);
  const std::vector<int> pred(100, 0);
  EXPECT_DOUBLE_EQ(per_class_top1(pred, labels, classes), 50.0);
}

TEST(PerClassTop1, MatchesBruteForceTally) {
  Rng rng(9);
  std::uniform_int_distribution<int> cls(0, 4);
  std::vector<int> labels, pred;
  for (int i = 0; i < 200; ++i) labels.push_back(cls(rng)), pred.push_back(cls(rng));
  for (int c = 0; c < 5; ++c) labels.push_back(c), pred.push_back(c);
  const std::vector<int> classes = {0, 1, 2, 3, 4};
  std::map<int, double> per;
  const double got = per_class_top1(pred, labels, classes, &per);
  double oracle = 0.0;
  for (int c = 0; c < 5; ++c) {
    int hit = 0, n = 0;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == c) ++n, hit += pred[i] == c;
    EXPECT_DOUBLE_EQ(per.at(c), 100.0 * hit / n);
    oracle += 100.0 * hit / n;
  }
  EXPECT_NEAR(got, oracle / 5.0, 1e-12);
}

TEST(PerClassTop1, Errors) {
  const std::vector<int> labels = {0, 0};
  const std::vector<int> missing = {0, 1};
  EXPECT_THROW(per_class_top1(labels, labels, missing), DataError);
  const std::vector<int> narrow = {1};
  EXPECT_THROW(per_class_top1(labels, labels, narrow), DataError);
}

TEST(HarmonicMean, ReportedValueAndIdentities) {
  EXPECT_NEAR(harmonic_mean(48.4, 75.1), 58.9, 0.05);
  EXPECT_DOUBLE_EQ(harmonic_mean(37.5, 37.5), 37.5);
  EXPECT_EQ(harmonic_mean(0.0, 80.0), 0.0);
  EXPECT_EQ(harmonic_mean(0.0, 0.0), 0.0);
  EXPECT_THROW(harmonic_mean(-1.0, 5.0), ContractError);
}

TEST(HarmonicMean, BoundedByArithmeticMeanAndTwiceMinimum) {
  Rng rng(10);
  std::uniform_real_distribution<double> acc(0.0, 100.0);
  for (int i = 0; i < 1000; ++i) {
    const double u = acc(rng), s = acc(rng), h = harmonic_mean(u, s);
    EXPECT_LE(h, 0.5 * (u + s) + 1e-12);
    EXPECT_LE(h, 2.0 * std::min(u, s) + 1e-12);
  }
}

TEST(ResidualRatio, ClosedForms) {
  const Matrix p = {{0.0, 0.0}, {3.0, 4.0}};  // one pair at distance 5
  EXPECT_EQ(residual_ratio(Matrix(3, 2), p).ratio, 0.0);
  const ResidualStats r = residual_ratio(Matrix{{5.0, 0.0}, {0.0, -5.0}}, p);
  EXPECT_DOUBLE_EQ(r.ratio, 1.0);
  EXPECT_DOUBLE_EQ(r.median_prototype_distance, 5.0);
  EXPECT_THROW(residual_ratio(Matrix(1, 2), Matrix(1, 2)), ContractError);
}

TEST(ResidualRatio, MatchesBruteForceMedians) {
  Rng rng(11);
  const Matrix res = random_matrix(9, 3, rng, 0.1);
  const Matrix p = random_matrix(5, 3, rng);
  std::vector<double> norms, dist;
  for (std::size_t i = 0; i < 9; ++i)
    norms.push_back(std::hypot(res(i, 0), res(i, 1), res(i, 2)));
  for (std::size_t a = 0; a < 5; ++a)
    for (std::size_t b = a + 1; b < 5; ++b)
      dist.push_back(std::hypot(p(a, 0) - p(b, 0), p(a, 1) - p(b, 1), p(a, 2) - p(b, 2)));
  std::sort(norms.begin(), norms.end());
  std::sort(dist.begin(), dist.end());
  const double mn = norms[4], md = 0.5 * (dist[4] + dist[5]);  // 9 odd, 10 even
  const ResidualStats r = residual_ratio(res, p);
  EXPECT_NEAR(r.median_residual_norm, mn, 1e-12);
  EXPECT_NEAR(r.median_prototype_distance, md, 1e-12);
  EXPECT_NEAR(r.ratio, mn / md, 1e-12);
}

TEST(PrototypePurity, OwnAndForeignPrototypes) {
  const Matrix p = {{0.0, 0.0}, {1.0, 1.0}, {4.0, 0.0}};
  const PrototypeTable t = table({0, 1, 2}, p);
  const std::vector<int> own = {0, 1, 2};
  EXPECT_DOUBLE_EQ(prototype_purity(p, own, t), 1.0);
  const std::vector<int> foreign = {1, 2, 0};
  EXPECT_DOUBLE_EQ(prototype_purity(p, foreign, t), 0.0);
}

TEST(PrototypePurity, MatchesBruteForceTally) {
  Rng rng(12);
  const PrototypeTable t = table({0, 1, 2}, random_matrix(3, 2, rng));
  const Matrix x = random_matrix(100, 2, rng);
  std::vector<int> labels;
  std::uniform_int_distribution<int> cls(0, 2);
  for (int i = 0; i < 100; ++i) labels.push_back(cls(rng));
  int own = 0;
  for (std::size_t i = 0; i < 100; ++i) {
    int arg = 0;
    double best = 1e300;
    for (int k = 0; k < 3; ++k) {
      const double d = std::hypot(x(i, 0) - t.prototypes(k, 0), x(i, 1) - t.prototypes(k, 1));
      if (d < best) best = d, arg = k;
    }
    own += arg == labels[i];
  }
  EXPECT_DOUBLE_EQ(prototype_purity(x, labels, t), own / 100.0);
}

// --- evaluation ------------------------------------------------------------

TEST(Evaluate, PerfectPrototypeClassifierScoresHundred) {
  const PrototypeTable t = table({0, 1, 2, 3}, Matrix{{0, 0}, {5, 0}, {0, 5}, {5, 5}});
  const TestSplit seen{Matrix{{0.1, 0}, {5, 0.2}}, {0, 1}};
  const TestSplit unseen{Matrix{{0, 4.9}, {5.1, 5}}, {2, 3}};
  const std::vector<int> s = {0, 1}, u = {2, 3};
  const EvaluationReport r = evaluate_gzsl(t, seen, unseen, s, u);
  EXPECT_EQ(*r.u_acc, 100.0);
  EXPECT_EQ(*r.s_acc, 100.0);
  EXPECT_EQ(*r.h_mean, 100.0);
  EXPECT_EQ(r.per_class.size(), 4u);
}

TEST(Evaluate, ZslRestrictsCandidatesGzslDoesNot) {
  // Every score prefers seen class 0; the unseen rows separate only among {1, 2}.
  SoftmaxModel m;
  m.class_ids = {0, 1, 2};
  m.weights = {{0.0, 100.0}, {1.0, 0.0}, {-1.0, 0.0}};
  const TestSplit seen{Matrix{{0.0}}, {0}};
  const TestSplit unseen{Matrix{{2.0}, {-2.0}}, {1, 2}};
  const std::vector<int> s = {0}, u = {1, 2};
  const EvaluationReport g = evaluate_gzsl(m, seen, unseen, s, u);
  EXPECT_EQ(*g.u_acc, 0.0);
  EXPECT_EQ(*g.s_acc, 100.0);
  EXPECT_EQ(*g.h_mean, 0.0);
  const EvaluationReport z = evaluate_zsl(m, unseen, u);
  EXPECT_EQ(*z.u_acc, 100.0);
  EXPECT_FALSE(z.s_acc.has_value());
  EXPECT_THROW(evaluate_zsl(m, TestSplit{}, u), DataError);
}

TEST(Evaluate, ReportJsonHasFixedKeysAndConsistentH) {
  EvaluationReport r;
  r.u_acc = 40.0;
  r.s_acc = 60.0;
  r.h_mean = harmonic_mean(40.0, 60.0);
  r.per_class = {{3, 40.0}};
  r.seed = 5;
  const nlohmann::json j = r;
  for (const char* key : {"u_acc", "s_acc", "h_mean", "per_class", "purity", "residual_ratio",
                          "seed", "config"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["h_mean"].get<double>(),
            harmonic_mean(j["u_acc"].get<double>(), j["s_acc"].get<double>()));
  EXPECT_EQ(j["per_class"]["3"].get<double>(), 40.0);
}

}  // namespace
}  // namespace afr
