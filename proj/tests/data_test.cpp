// Copyright 2026 The AFR Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>

#include "afr/classifier.hpp"
#include "afr/data.hpp"
#include "afr/errors.hpp"
#include "test_util.hpp"

namespace afr {
namespace {

namespace fs = std::filesystem;
using testing::random_matrix;

class TempDir {
 public:
  explicit TempDir(const std::string& name)
      : path_(fs::temp_directory_path() / ("afr_data_test_" + name)) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

// Writes the binary matrix layout byte by byte, independent of save_matrix.
void write_raw_matrix(const fs::path& path, std::uint64_t rows, std::uint64_t cols,
                      const std::vector<double>& values) {
  std::string bytes = "AFRM";
  auto append = [&](const void* p, std::size_t n) {
    bytes.append(static_cast<const char*>(p), n);
  };
  const std::uint32_t version = 1;
  append(&version, 4);
  append(&rows, 8);
  append(&cols, 8);
  for (double v : values) append(&v, 8);
  std::ofstream(path, std::ios::binary) << bytes;
}

// Three classes in 2-D features with 2-D semantics; class 2 is unseen.
void write_fixture(const fs::path& dir, bool drop_last_semantic_row = false) {
  write_raw_matrix(dir / "features.afrm", 6, 2, {0, 0, 0.1, 0, 1, 1, 1.1, 1, 5, 5, 5.1, 5});
  std::ofstream(dir / "labels.csv") << "0\n0\n1\n1\n2\n2\n";
  if (drop_last_semantic_row) {
    write_raw_matrix(dir / "semantics.afrm", 2, 2, {1, 0, 0, 1});
  } else {
    write_raw_matrix(dir / "semantics.afrm", 3, 2, {1, 0, 0, 1, 1, 1});
  }
  std::ofstream(dir / "split.json")
      << R"({"seen": [0, 1], "unseen": [2], "test_seen": [1], "test_unseen": [4, 5]})";
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

// --- matrix I/O ------------------------------------------------------------

TEST(MatrixIo, RandomMatrixRoundTripsBitExact) {
  TempDir dir("matrix");
  Rng rng(1);
  const Matrix m = random_matrix(7, 13, rng);
  save_matrix(dir.path() / "m.afrm", m);
  const Matrix back = load_matrix(dir.path() / "m.afrm");
  ASSERT_EQ(back.rows(), 7u);
  ASSERT_EQ(back.cols(), 13u);
  EXPECT_EQ(std::memcmp(back.data().data(), m.data().data(), m.size() * sizeof(double)), 0);
}

TEST(MatrixIo, FileLayoutMatchesHandWrittenBytes) {
  TempDir dir("layout");
  write_raw_matrix(dir.path() / "a.afrm", 2, 3, {1, 2, 3, 4, 5, 6});
  save_matrix(dir.path() / "b.afrm", Matrix{{1, 2, 3}, {4, 5, 6}});
  std::ifstream a(dir.path() / "a.afrm", std::ios::binary), b(dir.path() / "b.afrm", std::ios::binary);
  const std::string sa((std::istreambuf_iterator<char>(a)), {});
  const std::string sb((std::istreambuf_iterator<char>(b)), {});
  EXPECT_EQ(sa, sb);
  EXPECT_EQ(sa.size(), 4u + 4u + 16u + 48u);
}

TEST(MatrixIo, EmptyMatricesAreRejected) {
  TempDir dir("empty");
  EXPECT_THROW(save_matrix(dir.path() / "e.afrm", Matrix(0, 4)), DataError);
  write_raw_matrix(dir.path() / "e.afrm", 0, 4, {});
  EXPECT_THROW(load_matrix(dir.path() / "e.afrm"), DataError);
}

TEST(MatrixIo, BadMagicVersionAndTruncationHaveDistinctMessages) {
  std::stringstream magic("AFRX" + std::string(20, '\0'));
  const std::string m = error_of([&] { read_matrix(magic, "x"); });
  EXPECT_NE(m.find("magic"), std::string::npos) << m;

  std::string bytes = "AFRM";
  const std::uint32_t v2 = 2;
  bytes.append(reinterpret_cast<const char*>(&v2), 4);
  std::stringstream version(bytes + std::string(16, '\0'));
  const std::string v = error_of([&] { read_matrix(version, "x"); });
  EXPECT_NE(v.find("version"), std::string::npos) << v;

  TempDir dir("trunc");
  save_matrix(dir.path() / "t.afrm", Matrix(3, 3, 1.0));
  fs::resize_file(dir.path() / "t.afrm", fs::file_size(dir.path() / "t.afrm") - 1);
  const std::string t = error_of([&] { load_matrix(dir.path() / "t.afrm"); });
  EXPECT_NE(t.find("truncated"), std::string::npos) << t;
  EXPECT_NE(t.find("t.afrm"), std::string::npos) << t;
}

// --- datasets --------------------------------------------------------------

TEST(LoadDataset, HandWrittenFixture) {
  TempDir dir("fixture");
  write_fixture(dir.path());
  const Dataset d = load_dataset(dir.path());
  EXPECT_EQ(d.features.shape(), "6x2");
  EXPECT_EQ(d.semantics.shape(), "3x2");
  EXPECT_EQ(d.labels, (std::vector<int>{0, 0, 1, 1, 2, 2}));
  EXPECT_EQ(d.split.unseen, std::vector<int>{2});
  EXPECT_EQ(d.train_indices(), (std::vector<std::size_t>{0, 2, 3}));
  EXPECT_EQ(d.features(5, 0), 5.1);
  EXPECT_EQ(d.all_classes(), (std::vector<int>{0, 1, 2}));
}

TEST(LoadDataset, MissingSemanticRowIsNamed) {
  TempDir dir("nosem");
  write_fixture(dir.path(), true);
  const std::string msg = error_of([&] { load_dataset(dir.path()); });
  EXPECT_NE(msg.find("class 2 has no semantic row"), std::string::npos) << msg;
}

TEST(LoadDataset, OverlapNamesBothIds) {
  TempDir dir("overlap");
  write_fixture(dir.path());
  std::ofstream(dir.path() / "split.json")
      << R"({"seen": [0, 1, 2], "unseen": [1, 2], "test_seen": [], "test_unseen": []})";
  const std::string msg = error_of([&] { load_dataset(dir.path()); });
  EXPECT_NE(msg.find("1"), std::string::npos);
  EXPECT_NE(msg.find("2"), std::string::npos);
  EXPECT_NE(msg.find("both seen and unseen"), std::string::npos) << msg;
}

TEST(LoadDataset, EachFailureHasItsOwnDiagnostic) {
  TempDir dir("diag");
  EXPECT_NE(error_of([&] { load_dataset(dir.path() / "nope"); }).find("not found"),
            std::string::npos);
  write_fixture(dir.path());
  fs::remove(dir.path() / "labels.csv");
  EXPECT_NE(error_of([&] { load_dataset(dir.path()); }).find("labels.csv"), std::string::npos);
  write_fixture(dir.path());
  std::ofstream(dir.path() / "labels.csv") << "0\n1\n";
  EXPECT_NE(error_of([&] { load_dataset(dir.path()); }).find("shape mismatch"),
            std::string::npos);
  write_fixture(dir.path());
  std::ofstream(dir.path() / "split.json") << "{";
  EXPECT_NE(error_of([&] { load_dataset(dir.path()); }).find("split.json"), std::string::npos);
}

TEST(LoadDataset, SaveLoadRoundTripIsIdentity) {
  TempDir dir("roundtrip");
  SyntheticBenchmarkConfig c;
  c.seen_classes = 4;
  c.unseen_classes = 2;
  c.samples_per_class = 5;
  const Dataset d = generate_synthetic_benchmark(c).dataset;
  save_dataset(dir.path(), d);
  EXPECT_EQ(load_dataset(dir.path()), d);
}

TEST(ValidateSplit, ValidAndSharedClass) {
  SyntheticBenchmarkConfig c;
  c.seen_classes = 3;
  c.unseen_classes = 2;
  c.samples_per_class = 4;
  Dataset d = generate_synthetic_benchmark(c).dataset;
  EXPECT_TRUE(validate_split(d).ok);
  d.split.unseen.push_back(d.split.seen.front());
  const SplitReport r = validate_split(d);
  EXPECT_FALSE(r.ok);
  ASSERT_FALSE(r.violations.empty());
  EXPECT_NE(r.violations.front().find(std::to_string(d.split.seen.front())), std::string::npos);
}

// --- synthetic benchmark ---------------------------------------------------

TEST(SyntheticBenchmark, DeterministicInConfig) {
  SyntheticBenchmarkConfig c;
  const SyntheticBenchmark a = generate_synthetic_benchmark(c);
  const SyntheticBenchmark b = generate_synthetic_benchmark(c);
  EXPECT_EQ(a.dataset, b.dataset);
  EXPECT_EQ(a.prototypes, b.prototypes);
  c.seed += 1;
  EXPECT_NE(generate_synthetic_benchmark(c).dataset.features, a.dataset.features);
}

TEST(SyntheticBenchmark, ShapesSplitAndNoiseDims) {
  SyntheticBenchmarkConfig c;
  const SyntheticBenchmark b = generate_synthetic_benchmark(c);
  EXPECT_EQ(b.dataset.features.shape(), "1500x32");
  EXPECT_EQ(b.dataset.semantics.shape(), "25x16");
  EXPECT_EQ(b.dataset.split.seen.size(), 20u);
  EXPECT_EQ(b.dataset.split.unseen.size(), 5u);
  EXPECT_EQ(b.dataset.split.test_unseen.size(), 300u);
  EXPECT_EQ(b.dataset.split.test_seen.size(), 20u * 12u);
  EXPECT_EQ(b.noise_dims.size(), 16u);
  EXPECT_TRUE(validate_split(b.dataset).ok);
}

TEST(SyntheticBenchmark, ZeroSpreadSamplesEqualPrototypes) {
  SyntheticBenchmarkConfig c;
  c.sigma_intra = 0.0;
  const SyntheticBenchmark b = generate_synthetic_benchmark(c);
  for (std::size_t i = 0; i < b.dataset.features.rows(); ++i) {
    const auto label = static_cast<std::size_t>(b.dataset.labels[i]);
    for (std::size_t j = 0; j < c.visual_dim; ++j)
      ASSERT_EQ(b.dataset.features(i, j), b.prototypes(label, j));
  }
}

TEST(SyntheticBenchmark, CleanDimensionsGivePurityNearOne) {
  SyntheticBenchmarkConfig c;
  c.noise_fraction = 0.0;
  c.sigma_intra = 0.01;
  const SyntheticBenchmark b = generate_synthetic_benchmark(c);
  PrototypeTable t;
  t.class_ids.resize(b.prototypes.rows());
  std::iota(t.class_ids.begin(), t.class_ids.end(), 0);
  t.prototypes = b.prototypes;
  EXPECT_GE(prototype_purity(b.dataset.features, b.dataset.labels, t), 0.99);
}

TEST(SyntheticBenchmark, ClassMeansWithinThreeStandardErrors) {
  SyntheticBenchmarkConfig c;
  c.samples_per_class = 200;
  const SyntheticBenchmark b = generate_synthetic_benchmark(c);
  const double bound = 3.0 * c.sigma_intra / std::sqrt(200.0);
  std::size_t outside = 0, total = 0;
  for (std::size_t k = 0; k < b.prototypes.rows(); ++k) {
    for (std::size_t j = 0; j < c.visual_dim; ++j) {
      double mean = 0.0;
      for (std::size_t i = 0; i < 200; ++i) mean += b.dataset.features(k * 200 + i, j);
      mean /= 200.0;
      outside += std::abs(mean - b.prototypes(k, j)) > bound;
      ++total;
    }
  }
  // A 3-sigma band misses about 0.27% of Gaussian means.
  EXPECT_LE(static_cast<double>(outside) / static_cast<double>(total), 0.01);
}

TEST(SyntheticBenchmark, ConfigValidation) {
  SyntheticBenchmarkConfig c;
  c.sigma_inter = 0.0;
  EXPECT_THROW(generate_synthetic_benchmark(c), ContractError);
  c = {};
  c.noise_fraction = 1.5;
  EXPECT_THROW(generate_synthetic_benchmark(c), ContractError);
  c = {};
  c.unseen_classes = 0;
  EXPECT_THROW(generate_synthetic_benchmark(c), ContractError);
}

}  // namespace
}  // namespace afr
