// Copyright 2026 The AFR Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "afr/data.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "afr/errors.hpp"
#include "afr/random.hpp"

namespace afr {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr char kMatrixMagic[4] = {'A', 'F', 'R', 'M'};

template <typename T>
void write_le(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T read_le(std::istream& in, const std::string& source) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw DataError(source + ": truncated matrix file");
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

std::string join_ids(const std::vector<int>& ids) {
  std::string s;
  for (int id : ids) s += (s.empty() ? "" : ", ") + std::to_string(id);
  return s;
}

void require_file(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw DataError("missing file " + path.string());
}

}  // namespace

std::vector<std::size_t> Dataset::train_indices() const {
  const std::set<int> seen(split.seen.begin(), split.seen.end());
  const std::set<std::size_t> held(split.test_seen.begin(), split.test_seen.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (seen.contains(labels[i]) && !held.contains(i)) out.push_back(i);
  return out;
}

Matrix Dataset::semantics_for(std::span<const int> classes) const {
  std::vector<std::size_t> rows;
  for (int c : classes) {
    if (c < 0 || static_cast<std::size_t>(c) >= semantics.rows()) {
      throw DataError("class " + std::to_string(c) + " has no semantic row");
    }
    rows.push_back(static_cast<std::size_t>(c));
  }
  return gather_rows(semantics, rows);
}

std::vector<int> Dataset::all_classes() const {
  std::vector<int> all = split.seen;
  all.insert(all.end(), split.unseen.begin(), split.unseen.end());
  std::sort(all.begin(), all.end());
  return all;
}

SplitReport validate_split(const Dataset& d) {
  SplitReport r;
  auto fail = [&](std::string msg) {
    r.ok = false;
    r.violations.push_back(std::move(msg));
  };
  const std::set<int> seen(d.split.seen.begin(), d.split.seen.end());
  const std::set<int> unseen(d.split.unseen.begin(), d.split.unseen.end());
  std::vector<int> shared;
  std::set_intersection(seen.begin(), seen.end(), unseen.begin(), unseen.end(),
                        std::back_inserter(shared));
  if (!shared.empty()) fail("classes in both seen and unseen: " + join_ids(shared));
  if (seen.empty()) fail("no seen classes");
  if (unseen.empty()) fail("no unseen classes");
  if (d.labels.size() != d.features.rows()) {
    fail("features have " + std::to_string(d.features.rows()) + " rows but there are " +
         std::to_string(d.labels.size()) + " labels");
  }
  for (int c : d.all_classes()) {
    if (c < 0 || static_cast<std::size_t>(c) >= d.semantics.rows()) {
      fail("class " + std::to_string(c) + " has no semantic row");
    }
  }
  std::set<int> unknown;
  for (int y : d.labels)
    if (!seen.contains(y) && !unseen.contains(y)) unknown.insert(y);
  if (!unknown.empty()) fail("labels outside the split: " + join_ids({unknown.begin(), unknown.end()}));

  auto check_tests = [&](const std::vector<std::size_t>& idx, const std::set<int>& group,
                         const char* name) {
    for (std::size_t i : idx) {
      if (i >= d.labels.size()) {
        fail(std::string(name) + " index " + std::to_string(i) + " out of range");
      } else if (!group.contains(d.labels[i])) {
        fail(std::string(name) + " index " + std::to_string(i) + " has label " +
             std::to_string(d.labels[i]) + " outside its class group");
      }
    }
  };
  check_tests(d.split.test_seen, seen, "test_seen");
  check_tests(d.split.test_unseen, unseen, "test_unseen");

  if (r.ok) {
    std::set<int> trained;
    for (std::size_t i : d.train_indices()) trained.insert(d.labels[i]);
    for (int c : seen)
      if (!trained.contains(c)) fail("seen class " + std::to_string(c) + " has no training samples");
  }
  return r;
}

void write_matrix(std::ostream& out, const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) throw DataError("refusing to write empty matrix " + m.shape());
  out.write(kMatrixMagic, 4);
  write_le<std::uint32_t>(out, kMatrixFormatVersion);
  write_le<std::uint64_t>(out, m.rows());
  write_le<std::uint64_t>(out, m.cols());
  for (double v : m.data()) write_le<double>(out, v);
}

Matrix read_matrix(std::istream& in, const std::string& source) {
  char magic[4];
  if (!in.read(magic, 4)) throw DataError(source + ": truncated matrix file");
  if (std::memcmp(magic, kMatrixMagic, 4) != 0) throw DataError(source + ": bad matrix magic");
  const auto version = read_le<std::uint32_t>(in, source);
  if (version != kMatrixFormatVersion) {
    throw DataError(source + ": unsupported matrix version " + std::to_string(version));
  }
  const auto rows = read_le<std::uint64_t>(in, source);
  const auto cols = read_le<std::uint64_t>(in, source);
  if (rows == 0 || cols == 0) {
    throw DataError(source + ": empty matrix " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  if (cols > (std::uint64_t{1} << 40) / rows) throw DataError(source + ": implausible matrix shape");
  Matrix m(rows, cols);
  for (double& v : m.data()) v = read_le<double>(in, source);
  return m;
}

void save_matrix(const fs::path& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_matrix(out, m);
}

Matrix load_matrix(const fs::path& path) {
  require_file(path);
  std::ifstream in(path, std::ios::binary);
  return read_matrix(in, path.string());
}

void save_labels(const fs::path& path, std::span<const int> labels) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (int y : labels) out << y << '\n';
}

std::vector<int> load_labels(const fs::path& path) {
  require_file(path);
  std::ifstream in(path);
  std::vector<int> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::istringstream ss(line);
    int y;
    std::string rest;
    if (!(ss >> y) || (ss >> rest)) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": not an integer label");
    }
    labels.push_back(y);
  }
  return labels;
}

void save_dataset(const fs::path& dir, const Dataset& d) {
  fs::create_directories(dir);
  save_matrix(dir / "features.afrm", d.features);
  save_labels(dir / "labels.csv", d.labels);
  save_matrix(dir / "semantics.afrm", d.semantics);
  json split = {{"seen", d.split.seen},
                {"unseen", d.split.unseen},
                {"test_seen", d.split.test_seen},
                {"test_unseen", d.split.test_unseen}};
  std::ofstream(dir / "split.json") << split.dump(2) << '\n';
}

Dataset load_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("dataset directory not found: " + dir.string());
  Dataset d;
  d.features = load_matrix(dir / "features.afrm");
  d.labels = load_labels(dir / "labels.csv");
  d.semantics = load_matrix(dir / "semantics.afrm");
  const fs::path split_path = dir / "split.json";
  require_file(split_path);
  try {
    json split = json::parse(std::ifstream(split_path));
    d.split.seen = split.at("seen").get<std::vector<int>>();
    d.split.unseen = split.at("unseen").get<std::vector<int>>();
    d.split.test_seen = split.at("test_seen").get<std::vector<std::size_t>>();
    d.split.test_unseen = split.at("test_unseen").get<std::vector<std::size_t>>();
  } catch (const json::exception& e) {
    throw DataError(split_path.string() + ": " + e.what());
  }
  if (d.labels.size() != d.features.rows()) {
    throw DataError("shape mismatch: " + std::to_string(d.labels.size()) + " labels for " +
                    std::to_string(d.features.rows()) + " feature rows");
  }
  SplitReport report = validate_split(d);
  if (!report.ok) {
    std::string msg = "invalid split in " + dir.string() + ":";
    for (const auto& v : report.violations) msg += " " + v + ";";
    throw DataError(msg);
  }
  return d;
}

void SyntheticBenchmarkConfig::validate() const {
  if (!(sigma_intra >= 0.0) || !(sigma_inter > 0.0)) {
    throw ContractError("benchmark spreads must satisfy sigma_intra >= 0, sigma_inter > 0");
  }
  if (!(curvature > 0.0)) throw ContractError("benchmark curvature must be > 0");
  if (!(noise_fraction >= 0.0 && noise_fraction <= 1.0)) {
    throw ContractError("noise fraction must lie in [0, 1]");
  }
  if (seen_classes < 2 || unseen_classes < 1 || samples_per_class < 2) {
    throw ContractError("benchmark needs >= 2 seen classes, >= 1 unseen class, >= 2 samples each");
  }
  if (visual_dim == 0 || semantic_dim == 0 || latent_dim == 0) {
    throw ContractError("benchmark dimensions must be positive");
  }
  if (!(test_seen_fraction >= 0.0 && test_seen_fraction < 1.0)) {
    throw ContractError("test_seen_fraction must lie in [0, 1)");
  }
}

SyntheticBenchmark generate_synthetic_benchmark(const SyntheticBenchmarkConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  const std::size_t classes = cfg.seen_classes + cfg.unseen_classes;
  const std::size_t v = cfg.visual_dim, s = cfg.semantic_dim, q = cfg.latent_dim;

  Matrix latent(classes, q);
  for (double& x : latent.data()) x = n01(rng);
  Matrix mixing(q, s);
  for (double& x : mixing.data()) x = n01(rng) / std::sqrt(static_cast<double>(q));
  Matrix semantics = matmul(latent, mixing);
  for (double& x : semantics.data()) x += cfg.semantic_noise * n01(rng);

  std::vector<std::size_t> dims(v);
  std::iota(dims.begin(), dims.end(), 0);
  std::shuffle(dims.begin(), dims.end(), rng);
  const auto noise_count = static_cast<std::size_t>(std::lround(cfg.noise_fraction * static_cast<double>(v)));
  std::vector<std::size_t> noise_dims(dims.begin(), dims.begin() + noise_count);
  std::sort(noise_dims.begin(), noise_dims.end());
  const std::set<std::size_t> noisy(noise_dims.begin(), noise_dims.end());

  Matrix prototypes(classes, v);
  for (std::size_t j = 0; j < v; ++j) {
    if (noisy.contains(j)) {
      for (std::size_t c = 0; c < classes; ++c) prototypes(c, j) = cfg.sigma_inter * std::tanh(n01(rng));
    } else {
      std::vector<double> w(q);
      for (double& x : w) x = n01(rng) / std::sqrt(static_cast<double>(q));
      const double offset = 0.3 * n01(rng);
      for (std::size_t c = 0; c < classes; ++c) {
        double z = 0.0;
        for (std::size_t k = 0; k < q; ++k) z += w[k] * latent(c, k);
        prototypes(c, j) = cfg.sigma_inter * std::tanh(cfg.curvature * z + offset);
      }
    }
  }

  std::vector<int> ids(classes);
  std::iota(ids.begin(), ids.end(), 0);
  std::shuffle(ids.begin(), ids.end(), rng);
  SyntheticBenchmark out;
  out.dataset.split.unseen.assign(ids.begin(), ids.begin() + cfg.unseen_classes);
  out.dataset.split.seen.assign(ids.begin() + cfg.unseen_classes, ids.end());
  std::sort(out.dataset.split.seen.begin(), out.dataset.split.seen.end());
  std::sort(out.dataset.split.unseen.begin(), out.dataset.split.unseen.end());
  const std::set<int> unseen(out.dataset.split.unseen.begin(), out.dataset.split.unseen.end());

  const std::size_t n = cfg.samples_per_class;
  const auto held = static_cast<std::size_t>(std::lround(cfg.test_seen_fraction * static_cast<double>(n)));
  out.dataset.features = Matrix(classes * n, v);
  out.dataset.labels.resize(classes * n);
  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t row = c * n + i;
      out.dataset.labels[row] = static_cast<int>(c);
      for (std::size_t j = 0; j < v; ++j)
        out.dataset.features(row, j) = prototypes(c, j) + cfg.sigma_intra * n01(rng);
      if (unseen.contains(static_cast<int>(c))) {
        out.dataset.split.test_unseen.push_back(row);
      } else if (i < held) {
        out.dataset.split.test_seen.push_back(row);
      }
    }
  }
  out.dataset.semantics = std::move(semantics);
  out.prototypes = std::move(prototypes);
  out.noise_dims = std::move(noise_dims);
  return out;
}

}  // namespace afr
