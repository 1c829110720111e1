// Copyright 2026 The AFR Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Outcome {
  int code = -1;
  std::string output;  // stdout and stderr interleaved
};

Outcome run(const std::string& args) {
  const std::string cmd = std::string(AFRNET_PATH) + " " + args + " 2>&1";
  Outcome o;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return o;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) o.output.append(buf, n);
  const int status = pclose(pipe);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("afr_cli_" + name);
  fs::remove_all(p);
  return p;
}

const char* kSmall = R"({
  "benchmark": {"seen_classes": 6, "unseen_classes": 3, "samples_per_class": 20,
                "visual_dim": 8, "semantic_dim": 6, "latent_dim": 3},
  "svr": {"alpha": 10},
  "gan": {"hidden_units": 16, "iterations": 30, "batch_size": 32},
  "classifier": {"max_iterations": 200},
  "per_class": 20
})";

fs::path write_small_config(const fs::path& dir) {
  fs::create_directories(dir);
  const fs::path p = dir / "small.json";
  std::ofstream(p) << kSmall;
  return p;
}

constexpr const char* kStages[] = {"gen-data", "prototypes", "select-features",
                                   "train", "synthesize", "evaluate"};

// Runs every stage in order with the same arguments; returns the first failure.
Outcome run_stages(const std::string& args) {
  Outcome o;
  for (const char* stage : kStages) {
    o = run(std::string(stage) + " " + args);
    if (o.code != 0) {
      o.output = std::string(stage) + ": " + o.output;
      return o;
    }
  }
  return o;
}

TEST(Cli, UnknownSubcommandExitsTwoWithUsage) {
  const Outcome o = run("frobnicate");
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.output.find("frobnicate"), std::string::npos);
  EXPECT_NE(o.output.find("gen-data"), std::string::npos);
}

TEST(Cli, UnknownFlagExitsTwo) {
  EXPECT_EQ(run("evaluate --bogus").code, 2);
  EXPECT_EQ(run("train --mode hybrid").code, 2);
}

TEST(Cli, MissingDatasetExitsOneNamingPath) {
  const Outcome o = run("evaluate --out /nonexistent/afr_run");
  EXPECT_EQ(o.code, 1);
  const json err = json::parse(o.output);
  EXPECT_EQ(err.at("command"), "evaluate");
  EXPECT_EQ(err.at("error"), "data");
  EXPECT_NE(err.at("reason").get<std::string>().find("/nonexistent/afr_run/data"), std::string::npos);
}

TEST(Cli, BadConfigKeyExitsOne) {
  const fs::path dir = scratch("badcfg");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.json") << R"({"gan": {"lamda": 3}})";
  const Outcome o = run("gen-data --config " + (dir / "bad.json").string() + " --out " + dir.string());
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.output.find("lamda"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Cli, GenDataIsByteIdenticalAcrossRuns) {
  const fs::path a = scratch("gen_a");
  const fs::path b = scratch("gen_b");
  const fs::path cfg = write_small_config(scratch("gen_cfg"));
  ASSERT_EQ(run("gen-data --seed 7 --config " + cfg.string() + " --out " + a.string()).code, 0);
  ASSERT_EQ(run("gen-data --seed 7 --config " + cfg.string() + " --out " + b.string()).code, 0);
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(a / "data")) {
    if (!e.is_regular_file()) continue;
    ++files;
    const fs::path rel = fs::relative(e.path(), a);
    EXPECT_EQ(slurp(e.path()), slurp(b / rel)) << rel;
  }
  EXPECT_GE(files, 4u);
  fs::remove_all(a);
  fs::remove_all(b);
}

// Stage-by-stage run, then a rerun in a fresh directory from the echoed config.
TEST(Cli, StagedRunReproducesFromEchoedConfig) {
  const fs::path a = scratch("stage_a");
  const fs::path b = scratch("stage_b");
  const std::string cfg = write_small_config(scratch("stage_cfg")).string();
  const std::string common = " --seed 11 --config " + cfg + " --out " + a.string();
  const Outcome staged = run_stages(common);
  ASSERT_EQ(staged.code, 0) << staged.output;
  EXPECT_TRUE(fs::exists(a / "gan.afrg"));
  EXPECT_TRUE(fs::exists(a / "loss_history.csv"));
  const json first = json::parse(slurp(a / "report.json"));
  EXPECT_EQ(first.at("seed"), 11);

  const std::string echo = (a / "report.json").string();
  const Outcome rerun = run_stages("--config " + echo + " --out " + b.string());
  ASSERT_EQ(rerun.code, 0) << rerun.output;
  json second = json::parse(slurp(b / "report.json"));
  json expected = first;
  expected["config"].erase("out_dir");
  second["config"].erase("out_dir");
  EXPECT_EQ(expected.dump(), second.dump());

  const Outcome shown = run("report --out " + a.string());
  EXPECT_EQ(shown.code, 0);
  EXPECT_NE(shown.output.find("softmax"), std::string::npos);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Cli, FlagsOverrideConfigFile) {
  const fs::path a = scratch("override");
  const std::string cfg = write_small_config(scratch("override_cfg")).string();
  const Outcome o = run_stages("--config " + cfg + " --out " + a.string() +
                               " --mode baseline --selection off --lambda 3 --per-class 7 --seed 5");
  ASSERT_EQ(o.code, 0) << o.output;
  const json config = json::parse(slurp(a / "report.json")).at("config");
  EXPECT_EQ(config.at("gan").at("mode"), "baseline");
  EXPECT_EQ(config.at("gan").at("lambda"), 3.0);
  EXPECT_EQ(config.at("selection"), false);
  EXPECT_EQ(config.at("per_class"), 7);
  EXPECT_EQ(config.at("seed"), 5);
  EXPECT_EQ(config.at("gan").at("hidden_units"), 16);
  fs::remove_all(a);
}

}  // namespace
