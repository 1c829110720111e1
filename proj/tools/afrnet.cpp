// Copyright 2026 The AFR Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

// afrnet: staged command-line driver. Each stage reads the artifacts the
// previous ones left in the run directory (--out) and writes its own.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "afr/errors.hpp"
#include "afr/pipeline.hpp"
#include "afr/serialization.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Flags {
  std::string config;
  std::uint64_t seed = 0;
  std::string mode;
  std::string selection;
  bool gzsl = false;
  std::string out;
  std::string data;
  std::size_t k = 0;
  double lambda = 0.0;
  std::size_t iters = 0;
  std::size_t per_class = 0;
  std::map<std::string, CLI::Option*> given;

  bool has(const std::string& name) const {
    const auto it = given.find(name);
    return it != given.end() && it->second->count() > 0;
  }
};

void add_flags(CLI::App& cmd, Flags& f) {
  f.given["config"] = cmd.add_option("--config", f.config, "run config JSON (or a report.json)");
  f.given["seed"] = cmd.add_option("--seed", f.seed, "master seed");
  f.given["mode"] = cmd.add_option("--mode", f.mode, "generator mode")
                        ->check(CLI::IsMember({"baseline", "residual"}));
  f.given["selection"] = cmd.add_option("--selection", f.selection, "feature selection")
                             ->check(CLI::IsMember({"on", "off"}));
  f.given["gzsl"] = cmd.add_flag("--gzsl", f.gzsl, "generalized protocol (seen + unseen)");
  f.given["out"] = cmd.add_option("--out", f.out, "run directory");
  f.given["data"] = cmd.add_option("--data", f.data, "dataset directory (default OUT/data)");
  f.given["k"] = cmd.add_option("--k", f.k, "number of selected dimensions");
  f.given["lambda"] = cmd.add_option("--lambda", f.lambda, "gradient-penalty weight");
  f.given["iters"] = cmd.add_option("--iters", f.iters, "generator updates");
  f.given["per-class"] = cmd.add_option("--per-class", f.per_class,
                                        "synthetic features per unseen class");
}

afr::RunConfig resolve(const Flags& f) {
  afr::RunConfig c = f.has("config") ? afr::load_run_config(f.config) : afr::RunConfig{};
  if (f.has("seed")) c.seed = f.seed;
  if (f.has("mode")) c.gan.mode = afr::parse_gan_mode(f.mode);
  if (f.has("selection")) c.selection = f.selection == "on";
  if (f.has("gzsl")) c.gzsl = f.gzsl;
  if (f.has("out")) c.out_dir = f.out;
  if (f.has("data")) c.data_dir = f.data;
  if (f.has("k")) c.k = f.k;
  if (f.has("lambda")) c.gan.lambda = f.lambda;
  if (f.has("iters")) c.gan.iterations = f.iters;
  if (f.has("per-class")) c.per_class = f.per_class;
  c.validate();
  return c;
}

fs::path out_dir(const afr::RunConfig& c) { return c.out_dir; }
fs::path data_dir(const afr::RunConfig& c) {
  return c.data_dir.empty() ? out_dir(c) / "data" : fs::path(c.data_dir);
}

void write_json(const fs::path& path, const json& j) {
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  std::ofstream out(path);
  out << j.dump(2) << '\n';
  if (!out) throw afr::DataError("cannot write " + path.string());
}

std::optional<std::set<std::size_t>> known_noise_dims(const afr::RunConfig& c) {
  const fs::path path = data_dir(c) / "benchmark.json";
  std::ifstream in(path);
  if (!in) return std::nullopt;
  const json j = json::parse(in);
  const auto dims = j.at("noise_dims").get<std::vector<std::size_t>>();
  return std::set<std::size_t>(dims.begin(), dims.end());
}

std::string fmt(const std::optional<double>& v) {
  if (!v) return "    -";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%5.1f", *v);
  return buf;
}

json accuracy_json(const afr::EvaluationReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return {{"u_acc", opt(r.u_acc)}, {"s_acc", opt(r.s_acc)}, {"h_mean", opt(r.h_mean)}};
}

// --- stages ----------------------------------------------------------------

int gen_data(const afr::RunConfig& c) {
  const afr::SyntheticBenchmark b = afr::generate_synthetic_benchmark(c.resolved().benchmark);
  const fs::path dir = data_dir(c);
  afr::save_dataset(dir, b.dataset);
  afr::save_matrix(dir / "generating_prototypes.afrm", b.prototypes);
  write_json(dir / "benchmark.json",
             {{"benchmark", c.resolved().benchmark}, {"noise_dims", b.noise_dims}});
  std::cout << "wrote " << b.dataset.features.rows() << " samples (" << b.dataset.split.seen.size()
            << " seen, " << b.dataset.split.unseen.size() << " unseen classes, v="
            << b.dataset.visual_dim() << ", s=" << b.dataset.semantic_dim() << ") to "
            << dir.string() << "\n";
  return 0;
}

int prototypes(const afr::RunConfig& c) {
  const afr::Dataset d = afr::load_dataset(data_dir(c));
  const afr::PrototypeArtifacts p = afr::prototype_stage(d, c);
  afr::save_prototype_artifacts(out_dir(c) / "prototypes", p);
  std::cout << "dim  training_error\n";
  for (std::size_t j = 0; j < p.errors.size(); ++j) {
    std::printf("%3zu  %.6g\n", j, p.errors[j]);
  }
  return 0;
}

int select_features(const afr::RunConfig& c) {
  const afr::PrototypeArtifacts p = afr::load_prototype_artifacts(out_dir(c) / "prototypes");
  const auto selection = afr::selection_stage(p, c);
  afr::save_selection(out_dir(c), selection);
  if (!selection) {
    std::cout << "selection off: all " << p.errors.size() << " dimensions kept\n";
    return 0;
  }
  std::cout << "selected " << selection->size() << " of " << p.errors.size() << ":";
  for (std::size_t j : *selection) std::cout << ' ' << j;
  std::cout << "\n";
  if (const auto noise = known_noise_dims(c)) {
    std::size_t kept = 0;
    for (std::size_t j : *selection) kept += noise->count(j);
    std::cout << "noise dimensions excluded: " << noise->size() - kept << " of " << noise->size()
              << "\n";
  }
  return 0;
}

int train(const afr::RunConfig& c) {
  const afr::Dataset d = afr::load_dataset(data_dir(c));
  const afr::PrototypeArtifacts p = afr::load_prototype_artifacts(out_dir(c) / "prototypes");
  const auto selection = afr::load_selection(out_dir(c));
  const afr::GanModel model = afr::train_stage(d, p, selection, c);
  afr::save_checkpoint(out_dir(c) / "gan.afrg", model);
  std::ofstream hist(out_dir(c) / "loss_history.csv");
  hist << "iteration,critic_loss,generator_loss,wasserstein,penalty\n";
  hist.precision(17);
  for (std::size_t i = 0; i < model.history.size(); ++i) {
    const afr::LossRecord& r = model.history[i];
    hist << i + 1 << ',' << r.critic_loss << ',' << r.generator_loss << ',' << r.wasserstein
         << ',' << r.penalty << '\n';
  }
  if (!model.history.empty()) {
    std::printf("%s mode, %zu iterations, final critic loss %.4f, wasserstein %.4f\n",
                afr::to_string(c.gan.mode), model.iteration, model.history.back().critic_loss,
                model.history.back().wasserstein);
  }
  return 0;
}

int synthesize(const afr::RunConfig& c) {
  const afr::Dataset d = afr::load_dataset(data_dir(c));
  const afr::PrototypeArtifacts p = afr::load_prototype_artifacts(out_dir(c) / "prototypes");
  const auto selection = afr::load_selection(out_dir(c));
  const afr::GanModel model = afr::load_checkpoint(out_dir(c) / "gan.afrg");
  if (model.config.mode != c.gan.mode) {
    throw afr::ContractError("checkpoint was trained in " + std::string(afr::to_string(model.config.mode)) +
                             " mode but the run config says " + afr::to_string(c.gan.mode));
  }
  const afr::SyntheticFeatures s = afr::synthesis_stage(d, p, selection, model, c);
  afr::save_synthetic(out_dir(c) / "synthetic", s);
  std::cout << "synthesized " << s.features.rows() << " features (" << c.per_class
            << " per unseen class, dim " << s.features.cols() << ")\n";
  return 0;
}

void print_report(const json& r) {
  auto num = [](const json& v) {
    return v.is_null() ? std::optional<double>() : std::optional<double>(v.get<double>());
  };
  std::cout << "evaluator   U      S      H\n";
  for (const auto& [name, key] : {std::pair{"softmax", ""}, std::pair{"1nn    ", "nn1"}}) {
    const json& src = *key ? r.at(key) : r;
    std::cout << name << "  " << fmt(num(src.at("u_acc"))) << "  " << fmt(num(src.at("s_acc")))
              << "  " << fmt(num(src.at("h_mean"))) << "\n";
  }
  if (!r.at("purity").is_null()) std::printf("purity          %.4f\n", r.at("purity").get<double>());
  if (!r.at("residual_ratio").is_null()) {
    const json& rr = r.at("residual_ratio");
    std::printf("residual ratio  %.4f (median residual %.4f / median prototype distance %.4f)\n",
                rr.at("ratio").get<double>(), rr.at("median_residual_norm").get<double>(),
                rr.at("median_prototype_distance").get<double>());
  }
}

int evaluate(const afr::RunConfig& c) {
  const afr::Dataset d = afr::load_dataset(data_dir(c));
  const afr::PrototypeArtifacts p = afr::load_prototype_artifacts(out_dir(c) / "prototypes");
  const auto selection = afr::load_selection(out_dir(c));
  const afr::SyntheticFeatures s = afr::load_synthetic(out_dir(c) / "synthetic");
  const afr::Evaluation ev = afr::evaluation_stage(d, p, selection, s, c);
  json report = ev.report;
  report["nn1"] = accuracy_json(ev.nn1);
  write_json(out_dir(c) / "report.json", report);
  print_report(report);
  return 0;
}

int ablate(const afr::RunConfig& base) {
  const afr::Dataset d = afr::load_dataset(data_dir(base));
  const afr::PrototypeArtifacts p = afr::prototype_stage(d, base);
  const auto noise = known_noise_dims(base);
  json rows = json::array();
  std::ofstream csv(out_dir(base) / "ablation.csv");
  csv << "mode,selection,evaluator,u_acc,s_acc,h_mean\n";
  csv.precision(17);
  std::cout << "mode      selection  evaluator   U      S      H\n";
  for (const bool sel : {false, true}) {
    afr::RunConfig c = base;
    c.selection = sel;
    const auto selection = afr::selection_stage(p, c);
    std::optional<afr::EvaluationReport> nn1;
    for (const afr::GanMode mode : {afr::GanMode::kBaseline, afr::GanMode::kResidual}) {
      c.gan.mode = mode;
      const afr::GanModel model = afr::train_stage(d, p, selection, c);
      const afr::SyntheticFeatures s = afr::synthesis_stage(d, p, selection, model, c);
      const afr::Evaluation ev = afr::evaluation_stage(d, p, selection, s, c);
      nn1 = ev.nn1;
      json row = accuracy_json(ev.report);
      row["mode"] = afr::to_string(mode);
      row["selection"] = sel;
      row["evaluator"] = "softmax";
      row["purity"] = *ev.report.purity;
      row["residual_ratio"] = ev.report.residual_ratio->ratio;
      rows.push_back(row);
      std::cout << (mode == afr::GanMode::kBaseline ? "baseline" : "residual") << "  "
                << (sel ? "on " : "off") << "        softmax   " << fmt(ev.report.u_acc) << "  "
                << fmt(ev.report.s_acc) << "  " << fmt(ev.report.h_mean) << "\n";
      csv << afr::to_string(mode) << ',' << (sel ? "on" : "off") << ",softmax,"
          << ev.report.u_acc.value_or(-1) << ',' << ev.report.s_acc.value_or(-1) << ','
          << ev.report.h_mean.value_or(-1) << '\n';
    }
    // 1NN does not depend on the generator.
    json row = accuracy_json(*nn1);
    row["mode"] = nullptr;
    row["selection"] = sel;
    row["evaluator"] = "1nn";
    rows.push_back(row);
    std::cout << "-         " << (sel ? "on " : "off") << "        1nn       " << fmt(nn1->u_acc)
              << "  " << fmt(nn1->s_acc) << "  " << fmt(nn1->h_mean) << "\n";
    csv << "-," << (sel ? "on" : "off") << ",1nn," << nn1->u_acc.value_or(-1) << ','
        << nn1->s_acc.value_or(-1) << ',' << nn1->h_mean.value_or(-1) << '\n';
  }
  json out = {{"rows", rows}, {"seed", base.seed}, {"config", base}};
  if (noise) {
    const auto selection = afr::select_features(p.errors, base.k);
    std::size_t kept = 0;
    for (std::size_t j : selection) kept += noise->count(j);
    out["noise_dims_excluded"] = noise->size() - kept;
    out["noise_dims_total"] = noise->size();
    std::cout << "noise dimensions excluded by selection: " << noise->size() - kept << " of "
              << noise->size() << "\n";
  }
  write_json(out_dir(base) / "ablation.json", out);
  return 0;
}

int report(const afr::RunConfig& c) {
  const fs::path path = out_dir(c) / "report.json";
  std::ifstream in(path);
  if (!in) throw afr::DataError("report not found: " + path.string());
  const json r = json::parse(in);
  std::cout << "run " << out_dir(c).string() << " (seed " << r.at("seed") << ", "
            << r.at("config").at("gan").at("mode").get<std::string>() << " mode, selection "
            << (r.at("config").at("selection").get<bool>() ? "on" : "off") << ")\n";
  print_report(r);
  const json& per_class = r.at("per_class");
  if (!per_class.empty()) {
    std::cout << "class  top1\n";
    for (const auto& item : per_class.items())
      std::printf("%5s  %5.1f\n", item.key().c_str(), item.value().get<double>());
  }
  return 0;
}

std::string one_line(std::string s) {
  for (char& ch : s)
    if (ch == '\n' || ch == '\r') ch = ' ';
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Residual-feature zero-shot learning pipeline", "afrnet"};
  app.require_subcommand(1);
  app.fallthrough(false);

  struct Command {
    const char* name;
    const char* help;
    int (*run)(const afr::RunConfig&);
  };
  const Command commands[] = {
      {"gen-data", "write the seeded synthetic benchmark", gen_data},
      {"prototypes", "fit semantic-to-prototype regressors", prototypes},
      {"select-features", "rank dimensions and keep the top K", select_features},
      {"train", "train the conditional WGAN-GP", train},
      {"synthesize", "generate unseen-class features", synthesize},
      {"evaluate", "train the classifier and write report.json", evaluate},
      {"ablate", "residual/baseline x selection grid", ablate},
      {"report", "print report.json", report},
  };
  std::vector<Flags> flags(std::size(commands));
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < std::size(commands); ++i) {
    CLI::App* sub = app.add_subcommand(commands[i].name, commands[i].help);
    add_flags(*sub, flags[i]);
    subs.push_back(sub);
  }

  if (argc > 1 && argv[1][0] != '-' && !app.get_subcommand_no_throw(argv[1])) {
    std::cerr << "afrnet: unknown subcommand '" << argv[1] << "'\n\n" << app.help();
    return 2;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "afrnet: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    try {
      return commands[i].run(resolve(flags[i]));
    } catch (const afr::Error& e) {
      std::cerr << json({{"error", e.kind()}, {"command", commands[i].name},
                         {"reason", one_line(e.what())}})
                       .dump()
                << "\n";
    } catch (const std::exception& e) {
      std::cerr << json({{"error", "internal"}, {"command", commands[i].name},
                         {"reason", one_line(e.what())}})
                       .dump()
                << "\n";
    }
    return 1;
  }
  return 2;
}
