// Copyright 2026 The AFR Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "afr/serialization.hpp"

#include <initializer_list>
#include <string>

#include "afr/errors.hpp"

namespace afr {

namespace {

using nlohmann::json;

void require_known_keys(const json& j, const char* type, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ContractError(std::string(type) + " must be a JSON object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : keys) known = known || item.key() == k;
    if (!known) throw ContractError(std::string("unknown ") + type + " key '" + item.key() + "'");
  }
}

template <typename T>
void read_opt(const json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

template <typename T>
void read_opt(const json& j, const char* key, std::optional<T>& field) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (v.is_null()) {
    field.reset();
  } else {
    field = v.get<T>();
  }
}

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

void to_json(json& j, const AdamConfig& c) {
  j = {{"learning_rate", c.learning_rate},
       {"beta1", c.beta1},
       {"beta2", c.beta2},
       {"epsilon", c.epsilon}};
}

void from_json(const json& j, AdamConfig& c) {
  require_known_keys(j, "adam", {"learning_rate", "beta1", "beta2", "epsilon"});
  read_opt(j, "learning_rate", c.learning_rate);
  read_opt(j, "beta1", c.beta1);
  read_opt(j, "beta2", c.beta2);
  read_opt(j, "epsilon", c.epsilon);
}

void to_json(json& j, const GanConfig& c) {
  j = {{"noise_dim", c.noise_dim},
       {"hidden_units", c.hidden_units},
       {"lambda", c.lambda},
       {"critic_steps", c.critic_steps},
       {"adam", c.adam},
       {"batch_size", c.batch_size},
       {"iterations", c.iterations},
       {"mode", to_string(c.mode)},
       {"seed", c.seed}};
}

void from_json(const json& j, GanConfig& c) {
  require_known_keys(j, "gan", {"noise_dim", "hidden_units", "lambda", "critic_steps", "adam",
                                "batch_size", "iterations", "mode", "seed"});
  read_opt(j, "noise_dim", c.noise_dim);
  read_opt(j, "hidden_units", c.hidden_units);
  read_opt(j, "lambda", c.lambda);
  read_opt(j, "critic_steps", c.critic_steps);
  if (j.contains("adam")) from_json(j.at("adam"), c.adam);
  read_opt(j, "batch_size", c.batch_size);
  read_opt(j, "iterations", c.iterations);
  if (j.contains("mode")) c.mode = parse_gan_mode(j.at("mode").get<std::string>());
  read_opt(j, "seed", c.seed);
}

void to_json(json& j, const PredictorConfig& c) {
  j = {{"alpha", c.alpha},
       {"delta", c.delta},
       {"gamma", optional_json(c.gamma)},
       {"pca_dim", optional_json(c.pca_dim)},
       {"use_pca", c.use_pca},
       {"fit_bias", c.fit_bias},
       {"tolerance", c.tolerance},
       {"max_iterations", c.max_iterations},
       {"threads", c.threads}};
}

void from_json(const json& j, PredictorConfig& c) {
  require_known_keys(j, "svr", {"alpha", "delta", "gamma", "pca_dim", "use_pca", "fit_bias",
                                "tolerance", "max_iterations", "threads"});
  read_opt(j, "alpha", c.alpha);
  read_opt(j, "delta", c.delta);
  read_opt(j, "gamma", c.gamma);
  read_opt(j, "pca_dim", c.pca_dim);
  read_opt(j, "use_pca", c.use_pca);
  read_opt(j, "fit_bias", c.fit_bias);
  read_opt(j, "tolerance", c.tolerance);
  read_opt(j, "max_iterations", c.max_iterations);
  read_opt(j, "threads", c.threads);
}

void to_json(json& j, const SoftmaxConfig& c) {
  j = {{"learning_rate", c.learning_rate},
       {"max_iterations", c.max_iterations},
       {"gradient_tolerance", c.gradient_tolerance}};
}

void from_json(const json& j, SoftmaxConfig& c) {
  require_known_keys(j, "classifier", {"learning_rate", "max_iterations", "gradient_tolerance"});
  read_opt(j, "learning_rate", c.learning_rate);
  read_opt(j, "max_iterations", c.max_iterations);
  read_opt(j, "gradient_tolerance", c.gradient_tolerance);
}

void to_json(json& j, const SyntheticBenchmarkConfig& c) {
  j = {{"seen_classes", c.seen_classes},
       {"unseen_classes", c.unseen_classes},
       {"samples_per_class", c.samples_per_class},
       {"test_seen_fraction", c.test_seen_fraction},
       {"visual_dim", c.visual_dim},
       {"semantic_dim", c.semantic_dim},
       {"latent_dim", c.latent_dim},
       {"semantic_noise", c.semantic_noise},
       {"sigma_intra", c.sigma_intra},
       {"sigma_inter", c.sigma_inter},
       {"curvature", c.curvature},
       {"noise_fraction", c.noise_fraction},
       {"seed", c.seed}};
}

void from_json(const json& j, SyntheticBenchmarkConfig& c) {
  require_known_keys(j, "benchmark",
                     {"seen_classes", "unseen_classes", "samples_per_class", "test_seen_fraction",
                      "visual_dim", "semantic_dim", "latent_dim", "semantic_noise", "sigma_intra",
                      "sigma_inter", "curvature", "noise_fraction", "seed"});
  read_opt(j, "seen_classes", c.seen_classes);
  read_opt(j, "unseen_classes", c.unseen_classes);
  read_opt(j, "samples_per_class", c.samples_per_class);
  read_opt(j, "test_seen_fraction", c.test_seen_fraction);
  read_opt(j, "visual_dim", c.visual_dim);
  read_opt(j, "semantic_dim", c.semantic_dim);
  read_opt(j, "latent_dim", c.latent_dim);
  read_opt(j, "semantic_noise", c.semantic_noise);
  read_opt(j, "sigma_intra", c.sigma_intra);
  read_opt(j, "sigma_inter", c.sigma_inter);
  read_opt(j, "curvature", c.curvature);
  read_opt(j, "noise_fraction", c.noise_fraction);
  read_opt(j, "seed", c.seed);
}

}  // namespace afr
