// Copyright 2026 The AFR Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// JSON conversions for configuration and report types. Readers accept partial
// objects: absent keys keep their defaults, unknown keys are rejected.

#include "json.hpp"

#include "afr/adam.hpp"
#include "afr/classifier.hpp"
#include "afr/data.hpp"
#include "afr/gan.hpp"
#include "afr/prototype.hpp"

namespace afr {

void to_json(nlohmann::json& j, const AdamConfig& c);
void from_json(const nlohmann::json& j, AdamConfig& c);
void to_json(nlohmann::json& j, const GanConfig& c);
void from_json(const nlohmann::json& j, GanConfig& c);
void to_json(nlohmann::json& j, const PredictorConfig& c);
void from_json(const nlohmann::json& j, PredictorConfig& c);
void to_json(nlohmann::json& j, const SoftmaxConfig& c);
void from_json(const nlohmann::json& j, SoftmaxConfig& c);
void to_json(nlohmann::json& j, const SyntheticBenchmarkConfig& c);
void from_json(const nlohmann::json& j, SyntheticBenchmarkConfig& c);

}  // namespace afr
