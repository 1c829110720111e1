// Copyright 2026 The AFR Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>

namespace afr {

/// The single random engine used everywhere; every stochastic routine takes
/// one by reference so a run is a pure function of its seed.
using Rng = std::mt19937_64;

}  // namespace afr
