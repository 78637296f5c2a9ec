// Copyright 2026 The biastomo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "biastomo/povm.hpp"

namespace biastomo {

struct MeasurementRecord {
  std::int64_t setting_index = 0;
  std::int64_t trials = 0;
  std::int64_t no_count = 0;

  bool operator==(const MeasurementRecord&) const = default;
};

struct ExperimentPlan {
  std::vector<Setting> settings;
  DimensionPolicy policy;
  std::uint64_t seed = 0;

  void validate() const;
};

/// 64-bit seed of the independent stream `stream` under `seed`. Streams are
/// keyed by (seed, index) only, so adding settings leaves earlier ones intact.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream);

/// One exact Binomial(trials, p) draw from stream (seed, stream).
std::int64_t binomial_draw(std::uint64_t seed, std::uint64_t stream, std::int64_t trials, double p);

std::vector<MeasurementRecord> simulate_counts(const DensityMatrix& rho_true,
                                               std::span<const PovmElement> elements,
                                               std::uint64_t seed);

std::vector<MeasurementRecord> simulate_counts(const DensityMatrix& rho_true,
                                               const ExperimentPlan& plan);

/// N_j as a dense vector in setting order.
Eigen::VectorXd counts_of(std::span<const MeasurementRecord> records, std::size_t n_settings);

/// Noiseless data N_j = trials_j * p_j.
Eigen::VectorXd expected_counts(const DensityMatrix& rho, std::span<const PovmElement> elements);

}  // namespace biastomo
