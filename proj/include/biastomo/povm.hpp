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

#include "biastomo/fock.hpp"

namespace biastomo {

/// One measurement configuration of the on/off detector: effective
/// efficiency nu in (0, 1], displacement gamma, planned repetitions.
struct Setting {
  double nu = 1.0;
  cplx gamma{0.0, 0.0};
  std::int64_t trials = 0;

  void validate() const;
  bool operator==(const Setting&) const = default;
};

/// No-count POVM element A = D(gamma) (1-nu)^n D(gamma)^dag on n_tr levels.
struct PovmElement {
  Setting setting;
  ComplexMatrix matrix;
};

enum class GWeighting { kUnweighted, kByTrials };

struct TransferFunction {
  ComplexMatrix g;
  HermitianEigensystem<double> spectrum;
  ComplexMatrix basis_map;
  int kept_count = 0;
  double rel_threshold = 0.0;

  /// Eigenvalues divided by the largest one.
  Eigen::VectorXd normalized_spectrum() const;
};

inline constexpr double kDefaultRelThreshold = 1e-6;

double max_abs_gamma(std::span<const Setting> settings);

/// Smallest admissible policy for `settings` at truncation `n_tr`.
DimensionPolicy policy_for(int n_tr, std::span<const Setting> settings);

/// Throws NumericalError when the padding was too small, detected as an
/// eigenvalue of the block exceeding 1 + 1e-8.
PovmElement build_povm_element(const Setting& setting, const DimensionPolicy& policy);

std::vector<PovmElement> build_povm(std::span<const Setting> settings,
                                    const DimensionPolicy& policy);

/// Tr[A rho], clamped to [0, 1] when the rounding excursion is below 1e-9.
double probability(const DensityMatrix& rho, const PovmElement& element);

/// Sum of elements in plan order.
ComplexMatrix transfer_matrix(std::span<const PovmElement> elements,
                              GWeighting weighting = GWeighting::kUnweighted);

TransferFunction build_transfer_function(std::span<const PovmElement> elements,
                                         double rel_threshold = kDefaultRelThreshold,
                                         GWeighting weighting = GWeighting::kUnweighted);

TransferFunction build_transfer_function(std::span<const Setting> settings,
                                         const DimensionPolicy& policy,
                                         double rel_threshold = kDefaultRelThreshold,
                                         GWeighting weighting = GWeighting::kUnweighted);

/// `count` equidistant values covering [lo, hi] inclusive.
std::vector<double> linspace(double lo, double hi, int count);

/// Cartesian plan: every gamma paired with every efficiency, gamma-major.
std::vector<Setting> make_plan(std::span<const cplx> gammas, std::span<const double> efficiencies,
                               std::int64_t trials_per_setting);

/// Splits `total` as evenly as possible across `parts`, remainder to the
/// lowest indices.
std::vector<std::int64_t> split_trials(std::int64_t total, std::size_t parts);

}  // namespace biastomo
