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

// Pointwise Wigner-function baseline.
//
// At a fixed displacement the no-count probabilities over an efficiency scan
// obey the positive linear model  p_nu = sum_n (1-nu)^n R_n  with
// R_n = <n|D^dag rho D|n>, and  W(gamma) = (2/pi) sum_n (-1)^n R_n.  Each
// point is inverted independently by the multiplicative EM update, which is
// exactly what makes the assembled W inconsistent with any density matrix.

#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "biastomo/povm.hpp"

namespace biastomo {

inline constexpr double kWignerScale = 2.0 / std::numbers::pi;

struct WignerPoint {
  cplx gamma{0.0, 0.0};
  Eigen::VectorXd r_values;
  double w = 0.0;
  /// 1 - sum_n R_n, the weight the truncated model leaves unexplained.
  double deficit = 0.0;
  /// Standard deviation of w from the pseudo-inverse Fisher matrix of the
  /// R_n model; NaN when no trial counts were available.
  double sigma_w = 0.0;
};

/// Rectangular grid of cell centers; ranges give the cell boundaries, so the
/// points are suitable for midpoint quadrature.
struct GridSpec {
  double re_min = -2.0;
  double re_max = 2.0;
  int re_count = 50;
  double im_min = -2.0;
  double im_max = 2.0;
  int im_count = 50;

  /// Square grid of count x count cells centered on `center`.
  static GridSpec centered(cplx center, double half_width, int count);

  void validate() const;
  std::size_t size() const;
  /// Row-major in the imaginary axis: index = i_im * re_count + i_re.
  std::vector<cplx> points() const;
  double cell_area() const;
};

/// (2/pi) sum_n (-1)^n R_n.
double wigner_from_populations(const Eigen::VectorXd& r_values);

/// Populations <n|D^dag(gamma) rho D(gamma)|n> for n < policy.n_work.
Eigen::VectorXd displaced_populations(const DensityMatrix& rho, cplx gamma,
                                      const DimensionPolicy& policy);

double wigner_true(const DensityMatrix& rho, cplx gamma, const DimensionPolicy& policy);

/// Analytic Wigner function of the coherent state |alpha>.
double wigner_coherent(cplx alpha, cplx gamma);

/// EM inversion of an efficiency scan taken at one displacement. All
/// settings must share gamma; counts are the no-count tallies.
WignerPoint reconstruct_point(std::span<const Setting> scan, const Eigen::VectorXd& counts,
                              int n_tr, int iterations = 1000);

/// Diagonal <m|rho|m>, m < n_diag, from the parity-kernel inversion
///   rho = 2 \int d^2gamma W(gamma) D(gamma) (-1)^n D^dag(gamma)
/// by midpoint quadrature over `grid`. Values are not clamped. Throws
/// NumericalError when the diagonal does not sum to 1 within 0.05.
Eigen::VectorXd back_transform_diagonals(std::span<const WignerPoint> points,
                                         const GridSpec& grid, int n_diag);

/// 2 <m|D(gamma) (-1)^n D^dag(gamma)|m> for m < n_diag.
Eigen::VectorXd parity_kernel_diagonal(cplx gamma, int n_diag);

struct WignerScanConfig {
  GridSpec grid;
  std::vector<double> efficiencies = linspace(0.1, 0.9, 30);
  std::int64_t trials_per_point = 10'000;
  int iterations = 1000;
  int n_tr = 12;
  /// Use exact trials * p instead of sampled counts.
  bool noiseless = false;
};

struct WignerScan {
  std::vector<WignerPoint> points;
  std::vector<double> w_true;
  Eigen::VectorXd diagonals;
  /// Set when the back-transform quadrature check failed; diagonals are
  /// still reported.
  bool quadrature_check_failed = false;

  double max_abs_error() const;
};

/// Simulates and inverts every grid point, then back-transforms the
/// reconstructed W. Stream of (point p, efficiency i) is p * n_eff + i.
WignerScan run_wigner_scan(const DensityMatrix& truth, const WignerScanConfig& config,
                           std::uint64_t seed);

}  // namespace biastomo
