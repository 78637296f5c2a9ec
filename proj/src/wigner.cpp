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

#include "biastomo/wigner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "biastomo/simulate.hpp"

namespace biastomo {

namespace {

constexpr double kTraceSlack = 0.05;

Eigen::VectorXd quadrature_diagonals(std::span<const WignerPoint> points, const GridSpec& grid,
                                     int n_diag) {
  if (n_diag < 1) throw std::invalid_argument("n_diag must be positive");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n_diag);
  for (const auto& p : points) diag += p.w * parity_kernel_diagonal(p.gamma, n_diag);
  return diag * grid.cell_area();
}

}  // namespace

GridSpec GridSpec::centered(cplx center, double half_width, int count) {
  GridSpec g{center.real() - half_width, center.real() + half_width, count,
             center.imag() - half_width, center.imag() + half_width, count};
  g.validate();
  return g;
}

void GridSpec::validate() const {
  if (re_count < 1 || im_count < 1) throw std::invalid_argument("grid counts must be >= 1");
  if (!(re_max > re_min) || !(im_max > im_min)) {
    throw std::invalid_argument("grid ranges must be non-empty");
  }
}

std::size_t GridSpec::size() const {
  return static_cast<std::size_t>(re_count) * static_cast<std::size_t>(im_count);
}

std::vector<cplx> GridSpec::points() const {
  validate();
  const double h_re = (re_max - re_min) / re_count;
  const double h_im = (im_max - im_min) / im_count;
  std::vector<cplx> out;
  out.reserve(size());
  for (int i = 0; i < im_count; ++i) {
    for (int r = 0; r < re_count; ++r) {
      out.emplace_back(re_min + (r + 0.5) * h_re, im_min + (i + 0.5) * h_im);
    }
  }
  return out;
}

double GridSpec::cell_area() const {
  return (re_max - re_min) / re_count * (im_max - im_min) / im_count;
}

double wigner_from_populations(const Eigen::VectorXd& r_values) {
  double alternating = 0.0;
  for (Eigen::Index n = 0; n < r_values.size(); ++n) {
    alternating += (n % 2 == 0 ? 1.0 : -1.0) * r_values(n);
  }
  return kWignerScale * alternating;
}

Eigen::VectorXd displaced_populations(const DensityMatrix& rho, cplx gamma,
                                      const DimensionPolicy& policy) {
  if (rho.dim() > policy.n_work) throw std::invalid_argument("state exceeds the working dimension");
  const ComplexMatrix d = displacement_operator<double>(gamma, policy);
  // <n|D^dag rho D|n> with rho supported on the first dim levels.
  const auto top = d.topRows(rho.dim());
  const ComplexMatrix shifted = top.adjoint() * rho.matrix() * top;
  return shifted.diagonal().real();
}

double wigner_true(const DensityMatrix& rho, cplx gamma, const DimensionPolicy& policy) {
  return wigner_from_populations(displaced_populations(rho, gamma, policy));
}

double wigner_coherent(cplx alpha, cplx gamma) {
  return kWignerScale * std::exp(-2.0 * std::norm(gamma - alpha));
}

WignerPoint reconstruct_point(std::span<const Setting> scan, const Eigen::VectorXd& counts,
                              int n_tr, int iterations) {
  if (n_tr < 1) throw std::invalid_argument("n_tr must be positive");
  if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  if (static_cast<std::size_t>(counts.size()) != scan.size()) {
    throw std::invalid_argument("scan and counts are not aligned");
  }
  if (scan.size() < 2) throw std::invalid_argument("pointwise inversion needs >= 2 efficiencies");
  const cplx gamma = scan.front().gamma;
  for (const auto& s : scan) {
    s.validate();
    if (s.gamma != gamma) throw std::invalid_argument("scan mixes displacements");
    if (s.trials <= 0) throw std::invalid_argument("scan setting without trials");
  }
  for (std::size_t i = 1; i < scan.size(); ++i) {
    bool distinct = false;
    for (std::size_t j = 0; j < i && !distinct; ++j) distinct = scan[i].nu != scan[j].nu;
    if (distinct) break;
    if (i + 1 == scan.size()) throw std::invalid_argument("scan needs >= 2 distinct efficiencies");
  }
  if (!(counts.array() > 0.0).any()) throw std::invalid_argument("scan data are all zero");

  const auto n_eff = static_cast<Eigen::Index>(scan.size());
  Eigen::MatrixXd c(n_eff, n_tr);
  Eigen::VectorXd freq(n_eff), trials(n_eff);
  for (Eigen::Index v = 0; v < n_eff; ++v) {
    const auto& s = scan[static_cast<std::size_t>(v)];
    trials(v) = static_cast<double>(s.trials);
    freq(v) = counts(v) / trials(v);
    c(v, 0) = 1.0;
    for (int n = 1; n < n_tr; ++n) c(v, n) = c(v, n - 1) * (1.0 - s.nu);
  }
  const Eigen::VectorXd column_sums = c.colwise().sum().transpose();

  Eigen::VectorXd r = Eigen::VectorXd::Constant(n_tr, 1.0 / (2.0 * n_tr));
  for (int it = 0; it < iterations; ++it) {
    const Eigen::VectorXd p = c * r;
    const Eigen::VectorXd ratio = freq.cwiseQuotient(p);
    r = r.cwiseProduct((c.transpose() * ratio).cwiseQuotient(column_sums));
  }

  WignerPoint out;
  out.gamma = gamma;
  out.r_values = r;
  out.w = wigner_from_populations(r);
  out.deficit = 1.0 - r.sum();

  // Binomial Fisher matrix of the linear model, propagated to w.
  const Eigen::VectorXd p = c * r;
  Eigen::VectorXd inv_var(n_eff);
  for (Eigen::Index v = 0; v < n_eff; ++v) {
    inv_var(v) = trials(v) / std::max(p(v) * (1.0 - p(v)), 1e-12);
  }
  const Eigen::MatrixXd fisher = c.transpose() * inv_var.asDiagonal() * c;
  Eigen::VectorXd parity(n_tr);
  for (int n = 0; n < n_tr; ++n) parity(n) = n % 2 == 0 ? kWignerScale : -kWignerScale;
  const Eigen::MatrixXd cov = fisher.completeOrthogonalDecomposition().pseudoInverse();
  out.sigma_w = std::sqrt(std::max(parity.dot(cov * parity), 0.0));
  return out;
}

Eigen::VectorXd parity_kernel_diagonal(cplx gamma, int n_diag) {
  if (n_diag < 1) throw std::invalid_argument("n_diag must be positive");
  // 2 (-1)^m exp(-2|g|^2) L_m(4|g|^2), Laguerre by the three-term recurrence.
  const long double x = 4.0L * std::norm(gamma);
  const long double envelope = 2.0L * std::exp(-x / 2.0L);
  Eigen::VectorXd out(n_diag);
  long double prev = 0.0L;
  long double cur = 1.0L;
  for (int m = 0; m < n_diag; ++m) {
    out(m) = static_cast<double>((m % 2 == 0 ? envelope : -envelope) * cur);
    const long double next = ((2.0L * m + 1.0L - x) * cur - m * prev) / (m + 1.0L);
    prev = cur;
    cur = next;
  }
  return out;
}

Eigen::VectorXd back_transform_diagonals(std::span<const WignerPoint> points,
                                         const GridSpec& grid, int n_diag) {
  grid.validate();
  const Eigen::VectorXd diag = quadrature_diagonals(points, grid, n_diag);
  if (std::abs(diag.sum() - 1.0) > kTraceSlack) {
    throw NumericalError("back-transform quadrature does not close: trace " +
                         std::to_string(diag.sum()));
  }
  return diag;
}

double WignerScan::max_abs_error() const {
  double out = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    out = std::max(out, std::abs(points[i].w - w_true[i]));
  }
  return out;
}

WignerScan run_wigner_scan(const DensityMatrix& truth, const WignerScanConfig& config,
                           std::uint64_t seed) {
  config.grid.validate();
  if (config.efficiencies.size() < 2) throw std::invalid_argument("need >= 2 efficiencies");
  const auto trials = split_trials(config.trials_per_point, config.efficiencies.size());
  const auto n_eff = config.efficiencies.size();

  WignerScan scan;
  const auto gammas = config.grid.points();
  scan.points.reserve(gammas.size());
  scan.w_true.reserve(gammas.size());
  for (std::size_t p = 0; p < gammas.size(); ++p) {
    const cplx gamma = gammas[p];
    const auto policy =
        DimensionPolicy::for_amplitude(std::max(truth.dim(), config.n_tr), std::abs(gamma));
    const Eigen::VectorXd populations = displaced_populations(truth, gamma, policy);
    scan.w_true.push_back(wigner_from_populations(populations));

    std::vector<Setting> settings;
    Eigen::VectorXd counts(static_cast<Eigen::Index>(n_eff));
    for (std::size_t i = 0; i < n_eff; ++i) {
      const double nu = config.efficiencies[i];
      settings.push_back({nu, gamma, trials[i]});
      double prob = 0.0;
      double weight = 1.0;
      for (Eigen::Index n = 0; n < populations.size(); ++n, weight *= 1.0 - nu) {
        prob += weight * populations(n);
      }
      prob = std::clamp(prob, 0.0, 1.0);
      counts(static_cast<Eigen::Index>(i)) =
          config.noiseless ? static_cast<double>(trials[i]) * prob
                           : static_cast<double>(binomial_draw(seed, p * n_eff + i, trials[i], prob));
    }
    scan.points.push_back(reconstruct_point(settings, counts, config.n_tr, config.iterations));
  }

  scan.diagonals = quadrature_diagonals(scan.points, config.grid, config.n_tr);
  scan.quadrature_check_failed = std::abs(scan.diagonals.sum() - 1.0) > kTraceSlack;
  return scan;
}

}  // namespace biastomo
