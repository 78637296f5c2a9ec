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

#include "biastomo/povm.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace biastomo {

void Setting::validate() const {
  if (!(nu > 0.0 && nu <= 1.0)) {
    throw std::invalid_argument("setting efficiency must lie in (0, 1], got " + std::to_string(nu));
  }
  if (!std::isfinite(gamma.real()) || !std::isfinite(gamma.imag())) {
    throw std::invalid_argument("setting displacement must be finite");
  }
  if (trials < 0) throw std::invalid_argument("setting trials must be non-negative");
}

Eigen::VectorXd TransferFunction::normalized_spectrum() const {
  return spectrum.eigenvalues / spectrum.eigenvalues(0);
}

double max_abs_gamma(std::span<const Setting> settings) {
  double out = 0.0;
  for (const auto& s : settings) out = std::max(out, std::abs(s.gamma));
  return out;
}

DimensionPolicy policy_for(int n_tr, std::span<const Setting> settings) {
  return DimensionPolicy::for_amplitude(n_tr, max_abs_gamma(settings));
}

PovmElement build_povm_element(const Setting& setting, const DimensionPolicy& policy) {
  setting.validate();
  const ComplexMatrix d = displacement_operator<double>(setting.gamma, policy);
  const int n_tr = policy.n_tr;

  Eigen::VectorXd weights(policy.n_work);
  const double base = 1.0 - setting.nu;
  weights(0) = 1.0;
  for (int n = 1; n < policy.n_work; ++n) weights(n) = weights(n - 1) * base;

  const auto top = d.topRows(n_tr);
  ComplexMatrix a = top * weights.asDiagonal() * top.adjoint();
  a = hermitian_part(a);

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(a, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().maxCoeff() > 1.0 + 1e-8) {
    throw NumericalError("POVM element exceeds identity: padding insufficient (n_work=" +
                         std::to_string(policy.n_work) + ")");
  }
  return {setting, std::move(a)};
}

std::vector<PovmElement> build_povm(std::span<const Setting> settings,
                                    const DimensionPolicy& policy) {
  std::vector<PovmElement> out;
  out.reserve(settings.size());
  for (const auto& s : settings) out.push_back(build_povm_element(s, policy));
  return out;
}

double probability(const DensityMatrix& rho, const PovmElement& element) {
  if (rho.dim() != element.matrix.rows()) {
    throw std::invalid_argument("probability: state and POVM dimensions differ");
  }
  // Tr[A rho] = sum_{ab} A_ab rho_ba
  const double raw = (element.matrix.transpose().cwiseProduct(rho.matrix())).sum().real();
  constexpr double kSlack = 1e-9;
  if (raw < -kSlack || raw > 1.0 + kSlack) {
    throw NumericalError("non-physical probability " + std::to_string(raw));
  }
  return std::clamp(raw, 0.0, 1.0);
}

ComplexMatrix transfer_matrix(std::span<const PovmElement> elements, GWeighting weighting) {
  if (elements.empty()) throw std::invalid_argument("transfer function of an empty plan");
  const auto dim = elements.front().matrix.rows();
  ComplexMatrix g = ComplexMatrix::Zero(dim, dim);
  for (const auto& e : elements) {
    if (e.matrix.rows() != dim) throw std::invalid_argument("POVM elements differ in dimension");
    if (weighting == GWeighting::kByTrials) {
      g += static_cast<double>(e.setting.trials) * e.matrix;
    } else {
      g += e.matrix;
    }
  }
  return g;
}

TransferFunction build_transfer_function(std::span<const PovmElement> elements,
                                         double rel_threshold, GWeighting weighting) {
  TransferFunction tf;
  tf.g = transfer_matrix(elements, weighting);
  tf.spectrum = hermitian_eig(tf.g);
  const auto whitening = inv_sqrt_projected(tf.spectrum, rel_threshold);
  tf.basis_map = whitening.basis_map;
  tf.kept_count = whitening.kept;
  tf.rel_threshold = rel_threshold;
  if (tf.kept_count < 1) throw NumericalError("all transfer-function eigenvalues below threshold");
  return tf;
}

TransferFunction build_transfer_function(std::span<const Setting> settings,
                                         const DimensionPolicy& policy, double rel_threshold,
                                         GWeighting weighting) {
  const auto elements = build_povm(settings, policy);
  return build_transfer_function(elements, rel_threshold, weighting);
}

std::vector<double> linspace(double lo, double hi, int count) {
  if (count < 1) throw std::invalid_argument("linspace needs at least one point");
  std::vector<double> out(static_cast<std::size_t>(count));
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double step = (hi - lo) / (count - 1);
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = lo + step * i;
  out.back() = hi;
  return out;
}

std::vector<Setting> make_plan(std::span<const cplx> gammas, std::span<const double> efficiencies,
                               std::int64_t trials_per_setting) {
  std::vector<Setting> plan;
  plan.reserve(gammas.size() * efficiencies.size());
  for (const auto& g : gammas) {
    for (double nu : efficiencies) {
      Setting s{nu, g, trials_per_setting};
      s.validate();
      plan.push_back(s);
    }
  }
  return plan;
}

std::vector<std::int64_t> split_trials(std::int64_t total, std::size_t parts) {
  if (parts == 0) throw std::invalid_argument("split_trials: zero parts");
  if (total < 0) throw std::invalid_argument("split_trials: negative total");
  const auto n = static_cast<std::int64_t>(parts);
  std::vector<std::int64_t> out(parts, total / n);
  for (std::int64_t i = 0; i < total % n; ++i) ++out[static_cast<std::size_t>(i)];
  return out;
}

}  // namespace biastomo
