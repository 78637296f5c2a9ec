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

#include "biastomo/mle_em.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace biastomo {

namespace {

// Decrease of the mean log-likelihood that counts as a real decrease and
// triggers dilution; anything smaller is rounding.
constexpr double kDecreaseSlack = 1e-13;
constexpr double kMinDilution = 1e-12;
constexpr double kNewtonDecrementFloor = 1e-22;

void check_aligned(const Eigen::VectorXd& counts, std::span<const PovmElement> elements) {
  if (elements.empty()) throw std::invalid_argument("no POVM elements");
  if (static_cast<std::size_t>(counts.size()) != elements.size()) {
    throw std::invalid_argument("counts and POVM elements are not aligned");
  }
  if ((counts.array() < 0.0).any() || !counts.allFinite()) {
    throw std::invalid_argument("counts must be finite and non-negative");
  }
  if (!(counts.sum() > 0.0)) throw std::invalid_argument("no registered counts");
}

Eigen::VectorXd raw_probabilities(const DensityMatrix& rho, std::span<const PovmElement> elements) {
  Eigen::VectorXd p(static_cast<Eigen::Index>(elements.size()));
  for (std::size_t j = 0; j < elements.size(); ++j) {
    p(static_cast<Eigen::Index>(j)) = probability(rho, elements[j]);
  }
  return p;
}

// (sum p / sum N) (N_j / p_j), zero where N_j = 0.
Eigen::VectorXd r_weights(const Eigen::VectorXd& p, const Eigen::VectorXd& counts) {
  const double scale = p.sum() / counts.sum();
  Eigen::VectorXd w(p.size());
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    if (counts(j) == 0.0) {
      w(j) = 0.0;
    } else if (!(p(j) > 0.0)) {
      throw NumericalError("vanishing probability for setting " + std::to_string(j) +
                           " with registered counts: data incompatible with the model");
    } else {
      w(j) = scale * counts(j) / p(j);
    }
  }
  return w;
}

double log_likelihood_from(const Eigen::VectorXd& p, const Eigen::VectorXd& counts) {
  const double log_total = std::log(p.sum());
  double out = 0.0;
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    if (counts(j) == 0.0) continue;
    if (!(p(j) > 0.0)) {
      throw NumericalError("vanishing probability for setting " + std::to_string(j) +
                           " with registered counts: data incompatible with the model");
    }
    out += counts(j) * (std::log(p(j)) - log_total);
  }
  return out;
}

}  // namespace

void ReconstructionConfig::validate() const {
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be positive");
  if (!(likelihood_tolerance >= 0.0)) throw std::invalid_argument("tolerance must be >= 0");
  if (!(rel_threshold > 0.0 && rel_threshold < 1.0)) {
    throw std::invalid_argument("rel_threshold must lie in (0, 1)");
  }
  if (!(dilution_epsilon > 0.0)) throw std::invalid_argument("dilution_epsilon must be positive");
  if (max_refinement_steps < 0) throw std::invalid_argument("max_refinement_steps must be >= 0");
}

double log_likelihood(const DensityMatrix& rho, const Eigen::VectorXd& counts,
                      std::span<const PovmElement> elements) {
  check_aligned(counts, elements);
  return log_likelihood_from(raw_probabilities(rho, elements), counts);
}

ComplexMatrix r_operator(const DensityMatrix& rho, const Eigen::VectorXd& counts,
                         std::span<const PovmElement> elements) {
  check_aligned(counts, elements);
  const Eigen::VectorXd w = r_weights(raw_probabilities(rho, elements), counts);
  ComplexMatrix r = ComplexMatrix::Zero(rho.dim(), rho.dim());
  for (std::size_t j = 0; j < elements.size(); ++j) {
    r += w(static_cast<Eigen::Index>(j)) * elements[j].matrix;
  }
  return hermitian_part(r);
}

double extremal_residual(const DensityMatrix& rho, const Eigen::VectorXd& counts,
                         std::span<const PovmElement> elements) {
  const ComplexMatrix r = r_operator(rho, counts, elements);
  const ComplexMatrix g = transfer_matrix(elements);
  const double denom = std::max((g * rho.matrix()).norm(), 1e-300);
  return ((r - g) * rho.matrix()).norm() / denom;
}

WhitenedModel::WhitenedModel(std::span<const PovmElement> elements, const TransferFunction& tf)
    : kept_(tf.kept_count), basis_map_(tf.basis_map), g_(tf.g) {
  if (kept_ < 1) throw NumericalError("empty reconstruction subspace");
  if (elements.empty()) throw std::invalid_argument("no POVM elements");
  if (elements.front().matrix.rows() != basis_map_.rows()) {
    throw std::invalid_argument("transfer function and POVM dimensions differ");
  }
  gram_ = basis_map_.adjoint() * basis_map_;
  const Eigen::Index k = kept_;
  stack_.resize(static_cast<Eigen::Index>(elements.size()), k * k);
  ComplexMatrix closure = ComplexMatrix::Zero(k, k);
  for (std::size_t j = 0; j < elements.size(); ++j) {
    const ComplexMatrix a = basis_map_.adjoint() * elements[j].matrix * basis_map_;
    closure += a;
    whitened_.push_back(a);
    const ComplexMatrix at = a.transpose();
    stack_.row(static_cast<Eigen::Index>(j)) = Eigen::Map<const ComplexVector>(at.data(), k * k);
  }
  if ((closure - ComplexMatrix::Identity(k, k)).norm() > 1e-8 * static_cast<double>(k)) {
    throw std::invalid_argument(
        "transfer function was not built as the unweighted sum of these elements");
  }
}

Eigen::VectorXd WhitenedModel::probabilities(const ComplexMatrix& rho_g) const {
  const Eigen::Map<const ComplexVector> v(rho_g.data(), rho_g.size());
  return (stack_ * v).real();
}

ComplexMatrix WhitenedModel::r_whitened(const ComplexMatrix& rho_g,
                                        const Eigen::VectorXd& counts) const {
  const Eigen::VectorXd w = r_weights(probabilities(rho_g), counts);
  const ComplexVector v = stack_.transpose() * w.cast<cplx>();
  const Eigen::Map<const ComplexMatrix> m(v.data(), kept_, kept_);
  return hermitian_part<double>(m.transpose());
}

double WhitenedModel::mean_log_likelihood(const ComplexMatrix& rho_g,
                                          const Eigen::VectorXd& counts) const {
  return log_likelihood_from(probabilities(rho_g), counts) / counts.sum();
}

ComplexMatrix WhitenedModel::normalize(const ComplexMatrix& rho_g) const {
  const ComplexMatrix h = hermitian_part(rho_g);
  const double tr = (gram_.transpose().cwiseProduct(h)).sum().real();
  if (!(tr > 0.0)) throw NumericalError("iterate lost positive trace");
  return h / tr;
}

ComplexMatrix WhitenedModel::to_fock(const ComplexMatrix& rho_g) const {
  return hermitian_part<double>(basis_map_ * rho_g * basis_map_.adjoint());
}

ComplexMatrix WhitenedModel::from_fock(const ComplexMatrix& rho) const {
  const ComplexMatrix left = basis_map_.adjoint() * g_;
  return hermitian_part<double>(left * rho * left.adjoint());
}

namespace {

// Real coordinates of a lower-triangular factor with real diagonal:
// x_i multiplies c_i |row_i><col_i|, c_i in {1, i}.
struct FactorCoord {
  int row;
  int col;
  bool imag;
};

std::vector<FactorCoord> factor_coords(int k) {
  std::vector<FactorCoord> out;
  for (int b = 0; b < k; ++b) {
    for (int a = b; a < k; ++a) {
      out.push_back({a, b, false});
      if (a != b) out.push_back({a, b, true});
    }
  }
  return out;
}

ComplexMatrix factor_from(const Eigen::VectorXd& x, std::span<const FactorCoord> coords, int k) {
  ComplexMatrix t = ComplexMatrix::Zero(k, k);
  for (std::size_t i = 0; i < coords.size(); ++i) {
    const auto& c = coords[i];
    t(c.row, c.col) += c.imag ? cplx(0.0, x(static_cast<Eigen::Index>(i)))
                              : cplx(x(static_cast<Eigen::Index>(i)), 0.0);
  }
  return t;
}

Eigen::VectorXd coords_from(const ComplexMatrix& t, std::span<const FactorCoord> coords) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(coords.size()));
  for (std::size_t i = 0; i < coords.size(); ++i) {
    const auto& c = coords[i];
    x(static_cast<Eigen::Index>(i)) = c.imag ? t(c.row, c.col).imag() : t(c.row, c.col).real();
  }
  return x;
}

cplx coord_phase(const FactorCoord& c) { return c.imag ? cplx(0.0, 1.0) : cplx(1.0, 0.0); }

}  // namespace

std::int64_t refine_newton(const WhitenedModel& model, ComplexMatrix& rho_g,
                           const Eigen::VectorXd& counts, std::int64_t max_steps,
                           std::vector<double>& trace, bool& converged) {
  converged = false;
  const int k = model.kept();
  const auto coords = factor_coords(k);
  const auto n_par = static_cast<Eigen::Index>(coords.size());
  const Eigen::VectorXd weights = counts / counts.sum();

  // Start from the Cholesky factor of the unit-trace iterate.
  ComplexMatrix start = hermitian_part<double>(rho_g);
  start /= start.trace().real();
  Eigen::LLT<ComplexMatrix> llt(start);
  if (llt.info() != Eigen::Success) {
    llt.compute(start + 1e-14 * ComplexMatrix::Identity(k, k));
    if (llt.info() != Eigen::Success) return 0;
  }
  Eigen::VectorXd x = coords_from(llt.matrixL(), coords);

  auto state_of = [&](const Eigen::VectorXd& v) {
    const ComplexMatrix t = factor_from(v, coords, k);
    return ComplexMatrix(t * t.adjoint());
  };
  double ell = model.mean_log_likelihood(state_of(x), counts);

  std::int64_t accepted = 0;
  for (std::int64_t step = 0; step < max_steps; ++step) {
    const ComplexMatrix t = factor_from(x, coords, k);
    const ComplexMatrix rho = t * t.adjoint();
    const Eigen::VectorXd q = model.probabilities(rho);
    const double s = x.squaredNorm();

    // Gradient and Hessian of  sum_j w_j log q_j - log s - (s - 1)^2.
    // dq_j/dx_i = 2 Re[c_i (T^dag A_j)(col_i, row_i)] and the Hessian of q_j
    // is 2 Q[A_j] with Q[W](i,l) = Re[c_i conj(c_l) W(row_l, row_i)] on equal
    // columns.
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(n_par);
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(n_par, n_par);
    ComplexMatrix w_sum = ComplexMatrix::Zero(k, k);
    Eigen::VectorXd dq(n_par);
    for (std::size_t j = 0; j < model.size(); ++j) {
      const double wj = weights(static_cast<Eigen::Index>(j));
      if (wj == 0.0) continue;
      const double qj = q(static_cast<Eigen::Index>(j));
      if (!(qj > 0.0)) throw NumericalError("vanishing probability during refinement");
      const ComplexMatrix y = t.adjoint() * model.element(j);
      for (Eigen::Index i = 0; i < n_par; ++i) {
        const auto& c = coords[static_cast<std::size_t>(i)];
        dq(i) = 2.0 * (coord_phase(c) * y(c.col, c.row)).real();
      }
      grad += (wj / qj) * dq;
      hess.noalias() -= (wj / (qj * qj)) * dq * dq.transpose();
      w_sum += (wj / qj) * model.element(j);
    }
    for (Eigen::Index i = 0; i < n_par; ++i) {
      const auto& ci = coords[static_cast<std::size_t>(i)];
      for (Eigen::Index l = 0; l < n_par; ++l) {
        const auto& cl = coords[static_cast<std::size_t>(l)];
        if (ci.col != cl.col) continue;
        hess(i, l) += 2.0 * (coord_phase(ci) * std::conj(coord_phase(cl)) * w_sum(cl.row, ci.row)).real();
      }
    }
    grad -= (2.0 / s + 4.0 * (s - 1.0)) * x;
    hess -= (2.0 / s + 4.0 * (s - 1.0)) * Eigen::MatrixXd::Identity(n_par, n_par);
    hess += (4.0 / (s * s) - 8.0) * x * x.transpose();

    // Saddle-free Newton: curvature magnitudes, directions below the
    // resolvable curvature dropped.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(-hess);
    const Eigen::VectorXd curvature = eig.eigenvalues().cwiseAbs();
    const double cutoff = 1e-13 * curvature.maxCoeff();
    const Eigen::VectorXd projected = eig.eigenvectors().transpose() * grad;
    Eigen::VectorXd coeff(n_par);
    for (Eigen::Index i = 0; i < n_par; ++i) {
      coeff(i) = curvature(i) > cutoff ? projected(i) / curvature(i) : 0.0;
    }
    const Eigen::VectorXd direction = eig.eigenvectors() * coeff;
    const double decrement = projected.dot(coeff);
    // Predicted gain below rounding of the mean log-likelihood.
    if (decrement <= kNewtonDecrementFloor) {
      converged = true;
      break;
    }

    const double slack = 4e-15 * (1.0 + std::abs(ell));
    bool moved = false;
    double alpha = 1.0;
    for (int halving = 0; halving < 40; ++halving, alpha /= 2) {
      const Eigen::VectorXd trial = x + alpha * direction;
      const double trial_ell = model.mean_log_likelihood(state_of(trial), counts);
      if (trial_ell >= ell - slack) {
        x = trial;
        ell = trial_ell;
        moved = true;
        break;
      }
    }
    if (!moved) break;
    ++accepted;
    trace.push_back(ell);
  }
  rho_g = model.normalize(state_of(x));
  return accepted;
}

ComplexMatrix em_step(const WhitenedModel& model, const ComplexMatrix& rho_g,
                      const Eigen::VectorXd& counts) {
  const ComplexMatrix r = model.r_whitened(rho_g, counts);
  return model.normalize(r * rho_g * r);
}

ReconstructionResult em_reconstruct(const Eigen::VectorXd& counts,
                                    std::span<const PovmElement> elements,
                                    const TransferFunction& tf,
                                    const ReconstructionConfig& config) {
  config.validate();
  check_aligned(counts, elements);
  const WhitenedModel model(elements, tf);
  const Eigen::Index k = model.kept();
  const ComplexMatrix identity = ComplexMatrix::Identity(k, k);

  ReconstructionResult result;
  result.kept = model.kept();
  ComplexMatrix rho_g = model.normalize(identity);
  double ell = model.mean_log_likelihood(rho_g, counts);
  result.loglik_trace.push_back(ell);

  for (std::int64_t it = 1; it <= config.max_iterations; ++it) {
    const ComplexMatrix r = model.r_whitened(rho_g, counts);
    ComplexMatrix candidate = model.normalize(r * rho_g * r);
    double candidate_ell = model.mean_log_likelihood(candidate, counts);

    if (candidate_ell < ell - kDecreaseSlack) {
      ++result.diluted_steps;
      bool recovered = false;
      for (double eps = config.dilution_epsilon; eps >= kMinDilution; eps /= 2) {
        const ComplexMatrix diluted = (identity + eps * r) / (1.0 + eps);
        candidate = model.normalize(diluted * rho_g * diluted);
        candidate_ell = model.mean_log_likelihood(candidate, counts);
        if (candidate_ell >= ell - kDecreaseSlack) {
          recovered = true;
          break;
        }
      }
      if (!recovered) {
        result.stalled = true;
        break;
      }
    }

    const double change = candidate_ell - ell;
    rho_g = std::move(candidate);
    ell = candidate_ell;
    result.loglik_trace.push_back(ell);
    result.iterations_used = it;
    if (std::abs(change) < config.likelihood_tolerance) {
      result.converged = true;
      break;
    }
  }

  if (config.max_refinement_steps > 0 && !result.stalled) {
    bool refined = false;
    result.refinement_steps = refine_newton(model, rho_g, counts, config.max_refinement_steps,
                                            result.loglik_trace, refined);
    result.converged = refined;
  }

  result.rho_g = rho_g;
  result.rho = DensityMatrix::normalized(model.to_fock(rho_g));
  result.extremal_residual = extremal_residual(result.rho, counts, elements);
  return result;
}

}  // namespace biastomo
