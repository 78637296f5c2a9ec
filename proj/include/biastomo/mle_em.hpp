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

// Maximum-likelihood reconstruction for un-normalized POVMs.
//
// The likelihood  L(rho) = sum_j N_j log(p_j / sum_j' p_j')  is stationary
// where R rho = G rho with
//
//   R = (sum_j' p_j' / sum_j' N_j') sum_j (N_j / p_j) A_j,   G = sum_j A_j.
//
// With B = V Lambda^{-1/2} (kept eigenpairs of G) the whitened elements
// B^dag A_j B sum to the identity and the problem becomes an ordinary EM
// fixed point  R_G rho_G R_G = rho_G  in the kept subspace, solved from the
// maximally mixed start and mapped back as rho = B rho_G B^dag.

#include <cstdint>
#include <span>
#include <vector>

#include "biastomo/povm.hpp"

namespace biastomo {

struct ReconstructionConfig {
  std::int64_t max_iterations = 1'000'000;
  /// Absolute change of the per-count mean log-likelihood that stops the loop.
  double likelihood_tolerance = 1e-10;
  double rel_threshold = kDefaultRelThreshold;
  double dilution_epsilon = 0.1;
  /// Newton steps on the Cholesky factor of rho_G run after the EM loop
  /// (0 disables). They converge to the same fixed point far faster than
  /// EM on flat likelihoods.
  std::int64_t max_refinement_steps = 500;

  void validate() const;
};

struct ReconstructionResult {
  DensityMatrix rho;
  ComplexMatrix rho_g;
  /// Mean log-likelihood L / sum_j N_j, one entry per accepted iterate,
  /// starting with the initial guess.
  std::vector<double> loglik_trace;
  std::int64_t iterations_used = 0;
  std::int64_t refinement_steps = 0;
  double extremal_residual = 0.0;
  bool converged = false;
  int kept = 0;
  /// Steps that needed a diluted map to stay monotone.
  std::int64_t diluted_steps = 0;
  /// True when even the most diluted step lowered the likelihood.
  bool stalled = false;
};

/// sum_j N_j log(p_j / sum_j' p_j'); terms with N_j = 0 are skipped.
double log_likelihood(const DensityMatrix& rho, const Eigen::VectorXd& counts,
                      std::span<const PovmElement> elements);

ComplexMatrix r_operator(const DensityMatrix& rho, const Eigen::VectorXd& counts,
                         std::span<const PovmElement> elements);

/// ||R rho - G rho||_F / max(||G rho||_F, 1e-300).
double extremal_residual(const DensityMatrix& rho, const Eigen::VectorXd& counts,
                         std::span<const PovmElement> elements);

/// The POVM expressed in the whitened kept subspace of a transfer function.
class WhitenedModel {
 public:
  WhitenedModel(std::span<const PovmElement> elements, const TransferFunction& tf);

  int kept() const { return kept_; }
  std::size_t size() const { return static_cast<std::size_t>(stack_.rows()); }

  Eigen::VectorXd probabilities(const ComplexMatrix& rho_g) const;
  /// B^dag R B for the state rho_g.
  ComplexMatrix r_whitened(const ComplexMatrix& rho_g, const Eigen::VectorXd& counts) const;
  double mean_log_likelihood(const ComplexMatrix& rho_g, const Eigen::VectorXd& counts) const;

  /// Rescales so that Tr[B rho_g B^dag] = 1.
  ComplexMatrix normalize(const ComplexMatrix& rho_g) const;
  ComplexMatrix to_fock(const ComplexMatrix& rho_g) const;
  /// B^dag G rho G B, the left inverse of to_fock on the kept subspace.
  ComplexMatrix from_fock(const ComplexMatrix& rho) const;

  /// B^dag A_j B.
  const ComplexMatrix& element(std::size_t j) const { return whitened_[j]; }

 private:
  int kept_ = 0;
  ComplexMatrix basis_map_;
  ComplexMatrix g_;
  ComplexMatrix gram_;   // B^dag B
  ComplexMatrix stack_;  // row j = vec(transpose(B^dag A_j B))
  std::vector<ComplexMatrix> whitened_;
};

/// Monotone Newton ascent of the likelihood over rho_g = T T^dag with T
/// lower triangular (real diagonal). Appends accepted mean log-likelihoods to
/// `trace`; returns the number of accepted steps and sets `converged` when
/// the step length fell below rounding.
std::int64_t refine_newton(const WhitenedModel& model, ComplexMatrix& rho_g,
                           const Eigen::VectorXd& counts, std::int64_t max_steps,
                           std::vector<double>& trace, bool& converged);

/// One undiluted update rho_g -> normalize(R_G rho_g R_G).
ComplexMatrix em_step(const WhitenedModel& model, const ComplexMatrix& rho_g,
                      const Eigen::VectorXd& counts);

ReconstructionResult em_reconstruct(const Eigen::VectorXd& counts,
                                    std::span<const PovmElement> elements,
                                    const TransferFunction& tf,
                                    const ReconstructionConfig& config = {});

}  // namespace biastomo
