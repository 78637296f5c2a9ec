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

// Truncated Fock-space kernel: dense complex matrices on the number basis,
// displacement operators, Hermitian eigensystems, G-whitening and state
// utilities. Everything here is templated on the real scalar type so the
// same code runs in double and long double.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "biastomo/errors.hpp"

namespace biastomo {

template <typename Real>
using MatrixC = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using VectorC = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;
template <typename Real>
using VectorR = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

using cplx = std::complex<double>;
using ComplexMatrix = MatrixC<double>;
using ComplexVector = VectorC<double>;

/// Largest displacement amplitude accepted by the operator builders.
inline constexpr double kMaxDisplacement = 10.0;

/// Reconstruction dimension `n_tr` plus the padded dimension `n_work` used
/// while building displaced operators. Operators are built in `n_work` and
/// cut down to the top-left `n_tr` block.
struct DimensionPolicy {
  int n_tr = 0;
  int n_work = 0;

  /// Minimum padding n_work - n_tr for amplitudes up to `max_abs_gamma`.
  static int required_padding(double max_abs_gamma) {
    return static_cast<int>(std::ceil(4.0 * max_abs_gamma * max_abs_gamma + 10.0));
  }

  static DimensionPolicy for_amplitude(int n_tr, double max_abs_gamma) {
    if (n_tr < 1) throw std::invalid_argument("n_tr must be positive");
    return {n_tr, n_tr + required_padding(max_abs_gamma)};
  }

  void validate(double abs_gamma) const {
    if (n_tr < 1) throw std::invalid_argument("n_tr must be positive");
    if (n_work < n_tr + required_padding(abs_gamma)) {
      throw std::invalid_argument("dimension policy: n_work=" + std::to_string(n_work) +
                                  " too small for |gamma|=" + std::to_string(abs_gamma) +
                                  " at n_tr=" + std::to_string(n_tr));
    }
  }
};

template <typename Real>
Real frobenius_hermiticity_defect(const MatrixC<Real>& m) {
  return (m - m.adjoint()).norm();
}

template <typename Real>
MatrixC<Real> hermitian_part(const MatrixC<Real>& m) {
  return (m + m.adjoint()) * Real(0.5);
}

/// Fock-basis matrix of D(gamma) = exp(gamma a^dag - conj(gamma) a) in
/// `n_work` dimensions.
///
/// Exponential of the generator gamma a^dag - conj(gamma) a truncated at
/// n_work. The truncated generator is anti-Hermitian, so the result is
/// unitary on the padded space; the padding keeps the top-left n_tr block
/// on the untruncated operator.
template <typename Real>
MatrixC<Real> displacement_operator(std::complex<Real> gamma, const DimensionPolicy& policy) {
  const Real mag = std::abs(gamma);
  if (!(mag <= Real(kMaxDisplacement))) {
    throw std::domain_error("displacement amplitude out of range (|gamma| <= 10)");
  }
  policy.validate(static_cast<double>(mag));
  const int dim = policy.n_work;

  MatrixC<Real> generator = MatrixC<Real>::Zero(dim, dim);
  for (int n = 0; n + 1 < dim; ++n) {
    const Real root = std::sqrt(Real(n + 1));
    generator(n + 1, n) = gamma * root;
    generator(n, n + 1) = -std::conj(gamma) * root;
  }
  return generator.exp();
}

template <typename Real>
struct HermitianEigensystem {
  VectorR<Real> eigenvalues;    // descending
  MatrixC<Real> eigenvectors;   // orthonormal columns
};

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted
/// descending (ties by ascending solver index) and each eigenvector's
/// largest-magnitude component made real positive.
template <typename Real>
HermitianEigensystem<Real> hermitian_eig(const MatrixC<Real>& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw std::invalid_argument("hermitian_eig: matrix must be square and nonempty");
  }
  const Real scale = std::max(m.norm(), std::numeric_limits<Real>::min());
  if (frobenius_hermiticity_defect(m) > Real(1e-10) * scale) {
    throw std::invalid_argument("hermitian_eig: matrix is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<MatrixC<Real>> solver(hermitian_part(m));
  if (solver.info() != Eigen::Success) {
    throw NumericalError("hermitian_eig: eigensolver did not converge");
  }

  const Eigen::Index n = m.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const auto& raw_values = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return raw_values(a) > raw_values(b);
  });

  HermitianEigensystem<Real> out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    out.eigenvalues(k) = raw_values(src);
    VectorC<Real> v = solver.eigenvectors().col(src);
    // First component within rounding of the maximal magnitude fixes the phase.
    const Real vmax = v.cwiseAbs().maxCoeff();
    Eigen::Index pivot = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(v(i)) >= vmax * (Real(1) - Real(1e-10))) {
        pivot = i;
        break;
      }
    }
    v *= std::conj(v(pivot)) / std::abs(v(pivot));
    v(pivot) = std::complex<Real>(v(pivot).real(), Real(0));
    out.eigenvectors.col(k) = v;
  }
  return out;
}

/// Columns v_i / sqrt(lambda_i) of the eigenpairs kept by the relative
/// threshold, so that B^dag G B = I_k on the kept subspace.
template <typename Real>
struct WhiteningMap {
  MatrixC<Real> basis_map;
  int kept = 0;
};

template <typename Real>
WhiteningMap<Real> inv_sqrt_projected(const HermitianEigensystem<Real>& spectrum,
                                      Real rel_threshold) {
  if (!(rel_threshold > 0 && rel_threshold < 1)) {
    throw std::invalid_argument("rel_threshold must lie in (0, 1)");
  }
  const auto& values = spectrum.eigenvalues;
  const Real lambda_max = values.size() ? values(0) : Real(0);
  if (!(lambda_max > 0)) {
    throw NumericalError("transfer function has no positive eigenvalue");
  }
  int kept = 0;
  while (kept < values.size() && values(kept) > rel_threshold * lambda_max) ++kept;

  WhiteningMap<Real> out;
  out.kept = kept;
  out.basis_map = spectrum.eigenvectors.leftCols(kept);
  for (int i = 0; i < kept; ++i) {
    out.basis_map.col(i) /= std::sqrt(values(i));
  }
  return out;
}

template <typename Real>
WhiteningMap<Real> inv_sqrt_projected(const MatrixC<Real>& g, Real rel_threshold) {
  return inv_sqrt_projected(hermitian_eig(g), rel_threshold);
}

/// Principal square root of a positive semidefinite Hermitian matrix;
/// small negative eigenvalues from rounding are clipped to zero.
template <typename Real>
MatrixC<Real> psd_sqrt(const MatrixC<Real>& m) {
  const auto eig = hermitian_eig(m);
  const VectorR<Real> roots = eig.eigenvalues.cwiseMax(Real(0)).cwiseSqrt();
  return eig.eigenvectors * roots.asDiagonal() * eig.eigenvectors.adjoint();
}

/// Density matrix on a truncated Fock space. Construction checks the
/// Hermitian, unit-trace and positivity invariants.
template <typename Real>
class BasicDensityMatrix {
 public:
  static constexpr Real kHermitianTol = Real(1e-12);
  static constexpr Real kTraceTol = Real(1e-10);
  static constexpr Real kPsdTol = Real(1e-10);

  BasicDensityMatrix() = default;

  explicit BasicDensityMatrix(MatrixC<Real> m) : matrix_(std::move(m)) {
    if (matrix_.rows() != matrix_.cols() || matrix_.rows() == 0) {
      throw std::invalid_argument("density matrix must be square and nonempty");
    }
    if (!matrix_.allFinite()) throw std::invalid_argument("density matrix has non-finite entries");
    if (frobenius_hermiticity_defect(matrix_) > kHermitianTol * matrix_.norm()) {
      throw std::invalid_argument("density matrix is not Hermitian");
    }
    matrix_ = hermitian_part(matrix_);
    if (std::abs(matrix_.trace().real() - Real(1)) > kTraceTol) {
      throw std::invalid_argument("density matrix trace differs from 1");
    }
    Eigen::SelfAdjointEigenSolver<MatrixC<Real>> solver(matrix_, Eigen::EigenvaluesOnly);
    if (solver.eigenvalues()(0) < -kPsdTol) {
      throw std::invalid_argument("density matrix is not positive semidefinite");
    }
  }

  /// Hermitian-symmetrizes and rescales to unit trace before validation.
  static BasicDensityMatrix normalized(const MatrixC<Real>& m) {
    MatrixC<Real> h = hermitian_part(m);
    const Real tr = h.trace().real();
    if (!(tr > 0)) throw NumericalError("cannot normalize a matrix with non-positive trace");
    return BasicDensityMatrix(h / tr);
  }

  const MatrixC<Real>& matrix() const { return matrix_; }
  int dim() const { return static_cast<int>(matrix_.rows()); }

 private:
  MatrixC<Real> matrix_;
};

using DensityMatrix = BasicDensityMatrix<double>;

template <typename Real>
BasicDensityMatrix<Real> pure_state(const VectorC<Real>& psi) {
  const Real norm = psi.norm();
  if (!(norm > 0)) throw std::invalid_argument("state vector has zero norm");
  const VectorC<Real> unit = psi / norm;
  return BasicDensityMatrix<Real>(hermitian_part<Real>(unit * unit.adjoint()));
}

template <typename Real = double>
BasicDensityMatrix<Real> fock_state(int n, int dim) {
  if (n < 0 || n >= dim) throw std::invalid_argument("Fock index outside the truncated space");
  VectorC<Real> psi = VectorC<Real>::Zero(dim);
  psi(n) = Real(1);
  return pure_state<Real>(psi);
}

/// Coherent state |alpha> truncated to `dim` levels and renormalized.
template <typename Real = double>
BasicDensityMatrix<Real> coherent_state(std::complex<Real> alpha, int dim) {
  VectorC<Real> psi(dim);
  psi(0) = std::exp(-std::norm(alpha) / 2);
  for (int n = 1; n < dim; ++n) psi(n) = psi(n - 1) * alpha / std::sqrt(Real(n));
  return pure_state<Real>(psi);
}

template <typename Real = double>
BasicDensityMatrix<Real> maximally_mixed(int dim) {
  return BasicDensityMatrix<Real>(MatrixC<Real>::Identity(dim, dim) / Real(dim));
}

/// Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2.
template <typename Real>
Real fidelity(const BasicDensityMatrix<Real>& a, const BasicDensityMatrix<Real>& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("fidelity: dimension mismatch");
  const MatrixC<Real> root_a = psd_sqrt(a.matrix());
  const MatrixC<Real> inner = hermitian_part<Real>(root_a * b.matrix() * root_a);
  Eigen::SelfAdjointEigenSolver<MatrixC<Real>> solver(inner, Eigen::EigenvaluesOnly);
  const Real root_trace = solver.eigenvalues().cwiseMax(Real(0)).cwiseSqrt().sum();
  return std::clamp(root_trace * root_trace, Real(0), Real(1));
}

template <typename Real>
Real trace_distance(const BasicDensityMatrix<Real>& a, const BasicDensityMatrix<Real>& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("trace_distance: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<MatrixC<Real>> solver(hermitian_part<Real>(a.matrix() - b.matrix()),
                                                      Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().sum() / 2;
}

/// Embeds `m` into the top-left corner of a zero `dim` x `dim` matrix.
template <typename Real>
MatrixC<Real> embed(const MatrixC<Real>& m, int dim) {
  MatrixC<Real> out = MatrixC<Real>::Zero(dim, dim);
  out.topLeftCorner(m.rows(), m.cols()) = m;
  return out;
}

}  // namespace biastomo
