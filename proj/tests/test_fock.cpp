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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "biastomo/fock.hpp"
#include "test_util.hpp"

namespace biastomo {
namespace {

using testing::random_hermitian;

// Closed-form <m|D(gamma)|n> through associated Laguerre polynomials, summed
// in long double.
std::complex<long double> laguerre_element(int m, int n, std::complex<long double> gamma) {
  const long double x = std::norm(gamma);
  const int lo = std::min(m, n);
  const int a = std::abs(m - n);
  long double l_prev = 1.0L, l = 1.0L + a - x;
  long double lag = lo == 0 ? 1.0L : l;
  for (int k = 1; k < lo; ++k) {
    const long double next = ((2 * k + 1 + a - x) * l - (k + a) * l_prev) / (k + 1);
    l_prev = l;
    l = next;
    lag = l;
  }
  const long double log_ratio = 0.5L * (std::lgamma(static_cast<long double>(lo) + 1) -
                                        std::lgamma(static_cast<long double>(lo + a) + 1));
  const std::complex<long double> base = m >= n ? gamma : -std::conj(gamma);
  std::complex<long double> power = 1.0L;
  for (int k = 0; k < a; ++k) power *= base;
  return std::exp(log_ratio - x / 2) * power * lag;
}

// Cyclic Jacobi on the real embedding [[A, -B], [B, A]]; every eigenvalue of
// A + iB shows up twice.
Eigen::VectorXd jacobi_eigenvalues(const ComplexMatrix& h) {
  const auto n = h.rows();
  Eigen::MatrixXd s(2 * n, 2 * n);
  s << h.real(), -h.imag(), h.imag(), h.real();
  const auto size = s.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < size; ++p) {
      for (Eigen::Index q = p + 1; q < size; ++q) off += s(p, q) * s(p, q);
    }
    if (off < 1e-30) break;
    for (Eigen::Index p = 0; p < size; ++p) {
      for (Eigen::Index q = p + 1; q < size; ++q) {
        if (std::abs(s(p, q)) < 1e-300) continue;
        const double theta = (s(q, q) - s(p, p)) / (2.0 * s(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
        const double c = 1.0 / std::sqrt(t * t + 1), sn = t * c;
        for (Eigen::Index k = 0; k < size; ++k) {
          const double skp = s(k, p), skq = s(k, q);
          s(k, p) = c * skp - sn * skq;
          s(k, q) = sn * skp + c * skq;
        }
        for (Eigen::Index k = 0; k < size; ++k) {
          const double spk = s(p, k), sqk = s(q, k);
          s(p, k) = c * spk - sn * sqk;
          s(q, k) = sn * spk + c * sqk;
        }
      }
    }
  }
  std::vector<double> d(static_cast<std::size_t>(size));
  for (Eigen::Index i = 0; i < size; ++i) d[static_cast<std::size_t>(i)] = s(i, i);
  std::sort(d.begin(), d.end(), std::greater<>());
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) out(i) = d[static_cast<std::size_t>(2 * i)];
  return out;
}

TEST(Displacement, ZeroIsIdentity) {
  const auto d = displacement_operator<double>({0.0, 0.0}, DimensionPolicy::for_amplitude(6, 0.0));
  EXPECT_LE((d - ComplexMatrix::Identity(d.rows(), d.cols())).norm(), 1e-15);
}

TEST(Displacement, VacuumOverlap) {
  const auto d = displacement_operator<double>({1.0, 0.0}, DimensionPolicy::for_amplitude(4, 1.0));
  EXPECT_NEAR(d(0, 0).real(), 0.6065306597126334, 1e-12);
  EXPECT_NEAR(d(0, 0).imag(), 0.0, 1e-15);
}

TEST(Displacement, MatchesLaguerreClosedForm) {
  const std::complex<long double> g(0.5L, 0.5L);
  const auto d = displacement_operator<double>({0.5, 0.5}, DimensionPolicy::for_amplitude(8, std::abs(cplx(0.5, 0.5))));
  double worst = 0.0;
  for (int m = 0; m < 8; ++m) {
    for (int n = 0; n < 8; ++n) {
      const auto ref = laguerre_element(m, n, g);
      worst = std::max(worst, std::abs(d(m, n) - cplx(double(ref.real()), double(ref.imag()))));
    }
  }
  EXPECT_LE(worst, 1e-10);
}

TEST(Displacement, MatchesLaguerreAtLargerAmplitudes) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const cplx g = testing::random_in_disk(3.0, rng);
    const int n_tr = 12;
    const auto d = displacement_operator<double>(g, DimensionPolicy::for_amplitude(n_tr, std::abs(g)));
    for (int m = 0; m < n_tr; ++m) {
      for (int n = 0; n < n_tr; ++n) {
        const auto ref = laguerre_element(m, n, {g.real(), g.imag()});
        ASSERT_LE(std::abs(d(m, n) - cplx(double(ref.real()), double(ref.imag()))), 1e-10)
            << "gamma=" << g << " m=" << m << " n=" << n;
      }
    }
  }
}

TEST(Displacement, LongDoubleAgreesWithDouble) {
  const auto policy = DimensionPolicy::for_amplitude(10, 1.5);
  const auto d = displacement_operator<double>({1.2, -0.9}, policy);
  const auto dl = displacement_operator<long double>({1.2L, -0.9L}, policy);
  EXPECT_LE((d - dl.cast<cplx>()).norm(), 1e-12);
}

TEST(Displacement, UnitaryOnBlock) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const cplx g = testing::random_in_disk(2.0, rng);
    const int n_tr = 10;
    const auto d = displacement_operator<double>(g, DimensionPolicy::for_amplitude(n_tr, std::abs(g)));
    const ComplexMatrix cols = d.leftCols(n_tr);
    EXPECT_LE((cols.adjoint() * cols - ComplexMatrix::Identity(n_tr, n_tr)).norm(), 1e-8);
  }
}

TEST(Displacement, CompositionWithInverse) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const cplx g = testing::random_in_disk(2.0, rng);
    const int n_tr = 10;
    const auto policy = DimensionPolicy::for_amplitude(n_tr, std::abs(g));
    const auto d = displacement_operator<double>(g, policy);
    const auto dm = displacement_operator<double>(-g, policy);
    const ComplexMatrix prod = (d * dm).topLeftCorner(n_tr, n_tr);
    EXPECT_LE((prod - ComplexMatrix::Identity(n_tr, n_tr)).norm(), 1e-8) << g;
  }
}

TEST(Displacement, CompositionPhase) {
  // D(a) D(b) = exp(i Im(a b*)) D(a + b).
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const cplx a = testing::random_in_disk(1.0, rng);
    const cplx b = testing::random_in_disk(1.0, rng);
    const int n_tr = 8;
    const auto policy = DimensionPolicy::for_amplitude(n_tr, 2.0);
    const ComplexMatrix lhs = (displacement_operator<double>(a, policy) *
                               displacement_operator<double>(b, policy)).topLeftCorner(n_tr, n_tr);
    const ComplexMatrix rhs = std::exp(cplx(0.0, std::imag(a * std::conj(b)))) *
                              displacement_operator<double>(a + b, policy).topLeftCorner(n_tr, n_tr);
    EXPECT_LE((lhs - rhs).norm(), 1e-8);
  }
}

TEST(Displacement, RejectsBadInput) {
  EXPECT_THROW(displacement_operator<double>({10.5, 0.0}, DimensionPolicy{4, 500}), std::domain_error);
  EXPECT_THROW(displacement_operator<double>({1.0, 0.0}, DimensionPolicy{4, 6}), std::invalid_argument);
  EXPECT_THROW(DimensionPolicy::for_amplitude(0, 1.0), std::invalid_argument);
}

TEST(Policy, PaddingRule) {
  EXPECT_EQ(DimensionPolicy::required_padding(0.0), 10);
  EXPECT_EQ(DimensionPolicy::required_padding(1.0), 14);
  EXPECT_EQ(DimensionPolicy::for_amplitude(5, 0.5).n_work, 16);
}

TEST(HermitianEig, Identity) {
  const auto es = hermitian_eig<double>(ComplexMatrix::Identity(3, 3));
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(es.eigenvalues(i), 1.0, 1e-15);
}

TEST(HermitianEig, SortsDescending) {
  ComplexMatrix m = ComplexMatrix::Zero(3, 3);
  m(0, 0) = 3.0;
  m(1, 1) = 1.0;
  m(2, 2) = 2.0;
  const auto es = hermitian_eig<double>(m);
  EXPECT_DOUBLE_EQ(es.eigenvalues(0), 3.0);
  EXPECT_DOUBLE_EQ(es.eigenvalues(1), 2.0);
  EXPECT_DOUBLE_EQ(es.eigenvalues(2), 1.0);
  // Eigenvector of 2 is e_2, phase-fixed real positive.
  EXPECT_NEAR(es.eigenvectors(2, 1).real(), 1.0, 1e-15);
}

TEST(HermitianEig, TiesKeepOriginalOrder) {
  ComplexMatrix m = ComplexMatrix::Zero(3, 3);
  m(0, 0) = 1.0;
  m(1, 1) = 2.0;
  m(2, 2) = 2.0;
  const auto es = hermitian_eig<double>(m);
  EXPECT_DOUBLE_EQ(es.eigenvalues(0), 2.0);
  EXPECT_DOUBLE_EQ(es.eigenvalues(2), 1.0);
}

TEST(HermitianEig, RoundTripRandom) {
  std::mt19937_64 rng(19);
  for (int dim : {1, 2, 5, 10, 17, 32, 64}) {
    const ComplexMatrix m = random_hermitian(dim, rng);
    const auto es = hermitian_eig(m);
    const ComplexMatrix& v = es.eigenvectors;
    const ComplexMatrix back = v * es.eigenvalues.cast<cplx>().asDiagonal() * v.adjoint();
    EXPECT_LE((back - m).norm(), 1e-10 * m.norm()) << dim;
    EXPECT_LE((v.adjoint() * v - ComplexMatrix::Identity(dim, dim)).norm(), 1e-10) << dim;
    for (int i = 1; i < dim; ++i) EXPECT_GE(es.eigenvalues(i - 1), es.eigenvalues(i));
  }
}

TEST(HermitianEig, AgreesWithJacobi) {
  std::mt19937_64 rng(23);
  for (int dim : {3, 8, 15}) {
    const ComplexMatrix m = random_hermitian(dim, rng);
    const auto es = hermitian_eig(m);
    const Eigen::VectorXd ref = jacobi_eigenvalues(m);
    EXPECT_LE((es.eigenvalues - ref).cwiseAbs().maxCoeff(), 1e-10 * m.norm()) << dim;
  }
}

TEST(HermitianEig, PhaseConvention) {
  std::mt19937_64 rng(29);
  const ComplexMatrix m = random_hermitian(6, rng);
  const auto es = hermitian_eig(m);
  for (int k = 0; k < 6; ++k) {
    Eigen::Index arg = 0;
    es.eigenvectors.col(k).cwiseAbs().maxCoeff(&arg);
    EXPECT_NEAR(es.eigenvectors(arg, k).imag(), 0.0, 1e-12);
    EXPECT_GT(es.eigenvectors(arg, k).real(), 0.0);
  }
  // Deterministic under a global phase of the input's eigenvectors.
  const auto again = hermitian_eig(m);
  EXPECT_EQ((again.eigenvectors - es.eigenvectors).norm(), 0.0);
}

TEST(HermitianEig, RejectsNonHermitian) {
  ComplexMatrix m = ComplexMatrix::Identity(2, 2);
  m(0, 1) = 1.0;
  EXPECT_THROW(hermitian_eig(m), std::invalid_argument);
}

TEST(Whitening, IdentityKeepsEverything) {
  const auto w = inv_sqrt_projected<double>(ComplexMatrix::Identity(4, 4), 1e-6);
  EXPECT_EQ(w.kept, 4);
  EXPECT_LE((w.basis_map.adjoint() * w.basis_map - ComplexMatrix::Identity(4, 4)).norm(), 1e-12);
}

TEST(Whitening, DropsSmallMode) {
  ComplexMatrix g = ComplexMatrix::Zero(2, 2);
  g(0, 0) = 1.0;
  g(1, 1) = 1e-8;
  const auto w = inv_sqrt_projected<double>(g, 1e-6);
  EXPECT_EQ(w.kept, 1);
  EXPECT_EQ(w.basis_map.cols(), 1);
}

TEST(Whitening, WhitensRandomPsd) {
  std::mt19937_64 rng(31);
  for (int dim : {2, 7, 20}) {
    const ComplexMatrix a = random_hermitian(dim, rng);
    const ComplexMatrix g = a * a.adjoint();
    const auto w = inv_sqrt_projected<double>(g, 1e-6);
    ASSERT_GE(w.kept, 1);
    const ComplexMatrix id = w.basis_map.adjoint() * g * w.basis_map;
    EXPECT_LE((id - ComplexMatrix::Identity(w.kept, w.kept)).norm(), 1e-10);
  }
}

TEST(Whitening, RejectsZeroAndBadThreshold) {
  EXPECT_THROW(inv_sqrt_projected<double>(ComplexMatrix::Zero(3, 3), 1e-6), NumericalError);
  EXPECT_THROW(inv_sqrt_projected<double>(ComplexMatrix::Identity(3, 3), 0.0), std::invalid_argument);
  EXPECT_THROW(inv_sqrt_projected<double>(ComplexMatrix::Identity(3, 3), 1.0), std::invalid_argument);
}

TEST(DensityMatrixType, ValidatesInvariants) {
  ComplexMatrix m = ComplexMatrix::Identity(2, 2);
  EXPECT_THROW(DensityMatrix{m}, std::invalid_argument);  // trace 2
  m(1, 1) = -0.5;
  m(0, 0) = 1.5;
  EXPECT_THROW(DensityMatrix{m}, std::invalid_argument);  // negative eigenvalue
  ComplexMatrix h = ComplexMatrix::Identity(2, 2) / 2.0;
  h(0, 1) = 0.1;
  EXPECT_THROW(DensityMatrix{h}, std::invalid_argument);  // not Hermitian
  EXPECT_NO_THROW(DensityMatrix{ComplexMatrix::Identity(2, 2) / 2.0});
}

TEST(States, Fidelity) {
  const auto r0 = fock_state(0, 2);
  const auto r1 = fock_state(1, 2);
  EXPECT_NEAR(fidelity(r0, r0), 1.0, 1e-12);
  EXPECT_NEAR(fidelity(r0, r1), 0.0, 1e-12);
  EXPECT_NEAR(fidelity(r0, maximally_mixed(2)), 0.5, 1e-12);
  EXPECT_THROW(fidelity(r0, fock_state(0, 3)), std::invalid_argument);
}

TEST(States, FidelitySymmetric) {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 10; ++trial) {
    const auto a = testing::random_state(5, rng);
    const auto b = testing::random_state(5, rng);
    EXPECT_NEAR(fidelity(a, b), fidelity(b, a), 1e-10);
    EXPECT_GE(fidelity(a, b), 0.0);
    EXPECT_LE(fidelity(a, b), 1.0);
  }
}

TEST(States, TraceDistance) {
  EXPECT_NEAR(trace_distance(fock_state(0, 2), fock_state(1, 2)), 1.0, 1e-12);
  EXPECT_NEAR(trace_distance(fock_state(0, 2), maximally_mixed(2)), 0.5, 1e-12);
}

TEST(States, CoherentIsNormalizedPoisson) {
  const auto rho = coherent_state<double>({0.6, -0.8}, 30);
  EXPECT_NEAR(rho.matrix().trace().real(), 1.0, 1e-12);
  double term = std::exp(-1.0);
  for (int n = 0; n < 10; ++n) {
    EXPECT_NEAR(rho.matrix()(n, n).real(), term, 1e-12);
    term *= 1.0 / (n + 1);
  }
}

}  // namespace
}  // namespace biastomo
