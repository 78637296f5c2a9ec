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

#include "biastomo/io.hpp"
#include "biastomo/povm.hpp"
#include "test_util.hpp"

namespace biastomo {
namespace {

std::vector<Setting> fig2_plan(std::int64_t trials = 1) {
  const std::vector<cplx> gammas{{-0.2, 0.1}, {-0.1, -0.5}, {0.0, 0.0}, {0.1, 0.5}, {0.2, 0.1}};
  return make_plan(gammas, linspace(0.1, 0.9, 20), trials);
}

std::vector<Setting> real_line_plan(double lo, double hi, int points) {
  std::vector<cplx> gammas;
  for (double g : linspace(lo, hi, points)) gammas.emplace_back(g, 0.0);
  return make_plan(gammas, linspace(0.1, 0.9, 10), 1);
}

Eigen::VectorXd golden(const std::string& name) {
  const Json j = read_json_file(testing::data_dir() / (name + "_spectrum.json"));
  const auto& ev = j.at("eigenvalues");
  Eigen::VectorXd out(static_cast<Eigen::Index>(ev.size()));
  for (std::size_t i = 0; i < ev.size(); ++i) out(static_cast<Eigen::Index>(i)) = ev[i].get<double>();
  return out;
}

TEST(Povm, ZeroDisplacementIsDiagonal) {
  const Setting s{0.3, {0.0, 0.0}, 1};
  const auto e = build_povm_element(s, DimensionPolicy::for_amplitude(6, 0.0));
  for (int m = 0; m < 6; ++m) {
    for (int n = 0; n < 6; ++n) {
      const double expect = m == n ? std::pow(0.7, m) : 0.0;
      EXPECT_NEAR(std::abs(e.matrix(m, n) - cplx(expect, 0.0)), 0.0, 1e-15);
    }
  }
}

TEST(Povm, UnitEfficiencyProjectsOnVacuum) {
  const auto e = build_povm_element({1.0, {0.0, 0.0}, 1}, DimensionPolicy::for_amplitude(4, 0.0));
  ComplexMatrix p = ComplexMatrix::Zero(4, 4);
  p(0, 0) = 1.0;
  EXPECT_LE((e.matrix - p).norm(), 1e-15);
}

TEST(Povm, CoherentNoCountIdentity) {
  const cplx alpha(0.3, 0.2), gamma(0.1, 0.0);
  const double nu = 0.4;
  const int n_tr = 20;
  const auto e = build_povm_element({nu, gamma, 1}, DimensionPolicy::for_amplitude(n_tr, 0.1));
  const double p = probability(coherent_state<double>(alpha, n_tr), e);
  EXPECT_NEAR(p, std::exp(-nu * std::norm(alpha - gamma)), 1e-8);
}

TEST(Povm, CoherentNoCountIdentityRandom) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  const int n_tr = 30;
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const cplx alpha = testing::random_in_disk(1.5, rng);
    const cplx gamma = testing::random_in_disk(1.5, rng);
    const double nu = u(rng);
    const auto e = build_povm_element({nu, gamma, 1}, DimensionPolicy::for_amplitude(n_tr, std::abs(gamma)));
    const double p = probability(coherent_state<double>(alpha, n_tr), e);
    worst = std::max(worst, std::abs(p - std::exp(-nu * std::norm(alpha - gamma))));
  }
  EXPECT_LE(worst, 1e-7);
}

TEST(Povm, ProbabilityExamples) {
  const auto policy = DimensionPolicy::for_amplitude(3, 0.0);
  const auto e = build_povm_element({0.5, {0.0, 0.0}, 1}, policy);
  EXPECT_NEAR(probability(fock_state(0, 3), e), 1.0, 1e-15);
  EXPECT_NEAR(probability(fock_state(1, 3), e), 0.5, 1e-15);
  EXPECT_NEAR(probability(testing::two_component_state(3), e), 0.625, 1e-15);
  EXPECT_THROW(probability(fock_state(0, 4), e), std::invalid_argument);
}

TEST(Povm, SpectrumInUnitInterval) {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Setting s{u(rng), testing::random_in_disk(2.0, rng), 1};
    const auto e = build_povm_element(s, DimensionPolicy::for_amplitude(8, std::abs(s.gamma)));
    EXPECT_LE(frobenius_hermiticity_defect(e.matrix), 1e-12);
    const auto es = hermitian_eig(e.matrix);
    EXPECT_GE(es.eigenvalues.minCoeff(), -1e-8);
    EXPECT_LE(es.eigenvalues.maxCoeff(), 1.0 + 1e-8);
  }
}

TEST(Povm, MonotoneInEfficiency) {
  const auto policy = DimensionPolicy::for_amplitude(6, 0.0);
  const auto lo = build_povm_element({0.2, {0.0, 0.0}, 1}, policy);
  const auto hi = build_povm_element({0.7, {0.0, 0.0}, 1}, policy);
  for (int n = 0; n < 6; ++n) EXPECT_GE(lo.matrix(n, n).real(), hi.matrix(n, n).real());
}

TEST(Povm, InsufficientPaddingDetected) {
  // gamma = 3 with two padding levels: the block eigenvalues overshoot 1.
  const Setting s{0.05, {3.0, 0.0}, 1};
  EXPECT_THROW(build_povm_element(s, DimensionPolicy{6, 8}), std::invalid_argument);
  EXPECT_NO_THROW(build_povm_element(s, DimensionPolicy::for_amplitude(6, 3.0)));
}

TEST(Povm, SettingValidation) {
  EXPECT_THROW((Setting{0.0, {0.0, 0.0}, 1}.validate()), std::invalid_argument);
  EXPECT_THROW((Setting{1.1, {0.0, 0.0}, 1}.validate()), std::invalid_argument);
  EXPECT_THROW((Setting{0.5, {0.0, 0.0}, -1}.validate()), std::invalid_argument);
  EXPECT_NO_THROW((Setting{1.0, {0.0, 0.0}, 0}.validate()));
}

TEST(Transfer, GeometricSpectrumForSingleSetting) {
  const std::vector<Setting> plan{{0.5, {0.0, 0.0}, 1}};
  const auto tf = build_transfer_function(plan, policy_for(3, plan));
  EXPECT_NEAR(tf.spectrum.eigenvalues(0), 1.0, 1e-15);
  EXPECT_NEAR(tf.spectrum.eigenvalues(1), 0.5, 1e-15);
  EXPECT_NEAR(tf.spectrum.eigenvalues(2), 0.25, 1e-15);
  EXPECT_EQ(tf.kept_count, 3);
}

TEST(Transfer, LinearInPlans) {
  const auto a = fig2_plan();
  const auto b = real_line_plan(-0.5, 0.5, 3);
  std::vector<Setting> both = a;
  both.insert(both.end(), b.begin(), b.end());
  const auto policy = policy_for(5, both);
  const auto ga = transfer_matrix(build_povm(a, policy));
  const auto gb = transfer_matrix(build_povm(b, policy));
  const auto gab = transfer_matrix(build_povm(both, policy));
  EXPECT_LE((gab - ga - gb).norm(), 1e-12 * gab.norm());
}

TEST(Transfer, EqualsSumOfElements) {
  const auto plan = fig2_plan();
  const auto policy = policy_for(5, plan);
  const auto elements = build_povm(plan, policy);
  ComplexMatrix sum = ComplexMatrix::Zero(5, 5);
  for (const auto& e : elements) sum += e.matrix;
  const auto tf = build_transfer_function(elements);
  EXPECT_LE((tf.g - sum).norm(), 1e-12);
}

TEST(Transfer, WeightingByTrials) {
  std::vector<Setting> plan{{0.5, {0.0, 0.0}, 3}, {0.2, {0.1, 0.0}, 1}};
  const auto elements = build_povm(plan, policy_for(4, plan));
  const ComplexMatrix expect = 3.0 * elements[0].matrix + elements[1].matrix;
  EXPECT_LE((transfer_matrix(elements, GWeighting::kByTrials) - expect).norm(), 1e-14);
}

TEST(Transfer, Fig2SpectrumMatchesOracle) {
  const auto plan = fig2_plan();
  const auto tf = build_transfer_function(plan, policy_for(5, plan));
  const Eigen::VectorXd ref = golden("fig2");
  ASSERT_EQ(ref.size(), 5);
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(tf.spectrum.eigenvalues(i), ref(i), 1e-9 * ref(0)) << i;
  EXPECT_GE(tf.spectrum.eigenvalues(4), 1e-3 * tf.spectrum.eigenvalues(0));
  EXPECT_EQ(tf.kept_count, 5);
  const ComplexMatrix id = tf.basis_map.adjoint() * tf.g * tf.basis_map;
  EXPECT_LE((id - ComplexMatrix::Identity(5, 5)).norm(), 1e-10);
}

TEST(Transfer, RealLineSpectraMatchOracle) {
  const auto narrow = real_line_plan(1.0, 1.01, 10);
  const auto wide = real_line_plan(-1.0, 1.0, 5);
  const auto tf_narrow = build_transfer_function(narrow, policy_for(15, narrow));
  const auto tf_wide = build_transfer_function(wide, policy_for(15, wide));
  const Eigen::VectorXd ref_narrow = golden("fig1d");
  const Eigen::VectorXd ref_wide = golden("fig1c");
  for (int i = 0; i < 15; ++i) {
    EXPECT_NEAR(tf_narrow.spectrum.eigenvalues(i), ref_narrow(i), 1e-9 * ref_narrow(0)) << i;
    EXPECT_NEAR(tf_wide.spectrum.eigenvalues(i), ref_wide(i), 1e-9 * ref_wide(0)) << i;
  }
  // Spread displacements give the flatter spectrum.
  const auto r_narrow = tf_narrow.normalized_spectrum();
  const auto r_wide = tf_wide.normalized_spectrum();
  EXPECT_GT(r_wide(14), r_narrow(14));
}

TEST(Transfer, RejectsEmptyPlan) {
  const std::vector<Setting> empty;
  EXPECT_THROW(build_transfer_function(empty, DimensionPolicy{3, 13}), std::invalid_argument);
}

TEST(Plan, Linspace) {
  const auto v = linspace(0.1, 0.9, 5);
  ASSERT_EQ(v.size(), 5u);
  EXPECT_DOUBLE_EQ(v.front(), 0.1);
  EXPECT_DOUBLE_EQ(v.back(), 0.9);
  EXPECT_NEAR(v[2], 0.5, 1e-15);
  EXPECT_EQ(linspace(0.3, 0.7, 1), std::vector<double>{0.3});
}

TEST(Plan, GammaMajorOrder) {
  const std::vector<cplx> gammas{{0.0, 0.0}, {1.0, 0.0}};
  const std::vector<double> effs{0.2, 0.4, 0.6};
  const auto plan = make_plan(gammas, effs, 7);
  ASSERT_EQ(plan.size(), 6u);
  EXPECT_EQ(plan[1].gamma, cplx(0.0, 0.0));
  EXPECT_DOUBLE_EQ(plan[1].nu, 0.4);
  EXPECT_EQ(plan[3].gamma, cplx(1.0, 0.0));
  EXPECT_EQ(plan[5].trials, 7);
}

TEST(Plan, SplitTrials) {
  EXPECT_EQ(split_trials(10, 3), (std::vector<std::int64_t>{4, 3, 3}));
  EXPECT_EQ(split_trials(10'000'000, 100), std::vector<std::int64_t>(100, 100'000));
  const auto s = split_trials(10'000, 30);
  EXPECT_EQ(std::accumulate(s.begin(), s.end(), std::int64_t{0}), 10'000);
  EXPECT_EQ(s.front(), 334);
  EXPECT_EQ(s.back(), 333);
}

}  // namespace
}  // namespace biastomo
