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

#include "biastomo/simulate.hpp"

#include <random>
#include <stdexcept>

namespace biastomo {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

void ExperimentPlan::validate() const {
  if (settings.empty()) throw std::invalid_argument("experiment plan has no settings");
  std::int64_t total = 0;
  for (const auto& s : settings) {
    s.validate();
    total += s.trials;
  }
  if (total <= 0) throw std::invalid_argument("experiment plan has no trials");
  for (const auto& s : settings) policy.validate(std::abs(s.gamma));
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(~stream));
}

std::int64_t binomial_draw(std::uint64_t seed, std::uint64_t stream, std::int64_t trials,
                           double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw NumericalError("binomial probability outside [0, 1]");
  if (trials < 0) throw std::invalid_argument("negative trial count");
  if (trials == 0 || p == 0.0) return 0;
  if (p == 1.0) return trials;
  std::mt19937_64 engine(stream_seed(seed, stream));
  std::binomial_distribution<std::int64_t> dist(trials, p);
  return dist(engine);
}

std::vector<MeasurementRecord> simulate_counts(const DensityMatrix& rho_true,
                                               std::span<const PovmElement> elements,
                                               std::uint64_t seed) {
  std::vector<MeasurementRecord> out;
  out.reserve(elements.size());
  for (std::size_t j = 0; j < elements.size(); ++j) {
    const auto& e = elements[j];
    const double p = probability(rho_true, e);
    out.push_back({static_cast<std::int64_t>(j), e.setting.trials,
                   binomial_draw(seed, j, e.setting.trials, p)});
  }
  return out;
}

std::vector<MeasurementRecord> simulate_counts(const DensityMatrix& rho_true,
                                               const ExperimentPlan& plan) {
  plan.validate();
  if (rho_true.dim() != plan.policy.n_tr) {
    throw std::invalid_argument("true state dimension differs from n_tr");
  }
  const auto elements = build_povm(plan.settings, plan.policy);
  return simulate_counts(rho_true, elements, plan.seed);
}

Eigen::VectorXd counts_of(std::span<const MeasurementRecord> records, std::size_t n_settings) {
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_settings));
  for (const auto& r : records) {
    if (r.setting_index < 0 || static_cast<std::size_t>(r.setting_index) >= n_settings) {
      throw std::invalid_argument("record refers to an unknown setting");
    }
    if (r.no_count < 0 || r.no_count > r.trials) {
      throw std::invalid_argument("record no_count outside [0, trials]");
    }
    counts(r.setting_index) += static_cast<double>(r.no_count);
  }
  return counts;
}

Eigen::VectorXd expected_counts(const DensityMatrix& rho, std::span<const PovmElement> elements) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(elements.size()));
  for (std::size_t j = 0; j < elements.size(); ++j) {
    out(static_cast<Eigen::Index>(j)) =
        static_cast<double>(elements[j].setting.trials) * probability(rho, elements[j]);
  }
  return out;
}

}  // namespace biastomo
