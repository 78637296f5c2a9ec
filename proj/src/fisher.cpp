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

#include "biastomo/fisher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace biastomo {

namespace {

// Sum independent of the order the terms arrive in.
double ordered_sum(std::vector<double> terms) {
  std::sort(terms.begin(), terms.end());
  double out = 0.0;
  for (double t : terms) out += t;
  return out;
}

void check_indices(const PovmElement& e, int m, int n, Part part) {
  const auto dim = e.matrix.rows();
  if (m < 0 || n < 0 || m >= dim || n >= dim) throw std::out_of_range("element index out of range");
  if (part == Part::kIm && m == n) {
    throw std::invalid_argument("imaginary part of a diagonal element is not a parameter");
  }
}

}  // namespace

double dprob(const PovmElement& element, int m, int n, Part part) {
  check_indices(element, m, n, part);
  const cplx a = element.matrix(m, n);
  if (m == n) return a.real();
  return part == Part::kRe ? 2.0 * a.real() : 2.0 * a.imag();
}

double fisher_information(const DensityMatrix& rho, std::span<const PovmElement> elements, int m,
                          int n, Part part) {
  if (elements.empty()) throw std::invalid_argument("no POVM elements");
  const std::size_t count = elements.size();
  std::vector<double> p(count), dp(count);
  for (std::size_t j = 0; j < count; ++j) {
    p[j] = probability(rho, elements[j]);
    if (!(p[j] > 0.0)) throw NumericalError("Fisher information undefined at zero probability");
    dp[j] = dprob(elements[j], m, n, part);
  }
  const double total = ordered_sum(p);
  const double total_d = ordered_sum(dp);

  std::vector<double> terms(count);
  for (std::size_t j = 0; j < count; ++j) {
    const double q = p[j] / total;
    const double dq = (dp[j] - q * total_d) / total;
    terms[j] = total / p[j] * dq * dq;
  }
  return ordered_sum(std::move(terms));
}

bool VarianceTable::has_infinite() const {
  for (int m = 0; m < dim; ++m) {
    for (int n = 0; n < dim; ++n) {
      if (std::isinf(sigma_re(m, n)) || std::isinf(sigma_im(m, n))) return true;
    }
  }
  return false;
}

VarianceTable variance_table(const DensityMatrix& rho, std::span<const PovmElement> elements,
                             double n_mes) {
  if (!(n_mes > 0.0)) throw std::invalid_argument("n_mes must be positive");
  const int dim = rho.dim();
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  VarianceTable table{dim, Eigen::MatrixXd::Constant(dim, dim, kNaN),
                      Eigen::MatrixXd::Constant(dim, dim, kNaN), n_mes};
  auto sigma = [&](double f) {
    return f > 0.0 ? 1.0 / std::sqrt(f * n_mes) : std::numeric_limits<double>::infinity();
  };
  for (int m = 0; m < dim; ++m) {
    for (int n = 0; n < dim; ++n) {
      if (m <= n) {
        table.sigma_re(m, n) = sigma(fisher_information(rho, elements, m, n, Part::kRe));
      } else {
        table.sigma_im(m, n) = sigma(fisher_information(rho, elements, m, n, Part::kIm));
      }
    }
  }
  return table;
}

}  // namespace biastomo
