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

// Element-wise Fisher information of the normalized probabilities
// q_j = p_j / sum p with respect to Re(rho_mn) or Im(rho_mn), treating each
// element as a free coordinate, and the resulting error bars
// sigma = (F n_mes)^{-1/2}.

#include <span>

#include "biastomo/povm.hpp"

namespace biastomo {

enum class Part { kRe, kIm };

/// d p_j / d Re(rho_mn) or d Im(rho_mn) with rho_nm moving as the
/// Hermitian partner. Im on the diagonal is not a parameter.
double dprob(const PovmElement& element, int m, int n, Part part);

double fisher_information(const DensityMatrix& rho, std::span<const PovmElement> elements, int m,
                          int n, Part part);

/// sigma_re holds Re(rho_mn) errors for m <= n, sigma_im holds Im(rho_mn)
/// errors for m > n; other entries are NaN. Zero information gives +inf.
struct VarianceTable {
  int dim = 0;
  Eigen::MatrixXd sigma_re;
  Eigen::MatrixXd sigma_im;
  double n_mes = 0.0;

  bool has_infinite() const;
};

VarianceTable variance_table(const DensityMatrix& rho, std::span<const PovmElement> elements,
                             double n_mes);

}  // namespace biastomo
