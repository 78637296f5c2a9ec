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

// File formats. Everything malformed is reported as ConfigError.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "biastomo/errors.hpp"
#include "biastomo/fisher.hpp"
#include "biastomo/mle_em.hpp"
#include "biastomo/simulate.hpp"
#include "biastomo/wigner.hpp"

namespace biastomo {

using Json = nlohmann::ordered_json;

inline constexpr const char* kLibraryVersion = "1.0.0";

/// Serializes with every double at 17 significant digits. Same input, same
/// bytes.
std::string dump_json(const Json& value, int indent = 2);
/// %.17g, with non-finite values spelled nan / inf / -inf.
std::string format_double(double x);

std::uint64_t fnv1a64(std::string_view bytes);
/// Hex FNV-1a of the compact canonical dump of `config`.
std::string config_hash(const Json& config);

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// {"dim": N, "re": [[...]], "im": [[...]]}
Json matrix_to_json(const ComplexMatrix& m);
ComplexMatrix matrix_from_json(const Json& j);

// [{"nu", "gamma_re", "gamma_im", "trials"}, ...]
Json plan_to_json(std::span<const Setting> settings);
std::vector<Setting> plan_from_json(const Json& j);

// {"eigenvalues": [...], "kept": k, "threshold": t}
Json transfer_report(const TransferFunction& tf);

// One {"j", "trials", "no_count"} object per line.
std::string records_to_jsonl(std::span<const MeasurementRecord> records);
std::vector<MeasurementRecord> records_from_jsonl(const std::string& text);

// {"rho", "loglik", "iterations", "residual", "converged", "kept", "g_eigenvalues"}
Json result_to_json(const ReconstructionResult& result, const TransferFunction& tf);

/// {"sigma_re", "sigma_im", "n_mes"}; unused cells and infinite errors are
/// null, the infinite ones are also listed under "infinite" as [m, n, part].
Json variance_to_json(const VarianceTable& table);

/// gamma_re,gamma_im,w_reconstructed,w_true,deficit
std::string wigner_csv(const WignerScan& scan);
/// gamma_re,gamma_im,sigma_w
std::string wigner_variance_csv(const WignerScan& scan);

// Config pieces ------------------------------------------------------------

/// {"type": "fock", "n"} | {"type": "coherent", "alpha_re", "alpha_im"} |
/// {"type": "superposition", "components": [{"n", "re", "im"}]} |
/// {"type": "file", "path"}. Pure states are normalized; `dim` is the
/// Fock cutoff unless the state object sets its own "dim".
DensityMatrix state_from_spec(const Json& spec, int dim,
                              const std::filesystem::path& base_dir = {});

/// Either an inline plan array, {"file": path}, or a grid
/// {"gammas": [{"re", "im"}], "efficiencies": [...] | {"min", "max", "count"},
///  "trials_per_setting" | "total_trials"}.
std::vector<Setting> plan_from_spec(const Json& spec, const std::filesystem::path& base_dir = {});

/// {"re_min", "re_max", "im_min", "im_max", "count" | "re_count"/"im_count"}
/// or {"center_re", "center_im", "half_width", "count"}.
GridSpec grid_from_spec(const Json& spec);

/// [values] or {"min", "max", "count"}.
std::vector<double> reals_from_spec(const Json& spec, const char* what);

}  // namespace biastomo
