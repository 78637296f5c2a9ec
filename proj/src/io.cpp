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

#include "biastomo/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace biastomo {

namespace {

bool is_scalar(const Json& v) { return !v.is_array() && !v.is_object(); }

void emit(const Json& v, int indent, int depth, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
  switch (v.type()) {
    case Json::value_t::null:
      out += "null";
      return;
    case Json::value_t::boolean:
      out += v.get<bool>() ? "true" : "false";
      return;
    case Json::value_t::number_integer:
      out += std::to_string(v.get<std::int64_t>());
      return;
    case Json::value_t::number_unsigned:
      out += std::to_string(v.get<std::uint64_t>());
      return;
    case Json::value_t::number_float: {
      const double x = v.get<double>();
      out += std::isfinite(x) ? format_double(x) : "null";
      return;
    }
    case Json::value_t::string:
      out += v.dump();
      return;
    case Json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      // Flat numeric rows stay on one line.
      const bool flat = indent == 0 || std::all_of(v.begin(), v.end(), is_scalar);
      out += '[';
      bool first = true;
      for (const auto& item : v) {
        if (!first) out += flat ? ", " : ",";
        if (!flat) out += '\n' + pad;
        emit(item, indent, depth + 1, out);
        first = false;
      }
      if (!flat) out += '\n' + close_pad;
      out += ']';
      return;
    }
    case Json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (const auto& [key, item] : v.items()) {
        if (!first) out += ',';
        if (indent > 0) out += '\n' + pad;
        out += Json(key).dump();
        out += indent > 0 ? ": " : ":";
        emit(item, indent, depth + 1, out);
        first = false;
      }
      if (indent > 0) out += '\n' + close_pad;
      out += '}';
      return;
    }
    default:
      throw std::invalid_argument("unsupported JSON value");
  }
}

const Json& require(const Json& obj, const char* key, const char* what) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ConfigError(std::string(what) + ": missing \"" + key + "\"");
  }
  return obj.at(key);
}

double number(const Json& v, const char* what) {
  if (!v.is_number()) throw ConfigError(std::string(what) + ": expected a number");
  return v.get<double>();
}

std::int64_t integer(const Json& v, const char* what) {
  if (!v.is_number_integer()) throw ConfigError(std::string(what) + ": expected an integer");
  return v.get<std::int64_t>();
}

Json real_matrix_json(const Eigen::MatrixXd& m, bool null_nonfinite) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (null_nonfinite && !std::isfinite(m(r, c))) {
        row.push_back(nullptr);
      } else {
        row.push_back(m(r, c));
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd real_matrix_from_json(const Json& rows, int dim, const char* what) {
  if (!rows.is_array() || static_cast<int>(rows.size()) != dim) {
    throw ConfigError(std::string(what) + ": expected " + std::to_string(dim) + " rows");
  }
  Eigen::MatrixXd m(dim, dim);
  for (int r = 0; r < dim; ++r) {
    const auto& row = rows[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<int>(row.size()) != dim) {
      throw ConfigError(std::string(what) + ": ragged row");
    }
    for (int c = 0; c < dim; ++c) m(r, c) = number(row[static_cast<std::size_t>(c)], what);
  }
  return m;
}

Json vector_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string dump_json(const Json& value, int indent) {
  std::string out;
  emit(value, indent, 0, out);
  out += '\n';
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const Json& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(dump_json(config, 0))));
  return buf;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
  if (!out) throw ConfigError("write failed: " + path.string());
}

Json matrix_to_json(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("matrix must be square");
  Json out;
  out["dim"] = m.rows();
  out["re"] = real_matrix_json(m.real(), false);
  out["im"] = real_matrix_json(m.imag(), false);
  return out;
}

ComplexMatrix matrix_from_json(const Json& j) {
  const auto dim = integer(require(j, "dim", "matrix"), "matrix dim");
  if (dim < 1) throw ConfigError("matrix: dim must be positive");
  const auto d = static_cast<int>(dim);
  const Eigen::MatrixXd re = real_matrix_from_json(require(j, "re", "matrix"), d, "matrix re");
  const Eigen::MatrixXd im = real_matrix_from_json(require(j, "im", "matrix"), d, "matrix im");
  ComplexMatrix out(d, d);
  out.real() = re;
  out.imag() = im;
  return out;
}

Json plan_to_json(std::span<const Setting> settings) {
  Json out = Json::array();
  for (const auto& s : settings) {
    Json e;
    e["nu"] = s.nu;
    e["gamma_re"] = s.gamma.real();
    e["gamma_im"] = s.gamma.imag();
    e["trials"] = s.trials;
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<Setting> plan_from_json(const Json& j) {
  if (!j.is_array()) throw ConfigError("plan: expected an array");
  std::vector<Setting> out;
  for (const auto& e : j) {
    Setting s{number(require(e, "nu", "plan"), "nu"),
              {number(require(e, "gamma_re", "plan"), "gamma_re"),
               number(require(e, "gamma_im", "plan"), "gamma_im")},
              integer(require(e, "trials", "plan"), "trials")};
    try {
      s.validate();
    } catch (const std::exception& ex) {
      throw ConfigError(std::string("plan: ") + ex.what());
    }
    out.push_back(s);
  }
  if (out.empty()) throw ConfigError("plan: no settings");
  return out;
}

Json transfer_report(const TransferFunction& tf) {
  Json out;
  out["eigenvalues"] = vector_json(tf.spectrum.eigenvalues);
  out["kept"] = tf.kept_count;
  out["threshold"] = tf.rel_threshold;
  return out;
}

std::string records_to_jsonl(std::span<const MeasurementRecord> records) {
  std::string out;
  for (const auto& r : records) {
    Json e;
    e["j"] = r.setting_index;
    e["trials"] = r.trials;
    e["no_count"] = r.no_count;
    out += dump_json(e, 0);
  }
  return out;
}

std::vector<MeasurementRecord> records_from_jsonl(const std::string& text) {
  std::vector<MeasurementRecord> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json e;
    try {
      e = Json::parse(line);
    } catch (const Json::exception& ex) {
      throw ConfigError("records line " + std::to_string(line_no) + ": " + ex.what());
    }
    MeasurementRecord r{integer(require(e, "j", "record"), "j"),
                        integer(require(e, "trials", "record"), "trials"),
                        integer(require(e, "no_count", "record"), "no_count")};
    if (r.setting_index < 0 || r.trials < 0 || r.no_count < 0 || r.no_count > r.trials) {
      throw ConfigError("records line " + std::to_string(line_no) + ": inconsistent counts");
    }
    out.push_back(r);
  }
  return out;
}

Json result_to_json(const ReconstructionResult& result, const TransferFunction& tf) {
  Json out;
  out["rho"] = matrix_to_json(result.rho.matrix());
  Json trace = Json::array();
  for (double l : result.loglik_trace) trace.push_back(l);
  out["loglik"] = std::move(trace);
  out["iterations"] = result.iterations_used;
  out["residual"] = result.extremal_residual;
  out["converged"] = result.converged;
  out["kept"] = result.kept;
  out["g_eigenvalues"] = vector_json(tf.spectrum.eigenvalues);
  return out;
}

Json variance_to_json(const VarianceTable& table) {
  Json out;
  out["sigma_re"] = real_matrix_json(table.sigma_re, true);
  out["sigma_im"] = real_matrix_json(table.sigma_im, true);
  out["n_mes"] = table.n_mes;
  Json infinite = Json::array();
  for (int m = 0; m < table.dim; ++m) {
    for (int n = 0; n < table.dim; ++n) {
      if (std::isinf(table.sigma_re(m, n))) infinite.push_back(Json::array({m, n, "re"}));
      if (std::isinf(table.sigma_im(m, n))) infinite.push_back(Json::array({m, n, "im"}));
    }
  }
  out["infinite"] = std::move(infinite);
  return out;
}

std::string wigner_csv(const WignerScan& scan) {
  std::string out = "gamma_re,gamma_im,w_reconstructed,w_true,deficit\n";
  for (std::size_t i = 0; i < scan.points.size(); ++i) {
    const auto& p = scan.points[i];
    out += format_double(p.gamma.real()) + ',' + format_double(p.gamma.imag()) + ',' +
           format_double(p.w) + ',' + format_double(scan.w_true[i]) + ',' +
           format_double(p.deficit) + '\n';
  }
  return out;
}

std::string wigner_variance_csv(const WignerScan& scan) {
  std::string out = "gamma_re,gamma_im,sigma_w\n";
  for (const auto& p : scan.points) {
    out += format_double(p.gamma.real()) + ',' + format_double(p.gamma.imag()) + ',' +
           format_double(p.sigma_w) + '\n';
  }
  return out;
}

std::vector<double> reals_from_spec(const Json& spec, const char* what) {
  std::vector<double> out;
  if (spec.is_array()) {
    for (const auto& v : spec) out.push_back(number(v, what));
  } else if (spec.is_object()) {
    const double lo = number(require(spec, "min", what), what);
    const double hi = number(require(spec, "max", what), what);
    const auto count = integer(require(spec, "count", what), what);
    if (count < 1) throw ConfigError(std::string(what) + ": count must be >= 1");
    out = linspace(lo, hi, static_cast<int>(count));
  } else {
    throw ConfigError(std::string(what) + ": expected a list or {min, max, count}");
  }
  if (out.empty()) throw ConfigError(std::string(what) + ": empty");
  return out;
}

DensityMatrix state_from_spec(const Json& spec, int dim, const std::filesystem::path& base_dir) {
  const auto& type_value = require(spec, "type", "state");
  if (!type_value.is_string()) throw ConfigError("state: type must be a string");
  const auto type = type_value.get<std::string>();
  if (spec.contains("dim")) dim = static_cast<int>(integer(spec.at("dim"), "state dim"));
  if (dim < 1) throw ConfigError("state: dim must be positive");
  try {
    if (type == "fock") {
      const auto n = integer(require(spec, "n", "state"), "state n");
      if (n < 0 || n >= dim) throw ConfigError("state: Fock index outside the cutoff");
      return fock_state<double>(static_cast<int>(n), dim);
    }
    if (type == "coherent") {
      const cplx alpha(number(require(spec, "alpha_re", "state"), "alpha_re"),
                       number(require(spec, "alpha_im", "state"), "alpha_im"));
      return coherent_state<double>(alpha, dim);
    }
    if (type == "superposition") {
      const auto& comps = require(spec, "components", "state");
      if (!comps.is_array() || comps.empty()) throw ConfigError("state: empty superposition");
      ComplexVector psi = ComplexVector::Zero(dim);
      for (const auto& c : comps) {
        const auto n = integer(require(c, "n", "component"), "component n");
        if (n < 0 || n >= dim) throw ConfigError("state: component outside the cutoff");
        psi(n) += cplx(number(require(c, "re", "component"), "re"),
                       c.contains("im") ? number(c.at("im"), "im") : 0.0);
      }
      if (psi.norm() == 0.0) throw ConfigError("state: zero vector");
      return pure_state<double>(psi / psi.norm());
    }
    if (type == "file") {
      const auto& p = require(spec, "path", "state");
      if (!p.is_string()) throw ConfigError("state: path must be a string");
      ComplexMatrix m = matrix_from_json(read_json_file(resolve(base_dir, p.get<std::string>())));
      if (m.rows() < dim) m = embed(m, dim);
      return DensityMatrix(m);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("state: ") + e.what());
  }
  throw ConfigError("state: unknown type \"" + type + "\"");
}

std::vector<Setting> plan_from_spec(const Json& spec, const std::filesystem::path& base_dir) {
  if (spec.is_array()) return plan_from_json(spec);
  if (!spec.is_object()) throw ConfigError("plan: expected an array or an object");
  if (spec.contains("file")) {
    if (!spec.at("file").is_string()) throw ConfigError("plan: file must be a string");
    return plan_from_json(read_json_file(resolve(base_dir, spec.at("file").get<std::string>())));
  }
  const auto& gammas_spec = require(spec, "gammas", "plan");
  if (!gammas_spec.is_array() || gammas_spec.empty()) throw ConfigError("plan: no gammas");
  std::vector<cplx> gammas;
  for (const auto& g : gammas_spec) {
    gammas.emplace_back(number(require(g, "re", "gamma"), "gamma re"),
                        g.contains("im") ? number(g.at("im"), "gamma im") : 0.0);
  }
  const auto efficiencies = reals_from_spec(require(spec, "efficiencies", "plan"), "efficiencies");
  const std::size_t count = gammas.size() * efficiencies.size();

  std::vector<Setting> plan;
  try {
    if (spec.contains("trials_per_setting")) {
      plan = make_plan(gammas, efficiencies,
                       integer(spec.at("trials_per_setting"), "trials_per_setting"));
    } else {
      plan = make_plan(gammas, efficiencies, 0);
      const auto total = integer(require(spec, "total_trials", "plan"), "total_trials");
      const auto split = split_trials(total, count);
      for (std::size_t j = 0; j < count; ++j) plan[j].trials = split[j];
    }
    for (const auto& s : plan) s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("plan: ") + e.what());
  }
  return plan;
}

GridSpec grid_from_spec(const Json& spec) {
  if (!spec.is_object()) throw ConfigError("grid: expected an object");
  GridSpec g;
  if (spec.contains("half_width")) {
    const auto count = integer(require(spec, "count", "grid"), "grid count");
    g.re_count = g.im_count = static_cast<int>(count);
    const cplx c(spec.contains("center_re") ? number(spec.at("center_re"), "center_re") : 0.0,
                 spec.contains("center_im") ? number(spec.at("center_im"), "center_im") : 0.0);
    const double h = number(spec.at("half_width"), "half_width");
    g.re_min = c.real() - h;
    g.re_max = c.real() + h;
    g.im_min = c.imag() - h;
    g.im_max = c.imag() + h;
  } else {
    g.re_min = number(require(spec, "re_min", "grid"), "re_min");
    g.re_max = number(require(spec, "re_max", "grid"), "re_max");
    g.im_min = number(require(spec, "im_min", "grid"), "im_min");
    g.im_max = number(require(spec, "im_max", "grid"), "im_max");
    if (spec.contains("count")) {
      g.re_count = g.im_count = static_cast<int>(integer(spec.at("count"), "grid count"));
    } else {
      g.re_count = static_cast<int>(integer(require(spec, "re_count", "grid"), "re_count"));
      g.im_count = static_cast<int>(integer(require(spec, "im_count", "grid"), "im_count"));
    }
  }
  try {
    g.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
  return g;
}

}  // namespace biastomo
