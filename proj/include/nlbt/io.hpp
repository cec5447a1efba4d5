#pragma once

#include <nlbt/errors.hpp>
#include <nlbt/pipeline.hpp>

#include <json.hpp>

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace nlbt {

using json = nlohmann::json;

inline constexpr const char* kps_version = "kps-1";

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (!j.is_string()) throw parse_error("expected a number or decimal string");
  const std::string& s = j.get_ref<const std::string&>();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || (errno == ERANGE && std::isinf(v))) throw parse_error("bad number '" + s + "'");
  return v;
}

// Dense row-major array of decimal strings.
inline json matrix_to_json(const Matrix& M) {
  json a = json::array();
  for (Index i = 0; i < M.rows(); ++i)
    for (Index j = 0; j < M.cols(); ++j) a.push_back(format_double(M(i, j)));
  return a;
}

inline Matrix matrix_from_json(const json& a, Index rows, Index cols) {
  if (!a.is_array() || static_cast<Index>(a.size()) != rows * cols)
    throw parse_error("coefficient array must hold " + std::to_string(rows * cols) + " entries");
  Matrix M(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) M(i, j) = parse_double(a[i * cols + j]);
  return M;
}

inline json vector_to_json(const Vector& v) { return matrix_to_json(v.transpose()); }
inline Vector vector_from_json(const json& a) {
  if (!a.is_array()) throw parse_error("expected an array");
  return matrix_from_json(a, 1, static_cast<Index>(a.size())).transpose();
}

// [W_0, W_1, ..., W_d], W_k flattened row-major.
inline json field_to_json(const PolyVectorField& P) {
  json a = json::array();
  for (const Matrix& W : P.coeffs) a.push_back(matrix_to_json(W));
  return a;
}

inline PolyVectorField field_from_json(const json& a, Index rows, Index base) {
  if (!a.is_array() || a.empty()) throw parse_error("polynomial field must be a nonempty array of coefficient arrays");
  const int d = static_cast<int>(a.size()) - 1;
  if (d > 16) throw parse_error("polynomial degree too large");
  PolyVectorField P(rows, base, 0);
  P.coeffs.clear();
  for (int k = 0; k <= d; ++k) P.coeffs.push_back(matrix_from_json(a[k], rows, ipow(base, k)));
  return P;
}

inline Index dim_field(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_integer()) throw parse_error(std::string("missing integer field '") + key + "'");
  const auto v = j[key].get<long long>();
  if (v < 1 || v > 100000) throw parse_error(std::string("field '") + key + "' out of range");
  return static_cast<Index>(v);
}

inline const json& required(const json& j, const char* key) {
  if (!j.contains(key)) throw parse_error(std::string("missing field '") + key + "'");
  return j[key];
}

inline json system_to_json(const ControlAffineSystem& s) {
  json j;
  j["version"] = kps_version;
  j["n"] = s.n;
  j["m"] = s.m;
  j["p"] = s.p;
  j["degree"] = s.degree();
  j["f"] = field_to_json(s.f);
  j["g"] = json::array();
  for (const auto& g : s.g) j["g"].push_back(field_to_json(g));
  j["h"] = field_to_json(s.h);
  return j;
}

inline ControlAffineSystem system_from_json(const json& j) {
  if (!j.is_object()) throw parse_error("document is not a JSON object");
  if (!j.contains("version") || j["version"] != kps_version) throw parse_error("unsupported or missing version");
  ControlAffineSystem s;
  s.n = dim_field(j, "n");
  s.m = dim_field(j, "m");
  s.p = dim_field(j, "p");
  s.f = field_from_json(required(j, "f"), s.n, s.n);
  const json& g = required(j, "g");
  if (!g.is_array() || static_cast<Index>(g.size()) != s.m) throw parse_error("'g' must hold m input columns");
  for (const auto& gi : g) s.g.push_back(field_from_json(gi, s.n, s.n));
  s.h = field_from_json(required(j, "h"), s.p, s.n);
  const json& deg = required(j, "degree");
  if (!deg.is_number_integer() || deg.get<int>() != s.degree()) throw parse_error("'degree' disagrees with the coefficients");
  try {
    s.check();
  } catch (const std::invalid_argument& e) {
    throw parse_error(e.what());
  }
  return s;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw parse_error(path + ": " + e.what());
  }
}

inline void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << j.dump(1) << "\n";
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

inline std::string serialize_system(const ControlAffineSystem& s) { return system_to_json(s).dump(); }

inline ControlAffineSystem parse_system(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw parse_error(e.what());
  }
  return system_from_json(j);
}

// Everything a later reduce step needs, plus diagnostics.
inline json pipeline_to_json(const ControlAffineSystem& fom, const PipelineResult& r, int d_transf, int d_rom) {
  json j;
  j["version"] = "nlbt-balance-1";
  j["d_transf"] = d_transf;
  j["d_rom"] = d_rom;
  j["fom"] = system_to_json(fom);
  j["hankel"] = vector_to_json(r.hankel);
  j["sigma_condition"] = format_double(r.sigma_condition);
  j["sq_singular_values"] = json::array();
  for (const Vector& c : r.inod.sq_sv.c) j["sq_singular_values"].push_back(vector_to_json(c));
  auto energy = [](const EnergyFunction& E) {
    json a = json::array();
    for (const Vector& v : E.v) a.push_back(vector_to_json(v));
    return a;
  };
  j["Ec"] = energy(r.Ec);
  j["Eo"] = energy(r.Eo);
  j["Tbar"] = field_to_json(r.Tbar);
  j["Tbar1_inv"] = matrix_to_json(r.Tbar1_inv);
  j["P"] = field_to_json(r.P);
  j["balanced"] = system_to_json(r.realization.sys);
  j["times"] = {{"energy", r.times.energy}, {"inod", r.times.inod}, {"balance", r.times.balance},
                {"realization", r.times.realization}};
  return j;
}

inline BalancedRealization realization_from_json(const json& j) {
  if (!j.is_object() || !j.contains("version") || j["version"] != "nlbt-balance-1")
    throw parse_error("not a balance artifact");
  BalancedRealization br;
  br.sys = system_from_json(required(j, "balanced"));
  const Index n = br.sys.n;
  br.Tbar = field_from_json(required(j, "Tbar"), n, n);
  br.Tbar1_inv = matrix_from_json(required(j, "Tbar1_inv"), n, n);
  br.P = field_from_json(required(j, "P"), n, n);
  return br;
}

inline json rom_to_json(const ReducedOrderModel& rom) {
  json j = system_to_json(rom.sys);
  j["full_order"] = rom.T.rows;
  j["transform"] = field_to_json(rom.T);
  j["x0_map"] = field_to_json(rom.P);
  return j;
}

inline ReducedOrderModel rom_from_json(const json& j) {
  ReducedOrderModel rom;
  rom.sys = system_from_json(j);
  rom.r = rom.sys.n;
  const Index n = dim_field(j, "full_order");
  rom.T = field_from_json(required(j, "transform"), n, rom.r);
  rom.P = field_from_json(required(j, "x0_map"), rom.r, n);
  return rom;
}

}  // namespace nlbt
