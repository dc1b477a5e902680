#pragma once

/// @file json_io.hpp
/// @brief JSON interchange for matrices and tolerances.
///
/// Matrix schema: {"rows": n, "cols": m, "re": [...], "im": [...]} with
/// row-major flattening. "im" may be omitted for real input.

#include "contraction_lab/numkit.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace clab {

using json = nlohmann::json;

class JsonFormatError : public InputError {
 public:
  using InputError::InputError;
};

inline json matrix_to_json(const CMatrix& m) {
  json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  std::vector<double> re, im;
  re.reserve(static_cast<size_t>(m.size()));
  im.reserve(static_cast<size_t>(m.size()));
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) {
      re.push_back(m(r, c).real());
      im.push_back(m(r, c).imag());
    }
  j["re"] = re;
  j["im"] = im;
  return j;
}

inline CMatrix matrix_from_json(const json& j) {
  if (!j.is_object()) throw JsonFormatError("matrix JSON must be an object");
  for (const char* key : {"rows", "cols", "re"})
    if (!j.contains(key)) throw JsonFormatError(std::string("matrix JSON lacks \"") + key + "\"");
  if (!j["rows"].is_number_integer() || !j["cols"].is_number_integer())
    throw JsonFormatError("rows/cols must be integers");
  long long rows = j["rows"].get<long long>();
  long long cols = j["cols"].get<long long>();
  if (rows < 0 || cols < 0) throw JsonFormatError("rows/cols must be nonnegative");
  const size_t n = static_cast<size_t>(rows * cols);
  auto read = [&](const char* key) {
    std::vector<double> v;
    if (!j.contains(key)) return std::vector<double>(n, 0.0);
    if (!j[key].is_array()) throw JsonFormatError(std::string("\"") + key + "\" must be an array");
    for (const auto& x : j[key]) {
      if (!x.is_number()) throw JsonFormatError(std::string("\"") + key + "\" must hold numbers");
      v.push_back(x.get<double>());
    }
    if (v.size() != n)
      throw JsonFormatError(std::string("\"") + key + "\" has " + std::to_string(v.size()) +
                            " entries, expected rows*cols = " + std::to_string(n));
    return v;
  };
  std::vector<double> re = read("re"), im = read("im");
  CMatrix m(rows, cols);
  for (long long r = 0; r < rows; ++r)
    for (long long c = 0; c < cols; ++c) {
      size_t k = static_cast<size_t>(r * cols + c);
      m(r, c) = cplx(re[k], im[k]);
    }
  if (!all_finite(m)) throw JsonFormatError("matrix entries must be finite");
  return m;
}

inline json vector_to_json(const CVector& v) {
  json j;
  std::vector<double> re, im;
  for (Index i = 0; i < v.size(); ++i) {
    re.push_back(v(i).real());
    im.push_back(v(i).imag());
  }
  j["re"] = re;
  j["im"] = im;
  return j;
}

inline json tolerances_to_json(const Tolerances& t) {
  return json{{"rank_rtol", t.rank_rtol},         {"psd_atol", t.psd_atol},
              {"conv_tol", t.conv_tol},           {"contraction_slack", t.contraction_slack},
              {"big_ratio", t.big_ratio},         {"max_level", t.max_level},
              {"grid_points", t.grid_points}};
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw JsonFormatError(origin + ": " + e.what());
  }
}

inline CMatrix load_matrix(const std::string& path) {
  return matrix_from_json(parse_json_text(read_text_file(path), path));
}

}  // namespace clab
