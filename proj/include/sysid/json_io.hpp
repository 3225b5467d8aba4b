#pragma once

#include <fstream>
#include <optional>
#include <string>

#include <json.hpp>

#include "sysid/estimators.hpp"
#include "sysid/matrix.hpp"
#include "sysid/system.hpp"

namespace sysid {

using Json = nlohmann::json;

// ---- Matrix literals -------------------------------------------------------
//
// Structured forms accepted anywhere a matrix appears in a config file:
//   {"kind":"dense","rows":r,"cols":c,"data":[... row-major ...]}
//   {"kind":"identity","dim":n,"scale":s}
//   {"kind":"cyclic_shift","dim":n,"scale":s}      s * [[0,1],[I_{n-1},0]]
//   {"kind":"stacked_identity","rows":r,"cols":c,"scale":s}   s * [I; 0]
//   {"kind":"zero","rows":r,"cols":c}

inline Matrix cyclic_shift_matrix(Eigen::Index dim, double scale) {
  if (dim < 1) {
    throw InvalidInputError("cyclic_shift: dim must be >= 1");
  }
  Matrix P = Matrix::Zero(dim, dim);
  P(0, dim - 1) = scale;
  for (Eigen::Index i = 1; i < dim; ++i) {
    P(i, i - 1) = scale;
  }
  return P;
}

inline Matrix stacked_identity_matrix(Eigen::Index rows, Eigen::Index cols, double scale) {
  if (rows < 1 || cols < 1) {
    throw InvalidInputError("stacked_identity: rows/cols must be >= 1");
  }
  Matrix M = Matrix::Zero(rows, cols);
  for (Eigen::Index i = 0; i < std::min(rows, cols); ++i) {
    M(i, i) = scale;
  }
  return M;
}

inline Matrix matrix_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind")) {
    throw InvalidInputError("matrix literal: expected an object with a \"kind\" field");
  }
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "dense") {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    if (rows < 1 || cols < 1) {
      throw InvalidInputError("dense literal: rows/cols must be >= 1");
    }
    const auto& data = j.at("data");
    if (!data.is_array() || static_cast<Eigen::Index>(data.size()) != rows * cols) {
      throw InvalidInputError("dense literal: data length must equal rows*cols");
    }
    Matrix M(rows, cols);
    Eigen::Index idx = 0;
    for (const auto& v : data) {
      if (!v.is_number()) {
        throw InvalidInputError("dense literal: data entries must be numbers");
      }
      M(idx / cols, idx % cols) = v.get<double>();
      ++idx;
    }
    require_finite(M, "dense literal");
    return M;
  }
  if (kind == "identity") {
    const auto dim = j.at("dim").get<Eigen::Index>();
    const double scale = j.value("scale", 1.0);
    if (dim < 1) {
      throw InvalidInputError("identity literal: dim must be >= 1");
    }
    return Matrix(scale * Matrix::Identity(dim, dim));
  }
  if (kind == "cyclic_shift") {
    return cyclic_shift_matrix(j.at("dim").get<Eigen::Index>(), j.value("scale", 1.0));
  }
  if (kind == "stacked_identity") {
    return stacked_identity_matrix(j.at("rows").get<Eigen::Index>(),
                                   j.at("cols").get<Eigen::Index>(), j.value("scale", 1.0));
  }
  if (kind == "zero") {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    if (rows < 1 || cols < 1) {
      throw InvalidInputError("zero literal: rows/cols must be >= 1");
    }
    return Matrix(Matrix::Zero(rows, cols));
  }
  throw InvalidInputError("matrix literal: unknown kind \"" + kind + "\"");
}

inline Json matrix_to_json(const Matrix& M) {
  Json j;
  j["kind"] = "dense";
  j["rows"] = M.rows();
  j["cols"] = M.cols();
  Json data = Json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    for (Eigen::Index c = 0; c < M.cols(); ++c) {
      data.push_back(M(r, c));
    }
  }
  j["data"] = std::move(data);
  return j;
}

// ---- LinearSystem ----------------------------------------------------------

inline LinearSystem system_from_json(const Json& j) {
  if (!j.is_object()) {
    throw InvalidInputError("system: expected a JSON object");
  }
  Matrix A = matrix_from_json(j.at("A"));
  std::optional<Matrix> B;
  std::optional<Matrix> Su;
  if (j.contains("B")) {
    B = matrix_from_json(j.at("B"));
  }
  if (j.contains("sigma_u")) {
    Su = matrix_from_json(j.at("sigma_u"));
  }
  Matrix Sw = matrix_from_json(j.at("sigma_w"));
  Matrix Se = matrix_from_json(j.at("sigma_eta"));
  return make_linear_system(std::move(A), std::move(B), std::move(Sw), std::move(Su),
                            std::move(Se));
}

inline Json system_to_json(const LinearSystem& sys) {
  Json j;
  j["A"] = matrix_to_json(sys.A);
  if (!sys.autonomous()) {
    j["B"] = matrix_to_json(*sys.B);
    j["sigma_u"] = matrix_to_json(*sys.sigma_u);
  }
  j["sigma_w"] = matrix_to_json(sys.sigma_w);
  j["sigma_eta"] = matrix_to_json(sys.sigma_eta);
  return j;
}

// ---- Estimate --------------------------------------------------------------

inline Json estimate_to_json(const Estimate& est) {
  Json j;
  j["method"] = method_name(est.method);
  j["n"] = est.A_hat.rows();
  j["m"] = est.B_hat ? est.B_hat->cols() : 0;
  j["A_hat"] = matrix_to_json(est.A_hat);
  if (est.B_hat) {
    j["B_hat"] = matrix_to_json(*est.B_hat);
  }
  j["gram_condition"] = est.gram_condition;
  j["T_used"] = est.T_used;
  return j;
}

inline Estimate estimate_from_json(const Json& j) {
  Estimate est;
  const auto method = method_from_name(j.at("method").get<std::string>());
  if (!method) {
    throw InvalidInputError("estimate: unknown method");
  }
  est.method = *method;
  est.A_hat = matrix_from_json(j.at("A_hat"));
  if (j.contains("B_hat")) {
    est.B_hat = matrix_from_json(j.at("B_hat"));
  }
  est.gram_condition = j.at("gram_condition").get<double>();
  est.T_used = j.at("T_used").get<long>();
  return est;
}

// ---- AssumptionReport ------------------------------------------------------

// The verdict splits the requirements by estimator: the instrumental-variable
// theory needs stability, controllability and invertible A; bias compensation
// needs stability, controllability and the input-magnitude condition. For
// autonomous systems the input-side checks do not apply.
struct AssumptionVerdict {
  bool stability_ok = false;
  bool iv_ok = false;
  bool bc_ok = false;
  bool all_required_ok = false;
};

inline AssumptionVerdict assumption_verdict(const AssumptionReport& r) {
  AssumptionVerdict v;
  v.stability_ok = r.stable;
  if (r.autonomous) {
    v.iv_ok = r.stable && r.a_invertible;
    v.bc_ok = r.stable;
  } else {
    v.iv_ok = r.stable && r.controllable && r.a_invertible;
    v.bc_ok = r.stable && r.controllable && r.input_magnitude_ok;
  }
  v.all_required_ok = v.stability_ok && v.iv_ok && v.bc_ok;
  return v;
}

inline Json report_to_json(const AssumptionReport& r) {
  Json j;
  j["autonomous"] = r.autonomous;
  j["stable"] = r.stable;
  if (r.stable) {
    j["psi_A"] = r.psi_A;
    j["rho_A"] = r.rho_A;
  } else {
    j["psi_A"] = nullptr;
    j["rho_A"] = "unstable";
  }
  j["horizon_used"] = r.horizon_used;
  j["phi_A"] = r.phi_A;
  j["a_invertible"] = r.a_invertible;
  j["eps_eta"] = r.eps_eta;
  if (r.autonomous) {
    j["phi_R"] = nullptr;
    j["phi_u"] = nullptr;
    j["controllable"] = nullptr;
    j["input_magnitude_ok"] = nullptr;
  } else {
    j["phi_R"] = r.phi_R;
    j["phi_u"] = r.phi_u;
    j["controllable"] = r.controllable;
    j["input_magnitude_ok"] = r.input_magnitude_ok;
  }
  const AssumptionVerdict v = assumption_verdict(r);
  j["verdict"] = Json{{"stability_ok", v.stability_ok},
                      {"iv_ok", v.iv_ok},
                      {"bc_ok", v.bc_ok},
                      {"all_required_ok", v.all_required_ok}};
  return j;
}

// ---- File helpers ----------------------------------------------------------

inline Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path);
  }
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw InvalidInputError("JSON parse failure in " + path + ": " + e.what());
  }
  return j;
}

inline void save_json_file(const Json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open " + path + " for writing");
  }
  out << j.dump(2) << "\n";
  if (!out) {
    throw IoError("write failure on " + path);
  }
}

}  // namespace sysid
