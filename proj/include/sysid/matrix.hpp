#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "sysid/errors.hpp"

namespace sysid {

// Dense real matrices, row-major to match the on-disk literal layout.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Gram inversions fail loudly above this condition estimate instead of
// returning garbage estimates.
inline constexpr double kConditionLimit = 1e12;

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw InvalidInputError(std::string(what) + ": non-finite entries");
  }
}

inline void require_nonempty(const Matrix& m, const char* what) {
  if (m.rows() == 0 || m.cols() == 0) {
    throw InvalidInputError(std::string(what) + ": empty matrix");
  }
}

// All singular values, descending. Jacobi for small inputs, divide-and-conquer
// above that.
inline Vector singular_values(const Matrix& m) {
  if (std::min(m.rows(), m.cols()) <= 32) {
    return Eigen::JacobiSVD<Matrix>(m).singularValues();
  }
  return Eigen::BDCSVD<Matrix>(m).singularValues();
}

inline double min_singular_value(const Matrix& m) {
  require_nonempty(m, "min_singular_value");
  require_finite(m, "min_singular_value");
  const Vector sv = singular_values(m);
  return sv(sv.size() - 1);
}

inline double operator_norm(const Matrix& m) {
  require_nonempty(m, "operator_norm");
  require_finite(m, "operator_norm");
  return singular_values(m)(0);
}

// Solves X * D = N for X, i.e. right-multiplication by D^{-1}, via a pivoted
// QR factorization of D^T. D^{-1} is never formed. Throws SingularGramError
// when the condition estimate sigma_max/sigma_min exceeds kConditionLimit.
// The condition estimate is reported through `condition_out` when given.
inline Matrix solve_right(const Matrix& N, const Matrix& D, double* condition_out = nullptr) {
  if (D.rows() != D.cols()) {
    throw InvalidInputError("solve_right: D must be square");
  }
  if (N.cols() != D.rows()) {
    throw InvalidInputError("solve_right: N has " + std::to_string(N.cols()) +
                            " columns, D is " + std::to_string(D.rows()) + "x" +
                            std::to_string(D.cols()));
  }
  require_finite(N, "solve_right N");
  require_finite(D, "solve_right D");

  const Vector sv = singular_values(D);
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  const double condition = (smin > 0.0) ? smax / smin
                                        : std::numeric_limits<double>::infinity();
  if (condition_out != nullptr) {
    *condition_out = condition;
  }
  if (!(condition <= kConditionLimit)) {
    throw SingularGramError("solve_right: matrix singular or ill-conditioned "
                            "(condition estimate " + std::to_string(condition) + ")",
                            condition);
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(D.transpose());
  Matrix xt = qr.solve(N.transpose());
  return xt.transpose();
}

// Factor of a symmetric PSD matrix: returns L with L * L^T = S, computed from
// a symmetric eigendecomposition. Eigenvalues in [-1e-10, 0] are clamped to
// zero so exactly-PSD covariances (including zero blocks) are accepted;
// anything below -1e-10 is rejected.
inline Matrix psd_factor(const Matrix& S) {
  if (S.rows() != S.cols()) {
    throw InvalidInputError("psd_factor: matrix must be square");
  }
  require_finite(S, "psd_factor");
  const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
  const double asymmetry = (S - Matrix(S.transpose())).cwiseAbs().maxCoeff();
  if (asymmetry > 1e-9 * scale) {
    throw InvalidInputError("psd_factor: matrix not symmetric (max asymmetry " +
                            std::to_string(asymmetry) + ")");
  }
  const Matrix sym = 0.5 * (S + Matrix(S.transpose()));
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() != Eigen::Success) {
    throw Error("psd_factor: eigendecomposition failed");
  }
  Vector lambda = eig.eigenvalues();
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) < -1e-10) {
      throw NotPsdError("psd_factor: eigenvalue " + std::to_string(lambda(i)) +
                        " below PSD tolerance");
    }
    lambda(i) = std::max(lambda(i), 0.0);
  }
  return Matrix(eig.eigenvectors()) * lambda.cwiseSqrt().asDiagonal();
}

}  // namespace sysid
