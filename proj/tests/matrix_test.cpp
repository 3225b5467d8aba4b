#include "sysid/matrix.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "sysid/random.hpp"

namespace sysid {
namespace {

Matrix cyclic_shift(Eigen::Index n, double scale) {
  Matrix P = Matrix::Zero(n, n);
  P(0, n - 1) = scale;
  for (Eigen::Index i = 1; i < n; ++i) P(i, i - 1) = scale;
  return P;
}

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t trial) {
  NormalSampler sampler(RngStream{99, "matrix_test", trial});
  Matrix M(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      M(r, c) = sampler.next();
    }
  }
  return M;
}

TEST(MinSingularValue, IdentityIsOne) {
  EXPECT_DOUBLE_EQ(min_singular_value(Matrix(Matrix::Identity(2, 2))), 1.0);
}

TEST(MinSingularValue, WideBlockMatrix) {
  // [I2 0.5*I2]: R R^T = 1.25 I, so every singular value is sqrt(1.25).
  Matrix R(2, 4);
  R << 1, 0, 0.5, 0, 0, 1, 0, 0.5;
  EXPECT_NEAR(min_singular_value(R), std::sqrt(1.25), 1e-12);
}

TEST(MinSingularValue, ZeroMatrix) {
  EXPECT_DOUBLE_EQ(min_singular_value(Matrix(Matrix::Zero(2, 2))), 0.0);
}

TEST(MinSingularValue, RejectsNonFinite) {
  Matrix M(1, 1);
  M(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(min_singular_value(M), InvalidInputError);
}

TEST(OperatorNorm, Diagonal) {
  Matrix D = Matrix::Zero(2, 2);
  D(0, 0) = 3;
  D(1, 1) = 1;
  EXPECT_DOUBLE_EQ(operator_norm(D), 3.0);
}

TEST(OperatorNorm, ScaledOrthogonal) {
  EXPECT_NEAR(operator_norm(cyclic_shift(20, 0.8)), 0.8, 1e-12);
}

TEST(OperatorNorm, RankOneColumn) {
  Matrix v(2, 1);
  v << 3, 4;
  EXPECT_NEAR(operator_norm(v), 5.0, 1e-12);
}

TEST(SingularValues, MatchClosedFormFor2x2) {
  // sigma^2 are the roots of the characteristic polynomial of M^T M.
  for (std::uint64_t trial = 0; trial < 50; ++trial) {
    const Matrix M = random_matrix(2, 2, trial);
    const Matrix G = M.transpose() * M;
    const double tr = G(0, 0) + G(1, 1);
    const double disc = std::sqrt((G(0, 0) - G(1, 1)) * (G(0, 0) - G(1, 1)) +
                                  4.0 * G(0, 1) * G(1, 0));
    const double hi = std::sqrt(0.5 * (tr + disc));
    const double lo = std::sqrt(std::max(0.0, 0.5 * (tr - disc)));
    EXPECT_NEAR(operator_norm(M), hi, 1e-9);
    EXPECT_NEAR(min_singular_value(M), lo, 1e-9);
  }
}

TEST(SingularValues, MinNeverExceedsOperatorNorm) {
  for (std::uint64_t trial = 0; trial < 30; ++trial) {
    const Matrix M = random_matrix(3 + trial % 4, 2 + trial % 5, 1000 + trial);
    EXPECT_LE(min_singular_value(M), operator_norm(M) + 1e-15);
  }
}

TEST(SolveRight, ScaledIdentity) {
  Matrix N(1, 2);
  N << 2, 4;
  const Matrix X = solve_right(N, Matrix(2.0 * Matrix::Identity(2, 2)));
  EXPECT_NEAR(X(0, 0), 1.0, 1e-14);
  EXPECT_NEAR(X(0, 1), 2.0, 1e-14);
}

TEST(SolveRight, UpperTriangularInverse) {
  Matrix D(2, 2);
  D << 2, 1, 0, 1;
  const Matrix X = solve_right(Matrix(Matrix::Identity(2, 2)), D);
  EXPECT_NEAR(X(0, 0), 0.5, 1e-14);
  EXPECT_NEAR(X(0, 1), -0.5, 1e-14);
  EXPECT_NEAR(X(1, 0), 0.0, 1e-14);
  EXPECT_NEAR(X(1, 1), 1.0, 1e-14);
}

TEST(SolveRight, SingularThrowsWithCondition) {
  try {
    solve_right(Matrix(Matrix::Identity(2, 2)), Matrix(Matrix::Zero(2, 2)));
    FAIL() << "expected SingularGramError";
  } catch (const SingularGramError& e) {
    EXPECT_TRUE(std::isinf(e.condition));
  }
}

TEST(SolveRight, ConditionLimitEnforced) {
  Matrix D = Matrix::Identity(2, 2);
  D(1, 1) = 1e-14;
  EXPECT_THROW(solve_right(Matrix(Matrix::Identity(2, 2)), D), SingularGramError);
}

TEST(SolveRight, ReportsCondition) {
  Matrix D = Matrix::Zero(2, 2);
  D(0, 0) = 4;
  D(1, 1) = 1;
  double cond = 0;
  solve_right(Matrix(Matrix::Identity(2, 2)), D, &cond);
  EXPECT_NEAR(cond, 4.0, 1e-12);
}

TEST(SolveRight, ResidualContract) {
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    const Eigen::Index d = 2 + trial % 5;
    Matrix D = random_matrix(d, d, 2000 + trial);
    D += 3.0 * Matrix::Identity(d, d);  // keep it comfortably nonsingular
    const Matrix N = random_matrix(3, d, 3000 + trial);
    const Matrix X = solve_right(N, D);
    const double residual = operator_norm(X * D - N);
    EXPECT_LE(residual,
              1e-8 * (operator_norm(N) + operator_norm(X) * operator_norm(D)));
  }
}

TEST(SolveRight, DimensionChecks) {
  EXPECT_THROW(solve_right(Matrix(Matrix::Identity(2, 2)), Matrix(Matrix::Zero(2, 3))),
               InvalidInputError);
  EXPECT_THROW(solve_right(Matrix(Matrix::Identity(2, 3)), Matrix(Matrix::Identity(2, 2))),
               InvalidInputError);
}

TEST(PsdFactor, Identity) {
  const Matrix L = psd_factor(Matrix(Matrix::Identity(3, 3)));
  EXPECT_NEAR(operator_norm(L * L.transpose() - Matrix::Identity(3, 3)), 0.0, 1e-12);
}

TEST(PsdFactor, Diagonal) {
  Matrix S = Matrix::Zero(2, 2);
  S(0, 0) = 4;
  S(1, 1) = 9;
  const Matrix L = psd_factor(S);
  EXPECT_NEAR(operator_norm(L * L.transpose() - S), 0.0, 1e-12);
}

TEST(PsdFactor, IndefiniteRejected) {
  Matrix S(2, 2);
  S << 1, 2, 2, 1;  // eigenvalues 3 and -1
  EXPECT_THROW(psd_factor(S), NotPsdError);
}

TEST(PsdFactor, AsymmetricRejected) {
  Matrix S(2, 2);
  S << 1, 0.5, 0, 1;
  EXPECT_THROW(psd_factor(S), InvalidInputError);
}

TEST(PsdFactor, ClampsTinyNegatives) {
  Matrix S(2, 2);
  S << 1, 1, 1, 1;  // rank one, eigenvalue 0 up to rounding
  const Matrix L = psd_factor(S);
  EXPECT_NEAR(operator_norm(L * L.transpose() - S), 0.0, 1e-8);
}

TEST(PsdFactor, RandomPsdRoundTrip) {
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    const Matrix M = random_matrix(4, 4, 4000 + trial);
    const Matrix S = M * M.transpose();
    const Matrix L = psd_factor(S);
    EXPECT_LE(operator_norm(L * L.transpose() - S), 1e-8 * std::max(1.0, operator_norm(S)));
  }
}

}  // namespace
}  // namespace sysid
