#include "sysid/bounds.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "sysid/json_io.hpp"
#include "sysid/system.hpp"

namespace sysid {
namespace {

Matrix scalar(double v) {
  Matrix M(1, 1);
  M(0, 0) = v;
  return M;
}

// The fixture of the hand evaluation: psi_A = 1, psi = 1, phi_u = 1,
// phi_R = 1, rho_A^2 = 0.75, n = m = 1.
SystemConstants unit_constants() {
  SystemConstants k;
  k.psi = 1.0;
  k.psi_B = k.psi_u = k.psi_w = k.psi_eta = 1.0;
  k.phi_u = 1.0;
  k.psi_A = 1.0;
  k.rho_A = std::sqrt(0.75);
  k.phi_R = 1.0;
  k.phi_A = 1.0;
  k.n = 1;
  k.m = 1;
  return k;
}

TEST(SystemConstants, UnitSystem) {
  const Matrix I2 = Matrix::Identity(2, 2);
  const LinearSystem sys =
      make_linear_system(Matrix(0.5 * I2), Matrix(I2), Matrix(I2), Matrix(I2), Matrix(I2));
  const SystemConstants k = system_constants(sys);
  EXPECT_DOUBLE_EQ(k.psi_B, 1.0);
  EXPECT_DOUBLE_EQ(k.psi_u, 1.0);
  EXPECT_DOUBLE_EQ(k.psi_w, 1.0);
  EXPECT_DOUBLE_EQ(k.psi_eta, 1.0);
  EXPECT_DOUBLE_EQ(k.psi, 2.0);  // max{1*1 + 1, 1}
  EXPECT_DOUBLE_EQ(k.phi_u, 1.0);
}

TEST(SystemConstants, SmallCovariancesFloorAtOne) {
  const Matrix I2 = Matrix::Identity(2, 2);
  const LinearSystem sys = make_linear_system(Matrix(0.5 * I2), Matrix(I2), Matrix(0.5 * I2),
                                              Matrix(0.5 * I2), Matrix(0.5 * I2));
  const SystemConstants k = system_constants(sys);
  EXPECT_DOUBLE_EQ(k.psi_u, 1.0);
  EXPECT_DOUBLE_EQ(k.psi_w, 1.0);
  EXPECT_DOUBLE_EQ(k.psi_eta, 1.0);
  EXPECT_DOUBLE_EQ(k.psi, 2.0);
  EXPECT_DOUBLE_EQ(k.phi_u, 0.5);  // phi_u is not floored
}

TEST(SystemConstants, LargeBEntersQuadratically) {
  const Matrix I2 = Matrix::Identity(2, 2);
  const LinearSystem sys = make_linear_system(Matrix(0.5 * I2), Matrix(2.0 * I2), Matrix(I2),
                                              Matrix(I2), Matrix(I2));
  EXPECT_DOUBLE_EQ(system_constants(sys).psi, 5.0);  // max{4*1 + 1, 1}
}

TEST(SystemConstants, AutonomousNotApplicable) {
  const LinearSystem sys =
      make_linear_system(scalar(0.5), std::nullopt, scalar(1), std::nullopt, scalar(1));
  EXPECT_THROW(system_constants(sys), NotApplicableError);
}

TEST(SystemConstants, UnstableRejected) {
  const LinearSystem sys =
      make_linear_system(scalar(1.1), scalar(1), scalar(1), scalar(1), scalar(1));
  EXPECT_THROW(system_constants(sys), UnstableError);
}

TEST(KappaConstants, HandEvaluatedKappa1) {
  BoundConfig cfg;
  cfg.delta = 0.2;
  const KappaConstants kap = kappa_constants(unit_constants(), cfg);
  // sqrt(2) * sqrt(ln(100 ln 20)): inner argument 5/(0.25*0.2) * 1 * ln 20.
  const double expected = std::sqrt(2.0) * std::sqrt(std::log(100.0 * std::log(20.0)));
  EXPECT_NEAR(kap.kappa1, expected, 1e-12);
  EXPECT_NEAR(kap.kappa1, 3.377087172802337, 1e-6);
}

TEST(KappaConstants, Kappa1NondecreasingInPsiA) {
  BoundConfig cfg;
  cfg.delta = 0.2;
  double last = 0.0;
  for (double psi_A : {1.0, 2.0, 4.0}) {
    SystemConstants k = unit_constants();
    k.psi_A = psi_A;
    const double k1 = kappa_constants(k, cfg).kappa1;
    EXPECT_GE(k1, last);
    last = k1;
  }
}

TEST(KappaConstants, Kappa1IncreasesAsDeltaShrinks) {
  BoundConfig tight, loose;
  tight.delta = 0.01;
  loose.delta = 0.2;
  EXPECT_GT(kappa_constants(unit_constants(), tight).kappa1,
            kappa_constants(unit_constants(), loose).kappa1);
}

TEST(KappaConstants, DeltaRangeEnforced) {
  BoundConfig cfg;
  cfg.delta = 0.0;
  EXPECT_THROW(kappa_constants(unit_constants(), cfg), InvalidInputError);
  cfg.delta = 1.0;
  EXPECT_THROW(kappa_constants(unit_constants(), cfg), InvalidInputError);
}

TEST(KappaConstants, Kappa2NonnegativeAndFinite) {
  BoundConfig cfg;
  for (double delta : {0.01, 0.05, 0.2, 0.5}) {
    cfg.delta = delta;
    const KappaConstants kap = kappa_constants(unit_constants(), cfg);
    EXPECT_GE(kap.kappa2, 0.0);
    EXPECT_TRUE(std::isfinite(kap.kappa2));
  }
}

TEST(SampleThresholds, UnitExampleWithForcedKappa2) {
  BoundConfig cfg;
  cfg.delta = 0.2;
  cfg.kappa2_override = 1.0;
  const SystemConstants k = unit_constants();
  EXPECT_NEAR(iv_sample_threshold(k, cfg), 4.0, 1e-9);  // 1 * 1 * 1 * (1+1)^2
  EXPECT_NEAR(bc_sample_threshold(k, cfg), 4.0, 1e-9);
}

TEST(SampleThresholds, PhiAScaling) {
  BoundConfig cfg;
  cfg.delta = 0.2;
  cfg.kappa2_override = 1.0;
  SystemConstants k = unit_constants();
  k.phi_A = 0.5;
  EXPECT_NEAR(iv_sample_threshold(k, cfg), 16.0, 1e-9);  // 1/min{phi_A^2,1} = 4
  EXPECT_NEAR(bc_sample_threshold(k, cfg), 4.0, 1e-9);   // independent of phi_A
  k.phi_A = 2.0;
  EXPECT_NEAR(iv_sample_threshold(k, cfg), 4.0, 1e-9);  // clamped at 1
}

TEST(SampleThresholds, PhiAZeroSignalsInfinity) {
  BoundConfig cfg;
  cfg.delta = 0.2;
  SystemConstants k = unit_constants();
  k.phi_A = 0.0;
  EXPECT_TRUE(std::isinf(iv_sample_threshold(k, cfg)));
  EXPECT_TRUE(std::isfinite(bc_sample_threshold(k, cfg)));
}

TEST(SampleThresholds, DimensionScaling) {
  BoundConfig cfg;
  cfg.delta = 0.2;
  cfg.kappa2_override = 1.0;
  SystemConstants k = unit_constants();
  k.m = 3;
  EXPECT_NEAR(bc_sample_threshold(k, cfg), 16.0, 1e-9);  // n (m+n)^2 = 1 * 16
}

TEST(SampleThresholds, NondecreasingInDimensions) {
  BoundConfig cfg;
  cfg.delta = 0.1;
  double last_iv = 0.0, last_bc = 0.0;
  for (int i = 1; i <= 10; ++i) {
    SystemConstants k = unit_constants();
    k.n = i;
    k.m = i;
    const double thr_iv = iv_sample_threshold(k, cfg);
    const double thr_bc = bc_sample_threshold(k, cfg);
    EXPECT_GE(thr_iv, last_iv);
    EXPECT_GE(thr_bc, last_bc);
    last_iv = thr_iv;
    last_bc = thr_bc;
  }
}

TEST(IvErrorBound, HandEvaluatedValue) {
  BoundConfig cfg;
  cfg.delta = 0.2;
  const double bound = iv_error_bound(unit_constants(), cfg, 800.0);
  // kappa1 * sqrt(2/800) = kappa1 * 0.05
  EXPECT_NEAR(bound, 0.16885435864011686, 1e-6);
}

TEST(IvErrorBound, SqrtTScaling) {
  BoundConfig cfg;
  cfg.delta = 0.2;
  const SystemConstants k = unit_constants();
  const double b1 = iv_error_bound(k, cfg, 1000.0);
  const double b2 = iv_error_bound(k, cfg, 2000.0);
  EXPECT_NEAR(b2, b1 / std::sqrt(2.0), 1e-12);
}

TEST(IvErrorBound, PhiAClampedAboveOne) {
  BoundConfig cfg;
  cfg.delta = 0.2;
  SystemConstants k1 = unit_constants();
  SystemConstants k2 = unit_constants();
  k2.phi_A = 2.0;
  EXPECT_DOUBLE_EQ(iv_error_bound(k1, cfg, 800.0), iv_error_bound(k2, cfg, 800.0));
}

TEST(IvErrorBound, BelowThresholdCarriesBothNumbers) {
  BoundConfig cfg;
  cfg.delta = 0.2;
  cfg.kappa2_override = 100.0;  // threshold 400
  try {
    iv_error_bound(unit_constants(), cfg, 10.0);
    FAIL() << "expected PreconditionError";
  } catch (const PreconditionError& e) {
    EXPECT_DOUBLE_EQ(e.actual, 10.0);
    EXPECT_DOUBLE_EQ(e.required, 400.0);
  }
}

TEST(BcErrorBound, ZeroEpsIsPureSqrtTerm) {
  BoundConfig cfg;
  cfg.delta = 0.2;
  const SystemConstants k = unit_constants();
  const KappaConstants kap = kappa_constants(k, cfg);
  const double bound = bc_error_bound(k, cfg, 800.0, 0.0);
  EXPECT_NEAR(bound, kap.kappa1 * std::sqrt(2.0 / 800.0), 1e-12);
}

TEST(BcErrorBound, FloorTermAdds) {
  BoundConfig cfg;
  cfg.delta = 0.2;
  const SystemConstants k = unit_constants();
  const double base = bc_error_bound(k, cfg, 800.0, 0.0);
  EXPECT_NEAR(bc_error_bound(k, cfg, 800.0, 0.1), 0.1 + base, 1e-12);
}

TEST(BcErrorBound, NonincreasingInTWithFloorLimit) {
  BoundConfig cfg;
  cfg.delta = 0.2;
  const SystemConstants k = unit_constants();
  const double eps = 0.1;
  double last = std::numeric_limits<double>::infinity();
  for (double T : {1e3, 1e4, 1e5, 1e6, 1e7, 1e8, 1e9, 1e10, 1e11, 1e12}) {
    const double b = bc_error_bound(k, cfg, T, eps);
    EXPECT_LE(b, last);
    last = b;
  }
  EXPECT_NEAR(last, eps / (1.0 * 1.0), 1e-4);  // limit c1 eps / (min{phi_R^2,1} phi_u)
}

TEST(Bounds, BenchmarkSystemProducesFiniteValues) {
  // 20-state shift register with 10 inputs: every constant and threshold must
  // evaluate to something finite.
  const Matrix A = cyclic_shift_matrix(20, 0.8);
  const Matrix I20 = Matrix::Identity(20, 20);
  const LinearSystem sys = make_linear_system(A, stacked_identity_matrix(20, 10, 1.0), I20,
                                              Matrix(Matrix::Identity(10, 10)), I20);
  const SystemConstants k = system_constants(sys);
  BoundConfig cfg;
  const KappaConstants kap = kappa_constants(k, cfg);
  EXPECT_TRUE(std::isfinite(kap.kappa1));
  EXPECT_TRUE(std::isfinite(kap.kappa2));
  EXPECT_TRUE(std::isfinite(iv_sample_threshold(k, cfg)));
  EXPECT_TRUE(std::isfinite(bc_sample_threshold(k, cfg)));
  EXPECT_NEAR(k.rho_A, 0.9, 1e-9);
  EXPECT_NEAR(k.psi_A, 1.0, 1e-12);
  EXPECT_NEAR(k.phi_A, 0.8, 1e-9);
}

}  // namespace
}  // namespace sysid
