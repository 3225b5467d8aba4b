#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "sysid/matrix.hpp"
#include "sysid/system.hpp"

namespace sysid {

// Scalar constants entering the error-bound and sample-size formulas. The
// psi_* values are floored at 1; phi_u is the raw smallest singular value of
// Sigma_u.
struct SystemConstants {
  double psi = 1.0;
  double psi_B = 1.0;
  double psi_u = 1.0;
  double psi_w = 1.0;
  double psi_eta = 1.0;
  double phi_u = 0.0;
  double psi_A = 1.0;
  double rho_A = 0.0;
  double phi_R = 0.0;
  double phi_A = 0.0;
  int n = 0;
  int m = 0;
};

// delta is the per-event failure probability fed into the logarithms; c1 and
// c2 are the absolute constants of the bounds, which the analysis leaves
// unspecified -- they default to 1 and are recorded in every output.
// kappa2_override is a test hook that replaces the computed kappa2 so the
// polynomial scaling of the thresholds can be checked in isolation.
struct BoundConfig {
  double delta = 0.05;
  double c1 = 1.0;
  double c2 = 1.0;
  std::optional<double> kappa2_override;
};

struct KappaConstants {
  double kappa1 = 0.0;
  double kappa2 = 0.0;
};

// Evaluates every constant from the system matrices. Requires a stable,
// non-autonomous system (phi_u and psi_B have no meaning without inputs).
inline SystemConstants system_constants(const LinearSystem& sys) {
  if (sys.autonomous()) {
    throw NotApplicableError("system_constants: autonomous system has no input constants");
  }
  SystemConstants k;
  k.n = static_cast<int>(sys.n());
  k.m = static_cast<int>(sys.m());
  k.psi_B = std::max(operator_norm(*sys.B), 1.0);
  k.psi_u = std::max(operator_norm(*sys.sigma_u), 1.0);
  k.psi_w = std::max(operator_norm(sys.sigma_w), 1.0);
  k.psi_eta = std::max(operator_norm(sys.sigma_eta), 1.0);
  k.psi = std::max(k.psi_B * k.psi_B * k.psi_u + k.psi_w, k.psi_eta);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(
      Matrix(0.5 * (*sys.sigma_u + Matrix(sys.sigma_u->transpose()))));
  k.phi_u = std::max(0.0, eig.eigenvalues().minCoeff());
  const StabilityConstants sc = stability_constants(sys.A);  // throws when unstable
  k.psi_A = sc.psi_A;
  k.rho_A = sc.rho_A;
  k.phi_R = min_singular_value(controllability_matrix(sys));
  k.phi_A = min_singular_value(sys.A);
  return k;
}

namespace detail {

inline void require_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw InvalidInputError("BoundConfig: delta must lie strictly inside (0, 1)");
  }
}

inline double clamped(double v) { return std::min(v, 1.0); }

}  // namespace detail

// kappa1 = psi_A * max{sqrt(psi/phi_u), psi/phi_u}
//        * sqrt((min{phi_R^2,1} phi_u + 1) / (min{phi_R^6,1} phi_u))
//        * sqrt(log(5 psi psi_A^2 / ((1-rho_A^2) delta) * n * log(4/delta)))
// kappa2 = psi^2 psi_A^4 / (min{phi_R^4,1} phi_u^2 (1-rho_A^2))
//        * log(9n/delta)
//        * log(9 psi psi_A^4 / ((1-rho_A^2) delta) * (m+n) * log(9n/delta))
inline KappaConstants kappa_constants(const SystemConstants& k, const BoundConfig& cfg) {
  detail::require_delta(cfg.delta);
  if (!(k.rho_A < 1.0)) {
    throw InvalidInputError("kappa_constants: rho_A must be < 1");
  }
  const double one_minus_rho2 = 1.0 - k.rho_A * k.rho_A;
  const double phi_R2 = detail::clamped(k.phi_R * k.phi_R);
  const double phi_R4 = detail::clamped(std::pow(k.phi_R, 4.0));
  const double phi_R6 = detail::clamped(std::pow(k.phi_R, 6.0));

  KappaConstants out;
  const double ratio = k.psi / k.phi_u;
  out.kappa1 = k.psi_A * std::max(std::sqrt(ratio), ratio) *
               std::sqrt((phi_R2 * k.phi_u + 1.0) / (phi_R6 * k.phi_u)) *
               std::sqrt(std::log(5.0 * k.psi * k.psi_A * k.psi_A /
                                  (one_minus_rho2 * cfg.delta) *
                                  static_cast<double>(k.n) * std::log(4.0 / cfg.delta)));
  if (cfg.kappa2_override) {
    out.kappa2 = *cfg.kappa2_override;
  } else {
    const double log1 = std::log(9.0 * static_cast<double>(k.n) / cfg.delta);
    out.kappa2 = k.psi * k.psi * std::pow(k.psi_A, 4.0) /
                 (phi_R4 * k.phi_u * k.phi_u * one_minus_rho2) * log1 *
                 std::log(9.0 * k.psi * std::pow(k.psi_A, 4.0) /
                          (one_minus_rho2 * cfg.delta) *
                          static_cast<double>(k.m + k.n) * log1);
  }
  return out;
}

// T >= c2 kappa2 / min{phi_A^2, 1} * n (m+n)^2. phi_A = 0 yields +inf: no
// finite sample size certifies the instrumental-variable estimator.
inline double iv_sample_threshold(const SystemConstants& k, const BoundConfig& cfg) {
  const KappaConstants kap = kappa_constants(k, cfg);
  if (k.phi_A <= 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  const double dims = static_cast<double>(k.n) *
                      static_cast<double>(k.m + k.n) * static_cast<double>(k.m + k.n);
  return cfg.c2 * kap.kappa2 / detail::clamped(k.phi_A * k.phi_A) * dims;
}

// T >= c2 kappa2 n (m+n)^2.
inline double bc_sample_threshold(const SystemConstants& k, const BoundConfig& cfg) {
  const KappaConstants kap = kappa_constants(k, cfg);
  const double dims = static_cast<double>(k.n) *
                      static_cast<double>(k.m + k.n) * static_cast<double>(k.m + k.n);
  return cfg.c2 * kap.kappa2 * dims;
}

// c1 kappa1 / min{phi_A, 1} * sqrt((m+n)/T), valid for T above the
// instrumental-variable sample threshold.
inline double iv_error_bound(const SystemConstants& k, const BoundConfig& cfg, double T) {
  const double threshold = iv_sample_threshold(k, cfg);
  if (!(T >= threshold)) {
    throw PreconditionError("iv_error_bound: T = " + std::to_string(T) +
                                " below sample threshold " + std::to_string(threshold),
                            T, threshold);
  }
  const KappaConstants kap = kappa_constants(k, cfg);
  return cfg.c1 * kap.kappa1 / detail::clamped(k.phi_A) *
         std::sqrt(static_cast<double>(k.m + k.n) / T);
}

// c1 eps_eta / (min{phi_R^2, 1} phi_u) + c1 kappa1 sqrt((m+n)/T). The first
// term is the irreducible floor from the covariance estimation error; it does
// not shrink with T. The input-magnitude condition is reported by
// check_assumptions and deliberately not re-enforced here, so the bound value
// stays computable on systems that violate it.
inline double bc_error_bound(const SystemConstants& k, const BoundConfig& cfg, double T,
                             double eps_eta) {
  if (eps_eta < 0.0) {
    throw InvalidInputError("bc_error_bound: eps_eta must be >= 0");
  }
  const double threshold = bc_sample_threshold(k, cfg);
  if (!(T >= threshold)) {
    throw PreconditionError("bc_error_bound: T = " + std::to_string(T) +
                                " below sample threshold " + std::to_string(threshold),
                            T, threshold);
  }
  const KappaConstants kap = kappa_constants(k, cfg);
  return cfg.c1 * eps_eta / (detail::clamped(k.phi_R * k.phi_R) * k.phi_u) +
         cfg.c1 * kap.kappa1 * std::sqrt(static_cast<double>(k.m + k.n) / T);
}

}  // namespace sysid
