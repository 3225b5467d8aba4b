#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sysid/matrix.hpp"
#include "sysid/random.hpp"

namespace sysid {

// The system tuple (A, B, Sigma_w, Sigma_u, Sigma_eta). B and Sigma_u are
// absent for autonomous systems (m = 0).
struct LinearSystem {
  Matrix A;
  std::optional<Matrix> B;
  Matrix sigma_w;
  std::optional<Matrix> sigma_u;
  Matrix sigma_eta;

  Eigen::Index n() const { return A.rows(); }
  Eigen::Index m() const { return B ? B->cols() : 0; }
  bool autonomous() const { return !B.has_value(); }
};

// Validating factory; every construction path goes through here.
inline LinearSystem make_linear_system(Matrix A, std::optional<Matrix> B, Matrix sigma_w,
                                       std::optional<Matrix> sigma_u, Matrix sigma_eta) {
  if (A.rows() == 0 || A.rows() != A.cols()) {
    throw InvalidInputError("LinearSystem: A must be square and non-empty");
  }
  require_finite(A, "LinearSystem A");
  const Eigen::Index n = A.rows();
  if (B.has_value() != sigma_u.has_value()) {
    throw InvalidInputError("LinearSystem: B and sigma_u must be given together");
  }
  if (B) {
    require_finite(*B, "LinearSystem B");
    if (B->rows() != n || B->cols() < 1) {
      throw InvalidInputError("LinearSystem: B must be n x m with m >= 1");
    }
    if (sigma_u->rows() != B->cols() || sigma_u->cols() != B->cols()) {
      throw InvalidInputError("LinearSystem: sigma_u must be m x m");
    }
    psd_factor(*sigma_u);  // throws if not PSD
  }
  if (sigma_w.rows() != n || sigma_w.cols() != n) {
    throw InvalidInputError("LinearSystem: sigma_w must be n x n");
  }
  if (sigma_eta.rows() != n || sigma_eta.cols() != n) {
    throw InvalidInputError("LinearSystem: sigma_eta must be n x n");
  }
  psd_factor(sigma_w);
  psd_factor(sigma_eta);
  return LinearSystem{std::move(A), std::move(B), std::move(sigma_w), std::move(sigma_u),
                      std::move(sigma_eta)};
}

// A simulated path: states x_0..x_T, observations xhat_0..xhat_T, inputs
// u_0..u_{T-1} (empty when autonomous). Realized noises are stored only when
// simulation was asked to capture them.
struct Trajectory {
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  std::vector<Vector> states;
  std::vector<Vector> observations;
  std::vector<Vector> inputs;
  std::optional<std::vector<Vector>> process_noise;      // w_0..w_{T-1}
  std::optional<std::vector<Vector>> observation_noise;  // eta_0..eta_T

  long T() const { return static_cast<long>(states.size()) - 1; }
  bool autonomous() const { return m == 0; }
  bool has_noise() const { return process_noise.has_value() && observation_noise.has_value(); }
};

struct SimulateOptions {
  // Overrides the random inputs with an explicit sequence of T m-vectors.
  std::optional<std::vector<Vector>> deterministic_inputs;
  // Stores the realized w/eta sequences on the trajectory (diagnostics only;
  // estimators never read them).
  bool capture_noise = false;
};

namespace detail {

inline RngStream sub_stream(const RngStream& base, const char* name) {
  RngStream s = base;
  s.stream_label = base.stream_label.empty() ? std::string(name)
                                             : base.stream_label + "/" + name;
  return s;
}

}  // namespace detail

// Runs x_{t+1} = A x_t + B u_t + w_t from x_0 = 0 and observes
// xhat_t = x_t + eta_t. The u/w/eta draws come from separate labeled
// sub-streams, so changing one covariance never perturbs the other sample
// paths.
inline Trajectory simulate(const LinearSystem& sys, long T, const RngStream& stream,
                           const SimulateOptions& options = {}) {
  if (T < 1) {
    throw InvalidInputError("simulate: T must be >= 1");
  }
  const Eigen::Index n = sys.n();
  const Eigen::Index m = sys.m();

  std::vector<Vector> inputs;
  if (m > 0) {
    if (options.deterministic_inputs) {
      inputs = *options.deterministic_inputs;
      if (static_cast<long>(inputs.size()) != T) {
        throw InvalidInputError("simulate: deterministic input sequence must have length T");
      }
      for (const Vector& u : inputs) {
        if (u.size() != m) {
          throw InvalidInputError("simulate: deterministic input has wrong dimension");
        }
      }
    } else {
      const Matrix Lu = psd_factor(*sys.sigma_u);
      inputs = draw_gaussian(detail::sub_stream(stream, "u"), Lu, static_cast<int>(T));
    }
  }
  const Matrix Lw = psd_factor(sys.sigma_w);
  const Matrix Le = psd_factor(sys.sigma_eta);
  std::vector<Vector> w = draw_gaussian(detail::sub_stream(stream, "w"), Lw, static_cast<int>(T));
  std::vector<Vector> eta =
      draw_gaussian(detail::sub_stream(stream, "eta"), Le, static_cast<int>(T + 1));

  Trajectory traj;
  traj.n = n;
  traj.m = m;
  traj.states.reserve(static_cast<std::size_t>(T) + 1);
  traj.observations.reserve(static_cast<std::size_t>(T) + 1);
  Vector x = Vector::Zero(n);
  traj.states.push_back(x);
  for (long t = 0; t < T; ++t) {
    Vector next = sys.A * x + w[static_cast<std::size_t>(t)];
    if (m > 0) {
      next += *sys.B * inputs[static_cast<std::size_t>(t)];
    }
    x = std::move(next);
    traj.states.push_back(x);
  }
  for (long t = 0; t <= T; ++t) {
    traj.observations.push_back(traj.states[static_cast<std::size_t>(t)] +
                                eta[static_cast<std::size_t>(t)]);
  }
  traj.inputs = std::move(inputs);
  if (options.capture_noise) {
    traj.process_noise = std::move(w);
    traj.observation_noise = std::move(eta);
  }
  return traj;
}

// R = [B, AB, ..., A^{n-1}B].
inline Matrix controllability_matrix(const LinearSystem& sys) {
  if (sys.autonomous()) {
    throw NotApplicableError("controllability_matrix: system is autonomous");
  }
  const Eigen::Index n = sys.n();
  const Eigen::Index m = sys.m();
  Matrix R(n, n * m);
  R.leftCols(m) = *sys.B;
  for (Eigen::Index i = 1; i < n; ++i) {
    R.middleCols(i * m, m) = sys.A * R.middleCols((i - 1) * m, m);
  }
  return R;
}

inline double spectral_radius(const Matrix& A) {
  require_nonempty(A, "spectral_radius");
  require_finite(A, "spectral_radius");
  Eigen::EigenSolver<Matrix> eig(A, /*computeEigenvectors=*/false);
  if (eig.info() != Eigen::Success) {
    throw Error("spectral_radius: eigenvalue computation failed");
  }
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

struct StabilityConstants {
  double psi_A = 1.0;
  double rho_A = 0.0;
  long horizon_used = 0;
};

// Certifies ||A^t|| <= psi_A * rho_A^{t-1}. rho_A defaults to the midpoint
// (1 + rho(A)) / 2, which keeps psi_A small while leaving geometric slack so
// the horizon search below terminates; pass rho_override to use another value
// in (rho(A), 1).
//
// psi_A = max(1, max_t ||A^t|| / rho_A^{t-1}); the scan stops at the first
// horizon where the ratio has decayed below tol * (running max), after which
// the running max cannot grow because ||A^t|| / rho_A^{t-1} shrinks
// geometrically at rate < rho(A)/rho_A eventually.
inline StabilityConstants stability_constants(const Matrix& A, double tol = 1e-10,
                                              std::optional<double> rho_override = {}) {
  if (A.rows() != A.cols() || A.rows() == 0) {
    throw InvalidInputError("stability_constants: A must be square and non-empty");
  }
  const double rho = spectral_radius(A);
  if (rho >= 1.0) {
    throw UnstableError("stability_constants: spectral radius " + std::to_string(rho) +
                        " >= 1");
  }
  double rho_A = rho_override.value_or(0.5 * (1.0 + rho));
  if (rho_A <= rho || rho_A >= 1.0) {
    throw InvalidInputError("stability_constants: rho_A override must lie in (rho(A), 1)");
  }
  constexpr long kMaxHorizon = 200000;
  double psi = 1.0;
  double rho_pow = 1.0;  // rho_A^{t-1}
  Matrix P = A;
  long t = 1;
  while (true) {
    const double ratio = operator_norm(P) / rho_pow;
    psi = std::max(psi, ratio);
    if (ratio < tol * psi) {
      return StabilityConstants{psi, rho_A, t};
    }
    if (t >= kMaxHorizon) {
      throw Error("stability_constants: horizon search exceeded " +
                  std::to_string(kMaxHorizon) + " steps");
    }
    P = P * A;
    rho_pow *= rho_A;
    ++t;
  }
}

// Numeric record of Assumptions 1-3 plus the input-magnitude condition.
// phi_R / phi_u / controllable / input_magnitude_ok apply to non-autonomous
// systems only and read NaN / false otherwise.
struct AssumptionReport {
  bool autonomous = false;
  bool stable = false;
  double psi_A = std::numeric_limits<double>::quiet_NaN();
  double rho_A = std::numeric_limits<double>::quiet_NaN();
  long horizon_used = 0;
  double phi_R = std::numeric_limits<double>::quiet_NaN();
  double phi_A = 0.0;
  double phi_u = std::numeric_limits<double>::quiet_NaN();
  bool controllable = false;
  bool a_invertible = false;
  bool input_magnitude_ok = false;
  double eps_eta = 0.0;
};

// phi_u >= 32 (psi_eta + eps_eta) / min{phi_R^2, 6}, the input-magnitude
// requirement for bias compensation.
inline bool input_magnitude_condition(double phi_u, double phi_R, double psi_eta,
                                      double eps_eta) {
  return phi_u >= 32.0 * (psi_eta + eps_eta) / std::min(phi_R * phi_R, 6.0);
}

// Fills the full report. An unstable A is reported (stable = false, rho_A and
// psi_A NaN) rather than thrown, so callers can still inspect the other
// verdicts; the standalone stability_constants keeps its throwing contract.
inline AssumptionReport check_assumptions(const LinearSystem& sys, double eps_eta = 0.0) {
  if (eps_eta < 0.0) {
    throw InvalidInputError("check_assumptions: eps_eta must be >= 0");
  }
  AssumptionReport report;
  report.autonomous = sys.autonomous();
  report.eps_eta = eps_eta;

  if (spectral_radius(sys.A) < 1.0) {
    const StabilityConstants sc = stability_constants(sys.A);
    report.stable = true;
    report.psi_A = sc.psi_A;
    report.rho_A = sc.rho_A;
    report.horizon_used = sc.horizon_used;
  }

  report.phi_A = min_singular_value(sys.A);
  report.a_invertible = report.phi_A > 1e-8 * operator_norm(sys.A);

  if (!sys.autonomous()) {
    const Matrix R = controllability_matrix(sys);
    report.phi_R = min_singular_value(R);
    report.controllable = report.phi_R > 1e-8 * operator_norm(R);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(
        Matrix(0.5 * (*sys.sigma_u + Matrix(sys.sigma_u->transpose()))));
    report.phi_u = std::max(0.0, eig.eigenvalues().minCoeff());
    const double psi_eta = std::max(operator_norm(sys.sigma_eta), 1.0);
    report.input_magnitude_ok =
        input_magnitude_condition(report.phi_u, report.phi_R, psi_eta, eps_eta);
  }
  return report;
}

}  // namespace sysid
