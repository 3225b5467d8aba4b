#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "sysid/matrix.hpp"
#include "sysid/system.hpp"

namespace sysid {

enum class Method { LS, IV, BC, HoKalman };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::LS: return "LS";
    case Method::IV: return "IV";
    case Method::BC: return "BC";
    case Method::HoKalman: return "HoKalman";
  }
  return "?";
}

inline std::optional<Method> method_from_name(const std::string& s) {
  if (s == "LS") return Method::LS;
  if (s == "IV") return Method::IV;
  if (s == "BC") return Method::BC;
  if (s == "HoKalman") return Method::HoKalman;
  return std::nullopt;
}

// A recovered (A_hat, B_hat) with the conditioning of the inverted matrix and
// the number of summands used. B_hat is absent for autonomous estimates.
struct Estimate {
  Method method = Method::LS;
  Matrix A_hat;
  std::optional<Matrix> B_hat;
  double gram_condition = 0.0;
  long T_used = 0;
};

struct BiasDecomposition {
  Matrix delta1;
  Matrix delta2;
};

namespace detail {

// Columns xhat_0..xhat_{T-1} stacked over inputs when present: the regressor
// matrix [zhat_0 ... zhat_{T-1}].
inline Matrix regressor_matrix(const Trajectory& traj, long first, long count) {
  const Eigen::Index d = traj.n + traj.m;
  Matrix Z(d, count);
  for (long j = 0; j < count; ++j) {
    const std::size_t t = static_cast<std::size_t>(first + j);
    Z.col(j).head(traj.n) = traj.observations[t];
    if (traj.m > 0) {
      Z.col(j).tail(traj.m) = traj.inputs[t];
    }
  }
  return Z;
}

inline Matrix target_matrix(const std::vector<Vector>& obs, long first, long count) {
  Matrix Y(obs[0].size(), count);
  for (long j = 0; j < count; ++j) {
    Y.col(j) = obs[static_cast<std::size_t>(first + j)];
  }
  return Y;
}

struct LsCore {
  Matrix E;        // n x d
  Matrix gram;     // d x d, sum zhat zhat^T
  double condition = 0.0;
};

inline LsCore ls_core(const Matrix& Z, const Matrix& Y) {
  LsCore out;
  out.gram = Z * Z.transpose();
  out.E = solve_right(Y * Z.transpose(), out.gram, &out.condition);
  return out;
}

inline Estimate split_estimate(Method method, const Matrix& E, Eigen::Index n, Eigen::Index m,
                               double condition, long T_used) {
  Estimate est;
  est.method = method;
  est.A_hat = E.leftCols(n);
  if (m > 0) {
    est.B_hat = E.rightCols(m);
  }
  est.gram_condition = condition;
  est.T_used = T_used;
  return est;
}

inline Matrix observation_matrix(const std::vector<Vector>& obs, long first, long count) {
  return target_matrix(obs, first, count);
}

}  // namespace detail

// Naive least squares over raw observations of an autonomous system:
// A_hat = (sum xhat_{t+1} xhat_t^T)(sum xhat_t xhat_t^T)^{-1}, t = 0..T-1.
inline Estimate ls_estimate_autonomous(const std::vector<Vector>& observations) {
  const long T = static_cast<long>(observations.size()) - 1;
  if (T < 1) {
    throw InvalidInputError("ls_estimate_autonomous: need at least two observations");
  }
  const Eigen::Index n = observations[0].size();
  if (T < n) {
    throw InvalidInputError("ls_estimate_autonomous: T must be >= n");
  }
  const Matrix Z = detail::observation_matrix(observations, 0, T);
  const Matrix Y = detail::observation_matrix(observations, 1, T);
  detail::LsCore core = detail::ls_core(Z, Y);
  return detail::split_estimate(Method::LS, core.E, n, 0, core.condition, T);
}

// E_hat_LS = (sum xhat_{t+1} zhat_t^T)(sum zhat_t zhat_t^T)^{-1} with
// zhat_t = [xhat_t; u_t], t = 0..T-1. Autonomous trajectories dispatch to the
// observation-only form.
inline Estimate ls_estimate(const Trajectory& traj) {
  if (traj.autonomous()) {
    return ls_estimate_autonomous(traj.observations);
  }
  const long T = traj.T();
  if (T < traj.n + traj.m) {
    throw InvalidInputError("ls_estimate: T must be >= n + m");
  }
  const Matrix Z = detail::regressor_matrix(traj, 0, T);
  const Matrix Y = detail::target_matrix(traj.observations, 1, T);
  detail::LsCore core = detail::ls_core(Z, Y);
  return detail::split_estimate(Method::LS, core.E, traj.n, traj.m, core.condition, T);
}

// Instrumental-variable estimate for autonomous observations:
// A_hat = (sum xhat_{t+1} xhat_{t-1}^T)(sum xhat_t xhat_{t-1}^T)^{-1},
// t = 1..T-1.
inline Estimate iv_estimate_autonomous(const std::vector<Vector>& observations) {
  const long T = static_cast<long>(observations.size()) - 1;
  const Eigen::Index n = T >= 0 && !observations.empty() ? observations[0].size() : 0;
  if (T < n + 1 || T < 2) {
    throw InvalidInputError("iv_estimate_autonomous: T must be >= n + 1");
  }
  const long count = T - 1;
  const Matrix I_ = detail::observation_matrix(observations, 0, count);   // xhat_{t-1}
  const Matrix Z = detail::observation_matrix(observations, 1, count);    // xhat_t
  const Matrix Y = detail::observation_matrix(observations, 2, count);    // xhat_{t+1}
  double condition = 0.0;
  const Matrix E = solve_right(Y * I_.transpose(), Z * I_.transpose(), &condition);
  return detail::split_estimate(Method::IV, E, n, 0, condition, count);
}

// E_hat_IV = (sum xhat_{t+1} ihat_t^T)(sum zhat_t ihat_t^T)^{-1} with
// instrument ihat_t = [xhat_{t-1}; u_t]. The instrument needs xhat_{t-1}, so
// the sums run over t = 1..T-1 and T_used = T - 1.
inline Estimate iv_estimate(const Trajectory& traj) {
  if (traj.autonomous()) {
    return iv_estimate_autonomous(traj.observations);
  }
  const long T = traj.T();
  if (T < traj.n + traj.m + 1) {
    throw InvalidInputError("iv_estimate: T must be >= n + m + 1");
  }
  const long count = T - 1;
  const Eigen::Index d = traj.n + traj.m;
  Matrix Z(d, count);   // zhat_t,  t = 1..T-1
  Matrix In(d, count);  // ihat_t
  Matrix Y(traj.n, count);
  for (long j = 0; j < count; ++j) {
    const std::size_t t = static_cast<std::size_t>(j + 1);
    Z.col(j).head(traj.n) = traj.observations[t];
    Z.col(j).tail(traj.m) = traj.inputs[t];
    In.col(j).head(traj.n) = traj.observations[t - 1];
    In.col(j).tail(traj.m) = traj.inputs[t];
    Y.col(j) = traj.observations[t + 1];
  }
  double condition = 0.0;
  const Matrix E = solve_right(Y * In.transpose(), Z * In.transpose(), &condition);
  return detail::split_estimate(Method::IV, E, traj.n, traj.m, condition, count);
}

namespace detail {

// Shared bias-compensation step: E_bc = E_ls (I - S (G/T)^{-1})^{-1} where S
// embeds sigma_eta_hat in the top-left n x n block.
inline Estimate bc_from_ls(const LsCore& core, const Matrix& sigma_eta_hat, Eigen::Index n,
                           Eigen::Index m, long T) {
  if (sigma_eta_hat.rows() != n || sigma_eta_hat.cols() != n) {
    throw InvalidInputError("bc_estimate: sigma_eta_hat must be n x n");
  }
  require_finite(sigma_eta_hat, "bc_estimate sigma_eta_hat");
  const Eigen::Index d = n + m;
  Matrix S = Matrix::Zero(d, d);
  S.topLeftCorner(n, n) = sigma_eta_hat;

  Matrix correction;
  double corr_condition = 0.0;
  if (sigma_eta_hat.isZero(0.0)) {
    correction = Matrix::Identity(d, d);
    corr_condition = 1.0;
  } else {
    const Matrix scaled_gram = core.gram / static_cast<double>(T);
    correction = Matrix::Identity(d, d) - solve_right(S, scaled_gram);
  }

  Matrix E_bc;
  if (correction.isIdentity(0.0)) {
    E_bc = core.E;  // exact reduction to LS
  } else {
    // The correction's natural scale is the identity it perturbs, so judge
    // singularity against max(1, sigma_max) rather than by raw condition
    // number alone -- a 1x1 correction collapsing to ~0 has condition 1.
    const Vector sv = singular_values(correction);
    const double smax = sv(0);
    const double smin = sv(sv.size() - 1);
    if (smin < 1e-12 * std::max(1.0, smax)) {
      throw CorrectionSingularError(
          "bc_estimate: correction matrix singular or ill-conditioned; inputs too weak "
          "relative to the assumed observation-noise level",
          smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity());
    }
    try {
      E_bc = solve_right(core.E, correction, &corr_condition);
    } catch (const SingularGramError& e) {
      throw CorrectionSingularError(
          "bc_estimate: correction matrix singular or ill-conditioned; inputs too weak "
          "relative to the assumed observation-noise level",
          e.condition);
    }
  }
  return split_estimate(Method::BC, E_bc, n, m,
                        std::max(core.condition, corr_condition), T);
}

}  // namespace detail

inline Estimate bc_estimate_autonomous(const std::vector<Vector>& observations,
                                       const Matrix& sigma_eta_hat) {
  const long T = static_cast<long>(observations.size()) - 1;
  if (T < 1) {
    throw InvalidInputError("bc_estimate_autonomous: need at least two observations");
  }
  const Eigen::Index n = observations[0].size();
  if (T < n) {
    throw InvalidInputError("bc_estimate_autonomous: T must be >= n");
  }
  const Matrix Z = detail::observation_matrix(observations, 0, T);
  const Matrix Y = detail::observation_matrix(observations, 1, T);
  detail::LsCore core = detail::ls_core(Z, Y);
  return detail::bc_from_ls(core, sigma_eta_hat, n, 0, T);
}

// E_hat_BC = E_hat_LS (I - Sigma_eta_tilde ((1/T) sum zhat zhat^T)^{-1})^{-1}.
inline Estimate bc_estimate(const Trajectory& traj, const Matrix& sigma_eta_hat) {
  if (traj.autonomous()) {
    return bc_estimate_autonomous(traj.observations, sigma_eta_hat);
  }
  const long T = traj.T();
  if (T < traj.n + traj.m) {
    throw InvalidInputError("bc_estimate: T must be >= n + m");
  }
  const Matrix Z = detail::regressor_matrix(traj, 0, T);
  const Matrix Y = detail::target_matrix(traj.observations, 1, T);
  detail::LsCore core = detail::ls_core(Z, Y);
  return detail::bc_from_ls(core, sigma_eta_hat, traj.n, traj.m, T);
}

// Baseline: regress xhat_t on the stacked input history [u_{t-1}; ...; u_{t-k}]
// to estimate the Markov parameters G_i ~ A^i B (the identity observer makes
// these directly available), then B_hat = G_0 and A_hat from the shift
// relation A [G_0 .. G_{k-2}] = [G_1 .. G_{k-1}] in least squares. No Hankel
// SVD is needed with full state observations, which favors the baseline.
inline Estimate ho_kalman_estimate(const Trajectory& traj, int horizon) {
  if (traj.autonomous()) {
    throw NotApplicableError("ho_kalman_estimate: system is autonomous");
  }
  if (horizon < 2) {
    throw InvalidHorizonError("ho_kalman_estimate: horizon must be >= 2");
  }
  const long T = traj.T();
  const Eigen::Index n = traj.n;
  const Eigen::Index m = traj.m;
  const long k = horizon;
  if (T < k * m + n) {
    throw InvalidInputError("ho_kalman_estimate: T must be >= k*m + n");
  }
  const long count = T - k;
  Matrix V(k * m, count);
  Matrix Y(n, count);
  for (long j = 0; j < count; ++j) {
    const long t = k + j;
    for (long i = 0; i < k; ++i) {
      V.col(j).segment(i * m, m) = traj.inputs[static_cast<std::size_t>(t - 1 - i)];
    }
    Y.col(j) = traj.observations[static_cast<std::size_t>(t)];
  }
  double cond_markov = 0.0;
  Matrix G;
  try {
    G = solve_right(Y * V.transpose(), V * V.transpose(), &cond_markov);
  } catch (const SingularGramError& e) {
    throw SingularGramError("ho_kalman_estimate: input history Gram singular", e.condition);
  }
  const Matrix G_minus = G.leftCols((k - 1) * m);
  const Matrix G_plus = G.rightCols((k - 1) * m);
  double cond_shift = 0.0;
  const Matrix A_hat = solve_right(G_plus * G_minus.transpose(),
                                   G_minus * G_minus.transpose(), &cond_shift);
  Estimate est;
  est.method = Method::HoKalman;
  est.A_hat = A_hat;
  est.B_hat = G.leftCols(m);
  est.gram_condition = std::max(cond_markov, cond_shift);
  est.T_used = count;
  return est;
}

// Delta_1 and Delta_2 of the least-squares error split
//   E_hat_LS = E + Delta_1 - Delta_2,
//   Delta_1 = (sum -A eta_t z_t^T + (w_t + eta_{t+1}) zhat_t^T) Gram^{-1},
//   Delta_2 = (sum  A eta_t [eta_t; 0]^T) Gram^{-1}.
// Requires the realized noises, so the trajectory must have been simulated
// with capture_noise set.
inline BiasDecomposition ls_bias_decomposition(const Trajectory& traj,
                                               const LinearSystem& true_sys) {
  if (!traj.has_noise()) {
    throw InvalidInputError(
        "ls_bias_decomposition: trajectory lacks captured noise; simulate with "
        "capture_noise");
  }
  if (true_sys.n() != traj.n || true_sys.m() != traj.m) {
    throw InvalidInputError("ls_bias_decomposition: system/trajectory dimension mismatch");
  }
  const long T = traj.T();
  const Eigen::Index n = traj.n;
  const Eigen::Index m = traj.m;
  const Eigen::Index d = n + m;
  if (T < d) {
    throw InvalidInputError("ls_bias_decomposition: T must be >= n + m");
  }
  const std::vector<Vector>& w = *traj.process_noise;
  const std::vector<Vector>& eta = *traj.observation_noise;

  Matrix Zhat(d, T);
  Matrix Ztrue(d, T);
  Matrix EtaTilde(d, T);
  Matrix Noise1(n, T);  // w_t + eta_{t+1}
  Matrix AEta(n, T);    // A eta_t
  for (long j = 0; j < T; ++j) {
    const std::size_t t = static_cast<std::size_t>(j);
    Zhat.col(j).head(n) = traj.observations[t];
    Ztrue.col(j).head(n) = traj.states[t];
    if (m > 0) {
      Zhat.col(j).tail(m) = traj.inputs[t];
      Ztrue.col(j).tail(m) = traj.inputs[t];
    }
    EtaTilde.col(j).setZero();
    EtaTilde.col(j).head(n) = eta[t];
    Noise1.col(j) = w[t] + eta[t + 1];
    AEta.col(j) = true_sys.A * eta[t];
  }
  const Matrix gram = Zhat * Zhat.transpose();
  const Matrix num1 = -AEta * Ztrue.transpose() + Noise1 * Zhat.transpose();
  const Matrix num2 = AEta * EtaTilde.transpose();
  BiasDecomposition out;
  out.delta1 = solve_right(num1, gram);
  out.delta2 = solve_right(num2, gram);
  return out;
}

// max{||A - A_hat||, ||B - B_hat||}; reduces to the A-error when autonomous.
inline double estimation_error(const Estimate& est, const LinearSystem& sys) {
  if (est.A_hat.rows() != sys.n() || est.A_hat.cols() != sys.n()) {
    throw InvalidInputError("estimation_error: A dimension mismatch");
  }
  if (est.B_hat.has_value() != !sys.autonomous()) {
    throw InvalidInputError("estimation_error: estimate/system input-dimension mismatch");
  }
  double err = operator_norm(sys.A - est.A_hat);
  if (est.B_hat) {
    if (est.B_hat->rows() != sys.n() || est.B_hat->cols() != sys.m()) {
      throw InvalidInputError("estimation_error: B dimension mismatch");
    }
    err = std::max(err, operator_norm(*sys.B - *est.B_hat));
  }
  return err;
}

}  // namespace sysid
