#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "sysid/csv_io.hpp"
#include "sysid/estimators.hpp"
#include "sysid/json_io.hpp"
#include "sysid/svg_plot.hpp"
#include "sysid/system.hpp"

namespace sysid {

// How the bias-compensation estimator obtains its observation-noise
// covariance: the true Sigma_eta, the true value plus eps * I (a symmetric
// perturbation of operator norm exactly eps), or an explicit matrix.
struct SigmaEtaHatSpec {
  enum class Kind { Exact, Perturb, Explicit };
  Kind kind = Kind::Exact;
  double perturb_eps = 0.0;
  std::optional<Matrix> matrix;
};

struct ExperimentConfig {
  LinearSystem system;
  std::vector<Method> estimators;
  std::vector<long> T_grid;
  int trials = 1;
  std::uint64_t master_seed = 0;
  SigmaEtaHatSpec sigma_eta_hat;
  std::optional<int> ho_kalman_k;
  double delta = 0.05;
  std::string description;
};

inline void validate_config(const ExperimentConfig& cfg) {
  if (cfg.estimators.empty()) {
    throw InvalidInputError("experiment config: estimator set is empty");
  }
  for (std::size_t i = 0; i < cfg.estimators.size(); ++i) {
    for (std::size_t j = i + 1; j < cfg.estimators.size(); ++j) {
      if (cfg.estimators[i] == cfg.estimators[j]) {
        throw InvalidInputError("experiment config: duplicate estimator");
      }
    }
  }
  if (cfg.system.autonomous()) {
    for (Method mth : cfg.estimators) {
      if (mth == Method::HoKalman) {
        throw InvalidInputError("experiment config: HoKalman requires inputs");
      }
    }
  }
  if (cfg.T_grid.empty()) {
    throw InvalidInputError("experiment config: T_grid is empty");
  }
  for (std::size_t i = 0; i < cfg.T_grid.size(); ++i) {
    if (cfg.T_grid[i] < 1 || (i > 0 && cfg.T_grid[i] <= cfg.T_grid[i - 1])) {
      throw InvalidInputError("experiment config: T_grid must be strictly increasing");
    }
  }
  if (cfg.trials < 1) {
    throw InvalidInputError("experiment config: trials must be >= 1");
  }
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) {
    throw InvalidInputError("experiment config: delta must lie in (0, 1)");
  }
  if (cfg.sigma_eta_hat.kind == SigmaEtaHatSpec::Kind::Explicit) {
    const Matrix& S = *cfg.sigma_eta_hat.matrix;
    if (S.rows() != cfg.system.n() || S.cols() != cfg.system.n()) {
      throw InvalidInputError("experiment config: sigma_eta_hat matrix must be n x n");
    }
  }
  if (cfg.ho_kalman_k && *cfg.ho_kalman_k < 2) {
    throw InvalidHorizonError("experiment config: ho_kalman_k must be >= 2");
  }
}

inline Matrix resolve_sigma_eta_hat(const ExperimentConfig& cfg) {
  switch (cfg.sigma_eta_hat.kind) {
    case SigmaEtaHatSpec::Kind::Exact:
      return cfg.system.sigma_eta;
    case SigmaEtaHatSpec::Kind::Perturb:
      return Matrix(cfg.system.sigma_eta +
                    cfg.sigma_eta_hat.perturb_eps *
                        Matrix::Identity(cfg.system.n(), cfg.system.n()));
    case SigmaEtaHatSpec::Kind::Explicit:
      return *cfg.sigma_eta_hat.matrix;
  }
  throw Error("unreachable");
}

// One (estimator, T, trial) outcome. Error fields are absent when the
// estimator failed; gram_condition is kept when the failure carried one.
struct TrialRecord {
  Method estimator = Method::LS;
  long T = 0;
  int trial = 0;
  std::optional<double> err_A;
  std::optional<double> err_B;
  std::optional<double> err_max;
  std::optional<double> gram_condition;
  bool failed = false;
};

struct SummaryRow {
  Method estimator = Method::LS;
  long T = 0;
  double median = std::numeric_limits<double>::quiet_NaN();
  double q25 = std::numeric_limits<double>::quiet_NaN();
  double q75 = std::numeric_limits<double>::quiet_NaN();
  int succeeded = 0;
  int failed = 0;
};

struct ExperimentResult {
  std::vector<TrialRecord> records;
  std::vector<SummaryRow> summary;
  ExperimentConfig config;
};

namespace detail {

inline int method_rank(Method m) {
  switch (m) {
    case Method::LS: return 0;
    case Method::IV: return 1;
    case Method::BC: return 2;
    case Method::HoKalman: return 3;
  }
  return 4;
}

// Linear-interpolation quantile on a sorted sample.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (sorted.size() == 1) return sorted[0];
  const double h = p * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

inline TrialRecord run_one(const ExperimentConfig& cfg, const Matrix& sigma_eta_hat,
                           const Trajectory& traj, Method mth, long T, int trial) {
  TrialRecord rec;
  rec.estimator = mth;
  rec.T = T;
  rec.trial = trial;
  try {
    Estimate est;
    switch (mth) {
      case Method::LS: est = ls_estimate(traj); break;
      case Method::IV: est = iv_estimate(traj); break;
      case Method::BC: est = bc_estimate(traj, sigma_eta_hat); break;
      case Method::HoKalman:
        est = ho_kalman_estimate(traj,
                                 cfg.ho_kalman_k.value_or(static_cast<int>(traj.n) + 1));
        break;
    }
    rec.gram_condition = est.gram_condition;
    rec.err_A = operator_norm(cfg.system.A - est.A_hat);
    if (est.B_hat) {
      rec.err_B = operator_norm(*cfg.system.B - *est.B_hat);
    }
    rec.err_max = std::max(*rec.err_A, rec.err_B.value_or(0.0));
  } catch (const SingularGramError& e) {
    rec.failed = true;
    rec.gram_condition = e.condition;
  } catch (const CorrectionSingularError& e) {
    rec.failed = true;
    rec.gram_condition = e.condition;
  } catch (const Error&) {
    rec.failed = true;
  }
  return rec;
}

}  // namespace detail

// Runs the full sweep. Each (trial, T) unit simulates one trajectory from
// streams (master_seed, {"u","w","eta"}, trial) -- the same trial shares its
// noise sample path across every T and every estimator -- then evaluates all
// requested estimators on it. Estimator failures become records with
// failed = true, never exceptions. Units may run on several threads; records
// are sorted by (estimator, T, trial) afterwards, so the result is
// independent of scheduling.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, int n_threads = 0) {
  validate_config(cfg);
  const Matrix sigma_eta_hat = resolve_sigma_eta_hat(cfg);

  std::vector<std::pair<int, long>> units;  // (trial, T)
  units.reserve(static_cast<std::size_t>(cfg.trials) * cfg.T_grid.size());
  for (int trial = 0; trial < cfg.trials; ++trial) {
    for (long T : cfg.T_grid) {
      units.emplace_back(trial, T);
    }
  }

  std::vector<std::vector<TrialRecord>> unit_records(units.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    while (true) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= units.size()) break;
      const auto [trial, T] = units[idx];
      const RngStream stream{cfg.master_seed, "", static_cast<std::uint64_t>(trial)};
      const Trajectory traj = simulate(cfg.system, T, stream);
      std::vector<TrialRecord>& recs = unit_records[idx];
      recs.reserve(cfg.estimators.size());
      for (Method mth : cfg.estimators) {
        recs.push_back(detail::run_one(cfg, sigma_eta_hat, traj, mth, T, trial));
      }
    }
  };

  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  const std::size_t want = n_threads > 0 ? static_cast<std::size_t>(n_threads)
                                         : std::min<std::size_t>(hw, units.size());
  if (want <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(want);
    for (std::size_t i = 0; i < want; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }

  ExperimentResult result;
  result.config = cfg;
  for (std::vector<TrialRecord>& recs : unit_records) {
    for (TrialRecord& r : recs) {
      result.records.push_back(std::move(r));
    }
  }
  std::sort(result.records.begin(), result.records.end(),
            [](const TrialRecord& a, const TrialRecord& b) {
              return std::make_tuple(detail::method_rank(a.estimator), a.T, a.trial) <
                     std::make_tuple(detail::method_rank(b.estimator), b.T, b.trial);
            });

  for (Method mth : cfg.estimators) {
    for (long T : cfg.T_grid) {
      SummaryRow row;
      row.estimator = mth;
      row.T = T;
      std::vector<double> errs;
      for (const TrialRecord& r : result.records) {
        if (r.estimator != mth || r.T != T) continue;
        if (r.failed) {
          ++row.failed;
        } else {
          errs.push_back(*r.err_max);
          ++row.succeeded;
        }
      }
      std::sort(errs.begin(), errs.end());
      row.median = detail::quantile_sorted(errs, 0.5);
      row.q25 = detail::quantile_sorted(errs, 0.25);
      row.q75 = detail::quantile_sorted(errs, 0.75);
      result.summary.push_back(row);
    }
  }
  std::sort(result.summary.begin(), result.summary.end(),
            [](const SummaryRow& a, const SummaryRow& b) {
              return std::make_tuple(detail::method_rank(a.estimator), a.T) <
                     std::make_tuple(detail::method_rank(b.estimator), b.T);
            });
  return result;
}

// ---- CSV emission ----------------------------------------------------------

inline void emit_csv(const ExperimentResult& res, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open " + path + " for writing");
  }
  out << "estimator,T,trial,err_A,err_B,err_max,gram_condition,failed\n";
  const auto field = [](const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
  };
  for (const TrialRecord& r : res.records) {
    out << method_name(r.estimator) << "," << r.T << "," << r.trial << "," << field(r.err_A)
        << "," << field(r.err_B) << "," << field(r.err_max) << "," << field(r.gram_condition)
        << "," << (r.failed ? "true" : "false") << "\n";
  }
  if (!out) {
    throw IoError("write failure on " + path);
  }
}

inline std::vector<TrialRecord> read_records_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path);
  }
  std::string line;
  if (!std::getline(in, line) ||
      split_csv_line(line) !=
          std::vector<std::string>{"estimator", "T", "trial", "err_A", "err_B", "err_max",
                                   "gram_condition", "failed"}) {
    throw InvalidInputError("records CSV: unexpected header in " + path);
  }
  std::vector<TrialRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 8) {
      throw InvalidInputError("records CSV: wrong field count in " + path);
    }
    TrialRecord r;
    const auto mth = method_from_name(f[0]);
    if (!mth) {
      throw InvalidInputError("records CSV: unknown estimator \"" + f[0] + "\"");
    }
    r.estimator = *mth;
    r.T = std::stol(f[1]);
    r.trial = static_cast<int>(std::stol(f[2]));
    const auto opt = [&](const std::string& s) -> std::optional<double> {
      if (s.empty()) return std::nullopt;
      return parse_double_field(s, path);
    };
    r.err_A = opt(f[3]);
    r.err_B = opt(f[4]);
    r.err_max = opt(f[5]);
    r.gram_condition = opt(f[6]);
    if (f[7] != "true" && f[7] != "false") {
      throw InvalidInputError("records CSV: bad failed flag \"" + f[7] + "\"");
    }
    r.failed = f[7] == "true";
    records.push_back(std::move(r));
  }
  return records;
}

inline void emit_summary_csv(const ExperimentResult& res, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open " + path + " for writing");
  }
  out << "estimator,T,median_err_max,q25_err_max,q75_err_max,succeeded,failed\n";
  for (const SummaryRow& s : res.summary) {
    out << method_name(s.estimator) << "," << s.T << ","
        << (s.succeeded > 0 ? format_double(s.median) : std::string()) << ","
        << (s.succeeded > 0 ? format_double(s.q25) : std::string()) << ","
        << (s.succeeded > 0 ? format_double(s.q75) : std::string()) << "," << s.succeeded
        << "," << s.failed << "\n";
  }
  if (!out) {
    throw IoError("write failure on " + path);
  }
}

// Log-log medians with interquartile whiskers, one series per estimator.
// Cells whose every trial failed are skipped.
inline void emit_svg_plot(const ExperimentResult& res, const std::string& path) {
  std::vector<PlotSeries> series;
  for (Method mth : res.config.estimators) {
    PlotSeries s;
    s.label = method_name(mth);
    for (const SummaryRow& row : res.summary) {
      if (row.estimator != mth || row.succeeded == 0) continue;
      s.x.push_back(static_cast<double>(row.T));
      s.median.push_back(row.median);
      s.q25.push_back(row.q25);
      s.q75.push_back(row.q75);
    }
    if (!s.x.empty()) {
      series.push_back(std::move(s));
    }
  }
  if (series.empty()) {
    throw EmptyPlotError("emit_svg_plot: summary has no successful cells");
  }
  write_svg_plot(series, res.config.description, path);
}

// ---- Config JSON -----------------------------------------------------------

inline ExperimentConfig config_from_json(const Json& j) {
  ExperimentConfig cfg;
  cfg.system = system_from_json(j.at("system"));
  for (const auto& e : j.at("estimators")) {
    const auto mth = method_from_name(e.get<std::string>());
    if (!mth) {
      throw InvalidInputError("experiment config: unknown estimator \"" +
                              e.get<std::string>() + "\"");
    }
    cfg.estimators.push_back(*mth);
  }
  for (const auto& t : j.at("T_grid")) {
    cfg.T_grid.push_back(t.get<long>());
  }
  cfg.trials = j.at("trials").get<int>();
  cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
  if (j.contains("sigma_eta_hat")) {
    const Json& s = j.at("sigma_eta_hat");
    if (s.is_string() && s.get<std::string>() == "exact") {
      cfg.sigma_eta_hat.kind = SigmaEtaHatSpec::Kind::Exact;
    } else if (s.is_object() && s.contains("perturb")) {
      cfg.sigma_eta_hat.kind = SigmaEtaHatSpec::Kind::Perturb;
      cfg.sigma_eta_hat.perturb_eps = s.at("perturb").get<double>();
      if (cfg.sigma_eta_hat.perturb_eps < 0.0) {
        throw InvalidInputError("experiment config: perturb eps must be >= 0");
      }
    } else if (s.is_object() && s.contains("kind")) {
      cfg.sigma_eta_hat.kind = SigmaEtaHatSpec::Kind::Explicit;
      cfg.sigma_eta_hat.matrix = matrix_from_json(s);
    } else {
      throw InvalidInputError(
          "experiment config: sigma_eta_hat must be \"exact\", {\"perturb\": eps} or a "
          "matrix literal");
    }
  }
  if (j.contains("ho_kalman_k")) {
    cfg.ho_kalman_k = j.at("ho_kalman_k").get<int>();
  }
  cfg.delta = j.value("delta", 0.05);
  cfg.description = j.value("description", std::string());
  validate_config(cfg);
  return cfg;
}

inline Json config_to_json(const ExperimentConfig& cfg) {
  Json j;
  j["system"] = system_to_json(cfg.system);
  Json est = Json::array();
  for (Method mth : cfg.estimators) {
    est.push_back(method_name(mth));
  }
  j["estimators"] = std::move(est);
  j["T_grid"] = cfg.T_grid;
  j["trials"] = cfg.trials;
  j["master_seed"] = cfg.master_seed;
  switch (cfg.sigma_eta_hat.kind) {
    case SigmaEtaHatSpec::Kind::Exact:
      j["sigma_eta_hat"] = "exact";
      break;
    case SigmaEtaHatSpec::Kind::Perturb:
      j["sigma_eta_hat"] = Json{{"perturb", cfg.sigma_eta_hat.perturb_eps}};
      break;
    case SigmaEtaHatSpec::Kind::Explicit:
      j["sigma_eta_hat"] = matrix_to_json(*cfg.sigma_eta_hat.matrix);
      break;
  }
  if (cfg.ho_kalman_k) {
    j["ho_kalman_k"] = *cfg.ho_kalman_k;
  }
  j["delta"] = cfg.delta;
  j["description"] = cfg.description;
  return j;
}

// ---- Built-in configurations -----------------------------------------------

// paper-nonautonomous / paper-autonomous: the 20-state shift-register
// benchmark; scalar-benchmark: the 1-d fixture whose limits are known in
// closed form.
inline ExperimentConfig builtin_config(const std::string& name) {
  ExperimentConfig cfg;
  if (name == "paper-nonautonomous" || name == "paper-autonomous") {
    const Matrix A = cyclic_shift_matrix(20, 0.8);
    const Matrix I20 = Matrix::Identity(20, 20);
    if (name == "paper-nonautonomous") {
      cfg.system = make_linear_system(A, stacked_identity_matrix(20, 10, 1.0), I20,
                                      Matrix(Matrix::Identity(10, 10)), I20);
      cfg.estimators = {Method::LS, Method::HoKalman, Method::IV, Method::BC};
      cfg.description =
          "Non-autonomous 20-state shift-register benchmark (m = 10; the original "
          "benchmark statement listed a 5x5 input covariance, which is inconsistent "
          "with a 20x10 B, so Sigma_u = I_10 is used)";
    } else {
      cfg.system = make_linear_system(A, std::nullopt, I20, std::nullopt, I20);
      cfg.estimators = {Method::LS, Method::IV, Method::BC};
      cfg.description = "Autonomous 20-state shift-register benchmark";
    }
    cfg.T_grid = {500, 2000, 8000};
    cfg.trials = 20;
    cfg.master_seed = 42;
    return cfg;
  }
  if (name == "scalar-benchmark") {
    const Matrix one = Matrix::Identity(1, 1);
    cfg.system = make_linear_system(Matrix(0.5 * one), Matrix(one), one, Matrix(one), one);
    cfg.estimators = {Method::LS, Method::IV, Method::BC};
    cfg.T_grid = {1000, 10000, 100000};
    cfg.trials = 50;
    cfg.master_seed = 42;
    cfg.description = "Scalar benchmark (a = 0.5, b = 1, unit covariances)";
    return cfg;
  }
  throw InvalidInputError("builtin_config: unknown name \"" + name + "\"");
}

// Writes records.csv, summary.csv, plot.svg and config_echo.json.
inline void emit_experiment_outputs(const ExperimentResult& res, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  emit_csv(res, (dir / "records.csv").string());
  emit_summary_csv(res, (dir / "summary.csv").string());
  emit_svg_plot(res, (dir / "plot.svg").string());
  save_json_file(config_to_json(res.config), (dir / "config_echo.json").string());
}

}  // namespace sysid
