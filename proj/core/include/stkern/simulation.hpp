#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "stkern/mean_estimator.hpp"

namespace stkern {

enum class Scenario { S1, S2, S3 };

const char* scenario_name(Scenario s);
Scenario parse_scenario(const std::string& name);

/// Desk-scale data generating process: AR(1) covariate
/// X_t = ar_intercept + ar_coef X_{t-1} + e_t with e_t ~ N(0, ar_noise_sd^2),
/// X_0 from the stationary law; response Y_t(s) = X_t (s_1 + s_2) + eps_t(s)
/// with a jointly Gaussian spatial error field,
/// Cov = spatial_noise_sd^2 exp(-rho0 ||s_i - s_j||^2). Regular time grid
/// {0, 1/(n-1), ..., 1} and regular p x p location grid on [0,1]^2.
struct SimConfig {
  int n = 100;  // timepoints
  int p = 15;   // locations per axis (p^2 total)
  int B = 100;  // replications
  std::uint64_t seed = 1;
  double ar_intercept = 1.0;
  double ar_coef = 0.5;
  double ar_noise_sd = 0.1;
  double spatial_noise_sd = 0.1;
  double rho0 = 1.0;  // Gaussian-decay rate of the error correlation
};

struct SimData {
  SimConfig config;
  std::vector<double> times;            // n
  std::vector<SpatialPoint> locations;  // p^2, row-major over the grid
  std::vector<double> x_path;           // n, the AR covariate
  Eigen::MatrixXd responses;            // n x p^2, observed Y
  Eigen::MatrixXd truth;                // n x p^2, mu(X_t, s)
  double jitter_used = 0.0;             // diagonal jitter the factorization needed
};

/// Cholesky factor (lower) of the spatial noise covariance for these
/// locations, with diagonal jitter escalation 1e-12 -> 1e-8 on failure.
Eigen::MatrixXd spatial_noise_factor(const std::vector<SpatialPoint>& locations,
                                     double noise_sd, double rho0, double* jitter_used = nullptr);

SimData generate(const SimConfig& config,
                 const Eigen::MatrixXd* precomputed_factor = nullptr);

/// Covariate available at timepoint t under the scenario:
///   S1 -> (X_t);  S2 -> (X_{t-1});  S3 -> (mean over the grid of Y_{t-1}(s)).
/// S2/S3 are undefined at the first timepoint.
CovariateVector scenario_covariate(const SimData& sim, Scenario scenario, int t_index);

/// First timepoint with a defined covariate (0 for S1, 1 for S2/S3).
int scenario_start_index(Scenario scenario);

/// Covariates for every timepoint from scenario_start_index(scenario) on.
std::vector<CovariateVector> make_covariates(const SimData& sim, Scenario scenario);

/// Dataset view of timepoints [from, to) with scenario covariates attached.
SpatioTemporalDataset build_dataset(const SimData& sim, Scenario scenario, int from, int to);

struct ExperimentHyper {
  TypeIKernel kernel{KernelKind::Uniform, 1.0};
  double h = 0.25;
  int K = 6;
  double phi = 0.9;
};

struct MetricRow {
  Scenario scenario = Scenario::S1;
  int horizon = 0;  // 1-based index into the holdout window
  double t = 0.0;
  double bias = 0.0;
  double mae = 0.0;
  double rmse = 0.0;
  double mape = 0.0;  // percent
};

struct ExperimentResult {
  std::vector<MetricRow> rows;            // one per holdout horizon
  std::size_t mape_excluded = 0;          // |Y| < 1e-8 denominators skipped
  std::size_t no_neighbor_fallbacks = 0;  // predictions served by the nearest covariate
};

/// Fits on the first n - holdout timepoints of each replication and predicts
/// the holdout window. S3 forecasts recursively: past the forecast origin the
/// lagged responses are replaced by their own predictions. Metrics pool the
/// holdout errors per horizon across replications and locations;
/// replications run in parallel but accumulate in replication order.
ExperimentResult run_experiment(const SimConfig& config, Scenario scenario, int holdout,
                                const ExperimentHyper& hyper);

struct PCurvePoint {
  int p = 0;
  double mape = 0.0;  // average over holdout horizons, percent
};

/// Average holdout MAPE as a function of p (Figure-style curve data).
std::vector<PCurvePoint> mape_vs_p(const SimConfig& config_template, Scenario scenario,
                                   const std::vector<int>& p_values, int holdout,
                                   const ExperimentHyper& hyper);

}  // namespace stkern
