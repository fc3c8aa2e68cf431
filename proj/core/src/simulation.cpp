#include "stkern/simulation.hpp"

#include <algorithm>
#include <cmath>

#include "stkern/parallel.hpp"
#include "stkern/rng.hpp"

namespace stkern {

const char* scenario_name(Scenario s) {
  switch (s) {
    case Scenario::S1: return "S1";
    case Scenario::S2: return "S2";
    case Scenario::S3: return "S3";
  }
  return "?";
}

Scenario parse_scenario(const std::string& name) {
  if (name == "S1") return Scenario::S1;
  if (name == "S2") return Scenario::S2;
  if (name == "S3") return Scenario::S3;
  throw Error(ErrorCode::InvalidArgument, "unknown scenario " + name);
}

namespace {

void check_config(const SimConfig& c) {
  if (c.n < 2 || c.p < 2 || c.B < 1)
    throw Error(ErrorCode::InvalidArgument, "need n >= 2, p >= 2, B >= 1");
  if (!(std::abs(c.ar_coef) < 1.0))
    throw Error(ErrorCode::InvalidArgument, "ar_coef must lie in (-1,1)");
}

std::vector<SpatialPoint> grid_locations(int p) {
  std::vector<SpatialPoint> locs;
  locs.reserve(static_cast<std::size_t>(p) * p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      locs.push_back(SpatialPoint{static_cast<double>(i) / (p - 1),
                                  static_cast<double>(j) / (p - 1)});
  return locs;
}

}  // namespace

Eigen::MatrixXd spatial_noise_factor(const std::vector<SpatialPoint>& locations, double noise_sd,
                                     double rho0, double* jitter_used) {
  const auto m = static_cast<Eigen::Index>(locations.size());
  Eigen::MatrixXd cov(m, m);
  const double var = noise_sd * noise_sd;
  for (Eigen::Index a = 0; a < m; ++a) {
    cov(a, a) = var;
    for (Eigen::Index b = a + 1; b < m; ++b) {
      const double v = var * std::exp(-rho0 * squared_distance(locations[static_cast<std::size_t>(a)],
                                                               locations[static_cast<std::size_t>(b)]));
      cov(a, b) = v;
      cov(b, a) = v;
    }
  }

  for (double jitter : {0.0, 1e-12, 1e-10, 1e-8}) {
    Eigen::MatrixXd attempt = cov;
    if (jitter > 0.0) attempt.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(attempt);
    if (llt.info() == Eigen::Success) {
      if (jitter_used) *jitter_used = jitter;
      return llt.matrixL();
    }
  }
  // Last resort: eigenvalue clipping.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  Eigen::VectorXd vals = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  if (jitter_used) *jitter_used = std::numeric_limits<double>::quiet_NaN();
  return eig.eigenvectors() * vals.asDiagonal();
}

SimData generate(const SimConfig& config, const Eigen::MatrixXd* precomputed_factor) {
  check_config(config);
  SimData sim;
  sim.config = config;
  sim.locations = grid_locations(config.p);
  sim.times.resize(static_cast<std::size_t>(config.n));
  for (int i = 0; i < config.n; ++i)
    sim.times[static_cast<std::size_t>(i)] = static_cast<double>(i) / (config.n - 1);

  Eigen::MatrixXd factor;
  if (precomputed_factor) {
    factor = *precomputed_factor;
  } else {
    factor = spatial_noise_factor(sim.locations, config.spatial_noise_sd, config.rho0,
                                  &sim.jitter_used);
  }

  Rng rng(config.seed);

  // AR(1) from its stationary law.
  const double stat_mean = config.ar_intercept / (1.0 - config.ar_coef);
  const double stat_sd =
      config.ar_noise_sd / std::sqrt(1.0 - config.ar_coef * config.ar_coef);
  sim.x_path.resize(static_cast<std::size_t>(config.n));
  sim.x_path[0] = stat_mean + stat_sd * rng.normal();
  for (int t = 1; t < config.n; ++t)
    sim.x_path[static_cast<std::size_t>(t)] = config.ar_intercept +
                                              config.ar_coef * sim.x_path[static_cast<std::size_t>(t - 1)] +
                                              config.ar_noise_sd * rng.normal();

  const auto m = static_cast<Eigen::Index>(sim.locations.size());
  sim.responses.resize(config.n, m);
  sim.truth.resize(config.n, m);
  Eigen::VectorXd zvec(m);
  for (int t = 0; t < config.n; ++t) {
    for (Eigen::Index a = 0; a < m; ++a) zvec(a) = rng.normal();
    const Eigen::VectorXd eps = factor * zvec;
    const double x = sim.x_path[static_cast<std::size_t>(t)];
    for (Eigen::Index a = 0; a < m; ++a) {
      const auto& s = sim.locations[static_cast<std::size_t>(a)];
      const double mu = x * (s.coords[0] + s.coords[1]);
      sim.truth(t, a) = mu;
      sim.responses(t, a) = mu + eps(a);
    }
  }
  return sim;
}

int scenario_start_index(Scenario scenario) { return scenario == Scenario::S1 ? 0 : 1; }

CovariateVector scenario_covariate(const SimData& sim, Scenario scenario, int t_index) {
  if (t_index < 0 || t_index >= sim.config.n)
    throw Error(ErrorCode::IndexOutOfRange, "timepoint index out of range");
  switch (scenario) {
    case Scenario::S1:
      return CovariateVector{sim.x_path[static_cast<std::size_t>(t_index)]};
    case Scenario::S2:
      if (t_index == 0)
        throw Error(ErrorCode::FirstTimepointUnavailable, "S2 needs a lagged covariate");
      return CovariateVector{sim.x_path[static_cast<std::size_t>(t_index - 1)]};
    case Scenario::S3: {
      if (t_index == 0)
        throw Error(ErrorCode::FirstTimepointUnavailable, "S3 needs a lagged response");
      return CovariateVector{sim.responses.row(t_index - 1).mean()};
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown scenario");
}

std::vector<CovariateVector> make_covariates(const SimData& sim, Scenario scenario) {
  std::vector<CovariateVector> out;
  for (int t = scenario_start_index(scenario); t < sim.config.n; ++t)
    out.push_back(scenario_covariate(sim, scenario, t));
  return out;
}

SpatioTemporalDataset build_dataset(const SimData& sim, Scenario scenario, int from, int to) {
  from = std::max(from, scenario_start_index(scenario));
  SpatioTemporalDataset ds;
  ds.dimension = 2;
  for (int t = from; t < to; ++t) {
    TimepointRecord rec;
    rec.t = sim.times[static_cast<std::size_t>(t)];
    rec.locations = sim.locations;
    rec.responses.assign(sim.responses.row(t).begin(), sim.responses.row(t).end());
    rec.covariate = scenario_covariate(sim, scenario, t);
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

namespace {

struct HorizonSums {
  double err = 0.0;
  double abs_err = 0.0;
  double sq_err = 0.0;
  double ape = 0.0;
  std::size_t count = 0;
  std::size_t ape_count = 0;
  std::size_t ape_excluded = 0;
};

struct ReplicationSums {
  std::vector<HorizonSums> horizons;
  std::size_t fallbacks = 0;
};

/// mu_surface with a nearest-covariate fallback for queries that drift out of
/// every kernel support (possible in the recursive S3 forecast).
double predict_surface(const FittedModel& model, const CovariateVector& x,
                       const std::vector<double>& bvals, std::size_t* fallbacks) {
  double den = 0.0;
  const auto& covs = model.covariates();
  thread_local std::vector<double> weights;
  weights.assign(covs.size(), 0.0);
  for (std::size_t i = 0; i < covs.size(); ++i) {
    weights[i] = kernel_weight(model.kernel(), model.bandwidth(), covs[i], x);
    den += weights[i];
  }
  if (den <= 0.0) {
    // nearest covariate by scaled distance, ties to the earliest timepoint
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < covs.size(); ++i) {
      const double dist = scaled_distance(covs[i], x, model.bandwidth().weights);
      if (dist < best_d) {
        best_d = dist;
        best = i;
      }
    }
    if (fallbacks) ++(*fallbacks);
    double value = 0.0;
    for (int k = 1; k <= model.truncation(); ++k)
      value += model.ystar(best, k) * bvals[static_cast<std::size_t>(k - 1)];
    return value;
  }
  double value = 0.0;
  for (int k = 1; k <= model.truncation(); ++k) {
    double num_k = 0.0;
    for (std::size_t i = 0; i < covs.size(); ++i)
      if (weights[i] > 0.0) num_k += weights[i] * model.ystar(i, k);
    value += (num_k / den) * bvals[static_cast<std::size_t>(k - 1)];
  }
  return value;
}

}  // namespace

ExperimentResult run_experiment(const SimConfig& config, Scenario scenario, int holdout,
                                const ExperimentHyper& hyper) {
  check_config(config);
  if (holdout < 1 || holdout >= config.n)
    throw Error(ErrorCode::InvalidArgument, "holdout must lie in [1, n)");

  // Shared across replications: the location grid never changes.
  const auto locations = grid_locations(config.p);
  double jitter = 0.0;
  const Eigen::MatrixXd factor =
      spatial_noise_factor(locations, config.spatial_noise_sd, config.rho0, &jitter);
  CoverCache cover_cache;
  const auto cover = cover_cache.get(locations, 2);

  const int train_end = config.n - holdout;
  const BandwidthConfig bw{hyper.h, ScalingWeights::Geometric(hyper.phi)};

  // Basis evaluations at the grid, reused by every prediction.
  const BasisSet basis = BasisSet::build(2, hyper.K);
  std::vector<std::vector<double>> grid_bvals(locations.size());
  for (std::size_t a = 0; a < locations.size(); ++a) basis.eval_all(locations[a], grid_bvals[a]);

  std::vector<ReplicationSums> slots(static_cast<std::size_t>(config.B));

  parallel_for(static_cast<std::size_t>(config.B), [&](std::size_t b) {
    SimConfig rep_config = config;
    rep_config.seed = child_seed(config.seed, b);
    const SimData sim = generate(rep_config, &factor);

    const auto ds = build_dataset(sim, scenario, 0, train_end);
    FitOptions fit_options;
    fit_options.covers.assign(ds.records.size(), cover);
    const FittedModel model = fit(ds, basis, hyper.kernel, bw, hyper.K, fit_options);

    ReplicationSums sums;
    sums.horizons.resize(static_cast<std::size_t>(holdout));

    std::vector<double> predicted(locations.size(), 0.0);
    CovariateVector covariate;
    for (int j = 0; j < holdout; ++j) {
      const int t_index = train_end + j;
      switch (scenario) {
        case Scenario::S1:
        case Scenario::S2:
          covariate = scenario_covariate(sim, scenario, t_index);
          break;
        case Scenario::S3:
          if (j == 0) {
            covariate = scenario_covariate(sim, scenario, t_index);
          } else {
            // recursive forecast: lagged responses are no longer observed
            double mean_pred = 0.0;
            for (double v : predicted) mean_pred += v;
            covariate = CovariateVector{mean_pred / static_cast<double>(predicted.size())};
          }
          break;
      }

      auto& hsum = sums.horizons[static_cast<std::size_t>(j)];
      for (std::size_t a = 0; a < locations.size(); ++a) {
        const double pred = predict_surface(model, covariate, grid_bvals[a], &sums.fallbacks);
        predicted[a] = pred;
        const double y = sim.responses(t_index, static_cast<Eigen::Index>(a));
        const double err = pred - y;
        hsum.err += err;
        hsum.abs_err += std::abs(err);
        hsum.sq_err += err * err;
        hsum.count += 1;
        if (std::abs(y) < 1e-8) {
          hsum.ape_excluded += 1;
        } else {
          hsum.ape += std::abs(err) / std::abs(y);
          hsum.ape_count += 1;
        }
      }
    }
    slots[b] = std::move(sums);
  });

  ExperimentResult result;
  result.rows.resize(static_cast<std::size_t>(holdout));
  std::vector<HorizonSums> totals(static_cast<std::size_t>(holdout));
  for (const auto& rep : slots) {  // fixed replication order
    result.no_neighbor_fallbacks += rep.fallbacks;
    for (int j = 0; j < holdout; ++j) {
      auto& tot = totals[static_cast<std::size_t>(j)];
      const auto& h = rep.horizons[static_cast<std::size_t>(j)];
      tot.err += h.err;
      tot.abs_err += h.abs_err;
      tot.sq_err += h.sq_err;
      tot.ape += h.ape;
      tot.count += h.count;
      tot.ape_count += h.ape_count;
      tot.ape_excluded += h.ape_excluded;
    }
  }
  for (int j = 0; j < holdout; ++j) {
    const auto& tot = totals[static_cast<std::size_t>(j)];
    MetricRow row;
    row.scenario = scenario;
    row.horizon = j + 1;
    row.t = static_cast<double>(train_end + j) / (config.n - 1);
    const auto cnt = static_cast<double>(tot.count);
    row.bias = tot.err / cnt;
    row.mae = tot.abs_err / cnt;
    row.rmse = std::sqrt(tot.sq_err / cnt);
    row.mape = tot.ape_count > 0 ? 100.0 * tot.ape / static_cast<double>(tot.ape_count) : 0.0;
    result.rows[static_cast<std::size_t>(j)] = row;
    result.mape_excluded += tot.ape_excluded;
  }
  return result;
}

std::vector<PCurvePoint> mape_vs_p(const SimConfig& config_template, Scenario scenario,
                                   const std::vector<int>& p_values, int holdout,
                                   const ExperimentHyper& hyper) {
  if (p_values.size() < 2)
    throw Error(ErrorCode::InvalidArgument, "need at least two p values for the curve");
  std::vector<PCurvePoint> curve;
  curve.reserve(p_values.size());
  for (int p : p_values) {
    SimConfig config = config_template;
    config.p = p;
    const auto res = run_experiment(config, scenario, holdout, hyper);
    double mape = 0.0;
    for (const auto& row : res.rows) mape += row.mape;
    curve.push_back({p, mape / static_cast<double>(res.rows.size())});
  }
  return curve;
}

}  // namespace stkern
