#include <cmath>

#include "doctest.h"

#include "stkern/simulation.hpp"

using namespace stkern;

TEST_SUITE_BEGIN("simulation");

TEST_CASE("AR stationary moments") {
  SimConfig config;
  config.n = 10000;
  config.p = 2;
  config.seed = 2024;
  const auto sim = generate(config);

  double mean = 0.0;
  for (double x : sim.x_path) mean += x;
  mean /= config.n;
  CHECK(std::abs(mean - 2.0) <= 0.02);

  // one-site noise variance: responses minus truth at a fixed location
  double var = 0.0;
  for (int t = 0; t < config.n; ++t) {
    const double eps = sim.responses(t, 0) - sim.truth(t, 0);
    var += eps * eps;
  }
  var /= config.n;
  CHECK(var == doctest::Approx(0.01).epsilon(0.10));
}

TEST_CASE("p=2 grid is the unit-square corners") {
  SimConfig config;
  config.n = 5;
  config.p = 2;
  const auto sim = generate(config);
  REQUIRE(sim.locations.size() == 4);
  CHECK(sim.locations[0] == SpatialPoint{0.0, 0.0});
  CHECK(sim.locations[1] == SpatialPoint{0.0, 1.0});
  CHECK(sim.locations[2] == SpatialPoint{1.0, 0.0});
  CHECK(sim.locations[3] == SpatialPoint{1.0, 1.0});
}

TEST_CASE("truth stores mu(X_t, s) = X_t (s1 + s2)") {
  SimConfig config;
  config.n = 6;
  config.p = 3;
  config.seed = 5;
  const auto sim = generate(config);
  for (int t = 0; t < config.n; ++t)
    for (std::size_t a = 0; a < sim.locations.size(); ++a) {
      const double expected =
          sim.x_path[static_cast<std::size_t>(t)] *
          (sim.locations[a].coords[0] + sim.locations[a].coords[1]);
      CHECK(sim.truth(t, static_cast<Eigen::Index>(a)) == doctest::Approx(expected));
    }
}

TEST_CASE("noise factorization succeeds with tiny jitter up to p=30") {
  for (int p : {5, 15, 30}) {
    std::vector<SpatialPoint> locs;
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j)
        locs.push_back(SpatialPoint{static_cast<double>(i) / (p - 1),
                                    static_cast<double>(j) / (p - 1)});
    double jitter = -1.0;
    const auto L = spatial_noise_factor(locs, 0.1, 1.0, &jitter);
    CHECK(std::isfinite(jitter));
    CHECK(jitter <= 1e-10);
    // reconstruct a few covariance entries
    const Eigen::MatrixXd cov = L * L.transpose();
    CHECK(cov(0, 0) == doctest::Approx(0.01).epsilon(1e-6));
    const double d2 = squared_distance(locs[0], locs[1]);
    CHECK(cov(0, 1) == doctest::Approx(0.01 * std::exp(-d2)).epsilon(1e-6));
  }
}

TEST_CASE("scenario covariates") {
  SimConfig config;
  config.n = 8;
  config.p = 3;
  config.seed = 77;
  const auto sim = generate(config);

  SUBCASE("S1 returns the generator covariate verbatim") {
    for (int t = 0; t < config.n; ++t) {
      const auto cov = scenario_covariate(sim, Scenario::S1, t);
      CHECK(cov.values[0] == sim.x_path[static_cast<std::size_t>(t)]);
    }
  }
  SUBCASE("S2 returns the lag and fails at the first timepoint") {
    CHECK_THROWS_AS(scenario_covariate(sim, Scenario::S2, 0), Error);
    for (int t = 1; t < config.n; ++t)
      CHECK(scenario_covariate(sim, Scenario::S2, t).values[0] ==
            sim.x_path[static_cast<std::size_t>(t - 1)]);
  }
  SUBCASE("S3 averages the lagged responses") {
    CHECK_THROWS_AS(scenario_covariate(sim, Scenario::S3, 0), Error);
    const auto cov = scenario_covariate(sim, Scenario::S3, 3);
    CHECK(cov.values[0] == doctest::Approx(sim.responses.row(2).mean()));
  }
  SUBCASE("constant lagged responses average to the constant") {
    SimData patched = sim;
    patched.responses.row(2).setConstant(4.0);
    CHECK(scenario_covariate(patched, Scenario::S3, 3).values[0] == doctest::Approx(4.0));
  }
  SUBCASE("bulk covariates start at the scenario's first defined timepoint") {
    CHECK(make_covariates(sim, Scenario::S1).size() == static_cast<std::size_t>(config.n));
    const auto lagged = make_covariates(sim, Scenario::S2);
    REQUIRE(lagged.size() == static_cast<std::size_t>(config.n - 1));
    CHECK(lagged[0].values[0] == sim.x_path[0]);
  }
}

TEST_CASE("smoke experiment runs fast and finite") {
  SimConfig config;
  config.n = 10;
  config.p = 2;
  config.B = 1;
  config.seed = 9;
  ExperimentHyper hyper;
  hyper.h = 0.5;
  hyper.K = 3;
  const auto result = run_experiment(config, Scenario::S1, 2, hyper);
  REQUIRE(result.rows.size() == 2);
  for (const auto& row : result.rows) {
    CHECK(std::isfinite(row.bias));
    CHECK(std::isfinite(row.mae));
    CHECK(std::isfinite(row.rmse));
    CHECK(std::isfinite(row.mape));
    CHECK(row.mae <= row.rmse + 1e-12);
    CHECK(row.mape >= 0.0);
  }
}

TEST_CASE("experiments are bit-deterministic") {
  SimConfig config;
  config.n = 30;
  config.p = 4;
  config.B = 5;
  config.seed = 31;
  ExperimentHyper hyper;
  hyper.h = 0.3;
  hyper.K = 3;
  const auto r1 = run_experiment(config, Scenario::S2, 3, hyper);
  const auto r2 = run_experiment(config, Scenario::S2, 3, hyper);
  REQUIRE(r1.rows.size() == r2.rows.size());
  for (std::size_t i = 0; i < r1.rows.size(); ++i) {
    CHECK(r1.rows[i].bias == r2.rows[i].bias);
    CHECK(r1.rows[i].mae == r2.rows[i].mae);
    CHECK(r1.rows[i].rmse == r2.rows[i].rmse);
    CHECK(r1.rows[i].mape == r2.rows[i].mape);
  }
}

TEST_CASE("same seed, same dataset") {
  SimConfig config;
  config.n = 12;
  config.p = 3;
  config.seed = 55;
  const auto a = generate(config);
  const auto b = generate(config);
  CHECK((a.responses.array() == b.responses.array()).all());
  CHECK(a.x_path == b.x_path);
}

TEST_CASE("S2 fit recovers the implied lagged-covariate model") {
  // Y_t(s) = (s1+s2) + 0.5 X_{t-1} (s1+s2) + noise, so at query X_{t-1} = 2
  // the surface should be close to 2 (s1+s2). Needs a dense location grid:
  // the nearest-representative quadrature distorts degree-2 components
  // noticeably below p ~ 10.
  SimConfig config;
  config.n = 300;
  config.p = 15;
  config.seed = 123;
  const auto sim = generate(config);
  const auto ds = build_dataset(sim, Scenario::S2, 0, config.n);
  const auto basis = BasisSet::build(2, 6);
  const auto model = fit(ds, basis, TypeIKernel{},
                         BandwidthConfig{0.12, ScalingWeights::Geometric(0.9)}, 6);

  const CovariateVector query{2.0};
  double max_err = 0.0;
  for (double s1 : {0.0, 0.25, 0.5, 0.75, 1.0})
    for (double s2 : {0.0, 0.5, 1.0}) {
      const double pred = mu_surface(model, query, SpatialPoint{s1, s2});
      max_err = std::max(max_err, std::abs(pred - 2.0 * (s1 + s2)));
    }
  CHECK(max_err <= 0.55);  // the reference error scale for S2
}

TEST_CASE("mape_vs_p is deterministic and produces one point per p") {
  SimConfig config;
  config.n = 16;
  config.p = 2;
  config.B = 2;
  config.seed = 77;
  ExperimentHyper hyper;
  hyper.h = 0.4;
  hyper.K = 3;
  const auto curve = mape_vs_p(config, Scenario::S1, {3, 5}, 3, hyper);
  REQUIRE(curve.size() == 2);
  CHECK(curve[0].p == 3);
  CHECK(curve[1].p == 5);
  const auto again = mape_vs_p(config, Scenario::S1, {3, 5}, 3, hyper);
  CHECK(curve[0].mape == again[0].mape);
  CHECK(curve[1].mape == again[1].mape);
}

TEST_CASE("denser grids beat the corner-only design") {
  SimConfig config;
  config.n = 60;
  config.p = 2;
  config.B = 5;
  config.seed = 2718;
  ExperimentHyper hyper;
  hyper.h = 0.1;
  hyper.K = 3;
  const auto curve = mape_vs_p(config, Scenario::S1, {2, 20}, 6, hyper);
  CHECK(curve[1].mape < curve[0].mape);
}

TEST_SUITE_END();
