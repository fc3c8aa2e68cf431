// stkern command-line interface: simulate / fit / predict / ci / band / eval.
//
// Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical error.
// Output files are written only after computation succeeds; partially
// written files are removed on failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "stkern/domain.hpp"
#include "stkern/inference.hpp"
#include "stkern/io.hpp"
#include "stkern/simulation.hpp"

namespace fs = std::filesystem;
using namespace stkern;

namespace {

struct HyperFlags {
  std::string kernel = "uniform";
  double lambda = 1.0;
  std::string h = "0.1";
  std::string K = "6";
  double phi = 0.9;
};

void add_hyper_flags(CLI::App* cmd, HyperFlags& flags, bool allow_cv) {
  cmd->add_option("--kernel", flags.kernel, "Kernel kind: uniform or quad")
      ->check(CLI::IsMember({"uniform", "quad"}));
  cmd->add_option("--lambda", flags.lambda, "Kernel support radius");
  cmd->add_option("--h", flags.h,
                  allow_cv ? "Bandwidth, or 'cv' for leave-one-location-out selection"
                           : "Bandwidth");
  cmd->add_option("--K", flags.K,
                  allow_cv ? "Truncation level, or 'cv'" : "Truncation level");
  cmd->add_option("--phi", flags.phi, "Geometric discount of the covariate metric");
}

TypeIKernel make_kernel(const HyperFlags& flags) {
  TypeIKernel kernel;
  kernel.kind = flags.kernel == "quad" ? KernelKind::TruncatedQuadratic : KernelKind::Uniform;
  kernel.lambda = flags.lambda;
  return kernel;
}

double parse_positive(const std::string& text, const char* what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos != text.size() || !(v > 0.0)) throw std::invalid_argument(what);
    return v;
  } catch (...) {
    throw CLI::ValidationError(std::string(what) + " must be a positive number, got '" + text + "'");
  }
}

int parse_positive_int(const std::string& text, const char* what) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(text, &pos);
    if (pos != text.size() || v < 1) throw std::invalid_argument(what);
    return v;
  } catch (...) {
    throw CLI::ValidationError(std::string(what) + " must be a positive integer, got '" + text + "'");
  }
}

/// Queries file: header t,x1,..; each row is one covariate query.
std::vector<std::pair<double, CovariateVector>> read_queries(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, path + " line 1: missing header");
  std::vector<std::pair<double, CovariateVector>> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::vector<double> values;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) {
      if (field.empty()) continue;
      try {
        values.push_back(std::stod(field));
      } catch (...) {
        throw Error(ErrorCode::ParseError,
                    path + " line " + std::to_string(line_no) + ": bad number '" + field + "'");
      }
    }
    if (values.empty())
      throw Error(ErrorCode::ParseError, path + " line " + std::to_string(line_no) + ": empty row");
    const double t = values.front();
    out.emplace_back(t, CovariateVector{std::vector<double>(values.begin() + 1, values.end())});
  }
  if (out.empty()) throw Error(ErrorCode::ParseError, path + ": no query rows");
  return out;
}

std::vector<SpatialPoint> eval_grid(int dimension, int per_axis) {
  std::vector<SpatialPoint> pts;
  std::vector<int> idx(static_cast<std::size_t>(dimension), 0);
  while (true) {
    std::vector<double> c(static_cast<std::size_t>(dimension));
    for (int a = 0; a < dimension; ++a)
      c[static_cast<std::size_t>(a)] = static_cast<double>(idx[static_cast<std::size_t>(a)]) / (per_axis - 1);
    pts.emplace_back(std::move(c));
    int axis = dimension - 1;
    while (axis >= 0 && ++idx[static_cast<std::size_t>(axis)] == per_axis)
      idx[static_cast<std::size_t>(axis--)] = 0;
    if (axis < 0) break;
  }
  return pts;
}

struct OutputGuard {
  std::vector<std::string> paths;
  bool committed = false;

  void track(const std::string& path) { paths.push_back(path); }
  void commit() { committed = true; }
  ~OutputGuard() {
    if (committed) return;
    for (const auto& p : paths) {
      std::error_code ec;
      fs::remove(p, ec);
    }
  }
};

struct FittedBundle {
  BasisSet basis = BasisSet::build(2, 6);
  FittedModel model;
  HyperCandidate chosen;
  bool used_cv = false;
};

FittedBundle fit_from_files(const std::string& obs_path, const std::string& cov_path,
                            const HyperFlags& flags) {
  const auto ingest = ingest_csv(obs_path, cov_path);
  const auto& ds = ingest.dataset;
  const TypeIKernel kernel = make_kernel(flags);

  const bool cv_h = flags.h == "cv";
  const bool cv_K = flags.K == "cv";

  FittedBundle bundle;
  const int max_K = 6;
  bundle.basis = BasisSet::build(ds.dimension, max_K);

  HyperCandidate chosen;
  chosen.phi = flags.phi;
  if (cv_h || cv_K) {
    std::vector<double> h_grid = cv_h ? std::vector<double>{0.025, 0.05, 0.1, 0.2, 0.4}
                                      : std::vector<double>{parse_positive(flags.h, "--h")};
    std::vector<int> K_grid;
    if (cv_K)
      for (int k = 1; k <= max_K; ++k) K_grid.push_back(k);
    else
      K_grid.push_back(parse_positive_int(flags.K, "--K"));

    std::vector<HyperCandidate> grid;
    for (double h : h_grid)
      for (int K : K_grid) grid.push_back({h, K, flags.phi});
    const auto selection = select_hyperparameters(ds, bundle.basis, kernel, grid);
    chosen = selection.choice;
    bundle.used_cv = true;
  } else {
    chosen.h = parse_positive(flags.h, "--h");
    chosen.K = parse_positive_int(flags.K, "--K");
  }

  bundle.chosen = chosen;
  bundle.model = fit(ds, BasisSet::build(ds.dimension, chosen.K), kernel,
                     BandwidthConfig{chosen.h, ScalingWeights::Geometric(chosen.phi)}, chosen.K);
  return bundle;
}

std::uint64_t ystar_checksum(const FittedModel& model) {
  std::vector<double> flat;
  for (const auto& row : model.ystar_table())
    flat.insert(flat.end(), row.begin(), row.end());
  return fnv1a64(flat.data(), flat.size() * sizeof(double));
}

int run(int argc, char** argv) {
  CLI::App app{"Nonparametric spatio-temporal kernel regression"};
  app.require_subcommand(1);
  app.set_config("--config", "", "INI config file; command-line flags take precedence");

  // ---- simulate ----------------------------------------------------------
  auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic dataset");
  sim_cmd->set_help_flag("--help", "Print help");
  int sim_n = 100, sim_p = 15;
  std::uint64_t sim_seed = 1;
  std::string sim_scenario = "S1", sim_out = "sim";
  sim_cmd->add_option("--n", sim_n, "Timepoints");
  sim_cmd->add_option("--p", sim_p, "Grid points per axis");
  sim_cmd->add_option("--seed", sim_seed, "Root seed");
  sim_cmd->add_option("--scenario", sim_scenario, "Covariate scenario")
      ->check(CLI::IsMember({"S1", "S2", "S3"}));
  sim_cmd->add_option("--out", sim_out, "Output path prefix");

  // ---- fit ---------------------------------------------------------------
  auto* fit_cmd = app.add_subcommand("fit", "Fit and write a model manifest");
  fit_cmd->set_help_flag("--help", "Print help");
  std::string fit_obs, fit_cov, fit_out = "model.txt";
  HyperFlags fit_flags;
  fit_cmd->add_option("--obs", fit_obs, "Observations CSV")->required();
  fit_cmd->add_option("--cov", fit_cov, "Covariates CSV");
  fit_cmd->add_option("--out", fit_out, "Manifest path");
  add_hyper_flags(fit_cmd, fit_flags, true);

  // ---- predict -----------------------------------------------------------
  auto* pred_cmd = app.add_subcommand("predict", "Predict the mean surface at query covariates");
  pred_cmd->set_help_flag("--help", "Print help");
  std::string pred_obs, pred_cov, pred_queries, pred_out = "predictions.csv";
  int pred_grid = 21;
  HyperFlags pred_flags;
  pred_cmd->add_option("--obs", pred_obs, "Observations CSV")->required();
  pred_cmd->add_option("--cov", pred_cov, "Covariates CSV");
  pred_cmd->add_option("--queries", pred_queries, "Query covariates CSV (t,x1..)")->required();
  pred_cmd->add_option("--out", pred_out, "Predictions CSV");
  pred_cmd->add_option("--grid", pred_grid, "Evaluation grid points per axis");
  add_hyper_flags(pred_cmd, pred_flags, false);

  // ---- ci ----------------------------------------------------------------
  auto* ci_cmd = app.add_subcommand("ci", "Pointwise Wald confidence intervals");
  ci_cmd->set_help_flag("--help", "Print help");
  std::string ci_obs, ci_cov, ci_queries, ci_out = "ci.csv";
  double ci_alpha = 0.05;
  int ci_grid = 21;
  bool ci_jackknife = false;
  HyperFlags ci_flags;
  ci_cmd->add_option("--obs", ci_obs, "Observations CSV")->required();
  ci_cmd->add_option("--cov", ci_cov, "Covariates CSV");
  ci_cmd->add_option("--queries", ci_queries, "Query covariates CSV")->required();
  ci_cmd->add_option("--alpha", ci_alpha, "Interval level");
  ci_cmd->add_option("--out", ci_out, "Intervals CSV");
  ci_cmd->add_option("--grid", ci_grid, "Evaluation grid points per axis");
  ci_cmd->add_flag("--jackknife-center", ci_jackknife,
                   "Center intervals on the jackknife-corrected surface");
  add_hyper_flags(ci_cmd, ci_flags, false);

  // ---- band --------------------------------------------------------------
  auto* band_cmd = app.add_subcommand("band", "Simultaneous confidence band over queries");
  band_cmd->set_help_flag("--help", "Print help");
  std::string band_obs, band_cov, band_queries, band_out = "band.csv", band_s = "0.5,0.5";
  double band_z = 3.0, band_slack = 0.0;
  bool band_thin = false, band_jackknife = false;
  HyperFlags band_flags;
  band_cmd->add_option("--obs", band_obs, "Observations CSV")->required();
  band_cmd->add_option("--cov", band_cov, "Covariates CSV");
  band_cmd->add_option("--queries", band_queries, "Query covariates CSV")->required();
  band_cmd->add_option("--z", band_z, "Gumbel calibration level");
  band_cmd->add_option("--s", band_s, "Fixed location, comma-separated coordinates");
  band_cmd->add_option("--slack", band_slack, "Truncation slack epsilon");
  band_cmd->add_flag("--thin", band_thin, "Greedily thin queries to the separation condition");
  band_cmd->add_flag("--jackknife-center", band_jackknife,
                     "Center the band on the jackknife-corrected surface");
  band_cmd->add_option("--out", band_out, "Band CSV");
  add_hyper_flags(band_cmd, band_flags, false);

  // ---- eval --------------------------------------------------------------
  auto* eval_cmd = app.add_subcommand("eval", "Holdout experiment metric table");
  eval_cmd->set_help_flag("--help", "Print help");
  int eval_n = 100, eval_p = 15, eval_B = 100, eval_holdout = 10;
  std::uint64_t eval_seed = 1;
  std::string eval_scenario = "S1", eval_out = "metrics.csv";
  HyperFlags eval_flags;
  eval_flags.h = "0.25";
  eval_cmd->add_option("--n", eval_n, "Timepoints");
  eval_cmd->add_option("--p", eval_p, "Grid points per axis");
  eval_cmd->add_option("--B", eval_B, "Replications");
  eval_cmd->add_option("--seed", eval_seed, "Root seed");
  eval_cmd->add_option("--holdout", eval_holdout, "Holdout timepoints");
  eval_cmd->add_option("--scenario", eval_scenario, "Covariate scenario")
      ->check(CLI::IsMember({"S1", "S2", "S3"}));
  eval_cmd->add_option("--out", eval_out, "Metrics CSV");
  add_hyper_flags(eval_cmd, eval_flags, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  OutputGuard guard;

  if (sim_cmd->parsed()) {
    SimConfig config;
    config.n = sim_n;
    config.p = sim_p;
    config.seed = sim_seed;
    const auto sim = generate(config);
    const Scenario scenario = parse_scenario(sim_scenario);
    const std::string obs = sim_out + "_obs.csv";
    const std::string cov = sim_out + "_cov.csv";
    const std::string truth = sim_out + "_truth.csv";
    guard.track(obs);
    guard.track(cov);
    guard.track(truth);
    write_observations(obs, sim);
    write_covariates_file(cov, sim, scenario);
    write_truth(truth, sim);
    guard.commit();
    std::cout << "wrote " << obs << ", " << cov << ", " << truth << "\n";
    return 0;
  }

  if (fit_cmd->parsed()) {
    const auto bundle = fit_from_files(fit_obs, fit_cov, fit_flags);
    guard.track(fit_out);
    std::ofstream manifest(fit_out);
    if (!manifest) throw Error(ErrorCode::ParseError, "cannot write " + fit_out);
    char checksum[32];
    std::snprintf(checksum, sizeof(checksum), "%016llx",
                  static_cast<unsigned long long>(ystar_checksum(bundle.model)));
    manifest << "stkern model manifest\n"
             << "observations: " << fit_obs << "\n"
             << "covariates: " << (fit_cov.empty() ? "(none)" : fit_cov) << "\n"
             << "kernel: " << fit_flags.kernel << " lambda=" << format_double(fit_flags.lambda)
             << "\n"
             << "h: " << format_double(bundle.chosen.h) << (bundle.used_cv ? " (cv)" : "") << "\n"
             << "K: " << bundle.chosen.K << (bundle.used_cv ? " (cv)" : "") << "\n"
             << "phi: " << format_double(bundle.chosen.phi) << "\n"
             << "timepoints: " << bundle.model.n_timepoints() << "\n"
             << "aggregate_table_fnv1a: " << checksum << "\n";
    guard.commit();
    std::cout << "wrote " << fit_out << "\n";
    return 0;
  }

  if (pred_cmd->parsed()) {
    const auto bundle = fit_from_files(pred_obs, pred_cov, pred_flags);
    const auto queries = read_queries(pred_queries);
    const auto grid = eval_grid(bundle.model.spatial_dimension(), pred_grid);
    guard.track(pred_out);
    std::ofstream outf(pred_out);
    if (!outf) throw Error(ErrorCode::ParseError, "cannot write " + pred_out);
    outf << "t_query";
    for (int a = 1; a <= bundle.model.spatial_dimension(); ++a) outf << ",s" << a;
    outf << ",yhat\n";
    for (const auto& [t, x] : queries)
      for (const auto& s : grid) {
        outf << format_double(t);
        for (double c : s.coords) outf << ',' << format_double(c);
        outf << ',' << format_double(mu_surface(bundle.model, x, s)) << '\n';
      }
    guard.commit();
    std::cout << "wrote " << pred_out << "\n";
    return 0;
  }

  if (ci_cmd->parsed()) {
    const auto bundle = fit_from_files(ci_obs, ci_cov, ci_flags);
    const auto queries = read_queries(ci_queries);
    const auto grid = eval_grid(bundle.model.spatial_dimension(), ci_grid);
    IntervalOptions opts;
    opts.bias_corrected_center = ci_jackknife;
    guard.track(ci_out);
    std::ofstream outf(ci_out);
    if (!outf) throw Error(ErrorCode::ParseError, "cannot write " + ci_out);
    outf << "x_index";
    for (int a = 1; a <= bundle.model.spatial_dimension(); ++a) outf << ",s" << a;
    outf << ",center,lower,upper,level\n";
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
      const auto& x = queries[qi].second;
      const auto sigma = estimate_covariance(bundle.model, x, bundle.model.truncation());
      for (const auto& s : grid) {
        const auto ci = pointwise_ci(bundle.model, sigma, x, s, ci_alpha, opts);
        const auto& e = ci.entries.front();
        outf << qi;
        for (double c : s.coords) outf << ',' << format_double(c);
        outf << ',' << format_double(e.center) << ',' << format_double(e.center - e.half_width)
             << ',' << format_double(e.center + e.half_width) << ','
             << format_double(1.0 - ci_alpha) << '\n';
      }
    }
    guard.commit();
    std::cout << "wrote " << ci_out << "\n";
    return 0;
  }

  if (band_cmd->parsed()) {
    const auto bundle = fit_from_files(band_obs, band_cov, band_flags);
    auto queries_in = read_queries(band_queries);
    std::vector<CovariateVector> xs;
    for (auto& [t, x] : queries_in) xs.push_back(x);
    if (band_thin) xs = thin_queries(xs, bundle.model.kernel(), bundle.model.bandwidth());

    std::vector<double> coords;
    {
      std::istringstream is(band_s);
      std::string field;
      while (std::getline(is, field, ',')) {
        try {
          std::size_t pos = 0;
          coords.push_back(std::stod(field, &pos));
          if (pos != field.size()) throw std::invalid_argument(field);
        } catch (...) {
          throw Error(ErrorCode::InvalidArgument, "bad --s coordinate '" + field + "'");
        }
      }
    }
    const SpatialPoint s{std::vector<double>(coords.begin(), coords.end())};

    std::vector<CovarianceEstimate> sigmas;
    sigmas.reserve(xs.size());
    for (const auto& x : xs)
      sigmas.push_back(estimate_covariance(bundle.model, x, bundle.model.truncation()));
    IntervalOptions opts;
    opts.bias_corrected_center = band_jackknife;
    const auto band = simultaneous_band(bundle.model, sigmas, xs, s, band_z, band_slack, opts);

    guard.track(band_out);
    std::ofstream outf(band_out);
    if (!outf) throw Error(ErrorCode::ParseError, "cannot write " + band_out);
    outf << "x_index,center,lower,upper,level\n";
    for (std::size_t qi = 0; qi < band.entries.size(); ++qi) {
      const auto& e = band.entries[qi];
      outf << qi << ',' << format_double(e.center) << ',' << format_double(e.center - e.half_width)
           << ',' << format_double(e.center + e.half_width) << ','
           << format_double(band.coverage_target) << '\n';
    }
    guard.commit();
    std::cout << "wrote " << band_out << "\n";
    return 0;
  }

  if (eval_cmd->parsed()) {
    SimConfig config;
    config.n = eval_n;
    config.p = eval_p;
    config.B = eval_B;
    config.seed = eval_seed;
    ExperimentHyper hyper;
    hyper.kernel = make_kernel(eval_flags);
    hyper.h = parse_positive(eval_flags.h, "--h");
    hyper.K = parse_positive_int(eval_flags.K, "--K");
    hyper.phi = eval_flags.phi;
    const auto result = run_experiment(config, parse_scenario(eval_scenario), eval_holdout, hyper);
    guard.track(eval_out);
    write_metrics(eval_out, result);
    guard.commit();
    std::cout << "wrote " << eval_out << "\n";
    return 0;
  }

  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const CLI::ParseError&) {
    // CLI11_PARSE inside run() handles its own printing; anything escaping
    // here is a usage problem.
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_category();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
