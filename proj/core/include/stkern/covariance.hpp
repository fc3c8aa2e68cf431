#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stkern/mean_estimator.hpp"

namespace stkern {

/// Spatial correlation of the error field. rho(s,s) = 1 and symmetry are
/// structural; the isotropic table form backs the nonparametric iteration.
class SpatialCorrelation {
 public:
  using Fn = std::function<double(const SpatialPoint&, const SpatialPoint&)>;

  static SpatialCorrelation Known(Fn fn);
  /// rho(s,s') = exp(-rho0 ||s-s'||^2)
  static SpatialCorrelation GaussianDecay(double rho0);
  /// Piecewise-linear isotropic rho*(r) on distance knots; rho*(0) pinned to 1,
  /// values clipped to [-1, 1]. Evaluation beyond the last knot holds the
  /// final value.
  static SpatialCorrelation Isotropic(std::vector<double> knots, std::vector<double> values);

  double operator()(const SpatialPoint& a, const SpatialPoint& b) const;

  bool is_isotropic_table() const { return !knots_.empty(); }
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& values() const { return values_; }

 private:
  Fn fn_;
  std::vector<double> knots_, values_;
};

struct CovarianceEstimate {
  int K = 0;
  Eigen::MatrixXd matrix;  // K x K symmetric
  CovariateVector x;
  bool diagonal_clipped = false;
};

/// Kernel-weighted covariance of the aggregated responses (the natural
/// nonparametric estimate of sigma_kl):
///   sum_i K_i (Y*_{ik} - mu_k(x)) (Y*_{il} - mu_l(x)) / sum_i K_i.
/// Requires at least two in-support timepoints.
double sigma_kl(const FittedModel& model, int k, int l, const CovariateVector& x_query);

/// Full K x K matrix of sigma_kl at the query, symmetrized, with negative
/// diagonal entries clipped at zero (flagged).
CovarianceEstimate estimate_covariance(const FittedModel& model, const CovariateVector& x_query,
                                       int K);

/// c_{u,v}(k,l) = int_{S^2} rho(s,s') b_k(s) b_u(s) b_l(s') b_v(s') ds ds'
/// by tensor Gauss-Legendre quadrature over both copies of S. |c| <= 1 must
/// hold (Cauchy-Schwarz); violations beyond 1e-9 abort.
double c_uv(const BasisSet& basis, const SpatialCorrelation& correlation, int u, int v, int k,
            int l, int quadrature_order, std::size_t node_cap = 100'000'000);

/// All C_{kl} matrices for k,l <= U in one pass (entries C_{kl}(u,v) =
/// c_{u,v}(k,l)). Much cheaper than U^4 independent quadratures.
std::vector<Eigen::MatrixXd> build_c_system(const BasisSet& basis,
                                            const SpatialCorrelation& correlation, int U,
                                            int quadrature_order,
                                            std::size_t node_cap = 100'000'000);

/// Nearest symmetric positive-semidefinite matrix in Frobenius norm:
/// symmetrize, then clip negative eigenvalues at zero.
Eigen::MatrixXd psd_project(const Eigen::MatrixXd& m);

struct RecoveredComponents {
  Eigen::VectorXd sigma;    // |sigma_u|, u = 1..U
  Eigen::MatrixXd solved;   // A, the solved (possibly indefinite) matrix
  Eigen::MatrixXd psd;      // A*, its PSD projection
  bool nonpositive_leading_eigenvalue = false;
  double condition_number = 0.0;
};

/// Solves the linearized component system: vec(A) from the stacked C-matrix
/// system against vec(Sigma), PSD-projects A, and reads the components off
/// the leading eigenpair as sigma_u = sqrt(lambda_1) |e_{1u}|.
RecoveredComponents recover_variance_components(const Eigen::MatrixXd& sigma_hat,
                                                const std::vector<Eigen::MatrixXd>& c_matrices,
                                                double condition_cap = 1e8);

struct RhoIterationOptions {
  int max_iter = 10;
  double tol = 1e-3;
  int U = 0;                  // 0: use the model truncation level
  int quadrature_order = 10;
  double sigma_floor = 1e-6;
  bool mean_centered = false;  // replace Y by Y - mu_hat(x, s) in the update
  int distance_bins = 24;
};

struct RhoIterationResult {
  SpatialCorrelation correlation = SpatialCorrelation::GaussianDecay(1.0);
  Eigen::VectorXd sigma_components;
  bool converged = false;
  int iterations = 0;
  std::size_t floored_denominators = 0;
};

/// Alternates component recovery under the current rho with the kernel-ratio
/// update of rho on a fixed grid of location pairs, until the maximum
/// pairwise change drops below tol. Non-convergence is flagged, not thrown.
RhoIterationResult iterate_rho(const SpatioTemporalDataset& dataset, const FittedModel& model,
                               const CovariateVector& x_query, const SpatialCorrelation& initial,
                               const RhoIterationOptions& options = {});

struct ParametricRhoOptions {
  int U = 0;
  int quadrature_order = 10;
};

/// Grid search for the Gaussian-decay rate: minimizes || A - sigma sigma^T ||_F
/// over the candidates; ties go to the smallest rho0.
double parametric_rho_fit(const FittedModel& model, const CovariateVector& x_query,
                          const std::vector<double>& rho0_grid,
                          const ParametricRhoOptions& options = {});

}  // namespace stkern
