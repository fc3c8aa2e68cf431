#pragma once

#include <cstddef>
#include <vector>

#include "stkern/covariance.hpp"
#include "stkern/mean_estimator.hpp"

namespace stkern {

/// Standard normal quantile, rational approximation (|error| < 1.2e-9).
double normal_quantile(double p);

/// Q_K(x,s) = b(s)^T Sigma b(s); negative values (indefinite finite-sample
/// Sigma) are clipped at zero and flagged through *clipped when provided.
double q_form(const CovarianceEstimate& sigma, const BasisSet& basis, const SpatialPoint& s,
              bool* clipped = nullptr);

/// Gumbel critical value over m_n separated queries:
/// B_m(z) = sqrt(2 log m) - [log(log m)/2 + log(2 sqrt(pi))]/sqrt(2 log m)
///          + z / sqrt(2 log m),  m >= 2.
double b_mn(std::size_t m_n, double z);

enum class BandKind { Pointwise, Simultaneous };

struct BandEntry {
  double center = 0.0;
  double half_width = 0.0;
  std::size_t support = 0;  // N_x at the query
};

struct BandResult {
  BandKind kind = BandKind::Pointwise;
  double alpha = 0.0;            // pointwise level
  double z = 0.0;                // simultaneous calibration
  double coverage_target = 0.0;  // exp(-2 exp(-z)) for simultaneous bands
  std::size_t m_n = 0;
  double epsilon_slack = 0.0;
  std::vector<BandEntry> entries;
  bool q_form_clipped = false;
};

struct IntervalOptions {
  /// Center the interval on the jackknife-corrected surface instead of the
  /// raw estimator. Off by default: at bandwidths where band queries can be
  /// separated, the 2h-window correction inflates the center's variance well
  /// past the width formula and the intervals undercover.
  bool bias_corrected_center = false;
};

/// Wald interval for the truncated mean surface at one (x, s):
/// half-width z_{1-alpha/2} sqrt(xi_ratio Q_K(x,s)) / sqrt(N_x), with the
/// support count standing in for n phi_x(h lambda).
BandResult pointwise_ci(const FittedModel& model, const CovarianceEstimate& sigma,
                        const CovariateVector& x_query, const SpatialPoint& s, double alpha,
                        const IntervalOptions& options = {});

/// Greedy thinning: sweep the candidates in order, keeping a query iff its
/// scaled distance to every kept query exceeds 2 h lambda.
std::vector<CovariateVector> thin_queries(const std::vector<CovariateVector>& candidates,
                                          const TypeIKernel& kernel, const BandwidthConfig& bw);

/// Simultaneous band over the query set at a fixed location s. All query
/// pairs must be separated by more than 2 h lambda in the scaled metric
/// (QueriesTooClose lists violators). Per-query half-width
/// B_{m}(z) sqrt(xi_ratio Q_K) / sqrt(N_x) + epsilon_slack b_inf(s), where
/// m = max(2, #queries); the coverage target exp(-2 exp(-z)) is recorded.
BandResult simultaneous_band(const FittedModel& model,
                             const std::vector<CovarianceEstimate>& sigmas,
                             const std::vector<CovariateVector>& queries, const SpatialPoint& s,
                             double z, double epsilon_slack, const IntervalOptions& options = {});

}  // namespace stkern
