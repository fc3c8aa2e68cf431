#include "stkern/inference.hpp"

#include <cmath>
#include <sstream>

namespace stkern {

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw Error(ErrorCode::InvalidArgument, "quantile probability must lie in (0,1)");
  // Acklam's rational approximation with the usual three branches.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double q, r, x;
  if (p < plow) {
    q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    q = p - 0.5;
    r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // One Halley refinement against erfc keeps |error| well under 1e-9.
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

double q_form(const CovarianceEstimate& sigma, const BasisSet& basis, const SpatialPoint& s,
              bool* clipped) {
  if (sigma.K > basis.size())
    throw Error(ErrorCode::DimensionMismatch, "covariance level exceeds basis size");
  if (sigma.matrix.rows() != sigma.K || sigma.matrix.cols() != sigma.K)
    throw Error(ErrorCode::DimensionMismatch, "covariance matrix is not K x K");

  Eigen::VectorXd b(sigma.K);
  for (int k = 1; k <= sigma.K; ++k) b(k - 1) = basis.eval(k, s);
  double value = b.dot(sigma.matrix * b);
  if (value < 0.0) {
    value = 0.0;
    if (clipped) *clipped = true;
  }
  return value;
}

double b_mn(std::size_t m_n, double z) {
  if (m_n < 2) throw Error(ErrorCode::InvalidM, "B_m(z) requires m_n >= 2");
  const double lg = std::log(static_cast<double>(m_n));
  const double root = std::sqrt(2.0 * lg);
  return root - (0.5 * std::log(lg) + std::log(2.0 * std::sqrt(M_PI))) / root + z / root;
}

namespace {

double center_at(const FittedModel& model, const CovariateVector& x, const SpatialPoint& s,
                 bool bias_corrected) {
  return bias_corrected ? mu_surface_bias_corrected(model, x, s) : mu_surface(model, x, s);
}

std::size_t checked_support(const FittedModel& model, const CovariateVector& x) {
  const auto n = support_count(model.covariates(), model.kernel(), model.bandwidth(), x);
  if (n == 0) throw Error(ErrorCode::NoNeighbors, "query has empty kernel support");
  if (n < 2) throw Error(ErrorCode::DegenerateSupport, "query has a single in-support timepoint");
  return n;
}

}  // namespace

BandResult pointwise_ci(const FittedModel& model, const CovarianceEstimate& sigma,
                        const CovariateVector& x_query, const SpatialPoint& s, double alpha,
                        const IntervalOptions& options) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0,1]");
  const std::size_t n_x = checked_support(model, x_query);

  BandResult out;
  out.kind = BandKind::Pointwise;
  out.alpha = alpha;
  const double zq = alpha >= 1.0 ? 0.0 : normal_quantile(1.0 - alpha / 2.0);
  const double ratio = xi_ratio(model.covariates(), model.kernel(), model.bandwidth(), x_query);
  const double q = q_form(sigma, model.basis(), s, &out.q_form_clipped);

  BandEntry entry;
  entry.support = n_x;
  entry.center = center_at(model, x_query, s, options.bias_corrected_center);
  entry.half_width = zq * std::sqrt(ratio * q) / std::sqrt(static_cast<double>(n_x));
  out.entries.push_back(entry);
  return out;
}

std::vector<CovariateVector> thin_queries(const std::vector<CovariateVector>& candidates,
                                          const TypeIKernel& kernel, const BandwidthConfig& bw) {
  const double separation = 2.0 * bw.h * kernel.support_radius();
  std::vector<CovariateVector> kept;
  for (const auto& cand : candidates) {
    bool ok = true;
    for (const auto& q : kept)
      if (!(scaled_distance(cand, q, bw.weights) > separation)) {
        ok = false;
        break;
      }
    if (ok) kept.push_back(cand);
  }
  return kept;
}

BandResult simultaneous_band(const FittedModel& model,
                             const std::vector<CovarianceEstimate>& sigmas,
                             const std::vector<CovariateVector>& queries, const SpatialPoint& s,
                             double z, double epsilon_slack, const IntervalOptions& options) {
  if (queries.empty()) throw Error(ErrorCode::InvalidArgument, "no band queries");
  if (sigmas.size() != queries.size())
    throw Error(ErrorCode::InvalidArgument, "one covariance estimate per query required");
  if (epsilon_slack < 0.0) throw Error(ErrorCode::InvalidArgument, "epsilon_slack must be >= 0");

  const double separation = 2.0 * model.bandwidth().h * model.kernel().support_radius();
  std::ostringstream violations;
  bool too_close = false;
  for (std::size_t i = 0; i < queries.size(); ++i)
    for (std::size_t j = i + 1; j < queries.size(); ++j) {
      const double dist = scaled_distance(queries[i], queries[j], model.bandwidth().weights);
      if (!(dist > separation)) {
        too_close = true;
        violations << " (" << i << "," << j << ") at scaled distance " << dist;
      }
    }
  if (too_close)
    throw Error(ErrorCode::QueriesTooClose,
                "query pairs within 2*h*lambda:" + violations.str());

  BandResult out;
  out.kind = BandKind::Simultaneous;
  out.z = z;
  out.coverage_target = std::exp(-2.0 * std::exp(-z));
  out.m_n = std::max<std::size_t>(2, queries.size());
  out.epsilon_slack = epsilon_slack;

  const double critical = b_mn(out.m_n, z);
  const double slack_term = epsilon_slack > 0.0 ? epsilon_slack * model.basis().b_inf(s) : 0.0;
  for (std::size_t qi = 0; qi < queries.size(); ++qi) {
    const std::size_t n_x = checked_support(model, queries[qi]);
    const double ratio =
        xi_ratio(model.covariates(), model.kernel(), model.bandwidth(), queries[qi]);
    const double q = q_form(sigmas[qi], model.basis(), s, &out.q_form_clipped);
    BandEntry entry;
    entry.support = n_x;
    entry.center = center_at(model, queries[qi], s, options.bias_corrected_center);
    entry.half_width =
        critical * std::sqrt(ratio * q) / std::sqrt(static_cast<double>(n_x)) + slack_term;
    out.entries.push_back(entry);
  }
  return out;
}

}  // namespace stkern
