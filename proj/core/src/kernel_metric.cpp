#include "stkern/kernel_metric.hpp"

#include <algorithm>
#include <cmath>

namespace stkern {

double TypeIKernel::operator()(double u) const {
  if (u < 0.0 || u > lambda) return 0.0;
  switch (kind) {
    case KernelKind::Uniform:
      return 1.0 / lambda;
    case KernelKind::TruncatedQuadratic: {
      const double r = u / lambda;
      return (6.0 / (5.0 * lambda)) * (1.0 - 0.5 * r * r);
    }
  }
  return 0.0;
}

double scaled_distance(const CovariateVector& x, const CovariateVector& y,
                       const ScalingWeights& w) {
  const std::size_t len = std::max(x.observed_length(), y.observed_length());
  double sum = 0.0;
  for (std::size_t j = 0; j < len; ++j) {
    const double z = w.zeta(j);
    const double d = (x.at(j) - y.at(j)) / z;
    sum += d * d;
  }
  return std::sqrt(sum);
}

double kernel_weight(const TypeIKernel& kernel, const BandwidthConfig& bw,
                     const CovariateVector& x, const CovariateVector& x_query) {
  return kernel(scaled_distance(x, x_query, bw.weights) / bw.h);
}

std::size_t support_count(const std::vector<CovariateVector>& covariates,
                          const TypeIKernel& kernel, const BandwidthConfig& bw,
                          const CovariateVector& x_query) {
  std::size_t count = 0;
  for (const auto& x : covariates)
    if (kernel_weight(kernel, bw, x, x_query) > 0.0) ++count;
  return count;
}

double xi_ratio(const std::vector<CovariateVector>& covariates, const TypeIKernel& kernel,
                const BandwidthConfig& bw, const CovariateVector& x_query) {
  if (kernel.kind == KernelKind::Uniform) return 1.0;
  double sum = 0.0, sum_sq = 0.0;
  std::size_t count = 0;
  for (const auto& x : covariates) {
    const double k = kernel_weight(kernel, bw, x, x_query);
    if (k > 0.0) {
      sum += k;
      sum_sq += k * k;
      ++count;
    }
  }
  if (count == 0 || sum == 0.0) return 1.0;
  return static_cast<double>(count) * sum_sq / (sum * sum);
}

}  // namespace stkern
