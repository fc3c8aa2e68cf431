#pragma once

#include <cstddef>
#include <vector>

#include "stkern/types.hpp"

namespace stkern {

enum class KernelKind { Uniform, TruncatedQuadratic };

/// Type-I kernel: bounded, compactly supported on [0, lambda], unit integral.
///   Uniform:            K(u) = 1/lambda on [0, lambda]
///   TruncatedQuadratic: K(u) = (6 / 5 lambda) (1 - (u/lambda)^2 / 2), which
///                       tapers to half its peak at the support edge so the
///                       type-I lower bound C1 > 0 holds.
struct TypeIKernel {
  KernelKind kind = KernelKind::Uniform;
  double lambda = 1.0;

  double operator()(double u) const;
  double support_radius() const { return lambda; }
};

struct BandwidthConfig {
  double h = 0.1;
  ScalingWeights weights = ScalingWeights::Geometric(0.9);
};

/// sqrt(sum_j zeta_j^-2 (x_j - y_j)^2) with the shorter vector zero-extended.
double scaled_distance(const CovariateVector& x, const CovariateVector& y,
                       const ScalingWeights& w);

/// K(scaled_distance / h); zero outside radius h * lambda.
double kernel_weight(const TypeIKernel& kernel, const BandwidthConfig& bw,
                     const CovariateVector& x, const CovariateVector& x_query);

/// Number of timepoints with positive kernel weight at the query. sqrt of this
/// count is the plug-in for sqrt(n phi_x(h lambda)) in every interval formula.
std::size_t support_count(const std::vector<CovariateVector>& covariates,
                          const TypeIKernel& kernel, const BandwidthConfig& bw,
                          const CovariateVector& x_query);

/// The variance-ratio constant xi_2 / xi_1^2 entering all interval widths.
/// For the uniform kernel it is exactly 1 (K^2 = K/lambda pointwise and
/// xi_1 = 1/lambda). Other kernels use the plug-in
/// N_x * sum(K_i^2) / (sum K_i)^2 over in-support points.
double xi_ratio(const std::vector<CovariateVector>& covariates, const TypeIKernel& kernel,
                const BandwidthConfig& bw, const CovariateVector& x_query);

}  // namespace stkern
