#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stkern/aggregation.hpp"
#include "stkern/basis.hpp"
#include "stkern/kernel_metric.hpp"
#include "stkern/types.hpp"

namespace stkern {

struct FitOptions {
  /// Prebuilt covers, one per record; when absent they are built (and shared
  /// across records with identical location sets).
  std::vector<std::shared_ptr<const GridCover>> covers;
  int resolution_probes_per_axis = 0;  // 0 = default
};

/// Result of fitting: the per-timepoint aggregated responses Y*_{t_i k} for
/// k <= K plus everything needed to answer queries. Immutable after fit();
/// queries are pure reads.
class FittedModel {
 public:
  const BasisSet& basis() const { return basis_; }
  const TypeIKernel& kernel() const { return kernel_; }
  const BandwidthConfig& bandwidth() const { return bw_; }
  int truncation() const { return K_; }
  std::size_t n_timepoints() const { return covariates_.size(); }

  const std::vector<CovariateVector>& covariates() const { return covariates_; }
  /// Aggregated response for timepoint i (0-based) and basis index k (1-based).
  double ystar(std::size_t i, int k) const { return ystar_[i][static_cast<std::size_t>(k - 1)]; }
  const std::vector<std::vector<double>>& ystar_table() const { return ystar_; }
  int spatial_dimension() const { return dimension_; }

  friend FittedModel fit(const SpatioTemporalDataset&, const BasisSet&, const TypeIKernel&,
                         const BandwidthConfig&, int, const FitOptions&);

 private:
  BasisSet basis_ = BasisSet::build(1, 1);
  TypeIKernel kernel_;
  BandwidthConfig bw_;
  int K_ = 0;
  int dimension_ = 0;
  std::vector<CovariateVector> covariates_;
  std::vector<std::vector<double>> ystar_;  // n x K
};

/// Precomputes Y*_{t_i k} for all timepoints and k <= K via the modified
/// Monte-Carlo aggregation. The dataset must validate.
FittedModel fit(const SpatioTemporalDataset& dataset, const BasisSet& basis,
                const TypeIKernel& kernel, const BandwidthConfig& bw, int K,
                const FitOptions& options = {});

/// Nadaraya-Watson estimate of the k-th mean component at the query:
/// sum_i K_i Y*_{ik} / sum_i K_i. Throws NoNeighbors when no timepoint has
/// positive kernel weight.
double mu_k(const FittedModel& model, int k, const CovariateVector& x_query);

/// Same, at an explicit bandwidth (used by the jackknife).
double mu_k_at(const FittedModel& model, int k, const CovariateVector& x_query, double h);

/// Truncated mean surface sum_{k<=K} mu_k(x) b_k(s).
double mu_surface(const FittedModel& model, const CovariateVector& x_query, const SpatialPoint& s);

/// Jackknife bias-corrected component: 2 mu_k^(h) - mu_k^(2h).
double mu_k_bias_corrected(const FittedModel& model, int k, const CovariateVector& x_query);

/// Bias-corrected truncated surface.
double mu_surface_bias_corrected(const FittedModel& model, const CovariateVector& x_query,
                                 const SpatialPoint& s);

struct HyperCandidate {
  double h = 0.1;
  int K = 1;
  double phi = 0.9;
};

struct HyperSelection {
  HyperCandidate choice;
  struct Row {
    HyperCandidate candidate;
    double cv_rmse;
    std::size_t skipped_folds;
    std::size_t total_folds;
    bool disqualified;
  };
  std::vector<Row> table;
  std::vector<std::string> warnings;
};

/// Leave-one-location-out cross-validation over the candidate grid. Each fold
/// removes one distinct location everywhere, refits the aggregation, and
/// scores the prediction of the held-out responses. Folds where a candidate
/// has no in-support neighbor are skipped and counted; candidates with more
/// than 20% skipped folds are disqualified. Ties prefer the smallest h, then
/// the smallest K, then the smallest phi.
HyperSelection select_hyperparameters(const SpatioTemporalDataset& dataset, const BasisSet& basis,
                                      const TypeIKernel& kernel,
                                      const std::vector<HyperCandidate>& grid);

}  // namespace stkern
