#include "stkern/mean_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stkern/domain.hpp"
#include "stkern/parallel.hpp"

namespace stkern {

FittedModel fit(const SpatioTemporalDataset& dataset, const BasisSet& basis,
                const TypeIKernel& kernel, const BandwidthConfig& bw, int K,
                const FitOptions& options) {
  if (K < 1) throw Error(ErrorCode::InvalidTruncation, "truncation level must be >= 1");
  if (K > basis.size())
    throw Error(ErrorCode::InvalidTruncation, "truncation level exceeds basis size");
  validate_or_throw(dataset);

  FittedModel model;
  model.basis_ = basis;
  model.kernel_ = kernel;
  model.bw_ = bw;
  model.K_ = K;
  model.dimension_ = dataset.dimension;

  const std::size_t n = dataset.records.size();
  model.covariates_.resize(n);
  model.ystar_.resize(n);

  std::vector<std::shared_ptr<const GridCover>> covers = options.covers;
  if (covers.empty()) {
    CoverCache cache;
    covers.reserve(n);
    for (const auto& rec : dataset.records)
      covers.push_back(cache.get(rec.locations, dataset.dimension,
                                 options.resolution_probes_per_axis));
  } else if (covers.size() != n) {
    throw Error(ErrorCode::InvalidArgument, "cover list length does not match dataset");
  }

  parallel_for(n, [&](std::size_t i) {
    const auto& rec = dataset.records[i];
    model.covariates_[i] = rec.covariate;
    model.ystar_[i] = aggregate_all(rec.locations, rec.responses, *covers[i], basis, K);
    for (double v : model.ystar_[i])
      if (!std::isfinite(v))
        throw Error(ErrorCode::InvalidArgument,
                    "non-finite aggregate at timepoint " + std::to_string(rec.t));
  });
  return model;
}

namespace {

double nw_component(const FittedModel& model, int k, const CovariateVector& x_query, double h) {
  if (k < 1 || k > model.truncation())
    throw Error(ErrorCode::IndexOutOfRange, "component index " + std::to_string(k));
  BandwidthConfig bw = model.bandwidth();
  bw.h = h;
  double num = 0.0, den = 0.0;
  const auto& covs = model.covariates();
  for (std::size_t i = 0; i < covs.size(); ++i) {
    const double w = kernel_weight(model.kernel(), bw, covs[i], x_query);
    if (w > 0.0) {
      num += w * model.ystar(i, k);
      den += w;
    }
  }
  if (den <= 0.0)
    throw Error(ErrorCode::NoNeighbors,
                "no timepoint within kernel support at h=" + std::to_string(h));
  return num / den;
}

}  // namespace

double mu_k(const FittedModel& model, int k, const CovariateVector& x_query) {
  return nw_component(model, k, x_query, model.bandwidth().h);
}

double mu_k_at(const FittedModel& model, int k, const CovariateVector& x_query, double h) {
  return nw_component(model, k, x_query, h);
}

double mu_surface(const FittedModel& model, const CovariateVector& x_query,
                  const SpatialPoint& s) {
  if (static_cast<int>(s.dim()) != model.spatial_dimension())
    throw Error(ErrorCode::InvalidLocation, "query location has wrong dimension");
  for (double c : s.coords)
    if (c < 0.0 || c > 1.0)
      throw Error(ErrorCode::InvalidLocation, "query location outside [0,1]^d");

  double value = 0.0;
  for (int k = 1; k <= model.truncation(); ++k)
    value += mu_k(model, k, x_query) * model.basis().eval(k, s);
  return value;
}

double mu_k_bias_corrected(const FittedModel& model, int k, const CovariateVector& x_query) {
  const double h = model.bandwidth().h;
  return 2.0 * nw_component(model, k, x_query, h) - nw_component(model, k, x_query, 2.0 * h);
}

double mu_surface_bias_corrected(const FittedModel& model, const CovariateVector& x_query,
                                 const SpatialPoint& s) {
  double value = 0.0;
  for (int k = 1; k <= model.truncation(); ++k)
    value += mu_k_bias_corrected(model, k, x_query) * model.basis().eval(k, s);
  return value;
}

HyperSelection select_hyperparameters(const SpatioTemporalDataset& dataset, const BasisSet& basis,
                                      const TypeIKernel& kernel,
                                      const std::vector<HyperCandidate>& grid) {
  if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "empty hyperparameter grid");
  for (const auto& rec : dataset.records)
    if (rec.n_locations() < 2)
      throw Error(ErrorCode::InsufficientLocations,
                  "leave-one-location-out needs >= 2 locations per timepoint");

  // Distinct locations across the dataset define the folds.
  std::vector<SpatialPoint> folds;
  for (const auto& rec : dataset.records)
    for (const auto& s : rec.locations)
      if (std::find(folds.begin(), folds.end(), s) == folds.end()) folds.push_back(s);

  int max_K = 1;
  for (const auto& c : grid) {
    if (c.K < 1 || c.K > basis.size())
      throw Error(ErrorCode::InvalidTruncation, "candidate K outside basis range");
    max_K = std::max(max_K, c.K);
  }

  // Per fold: reduced dataset, aggregation at max_K (shared by every
  // candidate), plus the held-out (t, s, y) triples.
  struct Fold {
    FittedModel model;
    std::vector<std::pair<std::size_t, double>> heldout;  // (record index, response)
    SpatialPoint location;
  };
  std::vector<Fold> prepared(folds.size());

  parallel_for(folds.size(), [&](std::size_t f) {
    const auto& held = folds[f];
    SpatioTemporalDataset reduced;
    reduced.dimension = dataset.dimension;
    Fold fold;
    fold.location = held;
    for (std::size_t i = 0; i < dataset.records.size(); ++i) {
      const auto& rec = dataset.records[i];
      TimepointRecord r;
      r.t = rec.t;
      r.covariate = rec.covariate;
      for (std::size_t j = 0; j < rec.locations.size(); ++j) {
        if (rec.locations[j] == held) {
          fold.heldout.emplace_back(i, rec.responses[j]);
        } else {
          r.locations.push_back(rec.locations[j]);
          r.responses.push_back(rec.responses[j]);
        }
      }
      reduced.records.push_back(std::move(r));
    }
    // Bandwidth/weights are overridden per candidate at query time.
    fold.model = fit(reduced, basis, kernel, BandwidthConfig{1.0, ScalingWeights::Geometric(0.9)},
                     max_K);
    prepared[f] = std::move(fold);
  });

  HyperSelection selection;
  selection.table.reserve(grid.size());

  for (const auto& cand : grid) {
    BandwidthConfig bw{cand.h, ScalingWeights::Geometric(cand.phi)};
    double sq_sum = 0.0;
    std::size_t count = 0, skipped = 0;
    for (const auto& fold : prepared) {
      bool fold_ok = true;
      double fold_sq = 0.0;
      std::size_t fold_n = 0;
      const FittedModel& m = fold.model;
      std::vector<double> weights(m.covariates().size());
      for (const auto& [rec_idx, y_true] : fold.heldout) {
        const auto& x = dataset.records[rec_idx].covariate;
        double den = 0.0;
        for (std::size_t i = 0; i < m.covariates().size(); ++i) {
          weights[i] = kernel_weight(kernel, bw, m.covariates()[i], x);
          den += weights[i];
        }
        if (den <= 0.0) {
          fold_ok = false;
          break;
        }
        double pred = 0.0;
        for (int k = 1; k <= cand.K; ++k) {
          double num = 0.0;
          for (std::size_t i = 0; i < m.covariates().size(); ++i)
            if (weights[i] > 0.0) num += weights[i] * m.ystar(i, k);
          pred += (num / den) * basis.eval(k, fold.location);
        }
        const double err = pred - y_true;
        fold_sq += err * err;
        ++fold_n;
      }
      if (!fold_ok) {
        ++skipped;
      } else {
        sq_sum += fold_sq;
        count += fold_n;
      }
    }

    HyperSelection::Row row;
    row.candidate = cand;
    row.skipped_folds = skipped;
    row.total_folds = prepared.size();
    row.disqualified =
        skipped * 5 > prepared.size() || count == 0;  // > 20% skipped
    row.cv_rmse = count > 0 ? std::sqrt(sq_sum / static_cast<double>(count))
                            : std::numeric_limits<double>::infinity();
    if (skipped > 0) {
      std::ostringstream os;
      os << "candidate h=" << cand.h << " K=" << cand.K << " phi=" << cand.phi << " skipped "
         << skipped << "/" << prepared.size() << " folds";
      selection.warnings.push_back(os.str());
    }
    selection.table.push_back(row);
  }

  const HyperSelection::Row* best = nullptr;
  for (const auto& row : selection.table) {
    if (row.disqualified) continue;
    if (!best || row.cv_rmse < best->cv_rmse ||
        (row.cv_rmse == best->cv_rmse &&
         (row.candidate.h < best->candidate.h ||
          (row.candidate.h == best->candidate.h &&
           (row.candidate.K < best->candidate.K ||
            (row.candidate.K == best->candidate.K && row.candidate.phi < best->candidate.phi)))))) {
      best = &row;
    }
  }
  if (!best)
    throw Error(ErrorCode::NoNeighbors, "every cross-validation candidate was disqualified");
  selection.choice = best->candidate;
  return selection;
}

}  // namespace stkern
