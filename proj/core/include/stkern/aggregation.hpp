#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "stkern/basis.hpp"
#include "stkern/types.hpp"

namespace stkern {

/// Nearest-neighbor queries over a fixed location list via grid buckets.
/// Ties are broken toward the lowest location index.
class NearestLocator {
 public:
  NearestLocator(const std::vector<SpatialPoint>& locations, int dimension);

  /// Index of the nearest location to q.
  int nearest(const SpatialPoint& q) const;

  /// Distance from q to its nearest location.
  double nearest_distance(const SpatialPoint& q) const;

 private:
  std::pair<int, double> nearest_impl(const SpatialPoint& q) const;

  const std::vector<SpatialPoint>* locations_;
  int d_;
  int buckets_per_axis_;
  double bucket_side_;
  std::vector<std::vector<int>> buckets_;
};

/// Axis-aligned hypercube cover of [0,1]^d with cell diameter epsilon_star
/// (side epsilon_star / sqrt(d)); cells overhanging the boundary are clipped
/// and their centers recomputed as clipped-cell centroids. Each cell's
/// representative is the observed location nearest to its center.
struct GridCover {
  double epsilon_star = 0.0;
  int dimension = 0;
  int cells_per_axis = 0;
  std::size_t cell_count = 0;          // r = cells_per_axis^d
  std::vector<int> representative;     // per cell, index into the location list
  std::vector<std::size_t> rep_count;  // per location, number of cells it represents

  /// Clipped centroid of one cell (cells enumerated with the last axis fastest).
  SpatialPoint cell_center(std::size_t cell) const;
};

/// Covering radius of the locations over [0,1]^d: the maximum over a dense
/// probe grid of the distance to the nearest observed location. The default
/// probe budget is 201 per axis, reduced for d > 3 to keep ~201^3 probes.
double effective_resolution(const std::vector<SpatialPoint>& locations, int dimension,
                            int probes_per_axis = 0);

GridCover build_cover(const std::vector<SpatialPoint>& locations, double epsilon_star,
                      int dimension, std::size_t cell_cap = 10'000'000);

/// Spatially aggregated response: (1/r) sum_l Y(s_{j_l}) b_k(s_{j_l}) over the
/// cover's representatives.
double aggregate(const std::vector<SpatialPoint>& locations, const std::vector<double>& responses,
                 const GridCover& cover, const BasisSet& basis, int k);

/// Aggregates for all k = 1..K at once (one basis evaluation per location).
std::vector<double> aggregate_all(const std::vector<SpatialPoint>& locations,
                                  const std::vector<double>& responses, const GridCover& cover,
                                  const BasisSet& basis, int K);

/// Reuses covers across timepoints that share one location set (the common
/// case for gridded data); keyed by the exact coordinate bytes.
class CoverCache {
 public:
  std::shared_ptr<const GridCover> get(const std::vector<SpatialPoint>& locations, int dimension,
                                       int probes_per_axis = 0);

 private:
  struct Entry {
    std::vector<double> key;
    std::shared_ptr<const GridCover> cover;
  };
  std::vector<Entry> entries_;
};

}  // namespace stkern
