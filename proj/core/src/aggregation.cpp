#include "stkern/aggregation.hpp"

#include <algorithm>
#include <cmath>

namespace stkern {

NearestLocator::NearestLocator(const std::vector<SpatialPoint>& locations, int dimension)
    : locations_(&locations), d_(dimension) {
  if (locations.empty()) throw Error(ErrorCode::EmptyLocations, "no locations to index");
  const double n = static_cast<double>(locations.size());
  buckets_per_axis_ = std::max(1, static_cast<int>(std::floor(std::pow(n, 1.0 / d_))));
  bucket_side_ = 1.0 / buckets_per_axis_;
  std::size_t total = 1;
  for (int a = 0; a < d_; ++a) total *= static_cast<std::size_t>(buckets_per_axis_);
  buckets_.resize(total);
  for (std::size_t j = 0; j < locations.size(); ++j) {
    std::size_t idx = 0;
    for (int a = 0; a < d_; ++a) {
      int b = static_cast<int>(locations[j].coords[a] * buckets_per_axis_);
      b = std::clamp(b, 0, buckets_per_axis_ - 1);
      idx = idx * buckets_per_axis_ + static_cast<std::size_t>(b);
    }
    buckets_[idx].push_back(static_cast<int>(j));
  }
}

std::pair<int, double> NearestLocator::nearest_impl(const SpatialPoint& q) const {
  const auto& locs = *locations_;
  std::vector<int> qb(d_);
  for (int a = 0; a < d_; ++a) {
    int b = static_cast<int>(q.coords[a] * buckets_per_axis_);
    qb[a] = std::clamp(b, 0, buckets_per_axis_ - 1);
  }

  int best = -1;
  double best_d2 = std::numeric_limits<double>::infinity();
  auto scan_bucket = [&](std::size_t idx) {
    for (int j : buckets_[idx]) {
      const double d2 = squared_distance(q, locs[static_cast<std::size_t>(j)]);
      if (d2 < best_d2 || (d2 == best_d2 && j < best)) {
        best_d2 = d2;
        best = j;
      }
    }
  };

  for (int ring = 0; ring < buckets_per_axis_; ++ring) {
    // Once a candidate exists, no point beyond ring-1 bucket layers can beat it.
    if (best >= 0) {
      const double reach = (ring - 1) * bucket_side_;
      if (reach > 0.0 && reach * reach > best_d2) break;
    }
    // enumerate buckets at Chebyshev distance `ring` from qb
    std::vector<int> offset(d_, -ring);
    bool any = false;
    while (true) {
      int cheb = 0;
      for (int a = 0; a < d_; ++a) cheb = std::max(cheb, std::abs(offset[a]));
      if (cheb == ring) {
        bool in_range = true;
        std::size_t idx = 0;
        for (int a = 0; a < d_; ++a) {
          const int b = qb[a] + offset[a];
          if (b < 0 || b >= buckets_per_axis_) {
            in_range = false;
            break;
          }
          idx = idx * buckets_per_axis_ + static_cast<std::size_t>(b);
        }
        if (in_range) {
          any = true;
          scan_bucket(idx);
        }
      }
      int axis = d_ - 1;
      while (axis >= 0 && ++offset[axis] > ring) offset[axis--] = -ring;
      if (axis < 0) break;
    }
    (void)any;
  }
  return {best, std::sqrt(best_d2)};
}

int NearestLocator::nearest(const SpatialPoint& q) const { return nearest_impl(q).first; }

double NearestLocator::nearest_distance(const SpatialPoint& q) const {
  return nearest_impl(q).second;
}

double effective_resolution(const std::vector<SpatialPoint>& locations, int dimension,
                            int probes_per_axis) {
  if (locations.empty()) throw Error(ErrorCode::EmptyLocations, "no locations");
  if (probes_per_axis <= 0) {
    probes_per_axis = 201;
    if (dimension > 3)
      probes_per_axis = std::max(2, static_cast<int>(std::pow(201.0, 3.0 / dimension)));
  }

  NearestLocator locator(locations, dimension);
  SpatialPoint probe(std::vector<double>(dimension, 0.0));
  std::vector<int> idx(dimension, 0);
  double worst = 0.0;
  while (true) {
    for (int a = 0; a < dimension; ++a)
      probe.coords[a] = static_cast<double>(idx[a]) / (probes_per_axis - 1);
    worst = std::max(worst, locator.nearest_distance(probe));
    int axis = dimension - 1;
    while (axis >= 0 && ++idx[axis] == probes_per_axis) idx[axis--] = 0;
    if (axis < 0) break;
  }
  return worst;
}

SpatialPoint GridCover::cell_center(std::size_t cell) const {
  const double side = epsilon_star / std::sqrt(static_cast<double>(dimension));
  std::vector<double> c(dimension);
  for (int a = dimension - 1; a >= 0; --a) {
    const auto i = cell % static_cast<std::size_t>(cells_per_axis);
    cell /= static_cast<std::size_t>(cells_per_axis);
    const double lo = i * side;
    const double hi = std::min(1.0, lo + side);
    c[a] = 0.5 * (lo + hi);
  }
  return SpatialPoint(std::move(c));
}

GridCover build_cover(const std::vector<SpatialPoint>& locations, double epsilon_star,
                      int dimension, std::size_t cell_cap) {
  if (locations.empty()) throw Error(ErrorCode::EmptyLocations, "no locations");
  if (!(epsilon_star > 0.0))
    throw Error(ErrorCode::InvalidArgument, "epsilon_star must be positive");

  const double side = epsilon_star / std::sqrt(static_cast<double>(dimension));
  const int m = std::max(1, static_cast<int>(std::ceil(1.0 / side - 1e-12)));
  double r_check = 1.0;
  for (int a = 0; a < dimension; ++a) r_check *= m;
  if (r_check > static_cast<double>(cell_cap))
    throw Error(ErrorCode::ResolutionTooFine,
                "cover would need " + std::to_string(static_cast<std::size_t>(r_check)) + " cells");

  GridCover cover;
  cover.epsilon_star = epsilon_star;
  cover.dimension = dimension;
  cover.cells_per_axis = m;
  cover.cell_count = static_cast<std::size_t>(r_check);
  cover.representative.resize(cover.cell_count);
  cover.rep_count.assign(locations.size(), 0);

  NearestLocator locator(locations, dimension);
  for (std::size_t cell = 0; cell < cover.cell_count; ++cell) {
    const int rep = locator.nearest(cover.cell_center(cell));
    cover.representative[cell] = rep;
    cover.rep_count[static_cast<std::size_t>(rep)] += 1;
  }
  return cover;
}

double aggregate(const std::vector<SpatialPoint>& locations, const std::vector<double>& responses,
                 const GridCover& cover, const BasisSet& basis, int k) {
  if (locations.empty()) throw Error(ErrorCode::EmptyLocations, "no locations");
  double sum = 0.0;
  for (std::size_t j = 0; j < locations.size(); ++j) {
    if (cover.rep_count[j] == 0) continue;
    sum += static_cast<double>(cover.rep_count[j]) * responses[j] * basis.eval(k, locations[j]);
  }
  return sum / static_cast<double>(cover.cell_count);
}

std::vector<double> aggregate_all(const std::vector<SpatialPoint>& locations,
                                  const std::vector<double>& responses, const GridCover& cover,
                                  const BasisSet& basis, int K) {
  if (locations.empty()) throw Error(ErrorCode::EmptyLocations, "no locations");
  std::vector<double> out(static_cast<std::size_t>(K), 0.0);
  std::vector<double> bvals;
  for (std::size_t j = 0; j < locations.size(); ++j) {
    if (cover.rep_count[j] == 0) continue;
    basis.eval_all(locations[j], bvals);
    const double w = static_cast<double>(cover.rep_count[j]) * responses[j];
    for (int k = 0; k < K; ++k) out[static_cast<std::size_t>(k)] += w * bvals[static_cast<std::size_t>(k)];
  }
  for (auto& v : out) v /= static_cast<double>(cover.cell_count);
  return out;
}

std::shared_ptr<const GridCover> CoverCache::get(const std::vector<SpatialPoint>& locations,
                                                 int dimension, int probes_per_axis) {
  std::vector<double> key;
  key.reserve(locations.size() * static_cast<std::size_t>(dimension));
  for (const auto& s : locations)
    key.insert(key.end(), s.coords.begin(), s.coords.end());
  for (const auto& e : entries_)
    if (e.key == key) return e.cover;

  const double eps = effective_resolution(locations, dimension, probes_per_axis);
  auto cover = std::make_shared<GridCover>(build_cover(locations, eps, dimension));
  entries_.push_back({std::move(key), cover});
  return cover;
}

}  // namespace stkern
