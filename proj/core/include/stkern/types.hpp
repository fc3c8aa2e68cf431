#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "stkern/errors.hpp"

namespace stkern {

/// A point in the rescaled spatial horizon [0,1]^d.
struct SpatialPoint {
  std::vector<double> coords;

  SpatialPoint() = default;
  explicit SpatialPoint(std::vector<double> c) : coords(std::move(c)) {}
  SpatialPoint(std::initializer_list<double> c) : coords(c) {}

  std::size_t dim() const { return coords.size(); }
  double operator[](std::size_t i) const { return coords[i]; }

  bool operator==(const SpatialPoint& other) const { return coords == other.coords; }
};

inline double squared_distance(const SpatialPoint& a, const SpatialPoint& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.coords.size(); ++i) {
    const double d = a.coords[i] - b.coords[i];
    s += d * d;
  }
  return s;
}

inline double distance(const SpatialPoint& a, const SpatialPoint& b) {
  return std::sqrt(squared_distance(a, b));
}

/// Observed prefix of an infinite real sequence; indices past values.size()
/// are treated as zero everywhere (comparisons, distances).
struct CovariateVector {
  std::vector<double> values;

  CovariateVector() = default;
  explicit CovariateVector(std::vector<double> v) : values(std::move(v)) {}
  CovariateVector(std::initializer_list<double> v) : values(v) {}

  std::size_t observed_length() const { return values.size(); }

  /// Coordinate with the zero tail convention.
  double at(std::size_t j) const { return j < values.size() ? values[j] : 0.0; }
};

/// The diagonal scaling operator D: coordinate j is weighted by zeta_j > 0.
/// Geometric(phi) expands lazily as zeta_j = phi^j (1-indexed); Explicit
/// carries a finite list and rejects lookups past its end.
class ScalingWeights {
 public:
  static ScalingWeights Geometric(double phi) {
    if (!(phi > 0.0 && phi < 1.0))
      throw Error(ErrorCode::InvalidArgument, "geometric weight phi must lie in (0,1)");
    ScalingWeights w;
    w.phi_ = phi;
    return w;
  }

  static ScalingWeights Explicit(std::vector<double> zetas) {
    for (double z : zetas)
      if (!(z > 0.0)) throw Error(ErrorCode::InvalidArgument, "explicit weights must be positive");
    ScalingWeights w;
    w.explicit_ = std::move(zetas);
    return w;
  }

  bool is_geometric() const { return explicit_.empty(); }
  double phi() const { return phi_; }

  /// zeta_j with 0-based j (so Geometric gives phi^(j+1)).
  double zeta(std::size_t j) const {
    if (!explicit_.empty()) {
      if (j >= explicit_.size())
        throw Error(ErrorCode::InvalidArgument,
                    "explicit weight list shorter than compared covariates");
      return explicit_[j];
    }
    return std::pow(phi_, static_cast<double>(j + 1));
  }

 private:
  ScalingWeights() = default;
  double phi_ = 0.9;
  std::vector<double> explicit_;
};

/// Observations at one timepoint: n_i >= 1 distinct locations with responses,
/// plus the timepoint-level covariate.
struct TimepointRecord {
  double t = 0.0;
  std::vector<SpatialPoint> locations;
  std::vector<double> responses;
  CovariateVector covariate;

  std::size_t n_locations() const { return locations.size(); }
};

struct SpatioTemporalDataset {
  int dimension = 0;
  std::vector<TimepointRecord> records;

  std::size_t n_timepoints() const { return records.size(); }
};

}  // namespace stkern
