#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stkern/types.hpp"

namespace stkern {

struct ValidationIssue {
  ErrorCode code;
  std::size_t record_index;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool ok() const { return issues.empty(); }
  std::string to_string() const;
};

/// Checks every dataset invariant and reports all violations with the index
/// of the offending record: coordinates in [0,1], strictly increasing times,
/// distinct locations within a timepoint, constant spatial dimension.
ValidationReport validate(const SpatioTemporalDataset& dataset);

/// Throws Error with the first issue's code if the report is non-empty.
void validate_or_throw(const SpatioTemporalDataset& dataset);

/// Axis-aligned bounding box for raw (unscaled) spatial coordinates.
struct BoundingBox {
  std::vector<double> min;
  std::vector<double> max;
};

struct RescaledComponents {
  std::vector<double> times;                            // mapped onto [0,1]
  std::vector<std::vector<SpatialPoint>> locations;     // per timepoint
};

/// Affine map sending each axis of the box (and the time range) onto [0,1].
/// Order-preserving; throws DegenerateRange when max == min on any axis.
RescaledComponents rescale(const std::vector<double>& raw_times,
                           const std::vector<std::vector<SpatialPoint>>& raw_locations,
                           const BoundingBox& box);

/// Ingestion-time cleanup applied BEFORE validation: records sharing the same
/// t are merged, and responses at identical (t, s) pairs are averaged.
SpatioTemporalDataset merge_duplicates(const SpatioTemporalDataset& dataset);

}  // namespace stkern
