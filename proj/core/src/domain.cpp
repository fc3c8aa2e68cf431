#include "stkern/domain.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace stkern {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::CoordinateOutOfRange: return "CoordinateOutOfRange";
    case ErrorCode::NonIncreasingTime: return "NonIncreasingTime";
    case ErrorCode::DuplicateLocation: return "DuplicateLocation";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DegenerateRange: return "DegenerateRange";
    case ErrorCode::UnsupportedCount: return "UnsupportedCount";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::EmptyLocations: return "EmptyLocations";
    case ErrorCode::ResolutionTooFine: return "ResolutionTooFine";
    case ErrorCode::NoNeighbors: return "NoNeighbors";
    case ErrorCode::DegenerateSupport: return "DegenerateSupport";
    case ErrorCode::InvalidTruncation: return "InvalidTruncation";
    case ErrorCode::InvalidLocation: return "InvalidLocation";
    case ErrorCode::InsufficientLocations: return "InsufficientLocations";
    case ErrorCode::QuadratureOverflow: return "QuadratureOverflow";
    case ErrorCode::IllConditionedSystem: return "IllConditionedSystem";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::InvalidM: return "InvalidM";
    case ErrorCode::QueriesTooClose: return "QueriesTooClose";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::JoinError: return "JoinError";
    case ErrorCode::FirstTimepointUnavailable: return "FirstTimepointUnavailable";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "UnknownError";
}

int Error::exit_category() const noexcept {
  switch (code_) {
    case ErrorCode::NoNeighbors:
    case ErrorCode::DegenerateSupport:
    case ErrorCode::QuadratureOverflow:
    case ErrorCode::IllConditionedSystem:
    case ErrorCode::NoConvergence:
    case ErrorCode::ResolutionTooFine:
      return 4;
    default:
      return 3;
  }
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const auto& issue : issues)
    os << error_code_name(issue.code) << " at record " << issue.record_index << ": "
       << issue.message << "\n";
  return os.str();
}

ValidationReport validate(const SpatioTemporalDataset& dataset) {
  ValidationReport report;
  auto add = [&](ErrorCode code, std::size_t idx, std::string msg) {
    report.issues.push_back({code, idx, std::move(msg)});
  };

  double prev_t = -1.0;
  for (std::size_t i = 0; i < dataset.records.size(); ++i) {
    const auto& rec = dataset.records[i];
    if (i > 0 && !(rec.t > prev_t)) {
      std::ostringstream os;
      os << "t=" << rec.t << " does not exceed previous t=" << prev_t;
      add(ErrorCode::NonIncreasingTime, i, os.str());
    }
    if (rec.t < 0.0 || rec.t > 1.0) {
      std::ostringstream os;
      os << "t=" << rec.t << " outside [0,1]";
      add(ErrorCode::CoordinateOutOfRange, i, os.str());
    }
    prev_t = rec.t;

    if (rec.locations.empty())
      add(ErrorCode::EmptyLocations, i, "timepoint has no locations");
    if (rec.locations.size() != rec.responses.size())
      add(ErrorCode::DimensionMismatch, i, "location and response counts differ");

    for (std::size_t j = 0; j < rec.locations.size(); ++j) {
      const auto& s = rec.locations[j];
      if (static_cast<int>(s.dim()) != dataset.dimension) {
        std::ostringstream os;
        os << "location " << j << " has dimension " << s.dim() << ", dataset dimension is "
           << dataset.dimension;
        add(ErrorCode::DimensionMismatch, i, os.str());
        continue;
      }
      for (double c : s.coords) {
        if (c < 0.0 || c > 1.0) {
          std::ostringstream os;
          os << "location " << j << " coordinate " << c << " outside [0,1]";
          add(ErrorCode::CoordinateOutOfRange, i, os.str());
          break;
        }
      }
    }

    // distinct sites within a timepoint
    for (std::size_t j = 0; j < rec.locations.size(); ++j) {
      for (std::size_t k = j + 1; k < rec.locations.size(); ++k) {
        if (rec.locations[j] == rec.locations[k]) {
          std::ostringstream os;
          os << "locations " << j << " and " << k << " coincide";
          add(ErrorCode::DuplicateLocation, i, os.str());
        }
      }
    }
  }
  return report;
}

void validate_or_throw(const SpatioTemporalDataset& dataset) {
  const auto report = validate(dataset);
  if (!report.ok()) throw Error(report.issues.front().code, report.to_string());
}

RescaledComponents rescale(const std::vector<double>& raw_times,
                           const std::vector<std::vector<SpatialPoint>>& raw_locations,
                           const BoundingBox& box) {
  if (raw_times.size() != raw_locations.size())
    throw Error(ErrorCode::DimensionMismatch, "times and location lists differ in length");
  for (std::size_t i = 1; i < raw_times.size(); ++i)
    if (!(raw_times[i] > raw_times[i - 1]))
      throw Error(ErrorCode::NonIncreasingTime, "raw times must be strictly increasing");
  if (box.min.size() != box.max.size())
    throw Error(ErrorCode::DimensionMismatch, "bounding box min/max differ in length");

  const std::size_t d = box.min.size();
  for (std::size_t a = 0; a < d; ++a)
    if (!(box.max[a] > box.min[a]))
      throw Error(ErrorCode::DegenerateRange, "bounding box degenerate on axis " + std::to_string(a));

  const double t0 = raw_times.empty() ? 0.0 : raw_times.front();
  const double t1 = raw_times.empty() ? 0.0 : raw_times.back();
  if (!raw_times.empty() && !(t1 > t0))
    throw Error(ErrorCode::DegenerateRange, "time range is degenerate");

  RescaledComponents out;
  out.times.reserve(raw_times.size());
  for (double t : raw_times) out.times.push_back((t - t0) / (t1 - t0));

  out.locations.reserve(raw_locations.size());
  for (const auto& locs : raw_locations) {
    std::vector<SpatialPoint> scaled;
    scaled.reserve(locs.size());
    for (const auto& s : locs) {
      if (s.dim() != d)
        throw Error(ErrorCode::DimensionMismatch, "location dimension does not match box");
      std::vector<double> c(d);
      for (std::size_t a = 0; a < d; ++a)
        c[a] = (s.coords[a] - box.min[a]) / (box.max[a] - box.min[a]);
      scaled.emplace_back(std::move(c));
    }
    out.locations.push_back(std::move(scaled));
  }
  return out;
}

SpatioTemporalDataset merge_duplicates(const SpatioTemporalDataset& dataset) {
  // Group records by exact t, then average responses at identical locations.
  std::map<double, TimepointRecord> by_time;
  for (const auto& rec : dataset.records) {
    auto [it, inserted] = by_time.try_emplace(rec.t, TimepointRecord{rec.t, {}, {}, rec.covariate});
    auto& merged = it->second;
    if (!inserted && merged.covariate.values.empty()) merged.covariate = rec.covariate;
    for (std::size_t j = 0; j < rec.locations.size(); ++j) {
      merged.locations.push_back(rec.locations[j]);
      merged.responses.push_back(rec.responses[j]);
    }
  }

  SpatioTemporalDataset out;
  out.dimension = dataset.dimension;
  out.records.reserve(by_time.size());
  for (auto& [t, rec] : by_time) {
    TimepointRecord clean;
    clean.t = t;
    clean.covariate = rec.covariate;
    std::vector<int> counts;
    for (std::size_t j = 0; j < rec.locations.size(); ++j) {
      auto found = std::find(clean.locations.begin(), clean.locations.end(), rec.locations[j]);
      if (found == clean.locations.end()) {
        clean.locations.push_back(rec.locations[j]);
        clean.responses.push_back(rec.responses[j]);
        counts.push_back(1);
      } else {
        const auto idx = static_cast<std::size_t>(found - clean.locations.begin());
        clean.responses[idx] += rec.responses[j];
        counts[idx] += 1;
      }
    }
    for (std::size_t j = 0; j < clean.responses.size(); ++j)
      clean.responses[j] /= counts[j];
    out.records.push_back(std::move(clean));
  }
  return out;
}

}  // namespace stkern
