#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stkern/simulation.hpp"
#include "stkern/types.hpp"

namespace stkern {

/// Shortest decimal representation that round-trips the double exactly.
std::string format_double(double v);

std::uint64_t fnv1a64(const void* data, std::size_t bytes);

struct IngestResult {
  SpatioTemporalDataset dataset;  // merged, rescaled, validated
  std::vector<double> raw_times;  // original timestamps, one per record
};

/// Observations file: header "t,s1..sd,y"; covariates file: header "t,x1.."
/// with ragged rows permitted (zero-extension supplies the tail). Timepoints
/// join on the exact raw t. Duplicate (t,s) observations are averaged, then
/// the dataset is rescaled onto [0,1] and validated. An empty covariate path
/// attaches all-zero covariates.
IngestResult ingest_csv(const std::string& obs_path, const std::string& cov_path);

void write_observations(const std::string& path, const SimData& sim);
void write_covariates_file(const std::string& path, const SimData& sim, Scenario scenario);
void write_truth(const std::string& path, const SimData& sim);
void write_metrics(const std::string& path, const ExperimentResult& result);
void write_p_curve(const std::string& path, const std::vector<PCurvePoint>& curve);

}  // namespace stkern
