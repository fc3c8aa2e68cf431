#include "stkern/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "stkern/domain.hpp"

namespace stkern {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::uint64_t fnv1a64(const void* data, std::size_t bytes) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < bytes; ++i) {
    hash ^= p[i];
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_field(const std::string& field, const std::string& path, std::size_t line_no) {
  const char* begin = field.data();
  const char* end = begin + field.size();
  while (begin != end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end != begin && (*(end - 1) == ' ' || *(end - 1) == '\r' || *(end - 1) == '\t')) --end;
  double value = 0.0;
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end)
    throw Error(ErrorCode::ParseError,
                path + " line " + std::to_string(line_no) + ": bad number '" + field + "'");
  return value;
}

struct RawObservations {
  int dimension = 0;
  // raw t -> (locations, responses) in file order
  std::vector<double> times;
  std::vector<std::vector<SpatialPoint>> locations;
  std::vector<std::vector<double>> responses;
};

RawObservations read_observations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line))
    throw Error(ErrorCode::ParseError, path + " line 1: missing header");
  ++line_no;
  auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "t" || header.back() != "y")
    throw Error(ErrorCode::ParseError, path + " line 1: expected header t,s1..sd,y");
  const int d = static_cast<int>(header.size()) - 2;
  for (int a = 0; a < d; ++a)
    if (header[static_cast<std::size_t>(a) + 1] != "s" + std::to_string(a + 1))
      throw Error(ErrorCode::ParseError, path + " line 1: expected header t,s1..sd,y");

  RawObservations raw;
  raw.dimension = d;
  std::map<double, std::size_t> index;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw Error(ErrorCode::ParseError,
                  path + " line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields");
    const double t = parse_field(fields[0], path, line_no);
    std::vector<double> coords(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a)
      coords[static_cast<std::size_t>(a)] = parse_field(fields[static_cast<std::size_t>(a) + 1], path, line_no);
    const double y = parse_field(fields.back(), path, line_no);

    auto [it, inserted] = index.try_emplace(t, raw.times.size());
    if (inserted) {
      raw.times.push_back(t);
      raw.locations.emplace_back();
      raw.responses.emplace_back();
    }
    raw.locations[it->second].emplace_back(std::move(coords));
    raw.responses[it->second].push_back(y);
  }
  if (raw.times.empty()) throw Error(ErrorCode::ParseError, path + ": no data rows");
  return raw;
}

std::map<double, CovariateVector> read_covariates(const std::string& path) {
  std::map<double, CovariateVector> table;
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line))
    throw Error(ErrorCode::ParseError, path + " line 1: missing header");
  ++line_no;
  const auto header = split_csv_line(line);
  if (header.empty() || header[0] != "t")
    throw Error(ErrorCode::ParseError, path + " line 1: expected header t,x1..");
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.empty()) continue;
    const double t = parse_field(fields[0], path, line_no);
    std::vector<double> values;
    values.reserve(fields.size() - 1);
    for (std::size_t j = 1; j < fields.size(); ++j) {
      // ragged rows: trailing empties are the zero tail
      if (fields[j].empty()) continue;
      values.push_back(parse_field(fields[j], path, line_no));
    }
    table[t] = CovariateVector{std::move(values)};
  }
  return table;
}

}  // namespace

IngestResult ingest_csv(const std::string& obs_path, const std::string& cov_path) {
  auto raw = read_observations(obs_path);

  std::map<double, CovariateVector> covariates;
  if (!cov_path.empty()) {
    covariates = read_covariates(cov_path);
    std::string unmatched;
    for (const auto& [t, cov] : covariates)
      if (std::find(raw.times.begin(), raw.times.end(), t) == raw.times.end())
        unmatched += (unmatched.empty() ? "" : ", ") + format_double(t);
    if (!unmatched.empty())
      throw Error(ErrorCode::JoinError,
                  "covariate timepoints absent from observations: " + unmatched);
  }

  // Rescale raw coordinates onto [0,1]: per-axis data bounding box, time range
  // from the observed span. A single distinct time maps to 0.
  BoundingBox box;
  box.min.assign(static_cast<std::size_t>(raw.dimension), std::numeric_limits<double>::infinity());
  box.max.assign(static_cast<std::size_t>(raw.dimension), -std::numeric_limits<double>::infinity());
  for (const auto& locs : raw.locations)
    for (const auto& s : locs)
      for (int a = 0; a < raw.dimension; ++a) {
        box.min[static_cast<std::size_t>(a)] = std::min(box.min[static_cast<std::size_t>(a)], s.coords[static_cast<std::size_t>(a)]);
        box.max[static_cast<std::size_t>(a)] = std::max(box.max[static_cast<std::size_t>(a)], s.coords[static_cast<std::size_t>(a)]);
      }

  IngestResult out;
  out.raw_times = raw.times;

  SpatioTemporalDataset ds;
  ds.dimension = raw.dimension;
  const bool single_time = raw.times.size() == 1;
  RescaledComponents scaled;
  if (single_time) {
    scaled.times = {0.0};
    scaled.locations.resize(1);
    for (const auto& s : raw.locations[0]) {
      std::vector<double> c(static_cast<std::size_t>(raw.dimension));
      for (int a = 0; a < raw.dimension; ++a) {
        const auto ai = static_cast<std::size_t>(a);
        if (!(box.max[ai] > box.min[ai]))
          throw Error(ErrorCode::DegenerateRange, "axis " + std::to_string(a + 1) + " is constant");
        c[ai] = (s.coords[ai] - box.min[ai]) / (box.max[ai] - box.min[ai]);
      }
      scaled.locations[0].emplace_back(std::move(c));
    }
  } else {
    scaled = rescale(raw.times, raw.locations, box);
  }

  for (std::size_t i = 0; i < raw.times.size(); ++i) {
    TimepointRecord rec;
    rec.t = scaled.times[i];
    rec.locations = scaled.locations[i];
    rec.responses = raw.responses[i];
    if (auto it = covariates.find(raw.times[i]); it != covariates.end())
      rec.covariate = it->second;
    ds.records.push_back(std::move(rec));
  }

  out.dataset = merge_duplicates(ds);
  validate_or_throw(out.dataset);
  return out;
}

void write_observations(const std::string& path, const SimData& sim) {
  std::ofstream outf(path);
  if (!outf) throw Error(ErrorCode::ParseError, "cannot write " + path);
  outf << "t,s1,s2,y\n";
  for (int t = 0; t < sim.config.n; ++t)
    for (std::size_t a = 0; a < sim.locations.size(); ++a)
      outf << format_double(sim.times[static_cast<std::size_t>(t)]) << ','
           << format_double(sim.locations[a].coords[0]) << ','
           << format_double(sim.locations[a].coords[1]) << ','
           << format_double(sim.responses(t, static_cast<Eigen::Index>(a))) << '\n';
}

void write_covariates_file(const std::string& path, const SimData& sim, Scenario scenario) {
  std::ofstream outf(path);
  if (!outf) throw Error(ErrorCode::ParseError, "cannot write " + path);
  outf << "t,x1\n";
  for (int t = scenario_start_index(scenario); t < sim.config.n; ++t) {
    const auto cov = scenario_covariate(sim, scenario, t);
    outf << format_double(sim.times[static_cast<std::size_t>(t)]);
    for (double v : cov.values) outf << ',' << format_double(v);
    outf << '\n';
  }
}

void write_truth(const std::string& path, const SimData& sim) {
  std::ofstream outf(path);
  if (!outf) throw Error(ErrorCode::ParseError, "cannot write " + path);
  outf << "t,s1,s2,mu\n";
  for (int t = 0; t < sim.config.n; ++t)
    for (std::size_t a = 0; a < sim.locations.size(); ++a)
      outf << format_double(sim.times[static_cast<std::size_t>(t)]) << ','
           << format_double(sim.locations[a].coords[0]) << ','
           << format_double(sim.locations[a].coords[1]) << ','
           << format_double(sim.truth(t, static_cast<Eigen::Index>(a))) << '\n';
}

void write_metrics(const std::string& path, const ExperimentResult& result) {
  std::ofstream outf(path);
  if (!outf) throw Error(ErrorCode::ParseError, "cannot write " + path);
  outf << "scenario,horizon,t,bias,mae,rmse,mape\n";
  for (const auto& row : result.rows)
    outf << scenario_name(row.scenario) << ',' << row.horizon << ',' << format_double(row.t) << ','
         << format_double(row.bias) << ',' << format_double(row.mae) << ','
         << format_double(row.rmse) << ',' << format_double(row.mape) << '\n';
}

void write_p_curve(const std::string& path, const std::vector<PCurvePoint>& curve) {
  std::ofstream outf(path);
  if (!outf) throw Error(ErrorCode::ParseError, "cannot write " + path);
  outf << "p,mape\n";
  for (const auto& pt : curve) outf << pt.p << ',' << format_double(pt.mape) << '\n';
}

}  // namespace stkern
