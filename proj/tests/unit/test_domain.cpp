#include "doctest.h"

#include "stkern/domain.hpp"

using namespace stkern;

namespace {

SpatioTemporalDataset minimal_dataset() {
  SpatioTemporalDataset ds;
  ds.dimension = 2;
  TimepointRecord rec;
  rec.t = 0.0;
  rec.locations = {SpatialPoint{0.5, 0.5}};
  rec.responses = {1.0};
  ds.records.push_back(rec);
  return ds;
}

}  // namespace

TEST_SUITE_BEGIN("domain");

TEST_CASE("validate accepts a minimal dataset") {
  CHECK(validate(minimal_dataset()).ok());
}

TEST_CASE("validate flags out-of-range coordinates with the record index") {
  auto ds = minimal_dataset();
  ds.records[0].locations[0] = SpatialPoint{1.2, 0.0};
  const auto report = validate(ds);
  REQUIRE_FALSE(report.ok());
  CHECK(report.issues[0].code == ErrorCode::CoordinateOutOfRange);
  CHECK(report.issues[0].record_index == 0);
}

TEST_CASE("validate flags non-increasing times at the offending record") {
  SpatioTemporalDataset ds;
  ds.dimension = 1;
  for (double t : {0.0, 0.3, 0.3}) {
    TimepointRecord rec;
    rec.t = t;
    rec.locations = {SpatialPoint{0.5}};
    rec.responses = {1.0};
    ds.records.push_back(rec);
  }
  const auto report = validate(ds);
  REQUIRE_FALSE(report.ok());
  CHECK(report.issues[0].code == ErrorCode::NonIncreasingTime);
  CHECK(report.issues[0].record_index == 2);
}

TEST_CASE("validate flags duplicate locations and dimension mismatches") {
  auto ds = minimal_dataset();
  ds.records[0].locations.push_back(SpatialPoint{0.5, 0.5});
  ds.records[0].responses.push_back(2.0);
  auto report = validate(ds);
  REQUIRE_FALSE(report.ok());
  CHECK(report.issues[0].code == ErrorCode::DuplicateLocation);

  ds = minimal_dataset();
  ds.records[0].locations[0] = SpatialPoint{0.5};
  report = validate(ds);
  REQUIRE_FALSE(report.ok());
  CHECK(report.issues[0].code == ErrorCode::DimensionMismatch);
}

TEST_CASE("validate reports every violation, not just the first") {
  SpatioTemporalDataset ds;
  ds.dimension = 2;
  TimepointRecord a;
  a.t = 0.5;
  a.locations = {SpatialPoint{1.2, 0.0}};
  a.responses = {1.0};
  TimepointRecord b;
  b.t = 0.2;
  b.locations = {SpatialPoint{0.1, 0.1}, SpatialPoint{0.1, 0.1}};
  b.responses = {1.0, 2.0};
  ds.records = {a, b};
  const auto report = validate(ds);
  CHECK(report.issues.size() >= 3);  // range, order, duplicate
}

TEST_CASE("rescale maps times and boxes onto [0,1]") {
  const std::vector<double> times{10.0, 20.0, 30.0};
  std::vector<std::vector<SpatialPoint>> locs(3, {SpatialPoint{0.5}});
  BoundingBox box{{0.0}, {2.0}};
  const auto out = rescale(times, locs, box);
  CHECK(out.times[0] == doctest::Approx(0.0));
  CHECK(out.times[1] == doctest::Approx(0.5));
  CHECK(out.times[2] == doctest::Approx(1.0));
  CHECK(out.locations[0][0].coords[0] == doctest::Approx(0.25));
}

TEST_CASE("rescale rejects degenerate axes") {
  const std::vector<double> times{0.0, 1.0};
  std::vector<std::vector<SpatialPoint>> locs(2, {SpatialPoint{3.0}});
  BoundingBox box{{3.0}, {3.0}};
  CHECK_THROWS_AS(rescale(times, locs, box), Error);
  try {
    rescale(times, locs, box);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateRange);
  }
}

TEST_CASE("rescale is idempotent") {
  const std::vector<double> times{2.0, 5.0, 11.0};
  std::vector<std::vector<SpatialPoint>> locs{
      {SpatialPoint{1.0, 4.0}}, {SpatialPoint{3.0, 8.0}}, {SpatialPoint{2.0, 6.0}}};
  BoundingBox box{{1.0, 4.0}, {3.0, 8.0}};
  const auto once = rescale(times, locs, box);

  BoundingBox unit{{0.0, 0.0}, {1.0, 1.0}};
  const auto twice = rescale(once.times, once.locations, unit);
  for (std::size_t i = 0; i < once.times.size(); ++i) {
    CHECK(twice.times[i] == once.times[i]);
    for (std::size_t a = 0; a < 2; ++a)
      CHECK(twice.locations[i][0].coords[a] == once.locations[i][0].coords[a]);
  }
}

TEST_CASE("validate succeeds on rescaled strictly-increasing data") {
  const std::vector<double> times{3.0, 7.0, 9.0, 15.0};
  std::vector<std::vector<SpatialPoint>> locs;
  for (int i = 0; i < 4; ++i)
    locs.push_back({SpatialPoint{0.1 + i, 2.0}, SpatialPoint{0.4 + i, 3.0}});
  BoundingBox box{{0.1, 2.0}, {3.4, 3.0 + 1e-9}};
  const auto out = rescale(times, locs, box);

  SpatioTemporalDataset ds;
  ds.dimension = 2;
  for (std::size_t i = 0; i < out.times.size(); ++i) {
    TimepointRecord rec;
    rec.t = out.times[i];
    rec.locations = out.locations[i];
    rec.responses.assign(out.locations[i].size(), 1.0);
    ds.records.push_back(rec);
  }
  CHECK(validate(ds).ok());
}

TEST_CASE("merge_duplicates averages responses at identical (t,s)") {
  SpatioTemporalDataset ds;
  ds.dimension = 1;
  TimepointRecord r1;
  r1.t = 0.5;
  r1.locations = {SpatialPoint{0.2}, SpatialPoint{0.2}, SpatialPoint{0.8}};
  r1.responses = {1.0, 3.0, 5.0};
  TimepointRecord r2;
  r2.t = 0.5;
  r2.locations = {SpatialPoint{0.8}};
  r2.responses = {7.0};
  ds.records = {r1, r2};

  const auto merged = merge_duplicates(ds);
  REQUIRE(merged.records.size() == 1);
  const auto& rec = merged.records[0];
  REQUIRE(rec.locations.size() == 2);
  CHECK(rec.responses[0] == doctest::Approx(2.0));  // (1+3)/2
  CHECK(rec.responses[1] == doctest::Approx(6.0));  // (5+7)/2
  CHECK(validate(merged).ok());
}

TEST_CASE("covariate zero-extension convention") {
  const CovariateVector x{1.0, 2.0};
  CHECK(x.at(0) == 1.0);
  CHECK(x.at(5) == 0.0);
}

TEST_CASE("scaling weights") {
  const auto geom = ScalingWeights::Geometric(0.9);
  CHECK(geom.zeta(0) == doctest::Approx(0.9));
  CHECK(geom.zeta(2) == doctest::Approx(0.9 * 0.9 * 0.9));
  CHECK_THROWS_AS(ScalingWeights::Geometric(1.5), Error);
  CHECK_THROWS_AS(ScalingWeights::Explicit({1.0, -1.0}), Error);
}

TEST_SUITE_END();
