#include <cmath>
#include <functional>

#include "doctest.h"

#include "stkern/aggregation.hpp"
#include "stkern/quadrature.hpp"

using namespace stkern;

namespace {

std::vector<SpatialPoint> grid2d(int p) {
  std::vector<SpatialPoint> locs;
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      locs.push_back(SpatialPoint{static_cast<double>(i) / (p - 1),
                                  static_cast<double>(j) / (p - 1)});
  return locs;
}

// Independent covering-radius oracle: brute-force max-min distance over a
// dense probe grid, no spatial index involved.
double covering_radius_oracle(const std::vector<SpatialPoint>& locs, int probes) {
  double worst = 0.0;
  for (int i = 0; i < probes; ++i)
    for (int j = 0; j < probes; ++j) {
      const SpatialPoint q{static_cast<double>(i) / (probes - 1),
                           static_cast<double>(j) / (probes - 1)};
      double best = std::numeric_limits<double>::infinity();
      for (const auto& s : locs) best = std::min(best, distance(q, s));
      worst = std::max(worst, best);
    }
  return worst;
}

double quadrature_integral(const std::function<double(const SpatialPoint&)>& f, int order) {
  const auto& rule = gauss_legendre_01(order);
  double total = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    for (std::size_t j = 0; j < rule.nodes.size(); ++j)
      total += rule.weights[i] * rule.weights[j] * f(SpatialPoint{rule.nodes[i], rule.nodes[j]});
  return total;
}

}  // namespace

TEST_SUITE_BEGIN("aggregation");

TEST_CASE("effective resolution of the four corners") {
  const std::vector<SpatialPoint> corners{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}};
  const double eps = effective_resolution(corners, 2);
  CHECK(eps == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-2));
  CHECK(eps == doctest::Approx(covering_radius_oracle(corners, 201)).epsilon(1e-12));
}

TEST_CASE("effective resolution of a single central point") {
  const std::vector<SpatialPoint> center{{0.5, 0.5}};
  CHECK(effective_resolution(center, 2) ==
        doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-2));
}

TEST_CASE("effective resolution of the probe grid itself is about one spacing") {
  const auto locs = grid2d(201);
  CHECK(effective_resolution(locs, 2) <= 1.0 / 200.0 + 1e-9);
}

TEST_CASE("effective resolution matches the brute-force oracle on scattered points") {
  std::vector<SpatialPoint> locs;
  std::uint64_t state = 42;
  auto next = [&] {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    return static_cast<double>(state >> 11) * 0x1.0p-53;
  };
  for (int i = 0; i < 37; ++i) locs.push_back(SpatialPoint{next(), next()});
  CHECK(effective_resolution(locs, 2, 101) ==
        doctest::Approx(covering_radius_oracle(locs, 101)).epsilon(1e-12));
}

TEST_CASE("empty locations are rejected") {
  CHECK_THROWS_AS(effective_resolution({}, 2), Error);
}

TEST_CASE("one-dimensional covering radius") {
  CHECK(effective_resolution({SpatialPoint{0.5}}, 1) == doctest::Approx(0.5).epsilon(1e-2));
  CHECK(effective_resolution({SpatialPoint{0.0}, SpatialPoint{1.0}}, 1) ==
        doctest::Approx(0.5).epsilon(1e-2));
}

TEST_CASE("cover for epsilon = sqrt(2)/2 has four cells at the quarter centers") {
  const std::vector<SpatialPoint> corners{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}};
  const auto cover = build_cover(corners, std::sqrt(2.0) / 2.0, 2);
  CHECK(cover.cells_per_axis == 2);
  CHECK(cover.cell_count == 4);
  // cells enumerate with the last axis fastest: (0.25,0.25),(0.25,0.75),(0.75,0.25),(0.75,0.75)
  const std::vector<std::pair<double, double>> expected{
      {0.25, 0.25}, {0.25, 0.75}, {0.75, 0.25}, {0.75, 0.75}};
  for (std::size_t c = 0; c < 4; ++c) {
    const auto center = cover.cell_center(c);
    CHECK(center.coords[0] == doctest::Approx(expected[c].first));
    CHECK(center.coords[1] == doctest::Approx(expected[c].second));
  }
}

TEST_CASE("one-dimensional cover follows the r formula") {
  const std::vector<SpatialPoint> locs{{0.1}, {0.9}};
  const auto cover = build_cover(locs, 0.5, 1);
  CHECK(cover.cells_per_axis == 2);
  CHECK(cover.cell_count == 2);
}

TEST_CASE("representative ties break to the lowest index") {
  // two locations equidistant from both cell centers
  const std::vector<SpatialPoint> locs{{0.5, 0.4}, {0.5, 0.6}};
  const auto cover = build_cover(locs, std::sqrt(2.0), 2);  // single cell at (0.5, 0.5)
  REQUIRE(cover.cell_count == 1);
  CHECK(cover.representative[0] == 0);
}

TEST_CASE("resolution cap") {
  const std::vector<SpatialPoint> locs{{0.5, 0.5}};
  CHECK_THROWS_AS(build_cover(locs, 1e-5, 2), Error);
}

TEST_CASE("aggregate of a constant response is exactly the constant under b1") {
  const auto locs = grid2d(7);
  const std::vector<double> ys(locs.size(), 3.0);
  const auto basis = BasisSet::build(2, 6);
  const auto cover = build_cover(locs, effective_resolution(locs, 2), 2);
  CHECK(aggregate(locs, ys, cover, basis, 1) == 3.0);
}

TEST_CASE("aggregate approximates the basis integrals on a dense grid") {
  const auto locs = grid2d(50);
  const auto basis = BasisSet::build(2, 6);
  std::vector<double> ys(locs.size());
  for (std::size_t j = 0; j < locs.size(); ++j) ys[j] = basis.eval(2, locs[j]);
  const auto cover = build_cover(locs, effective_resolution(locs, 2), 2);

  const double i22 = quadrature_integral(
      [&](const SpatialPoint& s) { return basis.eval(2, s) * basis.eval(2, s); }, 8);
  const double i23 = quadrature_integral(
      [&](const SpatialPoint& s) { return basis.eval(2, s) * basis.eval(3, s); }, 8);
  CHECK(i22 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(i23) <= 1e-12);

  CHECK(aggregate(locs, ys, cover, basis, 2) == doctest::Approx(i22).epsilon(0.05));
  CHECK(std::abs(aggregate(locs, ys, cover, basis, 3) - i23) <= 0.05);
}

TEST_CASE("aggregate error is non-increasing as locations densify") {
  const auto basis = BasisSet::build(2, 6);
  auto response = [&](const SpatialPoint& s) {
    return 1.0 + 0.7 * basis.eval(2, s) - 0.4 * basis.eval(5, s) + 0.2 * basis.eval(6, s);
  };
  for (int k = 1; k <= 6; ++k) {
    const double truth = quadrature_integral(
        [&](const SpatialPoint& s) { return response(s) * basis.eval(k, s); }, 10);
    double prev_err = std::numeric_limits<double>::infinity();
    for (int p : {5, 10, 20, 40}) {
      const auto locs = grid2d(p);
      std::vector<double> ys(locs.size());
      for (std::size_t j = 0; j < locs.size(); ++j) ys[j] = response(locs[j]);
      const auto cover = build_cover(locs, effective_resolution(locs, 2), 2);
      const double err = std::abs(aggregate(locs, ys, cover, basis, k) - truth);
      CHECK(err <= prev_err + 0.01);  // Monte-Carlo slack
      prev_err = err;
    }
    CHECK(prev_err <= 0.02);
  }
}

TEST_CASE("aggregate is linear in the response") {
  const auto locs = grid2d(9);
  const auto basis = BasisSet::build(2, 6);
  const auto cover = build_cover(locs, effective_resolution(locs, 2), 2);
  std::vector<double> y1(locs.size()), y2(locs.size()), combo(locs.size());
  for (std::size_t j = 0; j < locs.size(); ++j) {
    y1[j] = basis.eval(2, locs[j]);
    y2[j] = basis.eval(4, locs[j]) + 1.0;
    combo[j] = 2.0 * y1[j] - 3.0 * y2[j];
  }
  for (int k = 1; k <= 6; ++k) {
    const double lhs = aggregate(locs, combo, cover, basis, k);
    const double rhs =
        2.0 * aggregate(locs, y1, cover, basis, k) - 3.0 * aggregate(locs, y2, cover, basis, k);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("aggregate ignores location list order except documented ties") {
  const auto locs = grid2d(6);
  std::vector<double> ys(locs.size());
  const auto basis = BasisSet::build(2, 6);
  for (std::size_t j = 0; j < locs.size(); ++j) ys[j] = 0.3 * basis.eval(2, locs[j]) + 1.0;

  std::vector<SpatialPoint> reversed(locs.rbegin(), locs.rend());
  std::vector<double> ys_rev(ys.rbegin(), ys.rend());

  const double eps = effective_resolution(locs, 2);
  const auto c1 = build_cover(locs, eps, 2);
  const auto c2 = build_cover(reversed, eps, 2);
  // the regular grid has no midpoint ties against the cover centers here
  for (int k = 1; k <= 6; ++k)
    CHECK(aggregate(locs, ys, c1, basis, k) ==
          doctest::Approx(aggregate(reversed, ys_rev, c2, basis, k)).epsilon(1e-12));
}

TEST_SUITE_END();
