#include <cmath>

#include "doctest.h"

#include "stkern/basis.hpp"

using namespace stkern;

TEST_SUITE_BEGIN("basis");

TEST_CASE("d=2 K=6 matches the closed forms") {
  const auto basis = BasisSet::build(2, 6);

  // b2 at (1.0, 0.5) = sqrt(12) * 0.5 = sqrt(3)
  CHECK(basis.eval(2, SpatialPoint{1.0, 0.5}) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
  // b1 is the constant function
  CHECK(basis.eval(1, SpatialPoint{0.123, 0.987}) == doctest::Approx(1.0).epsilon(1e-14));
  // b6 at (0.5, 0.9) has a zero factor
  CHECK(basis.eval(6, SpatialPoint{0.5, 0.9}) == doctest::Approx(0.0));
  // b3 at (0.5, 1.0) = sqrt(12) * 0.5
  CHECK(basis.eval(3, SpatialPoint{0.5, 1.0}) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
  // b4 at s1=0.5 = 6 sqrt(5) (1/4 - 1/2 + 1/6) = -sqrt(5)/2
  CHECK(basis.eval(4, SpatialPoint{0.5, 0.77}) ==
        doctest::Approx(-std::sqrt(5.0) / 2.0).epsilon(1e-12));

  // explicit closed forms on a grid
  for (double s1 : {0.0, 0.25, 0.6, 1.0})
    for (double s2 : {0.0, 0.4, 0.75, 1.0}) {
      const SpatialPoint s{s1, s2};
      CHECK(basis.eval(2, s) == doctest::Approx(std::sqrt(12.0) * (s1 - 0.5)).epsilon(1e-12));
      CHECK(basis.eval(3, s) == doctest::Approx(std::sqrt(12.0) * (s2 - 0.5)).epsilon(1e-12));
      CHECK(basis.eval(4, s) ==
            doctest::Approx(6.0 * std::sqrt(5.0) * (s1 * s1 - s1 + 1.0 / 6.0)).epsilon(1e-12));
      CHECK(basis.eval(5, s) ==
            doctest::Approx(6.0 * std::sqrt(5.0) * (s2 * s2 - s2 + 1.0 / 6.0)).epsilon(1e-12));
      CHECK(basis.eval(6, s) == doctest::Approx(12.0 * (s1 - 0.5) * (s2 - 0.5)).epsilon(1e-12));
    }
}

TEST_CASE("eval rejects bad indices") {
  const auto basis = BasisSet::build(2, 6);
  CHECK_THROWS_AS(basis.eval(0, SpatialPoint{0.5, 0.5}), Error);
  CHECK_THROWS_AS(basis.eval(7, SpatialPoint{0.5, 0.5}), Error);
}

TEST_CASE("build rejects counts beyond the degree table") {
  CHECK_THROWS_AS(BasisSet::build(1, 1000), Error);
  try {
    BasisSet::build(1, 1000);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnsupportedCount);
  }
}

TEST_CASE("gram is the identity at sufficient order") {
  const auto basis = BasisSet::build(2, 6);
  const auto G = basis.gram(8);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      CHECK(std::abs(G(i, j) - (i == j ? 1.0 : 0.0)) <= 1e-12);

  const auto basis1 = BasisSet::build(1, 2);
  const auto G1 = basis1.gram(4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(std::abs(G1(i, j) - (i == j ? 1.0 : 0.0)) <= 1e-12);
}

TEST_CASE("under-resolved quadrature breaks orthonormality") {
  const auto basis = BasisSet::build(2, 6);
  const auto G = basis.gram(1);
  double max_dev = 0.0;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      max_dev = std::max(max_dev, std::abs(G(i, j) - (i == j ? 1.0 : 0.0)));
  CHECK(max_dev > 1e-3);
}

TEST_CASE("tensor product structure") {
  const auto basis = BasisSet::build(2, 10);
  const auto b1 = BasisSet::build(1, 5);
  for (int k = 1; k <= 10; ++k) {
    const auto& deg = basis.degrees(k);
    for (double s1 : {0.1, 0.5, 0.9})
      for (double s2 : {0.2, 0.8}) {
        const double expected =
            b1.eval(deg[0] + 1, SpatialPoint{s1}) * b1.eval(deg[1] + 1, SpatialPoint{s2});
        CHECK(basis.eval(k, SpatialPoint{s1, s2}) == doctest::Approx(expected).epsilon(1e-13));
      }
  }
}

TEST_CASE("bounded on the unit square by the 6 sqrt(5) envelope") {
  const auto basis = BasisSet::build(2, 6);
  double sup = 0.0;
  for (int i = 0; i <= 100; ++i)
    for (int j = 0; j <= 100; ++j) {
      const SpatialPoint s{i / 100.0, j / 100.0};
      sup = std::max(sup, basis.b_inf(s));
      CHECK(std::isfinite(basis.b_inf(s)));
    }
  CHECK(sup <= 6.0 * std::sqrt(5.0) + 1e-9);
  CHECK(sup == doctest::Approx(3.0));  // attained by b6 at the corners
}

TEST_CASE("d=1 ordering is by degree") {
  const auto basis = BasisSet::build(1, 3);
  CHECK(basis.eval(1, SpatialPoint{0.3}) == doctest::Approx(1.0));
  CHECK(basis.eval(2, SpatialPoint{1.0}) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("d=2 ordering past the pinned first six is grlex") {
  const auto basis = BasisSet::build(2, 10);
  const std::vector<std::vector<int>> expected{
      {0, 0}, {1, 0}, {0, 1}, {2, 0}, {0, 2}, {1, 1}, {3, 0}, {2, 1}, {1, 2}, {0, 3}};
  for (int k = 1; k <= 10; ++k) CHECK(basis.degrees(k) == expected[static_cast<std::size_t>(k - 1)]);
}

TEST_CASE("orthonormality persists at higher counts and orders") {
  const auto basis = BasisSet::build(2, 15);  // through total degree 4
  const auto G = basis.gram(16);
  double max_dev = 0.0;
  for (int i = 0; i < 15; ++i)
    for (int j = 0; j < 15; ++j)
      max_dev = std::max(max_dev, std::abs(G(i, j) - (i == j ? 1.0 : 0.0)));
  CHECK(max_dev <= 1e-12);
}

TEST_SUITE_END();
