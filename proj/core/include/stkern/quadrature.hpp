#pragma once

#include <cstddef>
#include <vector>

namespace stkern {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule with n nodes on [0,1]; exact for polynomials of
/// degree <= 2n-1. Nodes come from Newton iteration on P_n and are cached
/// per order.
const QuadratureRule& gauss_legendre_01(int n);

}  // namespace stkern
