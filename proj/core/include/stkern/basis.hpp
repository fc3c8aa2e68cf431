#pragma once

#include <vector>

#include <Eigen/Dense>

#include "stkern/types.hpp"

namespace stkern {

/// Orthonormal tensor-product basis of shifted Legendre polynomials on
/// [0,1]^d. Each member is a product of univariate factors
/// P~_m(x) = sqrt(2m+1) P_m(2x-1), each of unit L^2 norm on [0,1].
///
/// Ordering is graded by total degree. For d=2 the first six members match
/// the closed forms used throughout:
///   b1 = 1
///   b2 = sqrt(12)(s1 - 1/2)         b3 = sqrt(12)(s2 - 1/2)
///   b4 = 6 sqrt(5)(s1^2 - s1 + 1/6) b5 = 6 sqrt(5)(s2^2 - s2 + 1/6)
///   b6 = 12(s1 - 1/2)(s2 - 1/2)
/// (axis-pure members precede the mixed one within degree 2). Higher grades
/// use grlex order, descending in the first axis degree.
class BasisSet {
 public:
  /// Throws UnsupportedCount when count exceeds the degree table
  /// (total degree <= 12).
  static BasisSet build(int dimension, int count);

  int dimension() const { return d_; }
  int size() const { return K_; }

  /// Value of b_k at s, k in 1..K. Throws IndexOutOfRange / DimensionMismatch.
  double eval(int k, const SpatialPoint& s) const;

  /// All of b_1..b_K at s, written into out (resized to K).
  void eval_all(const SpatialPoint& s, std::vector<double>& out) const;

  /// Gram matrix by tensor Gauss-Legendre quadrature of the given order per
  /// axis; equals the identity to quadrature accuracy once the order resolves
  /// the polynomial degrees.
  Eigen::MatrixXd gram(int quadrature_order) const;

  /// Dominating function b_inf(s) = max_k |b_k(s)| over the built set.
  double b_inf(const SpatialPoint& s) const;

  const std::vector<int>& degrees(int k) const { return multi_indices_[k - 1]; }

 private:
  int d_ = 0;
  int K_ = 0;
  std::vector<std::vector<int>> multi_indices_;
};

}  // namespace stkern
