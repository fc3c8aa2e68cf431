#include "stkern/basis.hpp"

#include <algorithm>
#include <cmath>

#include "stkern/quadrature.hpp"

namespace stkern {

namespace {

constexpr int kMaxTotalDegree = 12;

// Unit-norm shifted Legendre factor on [0,1].
double shifted_legendre(int m, double x) {
  const double u = 2.0 * x - 1.0;
  double p0 = 1.0, p1 = u;
  if (m == 0) return 1.0;
  for (int k = 2; k <= m; ++k) {
    const double p2 = ((2.0 * k - 1.0) * u * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return std::sqrt(2.0 * m + 1.0) * p1;
}

// Multi-indices of one grade in the order described on BasisSet.
std::vector<std::vector<int>> grade_indices(int d, int grade) {
  std::vector<std::vector<int>> out;
  if (grade == 0) {
    out.emplace_back(d, 0);
    return out;
  }
  // grlex, descending in the leading axes
  std::vector<std::vector<int>> all;
  std::vector<int> idx(d, 0);
  // enumerate compositions of `grade` into d parts, lex descending
  auto rec = [&](auto&& self, int axis, int remaining) -> void {
    if (axis == d - 1) {
      idx[axis] = remaining;
      all.push_back(idx);
      return;
    }
    for (int v = remaining; v >= 0; --v) {
      idx[axis] = v;
      self(self, axis + 1, remaining - v);
    }
  };
  rec(rec, 0, grade);

  if (d == 2 && grade == 2) {
    // axis-pure members first: (2,0), (0,2), (1,1)
    return {{2, 0}, {0, 2}, {1, 1}};
  }
  return all;
}

}  // namespace

BasisSet BasisSet::build(int dimension, int count) {
  if (dimension < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be >= 1");
  if (count < 1) throw Error(ErrorCode::InvalidArgument, "basis count must be >= 1");

  BasisSet basis;
  basis.d_ = dimension;
  basis.K_ = count;
  for (int grade = 0; grade <= kMaxTotalDegree; ++grade) {
    for (auto& mi : grade_indices(dimension, grade)) {
      basis.multi_indices_.push_back(std::move(mi));
      if (static_cast<int>(basis.multi_indices_.size()) == count) return basis;
    }
  }
  throw Error(ErrorCode::UnsupportedCount,
              "basis count " + std::to_string(count) + " exceeds the degree table for dimension " +
                  std::to_string(dimension));
}

double BasisSet::eval(int k, const SpatialPoint& s) const {
  if (k < 1 || k > K_) throw Error(ErrorCode::IndexOutOfRange, "basis index " + std::to_string(k));
  if (static_cast<int>(s.dim()) != d_)
    throw Error(ErrorCode::DimensionMismatch, "point dimension does not match basis");
  const auto& mi = multi_indices_[k - 1];
  double v = 1.0;
  for (int a = 0; a < d_; ++a) v *= shifted_legendre(mi[a], s.coords[a]);
  return v;
}

void BasisSet::eval_all(const SpatialPoint& s, std::vector<double>& out) const {
  if (static_cast<int>(s.dim()) != d_)
    throw Error(ErrorCode::DimensionMismatch, "point dimension does not match basis");
  out.resize(K_);
  // evaluate univariate factors once per axis up to the max degree used
  int max_deg = 0;
  for (const auto& mi : multi_indices_)
    max_deg = std::max(max_deg, *std::max_element(mi.begin(), mi.end()));
  thread_local std::vector<std::vector<double>> factors;
  factors.assign(d_, std::vector<double>(max_deg + 1));
  for (int a = 0; a < d_; ++a)
    for (int m = 0; m <= max_deg; ++m) factors[a][m] = shifted_legendre(m, s.coords[a]);
  for (int k = 0; k < K_; ++k) {
    double v = 1.0;
    for (int a = 0; a < d_; ++a) v *= factors[a][multi_indices_[k][a]];
    out[k] = v;
  }
}

Eigen::MatrixXd BasisSet::gram(int quadrature_order) const {
  const auto& rule = gauss_legendre_01(quadrature_order);
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(K_, K_);

  std::vector<int> node_idx(d_, 0);
  std::vector<double> values;
  SpatialPoint s(std::vector<double>(d_, 0.0));
  while (true) {
    double w = 1.0;
    for (int a = 0; a < d_; ++a) {
      s.coords[a] = rule.nodes[node_idx[a]];
      w *= rule.weights[node_idx[a]];
    }
    eval_all(s, values);
    for (int i = 0; i < K_; ++i)
      for (int j = i; j < K_; ++j) G(i, j) += w * values[i] * values[j];

    int axis = d_ - 1;
    while (axis >= 0 && ++node_idx[axis] == quadrature_order) node_idx[axis--] = 0;
    if (axis < 0) break;
  }
  for (int i = 0; i < K_; ++i)
    for (int j = 0; j < i; ++j) G(i, j) = G(j, i);
  return G;
}

double BasisSet::b_inf(const SpatialPoint& s) const {
  thread_local std::vector<double> values;
  eval_all(s, values);
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace stkern
