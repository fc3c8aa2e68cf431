#include "stkern/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "stkern/quadrature.hpp"

namespace stkern {

SpatialCorrelation SpatialCorrelation::Known(Fn fn) {
  SpatialCorrelation c;
  c.fn_ = std::move(fn);
  return c;
}

SpatialCorrelation SpatialCorrelation::GaussianDecay(double rho0) {
  if (!(rho0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "rho0 must be positive");
  SpatialCorrelation c;
  c.fn_ = [rho0](const SpatialPoint& a, const SpatialPoint& b) {
    return std::exp(-rho0 * squared_distance(a, b));
  };
  return c;
}

SpatialCorrelation SpatialCorrelation::Isotropic(std::vector<double> knots,
                                                 std::vector<double> values) {
  if (knots.size() != values.size() || knots.empty())
    throw Error(ErrorCode::InvalidArgument, "isotropic table needs matching non-empty knots/values");
  for (std::size_t i = 1; i < knots.size(); ++i)
    if (!(knots[i] > knots[i - 1]))
      throw Error(ErrorCode::InvalidArgument, "isotropic knots must be strictly increasing");
  for (auto& v : values) v = std::clamp(v, -1.0, 1.0);
  SpatialCorrelation c;
  c.knots_ = std::move(knots);
  c.values_ = std::move(values);
  return c;
}

double SpatialCorrelation::operator()(const SpatialPoint& a, const SpatialPoint& b) const {
  if (!knots_.empty()) {
    const double r = distance(a, b);
    if (r == 0.0) return 1.0;
    if (r <= knots_.front()) {
      // linear between rho(0)=1 and the first knot
      const double w = r / knots_.front();
      return (1.0 - w) + w * values_.front();
    }
    if (r >= knots_.back()) return values_.back();
    auto hi = std::upper_bound(knots_.begin(), knots_.end(), r);
    const auto i = static_cast<std::size_t>(hi - knots_.begin());
    const double w = (r - knots_[i - 1]) / (knots_[i] - knots_[i - 1]);
    return (1.0 - w) * values_[i - 1] + w * values_[i];
  }
  return fn_(a, b);
}

namespace {

struct WeightStats {
  double sum = 0.0;
  std::size_t count = 0;
};

WeightStats weight_stats(const FittedModel& model, const CovariateVector& x) {
  WeightStats st;
  for (const auto& cov : model.covariates()) {
    const double w = kernel_weight(model.kernel(), model.bandwidth(), cov, x);
    if (w > 0.0) {
      st.sum += w;
      ++st.count;
    }
  }
  return st;
}

}  // namespace

double sigma_kl(const FittedModel& model, int k, int l, const CovariateVector& x_query) {
  if (k < 1 || k > model.truncation() || l < 1 || l > model.truncation())
    throw Error(ErrorCode::IndexOutOfRange, "component index outside truncation level");
  const auto st = weight_stats(model, x_query);
  if (st.count == 0) throw Error(ErrorCode::NoNeighbors, "no in-support timepoint");
  if (st.count < 2)
    throw Error(ErrorCode::DegenerateSupport, "covariance needs at least two in-support points");

  const double mk = mu_k(model, k, x_query);
  const double ml = mu_k(model, l, x_query);
  double num = 0.0;
  const auto& covs = model.covariates();
  for (std::size_t i = 0; i < covs.size(); ++i) {
    const double w = kernel_weight(model.kernel(), model.bandwidth(), covs[i], x_query);
    if (w > 0.0) num += w * (model.ystar(i, k) - mk) * (model.ystar(i, l) - ml);
  }
  return num / st.sum;
}

CovarianceEstimate estimate_covariance(const FittedModel& model, const CovariateVector& x_query,
                                       int K) {
  if (K < 1 || K > model.truncation())
    throw Error(ErrorCode::InvalidTruncation, "covariance level outside truncation");
  CovarianceEstimate est;
  est.K = K;
  est.x = x_query;
  est.matrix = Eigen::MatrixXd::Zero(K, K);
  for (int k = 1; k <= K; ++k)
    for (int l = k; l <= K; ++l) {
      const double v = sigma_kl(model, k, l, x_query);
      est.matrix(k - 1, l - 1) = v;
      est.matrix(l - 1, k - 1) = v;
    }
  for (int k = 0; k < K; ++k)
    if (est.matrix(k, k) < 0.0) {
      est.matrix(k, k) = 0.0;
      est.diagonal_clipped = true;
    }
  return est;
}

namespace {

struct QuadNodes {
  std::vector<SpatialPoint> points;
  std::vector<double> weights;
};

QuadNodes tensor_nodes(int d, int order) {
  const auto& rule = gauss_legendre_01(order);
  QuadNodes nodes;
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  while (true) {
    SpatialPoint s(std::vector<double>(static_cast<std::size_t>(d), 0.0));
    double w = 1.0;
    for (int a = 0; a < d; ++a) {
      s.coords[static_cast<std::size_t>(a)] = rule.nodes[static_cast<std::size_t>(idx[a])];
      w *= rule.weights[static_cast<std::size_t>(idx[a])];
    }
    nodes.points.push_back(std::move(s));
    nodes.weights.push_back(w);
    int axis = d - 1;
    while (axis >= 0 && ++idx[axis] == order) idx[axis--] = 0;
    if (axis < 0) break;
  }
  return nodes;
}

void check_cuv_bound(double value) {
  if (std::abs(value) > 1.0 + 1e-9)
    throw std::logic_error("c_uv bound violated: |" + std::to_string(value) + "| > 1");
}

}  // namespace

double c_uv(const BasisSet& basis, const SpatialCorrelation& correlation, int u, int v, int k,
            int l, int quadrature_order, std::size_t node_cap) {
  const int d = basis.dimension();
  const double total = std::pow(static_cast<double>(quadrature_order), 2.0 * d);
  if (total > static_cast<double>(node_cap))
    throw Error(ErrorCode::QuadratureOverflow, "quadrature would need " +
                                                   std::to_string(static_cast<std::size_t>(total)) +
                                                   " nodes");
  const auto nodes = tensor_nodes(d, quadrature_order);
  const std::size_t N = nodes.points.size();

  std::vector<double> a_side(N), b_side(N);
  for (std::size_t i = 0; i < N; ++i) {
    a_side[i] = nodes.weights[i] * basis.eval(k, nodes.points[i]) * basis.eval(u, nodes.points[i]);
    b_side[i] = nodes.weights[i] * basis.eval(l, nodes.points[i]) * basis.eval(v, nodes.points[i]);
  }
  double value = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    if (a_side[i] == 0.0) continue;
    double inner = 0.0;
    for (std::size_t j = 0; j < N; ++j)
      inner += correlation(nodes.points[i], nodes.points[j]) * b_side[j];
    value += a_side[i] * inner;
  }
  check_cuv_bound(value);
  return value;
}

std::vector<Eigen::MatrixXd> build_c_system(const BasisSet& basis,
                                            const SpatialCorrelation& correlation, int U,
                                            int quadrature_order, std::size_t node_cap) {
  if (U < 1 || U > basis.size())
    throw Error(ErrorCode::InvalidTruncation, "component level outside basis size");
  const int d = basis.dimension();
  const double total = std::pow(static_cast<double>(quadrature_order), 2.0 * d);
  if (total > static_cast<double>(node_cap))
    throw Error(ErrorCode::QuadratureOverflow, "quadrature node budget exceeded");

  const auto nodes = tensor_nodes(d, quadrature_order);
  const auto N = static_cast<Eigen::Index>(nodes.points.size());

  Eigen::MatrixXd R(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    R(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < N; ++j) {
      const double r = correlation(nodes.points[static_cast<std::size_t>(i)],
                                   nodes.points[static_cast<std::size_t>(j)]);
      R(i, j) = r;
      R(j, i) = r;
    }
  }

  // M(node, (k,u)) = w * b_k * b_u; the full system is M^T R M.
  Eigen::MatrixXd M(N, static_cast<Eigen::Index>(U) * U);
  std::vector<double> bvals;
  for (Eigen::Index i = 0; i < N; ++i) {
    basis.eval_all(nodes.points[static_cast<std::size_t>(i)], bvals);
    for (int k = 0; k < U; ++k)
      for (int u = 0; u < U; ++u)
        M(i, static_cast<Eigen::Index>(k) * U + u) =
            nodes.weights[static_cast<std::size_t>(i)] * bvals[static_cast<std::size_t>(k)] *
            bvals[static_cast<std::size_t>(u)];
  }
  const Eigen::MatrixXd big = M.transpose() * R * M;

  std::vector<Eigen::MatrixXd> cs(static_cast<std::size_t>(U) * U);
  for (int k = 0; k < U; ++k)
    for (int l = 0; l < U; ++l) {
      Eigen::MatrixXd C(U, U);
      for (int u = 0; u < U; ++u)
        for (int v = 0; v < U; ++v) {
          const double value = big(static_cast<Eigen::Index>(k) * U + u,
                                   static_cast<Eigen::Index>(l) * U + v);
          check_cuv_bound(value);
          C(u, v) = value;
        }
      cs[static_cast<std::size_t>(k) * U + l] = std::move(C);
    }
  return cs;
}

Eigen::MatrixXd psd_project(const Eigen::MatrixXd& m) {
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  if (eig.eigenvalues().minCoeff() >= 0.0) return sym;
  Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(0.0);
  return eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
}

RecoveredComponents recover_variance_components(const Eigen::MatrixXd& sigma_hat,
                                                const std::vector<Eigen::MatrixXd>& c_matrices,
                                                double condition_cap) {
  const auto U = static_cast<int>(sigma_hat.rows());
  if (sigma_hat.cols() != U) throw Error(ErrorCode::InvalidArgument, "sigma matrix not square");
  if (c_matrices.size() != static_cast<std::size_t>(U) * U)
    throw Error(ErrorCode::InvalidArgument, "need U^2 C matrices");

  const Eigen::Index UU = static_cast<Eigen::Index>(U) * U;
  Eigen::MatrixXd system(UU, UU);
  Eigen::VectorXd rhs(UU);
  for (int k = 0; k < U; ++k)
    for (int l = 0; l < U; ++l) {
      const Eigen::Index row = static_cast<Eigen::Index>(k) * U + l;
      const auto& C = c_matrices[static_cast<std::size_t>(k) * U + l];
      for (int u = 0; u < U; ++u)
        for (int v = 0; v < U; ++v)
          system(row, static_cast<Eigen::Index>(u) * U + v) = C(u, v);
      rhs(row) = sigma_hat(k, l);
    }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(system, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double smin = svd.singularValues()(svd.singularValues().size() - 1);
  const double smax = svd.singularValues()(0);
  RecoveredComponents out;
  out.condition_number = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  if (!(out.condition_number < condition_cap))
    throw Error(ErrorCode::IllConditionedSystem,
                "stacked C system condition number " + std::to_string(out.condition_number));

  const Eigen::VectorXd solution = svd.solve(rhs);
  Eigen::MatrixXd A(U, U);
  for (int u = 0; u < U; ++u)
    for (int v = 0; v < U; ++v) A(u, v) = solution(static_cast<Eigen::Index>(u) * U + v);

  out.solved = 0.5 * (A + A.transpose());
  out.psd = psd_project(out.solved);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.psd);
  const Eigen::Index top = U - 1;  // eigenvalues ascend
  const double lambda1 = eig.eigenvalues()(top);
  out.sigma = Eigen::VectorXd::Zero(U);
  if (lambda1 <= 0.0) {
    out.nonpositive_leading_eigenvalue = true;
    return out;
  }
  const double root = std::sqrt(lambda1);
  for (int u = 0; u < U; ++u) out.sigma(u) = root * std::abs(eig.eigenvectors()(u, top));
  return out;
}

namespace {

std::vector<double> in_support_weights(const FittedModel& model, const CovariateVector& x) {
  std::vector<double> w(model.n_timepoints(), 0.0);
  for (std::size_t i = 0; i < w.size(); ++i)
    w[i] = kernel_weight(model.kernel(), model.bandwidth(), model.covariates()[i], x);
  return w;
}

}  // namespace

RhoIterationResult iterate_rho(const SpatioTemporalDataset& dataset, const FittedModel& model,
                               const CovariateVector& x_query, const SpatialCorrelation& initial,
                               const RhoIterationOptions& options) {
  const int U = options.U > 0 ? options.U : model.truncation();
  const auto weights = in_support_weights(model, x_query);

  // Locations common to every in-support timepoint.
  std::vector<SpatialPoint> common;
  bool first = true;
  for (std::size_t i = 0; i < dataset.records.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    const auto& locs = dataset.records[i].locations;
    if (first) {
      common = locs;
      first = false;
    } else {
      std::vector<SpatialPoint> kept;
      for (const auto& s : common)
        if (std::find(locs.begin(), locs.end(), s) != locs.end()) kept.push_back(s);
      common = std::move(kept);
    }
  }
  if (first) throw Error(ErrorCode::NoNeighbors, "no in-support timepoint");
  if (common.size() < 2)
    throw Error(ErrorCode::InsufficientLocations,
                "iterative rho needs >= 2 locations shared across in-support timepoints");

  // Index of each common location within each in-support record.
  std::vector<std::size_t> records_used;
  for (std::size_t i = 0; i < dataset.records.size(); ++i)
    if (weights[i] > 0.0) records_used.push_back(i);
  std::vector<std::vector<std::size_t>> loc_index(records_used.size());
  for (std::size_t r = 0; r < records_used.size(); ++r) {
    const auto& locs = dataset.records[records_used[r]].locations;
    loc_index[r].resize(common.size());
    for (std::size_t c = 0; c < common.size(); ++c)
      loc_index[r][c] = static_cast<std::size_t>(
          std::find(locs.begin(), locs.end(), common[c]) - locs.begin());
  }

  struct Pair {
    std::size_t a, b;
    double r;
  };
  std::vector<Pair> pairs;
  for (std::size_t a = 0; a < common.size(); ++a)
    for (std::size_t b = a + 1; b < common.size(); ++b)
      pairs.push_back({a, b, distance(common[a], common[b])});
  // deterministic cap to keep the pair grid manageable
  const std::size_t max_pairs = 4000;
  if (pairs.size() > max_pairs) {
    const std::size_t stride = pairs.size() / max_pairs + 1;
    std::vector<Pair> thin;
    for (std::size_t i = 0; i < pairs.size(); i += stride) thin.push_back(pairs[i]);
    pairs = std::move(thin);
  }

  double max_r = 0.0;
  for (const auto& p : pairs) max_r = std::max(max_r, p.r);

  RhoIterationResult result;
  result.correlation = initial;
  SpatialCorrelation current = initial;

  auto pair_rho = [&](const SpatialCorrelation& corr) {
    std::vector<double> vals(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i)
      vals[i] = corr(common[pairs[i].a], common[pairs[i].b]);
    return vals;
  };
  std::vector<double> prev_vals = pair_rho(current);

  for (int iter = 0; iter < options.max_iter; ++iter) {
    // (a) components under the current correlation
    const auto cs = build_c_system(model.basis(), current, U, options.quadrature_order);
    const auto sigma_mat = estimate_covariance(model, x_query, U);
    const auto rec = recover_variance_components(sigma_mat.matrix, cs);
    result.sigma_components = rec.sigma;

    // sigma surface at the common locations, floored away from zero
    std::vector<double> sig(common.size());
    for (std::size_t c = 0; c < common.size(); ++c) {
      double v = 0.0;
      for (int u = 1; u <= U; ++u) v += rec.sigma(u - 1) * model.basis().eval(u, common[c]);
      if (std::abs(v) < options.sigma_floor) {
        v = v < 0.0 ? -options.sigma_floor : options.sigma_floor;
        ++result.floored_denominators;
      }
      sig[c] = v;
    }

    std::vector<double> mu_at;
    if (options.mean_centered) {
      mu_at.resize(common.size());
      for (std::size_t c = 0; c < common.size(); ++c)
        mu_at[c] = mu_surface(model, x_query, common[c]);
    }

    // (b) kernel-ratio update on the pair grid. The raw ratio identifies
    // rho only up to the shared scale of sigma, so the unit diagonal
    // rho(s,s) = 1 is re-imposed by normalizing with the same ratio taken
    // at coincident locations.
    auto ratio_at = [&](std::size_t a, std::size_t b) {
      double num = 0.0, den = 0.0;
      for (std::size_t r = 0; r < records_used.size(); ++r) {
        const auto& record = dataset.records[records_used[r]];
        const double w = weights[records_used[r]];
        double ya = record.responses[loc_index[r][a]];
        double yb = record.responses[loc_index[r][b]];
        if (options.mean_centered) {
          ya -= mu_at[a];
          yb -= mu_at[b];
        }
        num += w * ya * yb;
        den += w * sig[a] * sig[b];
      }
      return num / den;
    };
    std::vector<double> diag(common.size());
    for (std::size_t a = 0; a < common.size(); ++a) {
      diag[a] = ratio_at(a, a);
      if (diag[a] <= 0.0) diag[a] = 1.0;
    }
    std::vector<double> new_vals(pairs.size());
    for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
      const double raw = ratio_at(pairs[pi].a, pairs[pi].b);
      const double norm = std::sqrt(diag[pairs[pi].a] * diag[pairs[pi].b]);
      new_vals[pi] = std::clamp(raw / norm, -1.0, 1.0);
    }

    // isotropic binning -> piecewise-linear table
    const int bins = std::max(2, options.distance_bins);
    std::vector<double> knots, sums(static_cast<std::size_t>(bins), 0.0);
    std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
    for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
      int b = static_cast<int>((pairs[pi].r / max_r) * bins);
      b = std::clamp(b, 0, bins - 1);
      sums[static_cast<std::size_t>(b)] += new_vals[pi];
      counts[static_cast<std::size_t>(b)] += 1;
    }
    std::vector<double> tk, tv;
    for (int b = 0; b < bins; ++b)
      if (counts[static_cast<std::size_t>(b)] > 0) {
        tk.push_back((b + 0.5) * max_r / bins);
        tv.push_back(sums[static_cast<std::size_t>(b)] /
                     static_cast<double>(counts[static_cast<std::size_t>(b)]));
      }
    current = SpatialCorrelation::Isotropic(std::move(tk), std::move(tv));
    result.iterations = iter + 1;

    const auto cur_vals = pair_rho(current);
    double max_change = 0.0;
    for (std::size_t i = 0; i < cur_vals.size(); ++i)
      max_change = std::max(max_change, std::abs(cur_vals[i] - prev_vals[i]));
    prev_vals = cur_vals;
    result.correlation = current;
    if (max_change < options.tol) {
      result.converged = true;
      break;
    }
  }

  if (options.max_iter == 0) {
    // still report components under the initial correlation
    const auto cs = build_c_system(model.basis(), current, U, options.quadrature_order);
    const auto sigma_mat = estimate_covariance(model, x_query, U);
    result.sigma_components = recover_variance_components(sigma_mat.matrix, cs).sigma;
  }
  return result;
}

double parametric_rho_fit(const FittedModel& model, const CovariateVector& x_query,
                          const std::vector<double>& rho0_grid,
                          const ParametricRhoOptions& options) {
  if (rho0_grid.empty()) throw Error(ErrorCode::InvalidArgument, "empty rho0 grid");
  const int U = options.U > 0 ? options.U : model.truncation();
  const auto sigma_mat = estimate_covariance(model, x_query, U);

  std::vector<double> grid = rho0_grid;
  std::sort(grid.begin(), grid.end());

  double best_rho = grid.front();
  double best_disc = std::numeric_limits<double>::infinity();
  for (double rho0 : grid) {
    const auto cs =
        build_c_system(model.basis(), SpatialCorrelation::GaussianDecay(rho0), U,
                       options.quadrature_order);
    const auto rec = recover_variance_components(sigma_mat.matrix, cs);
    const Eigen::MatrixXd rank1 = rec.sigma * rec.sigma.transpose();
    const double disc = (rec.solved - rank1).norm();
    if (disc < best_disc) {
      best_disc = disc;
      best_rho = rho0;
    }
  }
  return best_rho;
}

}  // namespace stkern
