#include "eqdesign/cubature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "eqdesign/solver.hpp"

namespace eqdesign {

Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, int max_iter) {
  const Eigen::Index n = A.cols();
  if (b.size() != A.rows()) throw ValidationError("nnls: right-hand side has the wrong length");
  if (max_iter <= 0) max_iter = static_cast<int>(3 * n + 30);
  const double tol = 10.0 * std::numeric_limits<double>::epsilon() * A.cwiseAbs().colwise().sum().maxCoeff() *
                     static_cast<double>(std::max(A.rows(), n));
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  Eigen::VectorXd grad = A.transpose() * b;

  auto solve_passive = [&](std::vector<Eigen::Index>& P) {
    Eigen::MatrixXd AP(A.rows(), static_cast<Eigen::Index>(P.size()));
    for (std::size_t j = 0; j < P.size(); ++j) AP.col(static_cast<Eigen::Index>(j)) = A.col(P[j]);
    return Eigen::VectorXd(AP.colPivHouseholderQr().solve(b));
  };

  for (int outer = 0; outer < max_iter; ++outer) {
    Eigen::Index j = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!passive[static_cast<std::size_t>(i)] && grad(i) > tol && (j < 0 || grad(i) > grad(j))) j = i;
    }
    if (j < 0) break;
    passive[static_cast<std::size_t>(j)] = true;
    for (int inner = 0; inner < max_iter; ++inner) {
      std::vector<Eigen::Index> P;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (passive[static_cast<std::size_t>(i)]) P.push_back(i);
      }
      const Eigen::VectorXd s = solve_passive(P);
      if ((s.array() > 0.0).all()) {
        for (std::size_t k = 0; k < P.size(); ++k) x(P[k]) = s(static_cast<Eigen::Index>(k));
        break;
      }
      // Step back to the boundary of the feasible region.
      double alpha = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < P.size(); ++k) {
        const double sk = s(static_cast<Eigen::Index>(k));
        if (sk <= 0.0) alpha = std::min(alpha, x(P[k]) / (x(P[k]) - sk));
      }
      for (std::size_t k = 0; k < P.size(); ++k) {
        x(P[k]) += alpha * (s(static_cast<Eigen::Index>(k)) - x(P[k]));
        if (x(P[k]) <= tol) {
          x(P[k]) = 0.0;
          passive[static_cast<std::size_t>(P[k])] = false;
        }
      }
    }
    grad = A.transpose() * (b - A * x);
  }
  return x;
}

WeightFit fit_weights(const Eigen::MatrixXd& points, const MomentVector<double>& target, int degree,
                      double max_residual) {
  if (points.rows() != target.dim()) throw ValidationError("fit_weights: grid and target dimensions differ");
  if (degree > target.degree()) {
    throw ValidationError("fit_weights: target moments only known to degree " + std::to_string(target.degree()));
  }
  const auto basis = basis_for(target.dim(), degree);
  const Eigen::MatrixXd V = basis->evaluate_columns<double>(points);
  const Eigen::VectorXd b = target.values().head(V.rows());
  const Eigen::VectorXd scale = b.cwiseAbs().cwiseMax(1.0).cwiseInverse();
  const Eigen::MatrixXd A = scale.asDiagonal() * V;
  WeightFit fit;
  fit.weights = nnls(A, scale.cwiseProduct(b));
  fit.residual = (A * fit.weights - scale.cwiseProduct(b)).norm();
  fit.max_moment_error = (V * fit.weights - b).cwiseAbs().maxCoeff();
  if (!(fit.residual <= max_residual)) {
    throw InfeasibleGrid("moment matching on the candidate grid leaves residual " + std::to_string(fit.residual) +
                             "; use a denser grid",
                         fit.residual);
  }
  return fit;
}

PrunedRule caratheodory_prune(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& weights, int degree) {
  if (atoms.cols() != weights.size()) throw ValidationError("caratheodory_prune: atom/weight count mismatch");
  if ((weights.array() < 0.0).any()) throw ValidationError("caratheodory_prune: weights must be nonnegative");
  const int d = static_cast<int>(atoms.rows());
  const Eigen::Index s = static_cast<Eigen::Index>(dim_poly(d, degree));
  std::vector<Eigen::Index> active;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (weights(i) > 0.0) active.push_back(i);
  }
  const Eigen::MatrixXd V = basis_for(d, degree)->evaluate_columns<double>(atoms);
  Eigen::VectorXd w = weights;
  PrunedRule out;
  while (static_cast<Eigen::Index>(active.size()) > s) {
    // A null vector of any s+1 columns removes one of them.
    Eigen::MatrixXd sub(s, s + 1);
    for (Eigen::Index k = 0; k <= s; ++k) sub.col(k) = V.col(active[static_cast<std::size_t>(k)]);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sub, Eigen::ComputeFullV);
    const Eigen::VectorXd z = svd.matrixV().col(s);
    if ((sub * z).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, sub.cwiseAbs().maxCoeff())) {
      out.fully_pruned = false;
      break;
    }
    double best = std::numeric_limits<double>::infinity();
    double sign = 1.0;
    Eigen::Index victim = -1;
    for (double sg : {1.0, -1.0}) {
      for (Eigen::Index k = 0; k <= s; ++k) {
        const double zk = sg * z(k);
        if (zk <= 0.0) continue;
        const double ratio = w(active[static_cast<std::size_t>(k)]) / zk;
        if (ratio < best) {
          best = ratio;
          sign = sg;
          victim = k;
        }
      }
    }
    if (victim < 0) {
      out.fully_pruned = false;
      break;
    }
    for (Eigen::Index k = 0; k <= s; ++k) {
      double& wk = w(active[static_cast<std::size_t>(k)]);
      wk = k == victim ? 0.0 : std::max(0.0, wk - best * sign * z(k));
    }
    active.erase(std::remove_if(active.begin(), active.end(), [&](Eigen::Index i) { return w(i) <= 0.0; }),
                 active.end());
  }
  out.atoms.resize(d, static_cast<Eigen::Index>(active.size()));
  out.weights.resize(static_cast<Eigen::Index>(active.size()));
  for (std::size_t j = 0; j < active.size(); ++j) {
    out.atoms.col(static_cast<Eigen::Index>(j)) = atoms.col(active[j]);
    out.weights(static_cast<Eigen::Index>(j)) = w(active[j]);
  }
  return out;
}

CubatureRule cubature_for_equilibrium(const SemiAlgebraicSet& set, int n) {
  if (!set.is_builtin()) {
    throw ValidationError("equilibrium cubature needs a builtin set; use the solver for custom sets");
  }
  if (n < 0) throw ValidationError("cubature degree must be nonnegative");
  const int d = set.dim();
  if (set.kind() == SetKind::interval || set.kind() == SetKind::box || (set.kind() == SetKind::ball && d == 1)) {
    return tensor_chebyshev(d, n);
  }
  const auto target = equilibrium_moments(set, 2 * n);
  const Eigen::MatrixXd grid = default_grid(set).points;
  const auto fit = fit_weights(grid, target, 2 * n);
  const auto pruned = caratheodory_prune(grid, fit.weights, 2 * n);
  CubatureRule rule;
  rule.atoms = pruned.atoms;
  rule.weights = pruned.weights;
  rule.exact_degree = 2 * n;
  return rule;
}

}  // namespace eqdesign
