#pragma once

/// \file
/// Finite atomic measures matching a target moment vector: nonnegative least
/// squares on a candidate grid followed by Caratheodory pruning.

#include "eqdesign/equilibrium.hpp"

namespace eqdesign {

struct WeightFit {
  Eigen::VectorXd weights;
  /// Euclidean norm of the scaled moment residual.
  double residual = 0.0;
  /// max_alpha |sum_i w_i x_i^alpha - target_alpha|, unscaled.
  double max_moment_error = 0.0;
};

/// Lawson-Hanson NNLS for sum_i w_i v(x_i) = target over multi-indices up to
/// `degree`, with rows scaled by 1 / max(|target_alpha|, 1). The phi_0 row
/// carries the mass constraint. Throws InfeasibleGrid when the residual
/// exceeds `max_residual`.
WeightFit fit_weights(const Eigen::MatrixXd& points, const MomentVector<double>& target, int degree,
                      double max_residual = 1e-6);

/// Unconstrained NNLS: argmin ||A w - b|| subject to w >= 0.
Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, int max_iter = 0);

struct PrunedRule {
  Eigen::MatrixXd atoms;
  Eigen::VectorXd weights;
  /// False when a null vector could not be found reliably and pruning stopped
  /// with more than s_{degree} atoms.
  bool fully_pruned = true;
};

/// Removes atoms along null vectors of the monomial matrix (degree `degree`)
/// until at most s_degree remain; moments up to `degree` are preserved.
/// Atoms with zero weight are dropped first.
PrunedRule caratheodory_prune(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& weights, int degree);

/// Rule integrating the equilibrium measure exactly to degree 2n: tensor
/// Gauss-Chebyshev for the interval and box, NNLS on the default grid plus
/// pruning for the ball and simplex.
CubatureRule cubature_for_equilibrium(const SemiAlgebraicSet& set, int n);

}  // namespace eqdesign
