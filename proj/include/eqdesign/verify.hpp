#pragma once

/// \file
/// Sampled numerical checks of the optimality structure: the Pell identity,
/// boundary maxima of the kernel, KKT residuals for general sets, the p*_n
/// diagnostic, weak-star convergence of the optimal rules and Vandermonde
/// determinants. All kernel evaluations are done in long double.

#include <cstdint>

#include "eqdesign/christoffel.hpp"
#include "eqdesign/cubature.hpp"
#include "eqdesign/solver.hpp"

namespace eqdesign {

using VerifyScalar = long double;

struct PellReport {
  /// max over samples of |sum_g g(x) K^{g phi*}_{n-d_g}(x,x) - bound|.
  double max_residual = 0.0;
  double bound = 0.0;
  int samples = 0;
  /// max_residual <= 1e-6 * bound.
  bool passed = false;
};

/// Samples the bounding cube enlarged by 10% on every side, so exterior points
/// are included.
PellReport check_pell(const SemiAlgebraicSet& set, int n, int samples = 1000, std::uint64_t seed = 0);

struct BoundaryReport {
  double bound = 0.0;
  /// max over all samples (interior, boundary, loci) of K^{phi*}_n(x,x).
  double max_kernel = 0.0;
  /// max |K - bound| over the equality loci: the whole sampled boundary for
  /// the ball, the vertices for the box and simplex.
  double equality_residual = 0.0;
  /// min of bound - K over boundary samples away from the vertices
  /// (+infinity when there are none, e.g. d = 1).
  double min_margin = 0.0;
  /// max over interior samples of K - bound.
  double interior_excess = 0.0;
  Eigen::MatrixXd equality_points;
  int boundary_samples = 0;
  bool passed = false;
};

/// Tolerances: equality within 1e-8, non-vertex margin > 1e-6, no interior
/// sample above bound + 1e-8.
BoundaryReport check_boundary_maxima(const SemiAlgebraicSet& set, int n, int samples = 256,
                                     std::uint64_t seed = 0);

struct KKTReport {
  double bound = 0.0;
  /// max over samples in S of D(x) - bound.
  double inequality_residual = 0.0;
  /// max over the design atoms of |D(atom) - bound|.
  double support_residual = 0.0;
  /// max over samples in the enlarged bounding box of |D(x) - bound|.
  double identity_residual = 0.0;
};

/// D uses the set's own description {1, g_1, ..., g_m} (members with
/// n - r_j < 0 dropped). Throws SingularMomentMatrix if a block is singular.
KKTReport check_kkt_general(const SemiAlgebraicSet& set, const DesignMeasure& design, int n, int samples = 1000,
                            std::uint64_t seed = 0);

/// x -> sum_j g_j(x) K^{g_j phi*}_{n-r_j}(x,x) / sum_j s_{n-r_j} over the set's
/// own description, with phi* the equilibrium moments of a builtin set.
class PStar {
 public:
  PStar(const SemiAlgebraicSet& set, int n);
  VerifyScalar operator()(const Point& x) const;

 private:
  VarianceFunction<VerifyScalar> fn_;
};

double pstar_value(const SemiAlgebraicSet& set, int n, const Point& x);

/// |integral of f under the degree-n equilibrium rule - integral under phi*|.
double weak_star_gap(const SemiAlgebraicSet& set, int n, const Polynomial& f);

/// log |det VDM| for exactly s_n points (columns); -infinity if singular.
double vdm_logdet(const Eigen::MatrixXd& points, int n);

/// |log det M_n(uniform on points) - (2 vdm_logdet - s_n log s_n)|.
double vdm_identity_residual(const Eigen::MatrixXd& points, int n);

}  // namespace eqdesign
