#pragma once

/// \file
/// Approximate D-optimal designs on candidate grids. Both the classical
/// objective log det M_n(nu) and the block objective
/// sum_g log det M_{n-d_g}(g nu) are maximized over probability weights on a
/// finite grid; the equivalence theorem supplies the stopping certificate.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eqdesign/equilibrium.hpp"

namespace eqdesign {

enum class ObjectiveKind { classical, variant };

std::string_view to_string(ObjectiveKind kind);
/// Accepts "classic", "classical" and "variant".
ObjectiveKind parse_objective_kind(std::string_view name);

/// Generators whose blocks enter the objective: {1} for the classical problem,
/// the builtin family for builtin sets, and {1, g_1, ..., g_m} for custom sets.
/// Members with n - d_g < 0 are dropped.
std::vector<Generator> objective_generators(const SemiAlgebraicSet& set, int n, ObjectiveKind kind);

/// Atoms (columns) with positive weights summing to one.
struct DesignMeasure {
  Eigen::MatrixXd atoms;
  Eigen::VectorXd weights;

  int dim() const { return static_cast<int>(atoms.rows()); }
  int size() const { return static_cast<int>(atoms.cols()); }
  MomentVector<double> moments(int degree) const { return moments_of_atoms<double>(atoms, weights, degree); }
};

enum class GridProvenance { tensor_chebyshev, boundary_augmented, user, refined };
std::string_view to_string(GridProvenance p);

struct CandidateGrid {
  Eigen::MatrixXd points;
  GridProvenance provenance = GridProvenance::user;

  int size() const { return static_cast<int>(points.cols()); }
};

struct GridOptions {
  /// Multiplies the per-axis resolution of the builtin grids.
  int density = 1;
  /// Number of points for custom sets (rejection sampling plus boundary polish).
  int custom_points = 4000;
  std::uint64_t seed = 0;
};

/// Default candidate grid:
///  - interval: zeros of T_513 plus +-1
///  - box: tensor product of an interval grid, at most 1e5 points
///  - ball: polar grid (65 radii x 128 angles at d = 2) plus boundary samples
///  - simplex: barycentric lattice of mesh 1/64 (vertices included)
///  - custom: rejection sampling in the bounding box plus boundary bisection
/// Throws ValidationError when a custom set has no sampled interior.
CandidateGrid default_grid(const SemiAlgebraicSet& set, const GridOptions& opts = {});

/// Objective value, or -infinity when some block is singular.
struct ObjectiveEvaluation {
  double value = 0.0;
  /// Set when value is -infinity: which block failed.
  std::optional<std::string> diagnostic;

  bool finite() const { return !diagnostic.has_value(); }
};

ObjectiveEvaluation evaluate_objective(const SemiAlgebraicSet& set, const DesignMeasure& design, int n,
                                       ObjectiveKind kind);
ObjectiveEvaluation evaluate_objective(const SemiAlgebraicSet& set, const MomentVector<double>& phi, int n,
                                       ObjectiveKind kind);

/// Shorthand returning only the value (-infinity sentinel on singular blocks).
double objective_value(const SemiAlgebraicSet& set, const DesignMeasure& design, int n, ObjectiveKind kind);
double objective_value(const SemiAlgebraicSet& set, const MomentVector<double>& phi, int n, ObjectiveKind kind);

struct SolveOptions {
  /// Stop when max_grid D - c <= tol * c.
  double tol = 1e-6;
  /// Support atoms must also satisfy |D - c| <= support_tol * c.
  double support_tol = 1e-5;
  int max_iter = 5000;
  /// Exchange phase (Fedorov step plus pairwise exchanges) every this many
  /// multiplicative iterations; 0 disables it until the gap test passes.
  int exchange_every = 50;
  /// Local-ascent refinement rounds after convergence on the grid; negative
  /// means two rounds for d = 1 and none otherwise (on multivariate grids the
  /// optimum is typically a continuum and added near-duplicates slow the
  /// exchange steps without improving the certificate).
  int refine_rounds = -1;
  /// For d = 1, replace the support by the (n+1)-point Gauss rule of the
  /// design, which has the same moments up to degree 2n+1.
  bool compress_univariate = true;
  std::uint64_t seed = 0;
};

struct SolveReport {
  double objective = 0.0;
  /// max over the final grid of D - c.
  double gap = 0.0;
  /// max over returned atoms of |D - c|.
  double support_residual = 0.0;
  /// c = sum_g s_{n - d_g}.
  double bound = 0.0;
  int iterations = 0;
  int grid_size = 0;
  std::vector<int> block_dims;
  bool converged = false;
  /// Multiplicative steps that needed the halving safeguard.
  int monotonicity_fallbacks = 0;
  int exchange_steps = 0;
  int refined_points = 0;
  bool compressed = false;
};

struct SolveResult {
  DesignMeasure design;
  SolveReport report;
};

/// Maximizes the objective over probability weights on the grid (the default
/// grid when none is given). Throws SingularMomentMatrix when even an enlarged
/// grid cannot support a nonsingular uniform design.
SolveResult solve_design(const SemiAlgebraicSet& set, int n, ObjectiveKind kind,
                         const std::optional<CandidateGrid>& grid = std::nullopt, const SolveOptions& opts = {});

struct GapReport {
  /// max over the audit grid and the atoms of D - c.
  double gap = 0.0;
  /// max over atoms of |D(atom) - c|.
  double support_residual = 0.0;
  double bound = 0.0;
  int audit_points = 0;
};

/// Equivalence-theorem certificate on a grid twice as dense as the default.
GapReport equivalence_gap(const SemiAlgebraicSet& set, const DesignMeasure& design, int n, ObjectiveKind kind);
/// Same for a moment vector (support residual is reported as 0).
GapReport equivalence_gap(const SemiAlgebraicSet& set, const MomentVector<double>& phi, int n, ObjectiveKind kind);

/// Appends local maximizers of D found by coordinate-wise golden-section
/// ascent from the top-10 grid points and the design's atoms, projected into
/// the set. Returns the grid unchanged when D is constant on it.
CandidateGrid refine_grid(const SemiAlgebraicSet& set, const DesignMeasure& design, int n, ObjectiveKind kind,
                          const CandidateGrid& grid);

/// (n+1)-point Gauss rule of a univariate design: the same moments up to
/// degree 2n+1. Returns nullopt when the design has fewer than n+1 atoms.
std::optional<DesignMeasure> gauss_compress(const DesignMeasure& design, int n);

}  // namespace eqdesign
