#pragma once

/// \file
/// Closed-form moments of the (probability-normalized) equilibrium measures
/// of the interval, box, ball and simplex, the generator families used by the
/// block log-det objective, and Gauss-Chebyshev rules.

#include <vector>

#include "eqdesign/moments.hpp"
#include "eqdesign/sets.hpp"

namespace eqdesign {

/// A generator g together with its half degree d_g = ceil(deg g / 2).
struct Generator {
  Polynomial poly;
  int half_degree = 0;
};

/// Wraps polynomials as generators with their half degrees.
std::vector<Generator> as_generators(const std::vector<Polynomial>& polys);

/// Generator family for the block objective on a builtin set, starting with 1:
///  - ball: {1, 1 - ||x||^2}
///  - box / interval: prod_j (1 - x_j^2)^{e_j}, e in {0,1}^d
///  - simplex: x^e (1 - sum x)^{e_{d+1}}, e in {0,1}^{d+1}, |e| even
/// Members with n - d_g < 0 are dropped.
std::vector<Generator> generator_set(SetKind kind, int d, int n);

/// sum over the family of s_{n - d_g}.
std::int64_t block_dimension_sum(int d, int n, const std::vector<Generator>& gens);

namespace detail {

/// (a)_k = a (a+1) ... (a+k-1).
template <typename Scalar>
Scalar rising(Scalar a, int k) {
  Scalar r(1);
  for (int i = 0; i < k; ++i) r *= a + Scalar(i);
  return r;
}

template <typename Scalar>
Scalar equilibrium_moment(SetKind kind, const MultiIndex& alpha) {
  const int d = alpha.dim();
  const Scalar half(0.5);
  switch (kind) {
    case SetKind::interval:
    case SetKind::box: {
      // Product of arcsine moments C(2k,k)/4^k = (1/2)_k / k!.
      Scalar m(1);
      for (int i = 0; i < d; ++i) {
        if (alpha[i] % 2) return Scalar(0);
        m *= rising(half, alpha[i] / 2) / rising(Scalar(1), alpha[i] / 2);
      }
      return m;
    }
    case SetKind::ball: {
      // Density proportional to (1 - ||x||^2)^{-1/2}.
      Scalar num(1);
      for (int i = 0; i < d; ++i) {
        if (alpha[i] % 2) return Scalar(0);
        num *= rising(half, alpha[i] / 2);
      }
      return num / rising(Scalar(d + 1) / Scalar(2), alpha.degree() / 2);
    }
    case SetKind::simplex: {
      // Dirichlet(1/2, ..., 1/2) on d+1 barycentric coordinates.
      Scalar num(1);
      for (int i = 0; i < d; ++i) num *= rising(half, alpha[i]);
      return num / rising(Scalar(d + 1) / Scalar(2), alpha.degree());
    }
    case SetKind::custom: break;
  }
  throw ValidationError("equilibrium moments are only known in closed form for builtin sets; "
                        "use the solver for custom sets");
}

}  // namespace detail

/// Moments to degree D of the equilibrium measure, normalized to a probability.
template <typename Scalar = double>
MomentVector<Scalar> equilibrium_moments(const SemiAlgebraicSet& set, int degree) {
  if (!set.is_builtin()) {
    throw ValidationError("equilibrium moments are only known in closed form for builtin sets; "
                          "use the solver for custom sets");
  }
  if (degree < 0) throw ValidationError("degree must be >= 0");
  const auto basis = basis_for(set.dim(), degree);
  Vector<Scalar> m(basis->size());
  for (int i = 0; i < basis->size(); ++i) {
    m(i) = detail::equilibrium_moment<Scalar>(set.kind(), (*basis)[i]);
  }
  return MomentVector<Scalar>(set.dim(), degree, std::move(m), true);
}

/// Atoms (columns) with positive weights; exact against `target` up to `exact_degree`.
struct CubatureRule {
  Eigen::MatrixXd atoms;
  Eigen::VectorXd weights;
  int exact_degree = 0;

  int dim() const { return static_cast<int>(atoms.rows()); }
  int size() const { return static_cast<int>(atoms.cols()); }

  /// sum_i w_i f(x_i).
  double integrate(const Polynomial& f) const;
};

/// max over |alpha| <= degree of |sum_i w_i x_i^alpha - target_alpha|.
double max_moment_residual(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& weights,
                           const MomentVector<double>& target, int degree);

/// (n+1)-point rule on the zeros of T_{n+1}; exact to degree 2n+1 for the arcsine measure.
CubatureRule gauss_chebyshev(int n);

/// d-fold product of gauss_chebyshev(n); exact to total degree 2n for the box.
CubatureRule tensor_chebyshev(int d, int n);

}  // namespace eqdesign
