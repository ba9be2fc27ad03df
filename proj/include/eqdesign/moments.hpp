#pragma once

/// \file
/// Truncated moment vectors, the Riesz functional, moment matrices and
/// localizing matrices. All indices follow the graded-lex basis order.

#include <cmath>
#include <memory>
#include <string>

#include "eqdesign/basis.hpp"

namespace eqdesign {

template <typename Scalar>
using MomentMatrix = Matrix<Scalar>;

/// Moments phi_alpha for every |alpha| <= degree, stored in graded-lex order.
template <typename Scalar = double>
class MomentVector {
 public:
  MomentVector(int dim, int degree, Vector<Scalar> values, bool probability = false)
      : basis_(basis_for(dim, degree)), values_(std::move(values)), probability_(probability) {
    if (values_.size() != basis_->size()) {
      throw ValidationError("moment vector of degree " + std::to_string(degree) + " in dimension " +
                            std::to_string(dim) + " needs " + std::to_string(basis_->size()) +
                            " values, got " + std::to_string(values_.size()));
    }
    if (probability_ && std::abs(static_cast<double>(values_(0)) - 1.0) > 1e-12) {
      throw ValidationError("probability moment vector must have phi_0 = 1");
    }
  }

  int dim() const { return basis_->dim(); }
  int degree() const { return basis_->degree(); }
  int size() const { return basis_->size(); }
  bool probability() const { return probability_; }
  const MonomialBasis& basis() const { return *basis_; }
  const Vector<Scalar>& values() const { return values_; }

  Scalar operator()(int i) const { return values_(i); }

  /// phi_alpha; throws when |alpha| exceeds the stored degree.
  Scalar operator[](const MultiIndex& alpha) const {
    const int i = basis_->index_of(alpha);
    if (i < 0) {
      throw ValidationError("moment " + alpha.to_string() + " is missing: vector has degree " +
                            std::to_string(degree()));
    }
    return values_(i);
  }

  /// Leading block of moments up to degree `d` (prefix property).
  MomentVector truncated(int d) const {
    if (d > degree()) throw ValidationError("cannot truncate moments to a higher degree");
    const int s = static_cast<int>(dim_poly(dim(), d));
    return MomentVector(dim(), d, values_.head(s), probability_);
  }

  template <typename Other>
  MomentVector<Other> cast() const {
    return MomentVector<Other>(dim(), degree(), values_.template cast<Other>(), probability_);
  }

 private:
  std::shared_ptr<const MonomialBasis> basis_;
  Vector<Scalar> values_;
  bool probability_;
};

/// Moments of sum_j w_j delta_{x_j}; atoms are the columns of `atoms`.
template <typename Scalar = double>
MomentVector<Scalar> moments_of_atoms(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& weights,
                                      int degree) {
  if (atoms.cols() != weights.size()) throw ValidationError("atoms and weights differ in count");
  const auto basis = basis_for(static_cast<int>(atoms.rows()), degree);
  Vector<Scalar> m = Vector<Scalar>::Zero(basis->size());
  for (Eigen::Index j = 0; j < atoms.cols(); ++j) {
    m += static_cast<Scalar>(weights(j)) * basis->template evaluate<Scalar>(atoms.col(j));
  }
  return MomentVector<Scalar>(basis->dim(), degree, std::move(m));
}

/// L_phi(p) = sum_alpha p_alpha phi_alpha.
template <typename Scalar>
Scalar riesz(const MomentVector<Scalar>& phi, const Polynomial& p) {
  if (p.dim() != phi.dim()) throw ValidationError("riesz: dimension mismatch");
  Scalar acc(0);
  for (const auto& [alpha, c] : p.terms()) acc += static_cast<Scalar>(c) * phi[alpha];
  return acc;
}

/// Moments of the signed measure g*phi, (g phi)_alpha = sum_beta g_beta phi_{alpha+beta},
/// truncated to degree(phi) - deg(g).
template <typename Scalar>
MomentVector<Scalar> shifted_moments(const MomentVector<Scalar>& phi, const Polynomial& g) {
  if (g.dim() != phi.dim()) throw ValidationError("shifted_moments: dimension mismatch");
  const int out_degree = phi.degree() - g.degree();
  if (out_degree < 0) {
    throw ValidationError("shifted_moments: generator degree " + std::to_string(g.degree()) +
                          " exceeds moment degree " + std::to_string(phi.degree()));
  }
  const auto basis = basis_for(phi.dim(), out_degree);
  Vector<Scalar> out = Vector<Scalar>::Zero(basis->size());
  for (int i = 0; i < basis->size(); ++i) {
    for (const auto& [beta, c] : g.terms()) out(i) += static_cast<Scalar>(c) * phi[(*basis)[i] + beta];
  }
  return MomentVector<Scalar>(phi.dim(), out_degree, std::move(out));
}

/// M_k(phi) with entries phi_{alpha+beta}, |alpha|,|beta| <= k.
template <typename Scalar>
MomentMatrix<Scalar> moment_matrix(const MomentVector<Scalar>& phi, int k) {
  if (k < 0 || 2 * k > phi.degree()) {
    throw ValidationError("moment_matrix of order " + std::to_string(k) + " needs moments to degree " +
                          std::to_string(2 * k) + ", have " + std::to_string(phi.degree()));
  }
  const auto& basis = phi.basis();
  const int s = static_cast<int>(dim_poly(phi.dim(), k));
  MomentMatrix<Scalar> M(s, s);
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j <= i; ++j) {
      M(i, j) = M(j, i) = phi(basis.index_of(basis[i] + basis[j]));
    }
  }
  return M;
}

/// M_k(g phi); equals moment_matrix(shifted_moments(phi, g), k).
template <typename Scalar>
MomentMatrix<Scalar> localizing_matrix(const MomentVector<Scalar>& phi, const Polynomial& g, int k) {
  if (k < 0 || 2 * k + g.degree() > phi.degree()) {
    throw ValidationError("localizing_matrix of order " + std::to_string(k) + " for a degree-" +
                          std::to_string(g.degree()) + " generator needs moments to degree " +
                          std::to_string(2 * k + g.degree()) + ", have " + std::to_string(phi.degree()));
  }
  return moment_matrix(shifted_moments(phi, g), k);
}

}  // namespace eqdesign
