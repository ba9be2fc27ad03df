#pragma once

/// \file
/// Multi-indices in graded-lex order, monomial vectors and sparse polynomials.
///
/// Every vector or matrix indexed by monomials in this library uses the same
/// ordering: first by total degree, then lexicographically with larger leading
/// exponents first, e.g. for d=2: 1, x1, x2, x1^2, x1 x2, x2^2, ...
/// The basis for degree n is a prefix of the basis for degree n+1.

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "eqdesign/error.hpp"

namespace eqdesign {

using Point = Eigen::VectorXd;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> exponents);
  MultiIndex(std::initializer_list<int> exponents);

  /// All-zero index of dimension d.
  static MultiIndex zero(int d);
  /// Unit index e_i of dimension d.
  static MultiIndex unit(int d, int i);

  int dim() const { return static_cast<int>(exps_.size()); }
  int degree() const { return degree_; }
  int operator[](int i) const { return exps_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& exponents() const { return exps_; }

  MultiIndex operator+(const MultiIndex& other) const;

  bool operator==(const MultiIndex& other) const { return exps_ == other.exps_; }
  /// Graded-lex order.
  std::strong_ordering operator<=>(const MultiIndex& other) const;

  std::string to_string() const;

 private:
  std::vector<int> exps_;
  int degree_ = 0;
};

/// s_n = C(n+d, d), the number of monomials of degree at most n in d variables.
/// Throws std::overflow_error instead of wrapping around.
std::int64_t dim_poly(int d, int n);

/// All multi-indices with |alpha| <= n in graded-lex order.
std::vector<MultiIndex> multi_indices(int d, int n);

/// Position of alpha in the graded-lex enumeration (independent of the
/// truncation degree thanks to the prefix property).
std::int64_t graded_lex_rank(const MultiIndex& alpha);

/// Graded-lex monomial basis of fixed dimension and degree, with a
/// parent table so that monomial vectors are built with one multiply each.
class MonomialBasis {
 public:
  MonomialBasis(int d, int n);

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  int size() const { return static_cast<int>(indices_.size()); }
  const MultiIndex& operator[](int i) const { return indices_[static_cast<std::size_t>(i)]; }
  const std::vector<MultiIndex>& indices() const { return indices_; }

  /// Index of alpha in this basis, or -1 when |alpha| exceeds the degree.
  int index_of(const MultiIndex& alpha) const;

  /// v_n(x) in graded-lex order.
  template <typename Scalar, typename Derived>
  Vector<Scalar> evaluate(const Eigen::MatrixBase<Derived>& x) const {
    if (x.size() != dim_) {
      throw ValidationError("monomial_vector: point has " + std::to_string(x.size()) +
                            " coordinates, expected " + std::to_string(dim_));
    }
    Vector<Scalar> v(size());
    v(0) = Scalar(1);
    for (int i = 1; i < size(); ++i) {
      const auto& [parent, var] = parents_[static_cast<std::size_t>(i)];
      v(i) = v(parent) * static_cast<Scalar>(x(var));
    }
    return v;
  }

  /// Columns are v_n(x_j) for the points stored as columns of `points`.
  template <typename Scalar>
  Matrix<Scalar> evaluate_columns(const Eigen::MatrixXd& points) const {
    Matrix<Scalar> V(size(), points.cols());
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
      V.col(j) = evaluate<Scalar>(points.col(j));
    }
    return V;
  }

 private:
  int dim_;
  int degree_;
  std::vector<MultiIndex> indices_;
  std::vector<std::pair<int, int>> parents_;
};

/// Shared, cached basis instance.
std::shared_ptr<const MonomialBasis> basis_for(int d, int n);

template <typename Scalar = double, typename Derived>
Vector<Scalar> monomial_vector(const Eigen::MatrixBase<Derived>& x, int n) {
  return basis_for(static_cast<int>(x.size()), n)->template evaluate<Scalar>(x);
}

/// Sparse real polynomial in a fixed number of variables. Zero
/// coefficients are never stored.
class Polynomial {
 public:
  using Terms = std::map<MultiIndex, double>;

  explicit Polynomial(int dim);
  Polynomial(int dim, const Terms& terms);

  static Polynomial constant(int dim, double c);
  static Polynomial variable(int dim, int i);

  int dim() const { return dim_; }
  /// Maximum total degree over stored terms; 0 for the zero polynomial.
  int degree() const;
  /// ceil(deg/2), the half-degree used to size localizing matrices.
  int half_degree() const { return (degree() + 1) / 2; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant_one() const;

  const Terms& terms() const { return terms_; }
  double coefficient(const MultiIndex& alpha) const;

  void add_term(const MultiIndex& alpha, double coef);

  Polynomial operator+(const Polynomial& other) const;
  Polynomial operator-(const Polynomial& other) const;
  Polynomial operator*(const Polynomial& other) const;
  Polynomial operator*(double s) const;
  friend Polynomial operator*(double s, const Polynomial& p) { return p * s; }
  bool operator==(const Polynomial& other) const = default;

  template <typename Scalar = double, typename Derived>
  Scalar eval(const Eigen::MatrixBase<Derived>& x) const {
    if (x.size() != dim_) {
      throw ValidationError("poly_eval: point has " + std::to_string(x.size()) +
                            " coordinates, polynomial has dimension " + std::to_string(dim_));
    }
    Scalar acc(0);
    for (const auto& [alpha, c] : terms_) {
      Scalar term = static_cast<Scalar>(c);
      for (int i = 0; i < dim_; ++i) {
        for (int k = 0; k < alpha[i]; ++k) term *= static_cast<Scalar>(x(i));
      }
      acc += term;
    }
    return acc;
  }

  std::string to_string() const;

 private:
  int dim_;
  Terms terms_;
};

template <typename Derived>
double poly_eval(const Polynomial& p, const Eigen::MatrixBase<Derived>& x) {
  return p.eval<double>(x);
}

}  // namespace eqdesign
