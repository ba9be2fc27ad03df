#pragma once

/// \file
/// Christoffel-Darboux kernel diagonal K_k(x,x) = v_k(x)^T M_k^{-1} v_k(x),
/// evaluated through a Cholesky factor of the moment matrix, and the
/// generator-weighted variance function sum_g g(x) K^{g phi}_{n-d_g}(x,x).

#include <cmath>
#include <string>
#include <vector>

#include "eqdesign/equilibrium.hpp"
#include "eqdesign/moments.hpp"

namespace eqdesign {

/// Above this estimated condition number kernel values lose most of their digits.
inline constexpr double kConditioningWarning = 1e12;

/// Lower Cholesky factor with an explicit pivot test. Throws SingularMomentMatrix
/// naming the first pivot below `rel_tol * trace`.
template <typename Scalar>
Matrix<Scalar> cholesky_lower(const Matrix<Scalar>& M, double rel_tol = 1e-12) {
  using std::sqrt;
  const Eigen::Index s = M.rows();
  const Scalar threshold = static_cast<Scalar>(rel_tol) * M.trace();
  Matrix<Scalar> L = Matrix<Scalar>::Zero(s, s);
  for (Eigen::Index j = 0; j < s; ++j) {
    Scalar pivot = M(j, j) - L.row(j).head(j).squaredNorm();
    if (!(pivot > threshold)) {
      throw SingularMomentMatrix("moment matrix is not positive definite: pivot " + std::to_string(j) +
                                     " = " + std::to_string(static_cast<double>(pivot)),
                                 static_cast<int>(j));
    }
    L(j, j) = sqrt(pivot);
    for (Eigen::Index i = j + 1; i < s; ++i) {
      L(i, j) = (M(i, j) - L.row(i).head(j).dot(L.row(j).head(j))) / L(j, j);
    }
  }
  return L;
}

template <typename Scalar = double>
class KernelEvaluator {
 public:
  KernelEvaluator(int dim, int order, Matrix<Scalar> chol)
      : dim_(dim), order_(order), chol_(std::move(chol)) {}

  int dim() const { return dim_; }
  int order() const { return order_; }
  int size() const { return static_cast<int>(chol_.rows()); }
  const Matrix<Scalar>& cholesky() const { return chol_; }

  /// K_k(x,x).
  template <typename Derived>
  Scalar operator()(const Eigen::MatrixBase<Derived>& x) const {
    const Vector<Scalar> v = basis_for(dim_, order_)->template evaluate<Scalar>(x);
    return chol_.template triangularView<Eigen::Lower>().solve(v).squaredNorm();
  }

  /// K_k(x_j,x_j) for monomial columns; only the leading s_k rows of V are used.
  Vector<Scalar> on_columns(const Matrix<Scalar>& V) const {
    const Matrix<Scalar> Y = chol_.template triangularView<Eigen::Lower>().solve(V.topRows(size()));
    return Y.colwise().squaredNorm().transpose();
  }

  /// (max L_ii / min L_ii)^2, a cheap lower estimate of cond(M_k).
  double condition_estimate() const {
    const auto diag = chol_.diagonal().cwiseAbs();
    const double r = static_cast<double>(diag.maxCoeff() / diag.minCoeff());
    return r * r;
  }
  bool ill_conditioned() const { return condition_estimate() > kConditioningWarning; }

 private:
  int dim_;
  int order_;
  Matrix<Scalar> chol_;
};

template <typename Scalar>
KernelEvaluator<Scalar> build_kernel(const MomentVector<Scalar>& phi, int k) {
  return KernelEvaluator<Scalar>(phi.dim(), k, cholesky_lower(moment_matrix(phi, k)));
}

/// Lambda_k(x) = 1 / K_k(x,x).
template <typename Scalar, typename Derived>
Scalar christoffel_value(const KernelEvaluator<Scalar>& ev, const Eigen::MatrixBase<Derived>& x) {
  return Scalar(1) / ev(x);
}

/// x -> sum_g g(x) K^{g phi}_{n - d_g}(x,x) for a fixed generator family.
template <typename Scalar = double>
class VarianceFunction {
 public:
  VarianceFunction(const MomentVector<Scalar>& phi, int n, std::vector<Generator> generators)
      : dim_(phi.dim()), n_(n), generators_(std::move(generators)) {
    for (const auto& g : generators_) {
      const int order = n - g.half_degree;
      if (order < 0) continue;
      if (2 * order + g.poly.degree() > phi.degree()) {
        throw ValidationError("variance function: generator " + g.poly.to_string() +
                              " needs moments to degree " + std::to_string(2 * order + g.poly.degree()));
      }
      try {
        kernels_.push_back(build_kernel(shifted_moments(phi, g.poly), order));
      } catch (const SingularMomentMatrix& e) {
        throw SingularMomentMatrix("singular localizing block for generator " + g.poly.to_string() +
                                       ": " + e.what(),
                                   e.pivot());
      }
      active_.push_back(g);
      bound_ += dim_poly(dim_, order);
    }
  }

  int degree() const { return n_; }
  /// sum_g s_{n - d_g}, the value the function takes everywhere at the optimum.
  double bound() const { return static_cast<double>(bound_); }
  const std::vector<Generator>& generators() const { return active_; }
  const std::vector<KernelEvaluator<Scalar>>& kernels() const { return kernels_; }

  template <typename Derived>
  Scalar operator()(const Eigen::MatrixBase<Derived>& x) const {
    Scalar acc(0);
    for (std::size_t j = 0; j < kernels_.size(); ++j) {
      acc += active_[j].poly.template eval<Scalar>(x) * kernels_[j](x);
    }
    return acc;
  }

  /// One value per point column.
  Vector<Scalar> on_points(const Eigen::MatrixXd& points) const {
    const Matrix<Scalar> V = basis_for(dim_, n_)->template evaluate_columns<Scalar>(points);
    Vector<Scalar> out = Vector<Scalar>::Zero(points.cols());
    for (std::size_t j = 0; j < kernels_.size(); ++j) {
      const Vector<Scalar> k = kernels_[j].on_columns(V);
      for (Eigen::Index i = 0; i < points.cols(); ++i) {
        out(i) += active_[j].poly.template eval<Scalar>(points.col(i)) * k(i);
      }
    }
    return out;
  }

 private:
  int dim_;
  int n_;
  std::vector<Generator> generators_;
  std::vector<Generator> active_;
  std::vector<KernelEvaluator<Scalar>> kernels_;
  std::int64_t bound_ = 0;
};

/// sum_g g(x) K^{g phi}_{n-d_g}(x,x) at a single point.
template <typename Scalar = double>
Scalar variance_function(const MomentVector<Scalar>& phi, int n, const Point& x,
                         const std::vector<Generator>& generators) {
  return VarianceFunction<Scalar>(phi, n, generators)(x);
}

}  // namespace eqdesign
