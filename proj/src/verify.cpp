#include "eqdesign/verify.hpp"

#include <cmath>
#include <limits>
#include <random>

#include <Eigen/QR>

#include "eqdesign/christoffel.hpp"
#include "eqdesign/cubature.hpp"
#include "eqdesign/parallel.hpp"

namespace eqdesign {

namespace {

using Real = VerifyScalar;

void require_builtin(const SemiAlgebraicSet& set, const char* what) {
  if (!set.is_builtin()) {
    throw ValidationError(std::string(what) + " needs a builtin set (closed-form equilibrium moments)");
  }
}

// Evaluates fn on column blocks of the points in parallel.
template <typename Fn>
Eigen::VectorXd evaluate_on(const Fn& fn, const Eigen::MatrixXd& points) {
  Eigen::VectorXd out(points.cols());
  parallel_for(static_cast<std::size_t>(points.cols()), [&](std::size_t begin, std::size_t end) {
    const auto b = static_cast<Eigen::Index>(begin);
    const auto len = static_cast<Eigen::Index>(end - begin);
    const Eigen::MatrixXd block = points.middleCols(b, len);
    out.segment(b, len) = fn.on_points(block).template cast<double>();
  });
  return out;
}

Eigen::MatrixXd uniform_box(const Eigen::MatrixX2d& bounds, double enlarge, int count, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Eigen::Index d = bounds.rows();
  Eigen::MatrixXd P(d, count);
  for (int j = 0; j < count; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      const double w = bounds(i, 1) - bounds(i, 0);
      P(i, j) = bounds(i, 0) - enlarge * w + unif(rng) * (1.0 + 2.0 * enlarge) * w;
    }
  }
  return P;
}

Eigen::MatrixXd inside_samples(const SemiAlgebraicSet& set, int count, std::mt19937_64& rng) {
  std::vector<Point> pts;
  const long max_attempts = 200L * std::max(count, 1);
  for (long a = 0; a < max_attempts && static_cast<int>(pts.size()) < count; ++a) {
    const Eigen::MatrixXd x = uniform_box(set.bounds(), 0.0, 1, rng);
    if (set.contains(x.col(0), 0.0)) pts.push_back(x.col(0));
  }
  Eigen::MatrixXd P(set.dim(), static_cast<Eigen::Index>(pts.size()));
  for (std::size_t j = 0; j < pts.size(); ++j) P.col(static_cast<Eigen::Index>(j)) = pts[j];
  return P;
}

Eigen::MatrixXd from_list(const std::vector<Point>& pts, int d) {
  Eigen::MatrixXd P(d, static_cast<Eigen::Index>(pts.size()));
  for (std::size_t j = 0; j < pts.size(); ++j) P.col(static_cast<Eigen::Index>(j)) = pts[j];
  return P;
}

std::vector<Generator> description_generators(const SemiAlgebraicSet& set, int n) {
  std::vector<Generator> out;
  for (auto& g : as_generators(set.description())) {
    if (n - g.half_degree >= 0) out.push_back(std::move(g));
  }
  return out;
}

// Sum over the builtin family of s_{n - d_g}.
double family_bound(const SemiAlgebraicSet& set, int n) {
  return static_cast<double>(block_dimension_sum(set.dim(), n, generator_set(set.kind(), set.dim(), n)));
}

// Lattice points of mesh 1/m on the simplex boundary, vertices excluded.
void simplex_boundary_lattice(int d, int m, std::vector<int>& k, int used, std::vector<Point>& out) {
  if (static_cast<int>(k.size()) == d) {
    const int last = m - used;
    int zeros = last == 0 ? 1 : 0, at_m = last == m ? 1 : 0;
    for (int v : k) {
      zeros += v == 0;
      at_m += v == m;
    }
    if (zeros == 0 || at_m > 0) return;
    Point x(d);
    for (int j = 0; j < d; ++j) x(j) = static_cast<double>(k[static_cast<std::size_t>(j)]) / m;
    out.push_back(x);
    return;
  }
  for (int v = 0; v + used <= m; ++v) {
    k.push_back(v);
    simplex_boundary_lattice(d, m, k, used + v, out);
    k.pop_back();
  }
}

}  // namespace

PellReport check_pell(const SemiAlgebraicSet& set, int n, int samples, std::uint64_t seed) {
  require_builtin(set, "check_pell");
  if (n < 1) throw ValidationError("check_pell needs n >= 1");
  const auto phi = equilibrium_moments<Real>(set, 2 * n);
  const VarianceFunction<Real> D(phi, n, generator_set(set.kind(), set.dim(), n));
  std::mt19937_64 rng(seed);
  const Eigen::MatrixXd pts = uniform_box(set.bounds(), 0.1, samples, rng);
  PellReport r;
  r.bound = D.bound();
  r.samples = samples;
  r.max_residual = samples > 0 ? (evaluate_on(D, pts).array() - r.bound).abs().maxCoeff() : 0.0;
  r.passed = r.max_residual <= 1e-6 * r.bound;
  return r;
}

BoundaryReport check_boundary_maxima(const SemiAlgebraicSet& set, int n, int samples, std::uint64_t seed) {
  require_builtin(set, "check_boundary_maxima");
  const int d = set.dim();
  const auto phi = equilibrium_moments<Real>(set, 2 * n);
  const auto K = VarianceFunction<Real>(phi, n, as_generators({Polynomial::constant(d, 1.0)}));
  std::mt19937_64 rng(seed);
  BoundaryReport r;
  r.bound = family_bound(set, n);
  r.min_margin = std::numeric_limits<double>::infinity();

  std::vector<Point> loci, others;
  const bool ball = set.kind() == SetKind::ball && d > 1;
  if (ball) {
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> angle(0.0, 2.0 * 3.14159265358979323846);
    for (int j = 0; j < samples; ++j) {
      Point x(d);
      if (d == 2) {
        const double t = angle(rng);
        x << std::cos(t), std::sin(t);
      } else {
        for (int i = 0; i < d; ++i) x(i) = normal(rng);
        x /= x.norm();
      }
      loci.push_back(x);
    }
  } else if (set.kind() == SetKind::simplex) {
    loci.push_back(Point::Zero(d));
    for (int i = 0; i < d; ++i) loci.push_back(Point::Unit(d, i));
    std::vector<int> k;
    simplex_boundary_lattice(d, d <= 2 ? 32 : 16, k, 0, others);
  } else {
    // Box, interval, and the one-dimensional ball: the 2^d sign vertices.
    for (int mask = 0; mask < (1 << d); ++mask) {
      Point x(d);
      for (int i = 0; i < d; ++i) x(i) = (mask >> i) & 1 ? 1.0 : -1.0;
      loci.push_back(x);
    }
    if (d > 1) {
      std::uniform_int_distribution<int> face(0, 2 * d - 1);
      std::uniform_real_distribution<double> unif(-1.0, 1.0);
      while (static_cast<int>(others.size()) < samples) {
        const int f = face(rng);
        Point x(d);
        for (int i = 0; i < d; ++i) x(i) = unif(rng);
        x(f / 2) = f % 2 ? 1.0 : -1.0;
        // Exclude vertex neighbourhoods of radius 1e-3.
        if ((x.cwiseAbs() - Point::Ones(d)).norm() < 1e-3) continue;
        others.push_back(x);
      }
    }
  }
  r.equality_points = from_list(loci, d);
  r.boundary_samples = static_cast<int>(loci.size() + others.size());
  const Eigen::VectorXd at_loci = evaluate_on(K, r.equality_points);
  r.equality_residual = (at_loci.array() - r.bound).abs().maxCoeff();
  r.max_kernel = at_loci.maxCoeff();
  if (!others.empty()) {
    const Eigen::VectorXd at_others = evaluate_on(K, from_list(others, d));
    r.min_margin = (r.bound - at_others.array()).minCoeff();
    r.max_kernel = std::max(r.max_kernel, at_others.maxCoeff());
  }
  const Eigen::MatrixXd inner = inside_samples(set, samples, rng);
  r.interior_excess = -std::numeric_limits<double>::infinity();
  if (inner.cols() > 0) {
    const Eigen::VectorXd at_inner = evaluate_on(K, inner);
    r.interior_excess = at_inner.maxCoeff() - r.bound;
    r.max_kernel = std::max(r.max_kernel, at_inner.maxCoeff());
  }
  r.passed = r.equality_residual <= 1e-8 && r.interior_excess <= 1e-8 && (ball || r.min_margin > 1e-6);
  return r;
}

KKTReport check_kkt_general(const SemiAlgebraicSet& set, const DesignMeasure& design, int n, int samples,
                            std::uint64_t seed) {
  if (design.dim() != set.dim()) throw ValidationError("design dimension does not match the set");
  const auto phi = moments_of_atoms<Real>(design.atoms, design.weights, 2 * n);
  const VarianceFunction<Real> D(phi, n, description_generators(set, n));
  std::mt19937_64 rng(seed);
  KKTReport r;
  r.bound = D.bound();
  const Eigen::MatrixXd inner = inside_samples(set, samples, rng);
  r.inequality_residual = -std::numeric_limits<double>::infinity();
  if (inner.cols() > 0) r.inequality_residual = evaluate_on(D, inner).maxCoeff() - r.bound;
  const Eigen::VectorXd at_atoms = evaluate_on(D, design.atoms);
  r.support_residual = (at_atoms.array() - r.bound).abs().maxCoeff();
  r.inequality_residual = std::max(r.inequality_residual, at_atoms.maxCoeff() - r.bound);
  const Eigen::MatrixXd outer = uniform_box(set.bounds(), 0.1, samples, rng);
  r.identity_residual = samples > 0 ? (evaluate_on(D, outer).array() - r.bound).abs().maxCoeff() : 0.0;
  return r;
}

PStar::PStar(const SemiAlgebraicSet& set, int n)
    : fn_((require_builtin(set, "p*_n"), equilibrium_moments<Real>(set, 2 * n)), n, description_generators(set, n)) {}

VerifyScalar PStar::operator()(const Point& x) const { return fn_(x) / static_cast<Real>(fn_.bound()); }

double pstar_value(const SemiAlgebraicSet& set, int n, const Point& x) {
  return static_cast<double>(PStar(set, n)(x));
}

double weak_star_gap(const SemiAlgebraicSet& set, int n, const Polynomial& f) {
  require_builtin(set, "weak_star_gap");
  if (f.dim() != set.dim()) throw ValidationError("polynomial dimension does not match the set");
  const auto rule = cubature_for_equilibrium(set, n);
  const auto phi = equilibrium_moments<Real>(set, std::max(f.degree(), 0));
  const Real exact = riesz(phi, f);
  Real approx = 0;
  for (int i = 0; i < rule.size(); ++i) {
    approx += static_cast<Real>(rule.weights(i)) * f.eval<Real>(rule.atoms.col(i));
  }
  return static_cast<double>(std::abs(approx - exact));
}

double vdm_logdet(const Eigen::MatrixXd& points, int n) {
  const auto basis = basis_for(static_cast<int>(points.rows()), n);
  if (points.cols() != basis->size()) {
    throw ValidationError("Vandermonde determinant needs exactly s_n = " + std::to_string(basis->size()) +
                          " points, got " + std::to_string(points.cols()));
  }
  const Eigen::MatrixX<Real> V = basis->evaluate_columns<Real>(points).transpose();
  const Eigen::ColPivHouseholderQR<Eigen::MatrixX<Real>> qr(V);
  const auto diag = qr.matrixR().diagonal().cwiseAbs();
  if (!(diag.minCoeff() > Real(1e-14) * std::max(diag.maxCoeff(), Real(1)))) {
    return -std::numeric_limits<double>::infinity();
  }
  Real acc = 0;
  for (Eigen::Index i = 0; i < diag.size(); ++i) acc += std::log(diag(i));
  return static_cast<double>(acc);
}

double vdm_identity_residual(const Eigen::MatrixXd& points, int n) {
  const double ld = vdm_logdet(points, n);
  const Eigen::Index s = points.cols();
  const auto phi = moments_of_atoms<Real>(points, Eigen::VectorXd::Constant(s, 1.0 / s), 2 * n);
  const auto L = cholesky_lower(moment_matrix(phi, n), 0.0);
  Real logdet = 0;
  for (Eigen::Index i = 0; i < s; ++i) logdet += 2 * std::log(L(i, i));
  return static_cast<double>(std::abs(logdet - (2 * static_cast<Real>(ld) - s * std::log(static_cast<Real>(s)))));
}

}  // namespace eqdesign
