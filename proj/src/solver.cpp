#include "eqdesign/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "eqdesign/christoffel.hpp"
#include "eqdesign/parallel.hpp"

namespace eqdesign {

std::string_view to_string(ObjectiveKind kind) {
  return kind == ObjectiveKind::classical ? "classic" : "variant";
}

ObjectiveKind parse_objective_kind(std::string_view name) {
  if (name == "classic" || name == "classical") return ObjectiveKind::classical;
  if (name == "variant") return ObjectiveKind::variant;
  throw ValidationError("unknown objective '" + std::string(name) + "' (expected classic or variant)");
}

std::string_view to_string(GridProvenance p) {
  switch (p) {
    case GridProvenance::tensor_chebyshev: return "tensor-chebyshev";
    case GridProvenance::boundary_augmented: return "boundary-augmented";
    case GridProvenance::user: return "user";
    case GridProvenance::refined: return "refined";
  }
  return "user";
}

std::vector<Generator> objective_generators(const SemiAlgebraicSet& set, int n, ObjectiveKind kind) {
  if (n < 0) throw ValidationError("design degree must be nonnegative");
  if (kind == ObjectiveKind::classical) return as_generators({Polynomial::constant(set.dim(), 1.0)});
  if (set.is_builtin()) return generator_set(set.kind(), set.dim(), n);
  std::vector<Generator> out;
  for (auto& g : as_generators(set.description())) {
    if (n - g.half_degree >= 0) out.push_back(std::move(g));
  }
  return out;
}

namespace {

constexpr double kPivotTol = 1e-12;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Cholesky with the same relative pivot test as cholesky_lower, without throwing.
bool try_cholesky(const Eigen::MatrixXd& M, Eigen::MatrixXd& L) {
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) return false;
  L = llt.matrixL();
  return (L.diagonal().array().square() > kPivotTol * M.trace()).all();
}

double log_det(const Eigen::MatrixXd& L) { return 2.0 * L.diagonal().array().log().sum(); }

// ---------------------------------------------------------------------------
// Grids

Eigen::VectorXd chebyshev_with_ends(int m) {
  Eigen::VectorXd x(m + 2);
  x(0) = -1.0;
  for (int i = 1; i <= m; ++i) x(i) = -std::cos((2.0 * i - 1.0) * std::numbers::pi / (2.0 * m));
  if (m % 2 == 1) x((m + 1) / 2) = 0.0;
  x(m + 1) = 1.0;
  return x;
}

Eigen::MatrixXd tensor_grid(const Eigen::VectorXd& axis, int d) {
  const Eigen::Index m = axis.size();
  Eigen::Index total = 1;
  for (int i = 0; i < d; ++i) total *= m;
  Eigen::MatrixXd P(d, total);
  for (Eigen::Index j = 0; j < total; ++j) {
    Eigen::Index r = j;
    for (int i = 0; i < d; ++i, r /= m) P(i, j) = axis(r % m);
  }
  return P;
}

std::vector<Eigen::VectorXd> sphere_directions(int d, int count, std::uint64_t seed) {
  std::vector<Eigen::VectorXd> dirs;
  if (d == 2) {
    for (int j = 0; j < count; ++j) {
      const double t = 2.0 * std::numbers::pi * j / count;
      dirs.push_back(Eigen::Vector2d(std::cos(t), std::sin(t)));
    }
  } else if (d == 3) {
    // Fibonacci lattice.
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int j = 0; j < count; ++j) {
      const double z = 1.0 - 2.0 * (j + 0.5) / count;
      const double r = std::sqrt(1.0 - z * z);
      dirs.push_back(Eigen::Vector3d(r * std::cos(golden * j), r * std::sin(golden * j), z));
    }
  } else {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    for (int j = 0; j < count; ++j) {
      Eigen::VectorXd v = Eigen::VectorXd::NullaryExpr(d, [&] { return normal(rng); });
      dirs.push_back(v / v.norm());
    }
  }
  return dirs;
}

Eigen::MatrixXd ball_grid(int d, int density, std::uint64_t seed) {
  const int radii = (d == 2 ? 64 : 32) * density + 1;
  const int angles = (d == 2 ? 128 : 256) * density;
  const auto dirs = sphere_directions(d, angles, seed);
  const auto boundary = sphere_directions(d, 4 * angles, seed + 1);
  std::vector<Eigen::VectorXd> pts;
  pts.push_back(Eigen::VectorXd::Zero(d));
  for (int i = 1; i <= radii; ++i) {
    const double r = std::sin(std::numbers::pi * i / (2.0 * radii));
    for (const auto& u : dirs) pts.push_back(r * u);
  }
  // Extra boundary samples, offset from the ring directions.
  for (const auto& u : boundary) {
    Eigen::VectorXd v = u;
    if (d == 2) {
      const double t = std::atan2(u(1), u(0)) + std::numbers::pi / (4.0 * angles);
      v = Eigen::Vector2d(std::cos(t), std::sin(t));
    }
    pts.push_back(v);
  }
  Eigen::MatrixXd P(d, static_cast<Eigen::Index>(pts.size()));
  for (std::size_t j = 0; j < pts.size(); ++j) P.col(static_cast<Eigen::Index>(j)) = pts[j];
  return P;
}

void lattice_points(int d, int m, std::vector<int>& k, int used, std::vector<Eigen::VectorXd>& out) {
  const int i = static_cast<int>(k.size());
  if (i == d) {
    Eigen::VectorXd x(d);
    for (int j = 0; j < d; ++j) x(j) = static_cast<double>(k[static_cast<std::size_t>(j)]) / m;
    out.push_back(x);
    return;
  }
  for (int v = 0; v + used <= m; ++v) {
    k.push_back(v);
    lattice_points(d, m, k, used + v, out);
    k.pop_back();
  }
}

Eigen::MatrixXd simplex_grid(int d, int density) {
  int m = 64 * density;
  while (m > 4 && static_cast<double>(dim_poly(d, m)) > 2e5) m /= 2;
  std::vector<Eigen::VectorXd> pts;
  std::vector<int> k;
  lattice_points(d, m, k, 0, pts);
  Eigen::MatrixXd P(d, static_cast<Eigen::Index>(pts.size()));
  for (std::size_t j = 0; j < pts.size(); ++j) P.col(static_cast<Eigen::Index>(j)) = pts[j];
  return P;
}

Eigen::MatrixXd custom_grid(const SemiAlgebraicSet& set, int target, std::uint64_t seed) {
  const int d = set.dim();
  const auto& B = set.bounds();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto sample = [&] {
    Point x(d);
    for (int i = 0; i < d; ++i) x(i) = B(i, 0) + unif(rng) * (B(i, 1) - B(i, 0));
    return x;
  };
  const int interior_target = std::max(1, target - target / 4);
  std::vector<Point> inside, outside;
  const long max_attempts = 200L * std::max(target, 1);
  for (long a = 0; a < max_attempts && static_cast<int>(inside.size()) < interior_target; ++a) {
    Point x = sample();
    if (set.contains(x, 0.0)) {
      inside.push_back(std::move(x));
    } else if (outside.size() < static_cast<std::size_t>(target)) {
      outside.push_back(std::move(x));
    }
  }
  if (inside.empty()) {
    throw ValidationError("custom set '" + set.name() + "': no sampled point of the bounding box satisfies "
                          "all generators (empty sampled interior)");
  }
  // Boundary polish: bisect segments from interior to exterior samples.
  std::vector<Point> pts = inside;
  std::uniform_int_distribution<std::size_t> pick_in(0, inside.size() - 1);
  const int boundary_target = outside.empty() ? 0 : target / 4;
  for (int b = 0; b < boundary_target; ++b) {
    Point a = inside[pick_in(rng)];
    Point c = outside[static_cast<std::size_t>(b) % outside.size()];
    for (int it = 0; it < 60; ++it) {
      const Point mid = 0.5 * (a + c);
      (set.contains(mid, 0.0) ? a : c) = mid;
    }
    pts.push_back(a);
  }
  Eigen::MatrixXd P(d, static_cast<Eigen::Index>(pts.size()));
  for (std::size_t j = 0; j < pts.size(); ++j) P.col(static_cast<Eigen::Index>(j)) = pts[j];
  return P;
}

// ---------------------------------------------------------------------------
// Weights on a fixed grid

class GridModel {
 public:
  GridModel(const Eigen::MatrixXd& points, int n, const std::vector<Generator>& gens)
      : points_(points), gens_(gens) {
    const int d = static_cast<int>(points.rows());
    V_ = basis_for(d, n)->evaluate_columns<double>(points);
    G_.resize(points.cols(), static_cast<Eigen::Index>(gens.size()));
    for (std::size_t j = 0; j < gens.size(); ++j) {
      const int order = n - gens[j].half_degree;
      sizes_.push_back(static_cast<int>(dim_poly(d, order)));
      bound_ += sizes_.back();
      for (Eigen::Index i = 0; i < points.cols(); ++i) {
        G_(i, static_cast<Eigen::Index>(j)) = gens[j].poly.eval<double>(points.col(i));
      }
    }
  }

  Eigen::Index size() const { return points_.cols(); }
  double bound() const { return bound_; }
  const std::vector<int>& block_sizes() const { return sizes_; }
  const Eigen::MatrixXd& points() const { return points_; }

  std::vector<Eigen::MatrixXd> blocks(const Eigen::VectorXd& w) const {
    std::vector<Eigen::MatrixXd> M;
    for (std::size_t j = 0; j < sizes_.size(); ++j) {
      const auto Vj = V_.topRows(sizes_[j]);
      const Eigen::VectorXd a = w.cwiseProduct(G_.col(static_cast<Eigen::Index>(j)));
      M.push_back((Vj * a.asDiagonal()) * Vj.transpose());
    }
    return M;
  }

  // Factors every block; on failure returns the index of the singular block.
  int factor(const std::vector<Eigen::MatrixXd>& M, std::vector<Eigen::MatrixXd>& L) const {
    L.resize(M.size());
    for (std::size_t j = 0; j < M.size(); ++j) {
      if (!try_cholesky(M[j], L[j])) return static_cast<int>(j);
    }
    return -1;
  }

  double objective(const std::vector<Eigen::MatrixXd>& L) const {
    double v = 0.0;
    for (const auto& l : L) v += log_det(l);
    return v;
  }

  Eigen::VectorXd variance(const std::vector<Eigen::MatrixXd>& L) const {
    Eigen::VectorXd D = Eigen::VectorXd::Zero(size());
    parallel_for(static_cast<std::size_t>(size()), [&](std::size_t begin, std::size_t end) {
      const auto b = static_cast<Eigen::Index>(begin);
      const auto len = static_cast<Eigen::Index>(end - begin);
      for (std::size_t j = 0; j < L.size(); ++j) {
        const Eigen::MatrixXd Y =
            L[j].triangularView<Eigen::Lower>().solve(V_.block(0, b, sizes_[j], len));
        D.segment(b, len) +=
            Y.colwise().squaredNorm().transpose().cwiseProduct(G_.col(static_cast<Eigen::Index>(j)).segment(b, len));
      }
    });
    return D;
  }

  // Optimal exchange of mass between grid points k (gains alpha) and l (loses
  // alpha), alpha in [-w_k, w_l]. By the matrix determinant lemma each block
  // contributes log q_j(alpha) with q_j quadratic, so the line search is scalar.
  // Minv holds the block inverses and is updated by Sherman-Morrison.
  bool exchange_pair(Eigen::VectorXd& w, std::vector<Eigen::MatrixXd>& Minv, Eigen::Index k, Eigen::Index l) const {
    if (k == l) return false;
    const std::size_t m = Minv.size();
    std::vector<double> lin(m), quad(m);
    std::vector<Eigen::VectorXd> uk(m), ul(m);
    for (std::size_t j = 0; j < m; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      const auto vk = V_.col(k).head(sizes_[j]);
      const auto vl = V_.col(l).head(sizes_[j]);
      uk[j] = Minv[j] * vk;
      ul[j] = Minv[j] * vl;
      const double dkk = vk.dot(uk[j]), dll = vl.dot(ul[j]), dkl = vk.dot(ul[j]);
      const double ak = G_(k, jj), al = G_(l, jj);
      lin[j] = ak * dkk - al * dll;
      quad[j] = ak * al * (dkl * dkl - dkk * dll);
    }
    // f'(alpha) = sum q'/q; -inf (resp. +inf) where a block degenerates.
    auto slope = [&](double a) {
      double s = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        const double q = 1.0 + a * lin[j] + a * a * quad[j];
        const double dq = lin[j] + 2.0 * a * quad[j];
        if (!(q > 1e-14)) return a > 0 ? -std::numeric_limits<double>::infinity()
                                        : std::numeric_limits<double>::infinity();
        s += dq / q;
      }
      return s;
    };
    const double s0 = slope(0.0);
    if (s0 == 0.0) return false;
    const double end = s0 > 0.0 ? w(l) : -w(k);
    if (end == 0.0) return false;
    double alpha = end;
    if (!(s0 > 0.0 ? slope(end) >= 0.0 : slope(end) <= 0.0)) {
      double lo = 0.0, hi = end;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        ((slope(mid) > 0.0) == (s0 > 0.0) ? lo : hi) = mid;
      }
      alpha = lo;
    }
    if (alpha == 0.0) return false;
    for (std::size_t j = 0; j < m; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      const auto vk = V_.col(k).head(sizes_[j]);
      const double bk = alpha * G_(k, jj);
      if (bk != 0.0) {
        Minv[j] -= (bk / (1.0 + bk * vk.dot(uk[j]))) * uk[j] * uk[j].transpose();
      }
      const double bl = -alpha * G_(l, jj);
      if (bl != 0.0) {
        const auto vl = V_.col(l).head(sizes_[j]);
        const Eigen::VectorXd u = Minv[j] * vl;
        Minv[j] -= (bl / (1.0 + bl * vl.dot(u))) * u * u.transpose();
      }
    }
    if (alpha == w(l)) {
      w(k) += w(l);
      w(l) = 0.0;
    } else if (alpha == -w(k)) {
      w(l) += w(k);
      w(k) = 0.0;
    } else {
      w(k) += alpha;
      w(l) -= alpha;
    }
    return true;
  }

 private:
  Eigen::MatrixXd points_;
  std::vector<Generator> gens_;
  Eigen::MatrixXd V_;
  Eigen::MatrixXd G_;
  std::vector<int> sizes_;
  double bound_ = 0.0;
};

struct IterationState {
  Eigen::VectorXd w;
  std::vector<Eigen::MatrixXd> M;
  std::vector<Eigen::MatrixXd> L;
  Eigen::VectorXd D;
  double objective = 0.0;

  // Recomputes blocks, factors and the variance function; false if singular.
  bool refresh(const GridModel& model) {
    M = model.blocks(w);
    if (model.factor(M, L) >= 0) return false;
    objective = model.objective(L);
    D = model.variance(L);
    return true;
  }

  std::vector<Eigen::MatrixXd> inverses() const {
    std::vector<Eigen::MatrixXd> out;
    for (const auto& l : L) {
      const Eigen::MatrixXd Li = l.triangularView<Eigen::Lower>().solve(
          Eigen::MatrixXd::Identity(l.rows(), l.cols()));
      out.push_back(Li.transpose() * Li);
    }
    return out;
  }
};

// Accepting a step that loses less than the rounding level of log det.
bool no_worse(double next, double prev) { return next >= prev - 1e-12 * std::max(1.0, std::abs(prev)); }

// Exchange sweep: first the Fedorov step from the worst support atom to the
// grid maximizer of D, then pairwise exchanges between the support and a
// candidate pool (support, top-D points, random points) in random order.
int exchange_sweep(const GridModel& model, IterationState& st, std::mt19937_64& rng) {
  std::vector<Eigen::Index> support;
  for (Eigen::Index i = 0; i < model.size(); ++i) {
    if (st.w(i) > 0.0) support.push_back(i);
  }
  if (support.empty()) return 0;
  auto Minv = st.inverses();
  Eigen::Index kmax = 0;
  st.D.maxCoeff(&kmax);
  Eigen::Index lmin = support.front();
  for (auto i : support) {
    if (st.D(i) < st.D(lmin)) lmin = i;
  }
  int moved = model.exchange_pair(st.w, Minv, kmax, lmin) ? 1 : 0;

  std::vector<Eigen::Index> pool = support;
  const std::size_t extra = std::min<std::size_t>(static_cast<std::size_t>(model.size()),
                                                  std::max<std::size_t>(support.size(), 2 * model.block_sizes().front()));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(model.size()));
  for (Eigen::Index i = 0; i < model.size(); ++i) order[static_cast<std::size_t>(i)] = i;
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(extra), order.end(),
                    [&](Eigen::Index a, Eigen::Index b) { return st.D(a) > st.D(b); });
  pool.insert(pool.end(), order.begin(), order.begin() + static_cast<std::ptrdiff_t>(extra));
  std::uniform_int_distribution<Eigen::Index> pick(0, model.size() - 1);
  for (std::size_t r = 0; r < extra; ++r) pool.push_back(pick(rng));
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());

  std::shuffle(pool.begin(), pool.end(), rng);
  std::shuffle(support.begin(), support.end(), rng);
  std::size_t s = 0;
  for (auto k : pool) {
    // Skip support atoms already emptied during this sweep.
    for (std::size_t tries = 0; tries < support.size() && st.w(support[s % support.size()]) <= 0.0; ++tries) ++s;
    const Eigen::Index l = support[s++ % support.size()];
    if (st.w(l) <= 0.0) break;
    moved += model.exchange_pair(st.w, Minv, k, l) ? 1 : 0;
  }
  st.w = st.w.cwiseMax(0.0);
  st.w /= st.w.sum();
  return moved;
}

struct LoopStatus {
  bool converged = false;
  bool stalled = false;
};

// Multiplicative updates interleaved with exchange sweeps.
LoopStatus optimize(const GridModel& model, IterationState& st, const SolveOptions& opts, SolveReport& report,
                    std::mt19937_64& rng) {
  const double c = model.bound();
  LoopStatus status;
  while (report.iterations < opts.max_iter) {
    const double gap = st.D.maxCoeff() - c;
    double support_dev = 0.0;
    for (Eigen::Index i = 0; i < model.size(); ++i) {
      if (st.w(i) >= 1e-10) support_dev = std::max(support_dev, std::abs(st.D(i) - c));
    }
    if (gap <= opts.tol * c && support_dev <= opts.support_tol * c) {
      status.converged = true;
      return status;
    }
    ++report.iterations;
    const bool cleanup = gap <= opts.tol * c;
    const bool scheduled = opts.exchange_every > 0 && report.iterations % opts.exchange_every == 0;
    if (cleanup || scheduled) {
      // Repeated sweeps until they stop paying off.
      bool improved = false;
      for (int pass = 0; pass < 50; ++pass) {
        IterationState trial = st;
        const int moved = exchange_sweep(model, trial, rng);
        if (moved == 0 || !trial.refresh(model) || !no_worse(trial.objective, st.objective)) break;
        report.exchange_steps += moved;
        const double gain = trial.objective - st.objective;
        st = std::move(trial);
        improved = true;
        if (st.D.maxCoeff() - c <= opts.tol * c || gain <= 1e-13 * std::max(1.0, std::abs(st.objective))) break;
      }
      if (improved) continue;
    }
    IterationState next = st;
    // w_i D_i / c already sums to one up to rounding.
    Eigen::VectorXd proposal = st.w.cwiseProduct(st.D) / c;
    proposal /= proposal.sum();
    next.w = proposal;
    bool accepted = next.refresh(model) && no_worse(next.objective, st.objective);
    if (!accepted) {
      ++report.monotonicity_fallbacks;
      double t = 1.0;
      for (int h = 0; h < 30 && !accepted; ++h) {
        t *= 0.5;
        next.w = (1.0 - t) * st.w + t * proposal;
        accepted = next.refresh(model) && no_worse(next.objective, st.objective);
      }
    }
    if (!accepted) {
      status.stalled = true;
      return status;
    }
    if (cleanup && (next.w - st.w).lpNorm<Eigen::Infinity>() == 0.0) {
      // Neither step moves the design any more.
      st = std::move(next);
      status.stalled = true;
      return status;
    }
    st = std::move(next);
  }
  return status;
}

DesignMeasure extract_design(const Eigen::MatrixXd& points, const Eigen::VectorXd& w) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w(i) >= 1e-10) keep.push_back(i);
  }
  DesignMeasure out;
  out.atoms.resize(points.rows(), static_cast<Eigen::Index>(keep.size()));
  out.weights.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) {
    out.atoms.col(static_cast<Eigen::Index>(j)) = points.col(keep[j]);
    out.weights(static_cast<Eigen::Index>(j)) = w(keep[j]);
  }
  out.weights /= out.weights.sum();
  return out;
}

void validate_grid(const SemiAlgebraicSet& set, const CandidateGrid& grid) {
  if (grid.points.rows() != set.dim()) {
    throw ValidationError("grid points have dimension " + std::to_string(grid.points.rows()) + ", set has " +
                          std::to_string(set.dim()));
  }
  for (Eigen::Index i = 0; i < grid.points.cols(); ++i) {
    if (!set.contains(grid.points.col(i))) {
      throw ValidationError("grid point " + std::to_string(i) + " lies outside the set");
    }
  }
}

// Lexicographic column order with exact duplicates removed, so results do not
// depend on the order in which grid points are supplied.
Eigen::MatrixXd canonical_order(const Eigen::MatrixXd& P) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(P.cols()));
  for (Eigen::Index i = 0; i < P.cols(); ++i) idx[static_cast<std::size_t>(i)] = i;
  auto less = [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index r = 0; r < P.rows(); ++r) {
      if (P(r, a) != P(r, b)) return P(r, a) < P(r, b);
    }
    return false;
  };
  std::sort(idx.begin(), idx.end(), less);
  idx.erase(std::unique(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) { return !less(a, b) && !less(b, a); }),
            idx.end());
  Eigen::MatrixXd out(P.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = P.col(idx[j]);
  return out;
}

Eigen::MatrixXd concat(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

CandidateGrid default_grid(const SemiAlgebraicSet& set, const GridOptions& opts) {
  const int d = set.dim();
  const int density = std::max(1, opts.density);
  CandidateGrid grid;
  grid.provenance = GridProvenance::boundary_augmented;
  switch (set.kind()) {
    case SetKind::interval:
      grid.points = chebyshev_with_ends(512 * density + 1).transpose();
      break;
    case SetKind::box: {
      int m = 512 * density + 1;
      const double cap = 1e5 * density;
      while (m > 1 && std::pow(m + 2.0, d) > cap) --m;
      grid.points = tensor_grid(chebyshev_with_ends(m), d);
      grid.provenance = GridProvenance::tensor_chebyshev;
      break;
    }
    case SetKind::ball:
      grid.points = d == 1 ? Eigen::MatrixXd(chebyshev_with_ends(512 * density + 1).transpose())
                           : ball_grid(d, density, opts.seed);
      break;
    case SetKind::simplex:
      grid.points = simplex_grid(d, density);
      break;
    case SetKind::custom:
      grid.points = custom_grid(set, opts.custom_points * density, opts.seed);
      break;
  }
  return grid;
}

ObjectiveEvaluation evaluate_objective(const SemiAlgebraicSet& set, const MomentVector<double>& phi, int n,
                                       ObjectiveKind kind) {
  if (phi.dim() != set.dim()) throw ValidationError("moment vector dimension does not match the set");
  ObjectiveEvaluation out;
  for (const auto& g : objective_generators(set, n, kind)) {
    const Eigen::MatrixXd M = localizing_matrix(phi, g.poly, n - g.half_degree);
    Eigen::MatrixXd L;
    if (!try_cholesky(M, L)) {
      out.value = kNegInf;
      out.diagnostic = "singular block for generator " + g.poly.to_string();
      return out;
    }
    out.value += log_det(L);
  }
  return out;
}

ObjectiveEvaluation evaluate_objective(const SemiAlgebraicSet& set, const DesignMeasure& design, int n,
                                       ObjectiveKind kind) {
  return evaluate_objective(set, design.moments(2 * n), n, kind);
}

double objective_value(const SemiAlgebraicSet& set, const DesignMeasure& design, int n, ObjectiveKind kind) {
  return evaluate_objective(set, design, n, kind).value;
}

double objective_value(const SemiAlgebraicSet& set, const MomentVector<double>& phi, int n, ObjectiveKind kind) {
  return evaluate_objective(set, phi, n, kind).value;
}

std::optional<DesignMeasure> gauss_compress(const DesignMeasure& design, int n) {
  if (design.dim() != 1) throw ValidationError("Gauss compression needs a univariate design");
  const Eigen::Index N = design.size();
  const int k = n + 1;
  if (N < k) return std::nullopt;
  // Lanczos on diag(x) from sqrt(w), with full reorthogonalization.
  const Eigen::VectorXd x = design.atoms.row(0).transpose();
  Eigen::MatrixXd Q(N, k);
  Q.col(0) = design.weights.cwiseSqrt();
  Q.col(0) /= Q.col(0).norm();
  Eigen::VectorXd alpha(k), beta = Eigen::VectorXd::Zero(k);
  for (int j = 0; j < k; ++j) {
    Eigen::VectorXd z = x.cwiseProduct(Q.col(j));
    alpha(j) = Q.col(j).dot(z);
    for (int pass = 0; pass < 2; ++pass) z -= Q.leftCols(j + 1) * (Q.leftCols(j + 1).transpose() * z);
    if (j + 1 < k) {
      beta(j + 1) = z.norm();
      if (!(beta(j + 1) > 1e-13)) return std::nullopt;
      Q.col(j + 1) = z / beta(j + 1);
    }
  }
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(k, k);
  for (int j = 0; j < k; ++j) {
    J(j, j) = alpha(j);
    if (j + 1 < k) J(j, j + 1) = J(j + 1, j) = beta(j + 1);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  DesignMeasure out;
  out.atoms = es.eigenvalues().transpose();
  out.weights = es.eigenvectors().row(0).transpose().cwiseAbs2();
  out.weights /= out.weights.sum();
  return out;
}

CandidateGrid refine_grid(const SemiAlgebraicSet& set, const DesignMeasure& design, int n, ObjectiveKind kind,
                          const CandidateGrid& grid) {
  const VarianceFunction<double> D(design.moments(2 * n), n, objective_generators(set, n, kind));
  const Eigen::VectorXd values = D.on_points(grid.points);
  const double c = D.bound();
  if (values.maxCoeff() - values.minCoeff() <= 1e-9 * c) return grid;

  const int d = set.dim();
  std::vector<Point> starts;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(values.size()));
  for (Eigen::Index i = 0; i < values.size(); ++i) order[static_cast<std::size_t>(i)] = i;
  const std::size_t top = std::min<std::size_t>(10, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top), order.end(),
                    [&](Eigen::Index a, Eigen::Index b) { return values(a) > values(b); });
  for (std::size_t i = 0; i < top; ++i) starts.push_back(grid.points.col(order[i]));
  std::vector<Eigen::Index> by_weight(static_cast<std::size_t>(design.size()));
  for (Eigen::Index i = 0; i < design.size(); ++i) by_weight[static_cast<std::size_t>(i)] = i;
  std::sort(by_weight.begin(), by_weight.end(),
            [&](Eigen::Index a, Eigen::Index b) { return design.weights(a) > design.weights(b); });
  for (std::size_t i = 0; i < std::min<std::size_t>(40, by_weight.size()); ++i) {
    starts.push_back(design.atoms.col(by_weight[i]));
  }

  const double width = (set.bounds().col(1) - set.bounds().col(0)).maxCoeff();
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  std::vector<Point> found(starts.size());
  parallel_for(starts.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      Point x = set.project(starts[s]);
      double best = D(x);
      for (double h = 0.05 * width; h > 1e-11; h *= 0.5) {
        for (int i = 0; i < d; ++i) {
          auto f = [&](double t) {
            Point y = x;
            y(i) += t;
            return D(set.project(y));
          };
          double a = -h, b = h;
          double t1 = b - ratio * (b - a), t2 = a + ratio * (b - a);
          double f1 = f(t1), f2 = f(t2);
          for (int it = 0; it < 40; ++it) {
            if (f1 < f2) {
              a = t1;
              t1 = t2;
              f1 = f2;
              t2 = a + ratio * (b - a);
              f2 = f(t2);
            } else {
              b = t2;
              t2 = t1;
              f2 = f1;
              t1 = b - ratio * (b - a);
              f1 = f(t1);
            }
          }
          const double t = 0.5 * (a + b);
          const double ft = f(t);
          if (ft > best) {
            best = ft;
            x(i) += t;
            x = set.project(x);
          }
        }
      }
      found[s] = x;
    }
  });

  std::vector<Point> added;
  auto duplicate = [&](const Point& x) {
    for (Eigen::Index j = 0; j < grid.points.cols(); ++j) {
      if ((grid.points.col(j) - x).norm() <= 1e-9) return true;
    }
    for (const auto& y : added) {
      if ((y - x).norm() <= 1e-9) return true;
    }
    return false;
  };
  for (const auto& x : found) {
    if (x.allFinite() && set.contains(x) && !duplicate(x)) added.push_back(x);
  }
  CandidateGrid out;
  out.provenance = added.empty() ? grid.provenance : GridProvenance::refined;
  out.points.resize(d, grid.points.cols() + static_cast<Eigen::Index>(added.size()));
  out.points.leftCols(grid.points.cols()) = grid.points;
  for (std::size_t j = 0; j < added.size(); ++j) {
    out.points.col(grid.points.cols() + static_cast<Eigen::Index>(j)) = added[j];
  }
  return out;
}

SolveResult solve_design(const SemiAlgebraicSet& set, int n, ObjectiveKind kind,
                         const std::optional<CandidateGrid>& grid, const SolveOptions& opts) {
  const auto gens = objective_generators(set, n, kind);
  GridOptions gopts;
  gopts.seed = opts.seed;
  CandidateGrid current = grid ? *grid : default_grid(set, gopts);
  validate_grid(set, current);
  current.points = canonical_order(current.points);

  IterationState st;
  auto model = std::make_unique<GridModel>(current.points, n, gens);
  st.w = Eigen::VectorXd::Constant(model->size(), 1.0 / static_cast<double>(model->size()));
  if (!st.refresh(*model)) {
    // Restart once on a strictly larger grid.
    gopts.density = 2;
    gopts.custom_points *= 4;
    CandidateGrid larger = default_grid(set, gopts);
    current.points = canonical_order(grid ? concat(current.points, larger.points) : larger.points);
    model = std::make_unique<GridModel>(current.points, n, gens);
    st.w = Eigen::VectorXd::Constant(model->size(), 1.0 / static_cast<double>(model->size()));
    if (!st.refresh(*model)) {
      const int bad = model->factor(model->blocks(st.w), st.L);
      throw SingularMomentMatrix("uniform design on the candidate grid is singular for generator " +
                                     gens[static_cast<std::size_t>(std::max(bad, 0))].poly.to_string() +
                                     " even after enlarging the grid",
                                 -1);
    }
  }

  SolveReport report;
  std::mt19937_64 rng(opts.seed);
  LoopStatus status = optimize(*model, st, opts, report, rng);
  const int rounds = opts.refine_rounds >= 0 ? opts.refine_rounds : (set.dim() == 1 ? 2 : 0);
  for (int round = 0; round < rounds && !status.stalled; ++round) {
    const CandidateGrid refined = refine_grid(set, extract_design(current.points, st.w), n, kind, current);
    const Eigen::Index added = refined.size() - current.size();
    if (added == 0) break;
    report.refined_points += static_cast<int>(added);
    current = refined;
    model = std::make_unique<GridModel>(current.points, n, gens);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(current.size());
    w.head(st.w.size()) = st.w;
    st.w = w;
    if (!st.refresh(*model)) break;
    status = optimize(*model, st, opts, report, rng);
  }

  SolveResult result;
  result.design = extract_design(current.points, st.w);
  report.converged = status.converged;
  report.grid_size = current.size();
  report.block_dims = model->block_sizes();

  if (opts.compress_univariate && set.dim() == 1) {
    if (auto compact = gauss_compress(result.design, n)) {
      bool ok = (compact->weights.array() > 0.0).all();
      for (Eigen::Index i = 0; ok && i < compact->size(); ++i) {
        const Point x = compact->atoms.col(i);
        ok = set.contains(x, 1e-9);
        if (ok) compact->atoms.col(i) = set.contains(x, 0.0) ? x : set.project(x);
      }
      if (ok) {
        const double before = objective_value(set, result.design, n, kind);
        const double after = objective_value(set, *compact, n, kind);
        if (std::abs(after - before) <= 1e-8 * std::max(1.0, std::abs(before))) {
          result.design = std::move(*compact);
          report.compressed = true;
        }
      }
    }
  }

  const VarianceFunction<double> D(result.design.moments(2 * n), n, gens);
  report.bound = D.bound();
  report.objective = objective_value(set, result.design, n, kind);
  report.gap = (D.on_points(current.points).array() - report.bound).maxCoeff();
  report.support_residual = (D.on_points(result.design.atoms).array() - report.bound).abs().maxCoeff();
  result.report = report;
  return result;
}

namespace {

GapReport gap_on(const VarianceFunction<double>& D, const Eigen::MatrixXd& audit, const Eigen::MatrixXd* atoms) {
  GapReport out;
  out.bound = D.bound();
  out.audit_points = static_cast<int>(audit.cols());
  out.gap = (D.on_points(audit).array() - out.bound).maxCoeff();
  if (atoms != nullptr && atoms->cols() > 0) {
    const Eigen::ArrayXd at = D.on_points(*atoms).array() - out.bound;
    out.gap = std::max(out.gap, at.maxCoeff());
    out.support_residual = at.abs().maxCoeff();
  }
  return out;
}

Eigen::MatrixXd audit_grid(const SemiAlgebraicSet& set) {
  GridOptions opts;
  opts.density = 2;
  opts.seed = 0x5eed;
  return default_grid(set, opts).points;
}

}  // namespace

GapReport equivalence_gap(const SemiAlgebraicSet& set, const DesignMeasure& design, int n, ObjectiveKind kind) {
  const VarianceFunction<double> D(design.moments(2 * n), n, objective_generators(set, n, kind));
  return gap_on(D, audit_grid(set), &design.atoms);
}

GapReport equivalence_gap(const SemiAlgebraicSet& set, const MomentVector<double>& phi, int n, ObjectiveKind kind) {
  const VarianceFunction<double> D(phi, n, objective_generators(set, n, kind));
  return gap_on(D, audit_grid(set), nullptr);
}

}  // namespace eqdesign
