#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "eqdesign/cubature.hpp"
#include "eqdesign/solver.hpp"

using namespace eqdesign;

namespace {

// min ||A w - b|| over w >= 0 by enumerating supports: the optimum is the
// unconstrained least-squares solution on its own support.
double nnls_by_enumeration(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  const int n = static_cast<int>(A.cols());
  double best = b.norm();
  for (int mask = 1; mask < (1 << n); ++mask) {
    std::vector<int> cols;
    for (int j = 0; j < n; ++j) {
      if (mask & (1 << j)) cols.push_back(j);
    }
    Eigen::MatrixXd AP(A.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) AP.col(static_cast<Eigen::Index>(k)) = A.col(cols[k]);
    const Eigen::VectorXd s = AP.completeOrthogonalDecomposition().solve(b);
    if ((s.array() >= 0.0).all()) best = std::min(best, (AP * s - b).norm());
  }
  return best;
}

Eigen::MatrixXd sample_disk_uniform(std::mt19937& rng, int count) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::MatrixXd P(2, count);
  for (int i = 0; i < count;) {
    const Eigen::Vector2d x(unif(rng), unif(rng));
    if (x.squaredNorm() <= 1.0) P.col(i++) = x;
  }
  return P;
}

}  // namespace

TEST_CASE("nnls matches exhaustive support enumeration") {
  std::mt19937 rng(41);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 40; ++trial) {
    const int m = 3 + trial % 4, n = 2 + trial % 5;
    const Eigen::MatrixXd A = Eigen::MatrixXd::NullaryExpr(m, n, [&] { return normal(rng); });
    const Eigen::VectorXd b = Eigen::VectorXd::NullaryExpr(m, [&] { return normal(rng); });
    const Eigen::VectorXd x = nnls(A, b);
    CHECK(x.minCoeff() >= 0.0);
    CHECK((A * x - b).norm() == doctest::Approx(nnls_by_enumeration(A, b)).epsilon(1e-9));
  }
}

TEST_CASE("fit_weights examples") {
  const Eigen::RowVectorXd grid = Eigen::RowVectorXd::LinSpaced(5, -1.0, 1.0);
  const auto delta0 = moments_of_atoms<double>(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Ones(1), 4);
  const auto fit = fit_weights(grid, delta0, 4);
  CHECK(fit.weights(2) == doctest::Approx(1.0));
  CHECK(fit.weights.sum() == doctest::Approx(1.0));
  CHECK(fit.weights.cwiseAbs().maxCoeff() == doctest::Approx(1.0));
  CHECK(fit.residual <= 1e-12);

  const auto arcsine = equilibrium_moments(SemiAlgebraicSet::interval(), 16);
  for (int n = 1; n <= 6; ++n) {
    const auto zeros = gauss_chebyshev(n).atoms;
    const auto w = fit_weights(zeros, arcsine, 2 * n).weights;
    CHECK((w.array() - 1.0 / (n + 1)).abs().maxCoeff() <= 1e-10);
  }

  std::mt19937 rng(43);
  const auto disk = sample_disk_uniform(rng, 200);
  const auto ball = equilibrium_moments(SemiAlgebraicSet::ball(2), 4);
  const auto rfit = fit_weights(disk, ball, 4);
  CHECK(rfit.residual <= 1e-8);
  CHECK(rfit.weights.minCoeff() >= 0.0);

  // Three points cannot carry arcsine moments to degree 4 (that needs s_2 = 3
  // atoms at the T_3 zeros, which these are not).
  const Eigen::RowVector3d three(-1.0, 0.0, 1.0);
  CHECK_THROWS_AS(fit_weights(three, arcsine, 4), InfeasibleGrid);
}

TEST_CASE("Caratheodory pruning") {
  const Eigen::RowVector4d atoms(-1.0, -1.0 / 3, 1.0 / 3, 1.0);
  const Eigen::Vector4d w = Eigen::Vector4d::Constant(0.25);
  const auto pr = caratheodory_prune(atoms, w, 2);
  CHECK(pr.fully_pruned);
  REQUIRE(pr.weights.size() == 3);
  CHECK(pr.weights.minCoeff() > 0.0);
  const auto m = moments_of_atoms<double>(pr.atoms, pr.weights, 2);
  CHECK(m(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(m(1)) <= 1e-12);
  CHECK(m(2) == doctest::Approx(5.0 / 9).epsilon(1e-12));

  const auto gc = gauss_chebyshev(4);
  const auto same = caratheodory_prune(gc.atoms, gc.weights, 8);
  CHECK(same.atoms == gc.atoms);
  CHECK(same.weights == gc.weights);

  std::mt19937 rng(47);
  const auto cloud = sample_disk_uniform(rng, 300);
  std::uniform_real_distribution<double> unif(0.1, 1.0);
  Eigen::VectorXd cw = Eigen::VectorXd::NullaryExpr(300, [&] { return unif(rng); });
  cw /= cw.sum();
  const auto big = caratheodory_prune(cloud, cw, 4);
  CHECK(big.fully_pruned);
  CHECK(big.weights.size() <= 15);
  CHECK(big.weights.minCoeff() >= 0.0);
  const auto before = moments_of_atoms<double>(cloud, cw, 4);
  CHECK(max_moment_residual(big.atoms, big.weights, before, 4) <= 1e-9);
}

TEST_CASE("equilibrium cubature rules") {
  const auto interval = cubature_for_equilibrium(SemiAlgebraicSet::interval(), 2);
  CHECK(interval.size() == 3);
  CHECK(interval.atoms == gauss_chebyshev(2).atoms);

  const auto box = cubature_for_equilibrium(SemiAlgebraicSet::box(2), 2);
  CHECK(box.size() == 9);
  CHECK(box.weights.isApproxToConstant(1.0 / 9));

  for (auto kind : {SetKind::ball, SetKind::simplex}) {
    for (int n = 1; n <= 3; ++n) {
      const auto set = SemiAlgebraicSet::builtin(kind, 2);
      const auto rule = cubature_for_equilibrium(set, n);
      const auto target = equilibrium_moments(set, 2 * n);
      INFO(to_string(kind), " n=", n);
      CHECK(rule.exact_degree == 2 * n);
      CHECK(rule.size() <= dim_poly(2, 2 * n));
      CHECK(rule.size() >= dim_poly(2, n));
      CHECK(rule.weights.minCoeff() > 0.0);
      for (int i = 0; i < rule.size(); ++i) CHECK(set.min_generator(rule.atoms.col(i)) >= -1e-9);
      CHECK(max_moment_residual(rule.atoms, rule.weights, target, 2 * n) <= 1e-8);
      const auto M = moment_matrix(moments_of_atoms<double>(rule.atoms, rule.weights, 2 * n), n);
      CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(M).eigenvalues()(0) > 0.0);
      const DesignMeasure design{rule.atoms, rule.weights};
      CHECK(objective_value(set, design, n, ObjectiveKind::variant) ==
            doctest::Approx(objective_value(set, target, n, ObjectiveKind::variant)).epsilon(1e-6));
    }
  }
  const auto disk = cubature_for_equilibrium(SemiAlgebraicSet::ball(2), 2);
  const auto m = moments_of_atoms<double>(disk.atoms, disk.weights, 4);
  CHECK(std::abs(m[MultiIndex{2, 0}] - 1.0 / 3) <= 1e-8);
  CHECK(std::abs(m[MultiIndex{0, 4}] - 1.0 / 5) <= 1e-8);
  CHECK(std::abs(m[MultiIndex{2, 2}] - 1.0 / 15) <= 1e-8);

  const auto custom = SemiAlgebraicSet::custom(1, {Polynomial::variable(1, 0)},
                                               (Eigen::MatrixX2d(1, 2) << 0.0, 1.0).finished());
  CHECK_THROWS_AS(cubature_for_equilibrium(custom, 2), ValidationError);
}
