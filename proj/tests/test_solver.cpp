#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "doctest.h"
#include "eqdesign/solver.hpp"

using namespace eqdesign;

namespace {

DesignMeasure make_design(std::initializer_list<double> xs, std::initializer_list<double> ws) {
  DesignMeasure d;
  d.atoms = Eigen::RowVectorXd::Map(std::data(xs), static_cast<Eigen::Index>(xs.size()));
  d.weights = Eigen::VectorXd::Map(std::data(ws), static_cast<Eigen::Index>(ws.size()));
  return d;
}

DesignMeasure from_rule(const CubatureRule& r) { return {r.atoms, r.weights}; }

void check_design_invariants(const SemiAlgebraicSet& set, const DesignMeasure& d) {
  CHECK(std::abs(d.weights.sum() - 1.0) <= 1e-12);
  CHECK(d.weights.minCoeff() > 0.0);
  for (int i = 0; i < d.size(); ++i) CHECK(set.min_generator(d.atoms.col(i)) >= -1e-9);
}

}  // namespace

TEST_CASE("objective values") {
  const auto interval = SemiAlgebraicSet::interval();
  const auto gc1 = from_rule(gauss_chebyshev(1));
  CHECK(objective_value(interval, gc1, 1, ObjectiveKind::classical) == doctest::Approx(-std::log(2.0)));
  // Arcsine moments to degree 2: blocks M_1 = diag(1, 1/2) and M_0(g phi) = [1/2].
  CHECK(objective_value(interval, gc1, 1, ObjectiveKind::variant) == doctest::Approx(-2.0 * std::log(2.0)));

  // Fewer atoms than s_2 = 3: -infinity with a diagnostic, no exception.
  const auto two = make_design({-0.5, 0.5}, {0.5, 0.5});
  const auto eval = evaluate_objective(interval, two, 2, ObjectiveKind::classical);
  CHECK(eval.value == -std::numeric_limits<double>::infinity());
  REQUIRE(eval.diagnostic.has_value());
  CHECK(eval.diagnostic->find("generator 1") != std::string::npos);

  // Mass at the endpoints only: the localizing block of 1 - x^2 is zero.
  const auto ends = make_design({-1.0, 0.0, 1.0}, {0.25, 0.5, 0.25});
  CHECK(std::isfinite(objective_value(interval, ends, 1, ObjectiveKind::classical)));
  CHECK(evaluate_objective(interval, make_design({-1.0, 1.0}, {0.5, 0.5}), 1, ObjectiveKind::variant)
            .diagnostic->find("1 - x1^2") != std::string::npos);
}

TEST_CASE("objective generators") {
  CHECK(objective_generators(SemiAlgebraicSet::ball(2), 2, ObjectiveKind::classical).size() == 1);
  CHECK(objective_generators(SemiAlgebraicSet::box(2), 2, ObjectiveKind::variant).size() == 4);
  const auto custom = SemiAlgebraicSet::custom(2, SemiAlgebraicSet::simplex(2).generators(),
                                               SemiAlgebraicSet::simplex(2).bounds(), "triangle");
  const auto gens = objective_generators(custom, 2, ObjectiveKind::variant);
  REQUIRE(gens.size() == 4);
  CHECK(gens[3].poly.to_string() == SemiAlgebraicSet::simplex(2).generators()[2].to_string());
  CHECK(parse_objective_kind("classic") == ObjectiveKind::classical);
  CHECK_THROWS_AS(parse_objective_kind("A-optimal"), ValidationError);
}

TEST_CASE("classical interval n=2 gives the three-point design") {
  const auto set = SemiAlgebraicSet::interval();
  const auto res = solve_design(set, 2, ObjectiveKind::classical);
  check_design_invariants(set, res.design);
  REQUIRE(res.design.size() == 3);
  const double expected[] = {-1.0, 0.0, 1.0};
  for (int i = 0; i < 3; ++i) {
    CHECK(res.design.atoms(0, i) == doctest::Approx(expected[i]).epsilon(1e-6));
    CHECK(res.design.weights(i) == doctest::Approx(1.0 / 3).epsilon(1e-6));
  }
  // det M_2 for {-1,0,1} with equal weights is 4/27.
  CHECK(res.report.objective == doctest::Approx(std::log(4.0 / 27.0)).epsilon(1e-9));
  CHECK(res.report.converged);
  CHECK(res.report.monotonicity_fallbacks == 0);
  CHECK(res.report.gap >= -1e-9);
  CHECK(res.report.gap <= 1e-6 * 3);
}

TEST_CASE("variant interval n=8 is supported on the zeros of T_9") {
  const auto set = SemiAlgebraicSet::interval();
  const auto res = solve_design(set, 8, ObjectiveKind::variant);
  REQUIRE(res.design.size() == 9);
  for (int i = 1; i <= 9; ++i) {
    const double node = std::cos((2.0 * i - 1.0) * std::numbers::pi / 18.0);
    CHECK(std::abs(res.design.atoms(0, 9 - i) - node) <= 1e-3);
    CHECK(std::abs(res.design.weights(9 - i) - 1.0 / 9) <= 1e-3);
  }
  CHECK(res.report.compressed);
  CHECK(res.report.block_dims == std::vector<int>{9, 8});
}

TEST_CASE("disk moments for both objectives") {
  const auto ball = SemiAlgebraicSet::ball(2);
  const auto variant = solve_design(ball, 2, ObjectiveKind::variant);
  check_design_invariants(ball, variant.design);
  const auto mv = variant.design.moments(4);
  CHECK(std::abs(mv[MultiIndex{0, 0}] - 1.0) <= 1e-12);
  CHECK(std::abs(mv[MultiIndex{2, 0}] - 1.0 / 3) <= 1e-3);
  CHECK(std::abs(mv[MultiIndex{0, 2}] - 1.0 / 3) <= 1e-3);
  CHECK(std::abs(mv[MultiIndex{4, 0}] - 1.0 / 5) <= 1e-3);
  CHECK(std::abs(mv[MultiIndex{2, 2}] - 1.0 / 15) <= 1e-3);
  CHECK(variant.report.block_dims == std::vector<int>{6, 3});
  CHECK(variant.report.bound == 9.0);

  const auto classical = solve_design(ball, 2, ObjectiveKind::classical);
  check_design_invariants(ball, classical.design);
  const auto mc = classical.design.moments(4);
  CHECK(std::abs(mc[MultiIndex{2, 0}] - 0.4167) <= 2e-3);
  CHECK(std::abs(mc[MultiIndex{0, 4}] - 0.3125) <= 2e-3);
  CHECK(std::abs(mc[MultiIndex{2, 2}] - 0.1042) <= 2e-3);
  CHECK(classical.report.converged);
}

TEST_CASE("variant optimum reproduces the equilibrium moments") {
  for (auto kind : {SetKind::box, SetKind::simplex}) {
    const auto set = SemiAlgebraicSet::builtin(kind, 2);
    const auto res = solve_design(set, 2, ObjectiveKind::variant);
    const auto target = equilibrium_moments(set, 4);
    const auto got = res.design.moments(4);
    INFO(to_string(kind));
    CHECK((got.values() - target.values()).cwiseAbs().maxCoeff() <= 1e-3);
    CHECK(res.report.converged);
  }
}

TEST_CASE("equivalence gap") {
  const auto interval = SemiAlgebraicSet::interval();
  const auto optimum = make_design({-1.0, 0.0, 1.0}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  const auto g = equivalence_gap(interval, optimum, 2, ObjectiveKind::classical);
  CHECK(g.gap <= 1e-9);
  CHECK(g.support_residual <= 1e-9);
  CHECK(g.bound == 3.0);

  const auto equispaced = make_design({-1.0, -0.5, 0.0, 0.5, 1.0}, {0.2, 0.2, 0.2, 0.2, 0.2});
  CHECK(equivalence_gap(interval, equispaced, 2, ObjectiveKind::classical).gap > 0.1 * 3);

  // Pell identity: D is constant, so the gap vanishes everywhere.
  const auto ball = SemiAlgebraicSet::ball(2);
  const auto phi = equilibrium_moments(ball, 4);
  CHECK(std::abs(equivalence_gap(ball, phi, 2, ObjectiveKind::variant).gap) <= 1e-9);
}

TEST_CASE("grid refinement") {
  const auto interval = SemiAlgebraicSet::interval();
  const auto coarse = gauss_chebyshev(10);
  CandidateGrid grid{coarse.atoms, GridProvenance::user};
  const auto refined = refine_grid(interval, from_rule(coarse), 2, ObjectiveKind::classical, grid);
  CHECK(refined.provenance == GridProvenance::refined);
  CHECK(refined.points.leftCols(11) == grid.points);
  double near_minus = 1.0, near_plus = 1.0;
  for (int i = 11; i < refined.size(); ++i) {
    near_minus = std::min(near_minus, std::abs(refined.points(0, i) + 1.0));
    near_plus = std::min(near_plus, std::abs(refined.points(0, i) - 1.0));
  }
  CHECK(near_minus <= 1e-6);
  CHECK(near_plus <= 1e-6);

  // Random disk design: maximizers of D both inside and on the boundary.
  const auto ball = SemiAlgebraicSet::ball(2);
  const auto ball_grid = default_grid(ball);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  DesignMeasure random_design;
  random_design.atoms.resize(2, 40);
  for (int i = 0; i < 40; ++i) random_design.atoms.col(i) = ball.project(0.7 * Point(Eigen::Vector2d(unif(rng), unif(rng))));
  random_design.weights = Eigen::VectorXd::Constant(40, 1.0 / 40);
  const auto mixed = refine_grid(ball, random_design, 2, ObjectiveKind::variant, ball_grid);
  int interior = 0, boundary = 0;
  for (int i = ball_grid.size(); i < mixed.size(); ++i) {
    const double r = mixed.points.col(i).norm();
    CHECK(r <= 1.0 + 1e-9);
    (r < 1.0 - 1e-6 ? interior : boundary)++;
  }
  CHECK(interior > 0);
  CHECK(boundary > 0);

  // Constant D: nothing to refine.
  const auto flat = refine_grid(interval, from_rule(gauss_chebyshev(2)), 2, ObjectiveKind::variant, grid);
  CHECK(flat.points == grid.points);
}

TEST_CASE("solutions do not depend on grid order") {
  const auto set = SemiAlgebraicSet::simplex(2);
  const auto grid = default_grid(set);
  CandidateGrid reversed{grid.points.rowwise().reverse(), GridProvenance::user};
  const auto a = solve_design(set, 3, ObjectiveKind::classical, grid);
  const auto b = solve_design(set, 3, ObjectiveKind::classical, reversed);
  CHECK(std::abs(a.report.objective - b.report.objective) <= 1e-12);
  CHECK(std::abs(a.report.gap - b.report.gap) <= 1e-12);

  std::mt19937 rng(5);
  DesignMeasure d = a.design;
  std::vector<int> perm(static_cast<std::size_t>(d.size()));
  for (int i = 0; i < d.size(); ++i) perm[static_cast<std::size_t>(i)] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  DesignMeasure p = d;
  for (int i = 0; i < d.size(); ++i) {
    p.atoms.col(i) = d.atoms.col(perm[static_cast<std::size_t>(i)]);
    p.weights(i) = d.weights(perm[static_cast<std::size_t>(i)]);
  }
  CHECK(std::abs(objective_value(set, d, 3, ObjectiveKind::classical) -
                 objective_value(set, p, 3, ObjectiveKind::classical)) <= 1e-12);
}

TEST_CASE("Gauss compression keeps moments to degree 2n+1") {
  const auto d = make_design({-1.0, -0.4, 0.1, 0.5, 0.9}, {0.1, 0.3, 0.2, 0.25, 0.15});
  const auto c = gauss_compress(d, 2);
  REQUIRE(c.has_value());
  CHECK(c->size() == 3);
  CHECK((c->moments(5).values() - d.moments(5).values()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK_FALSE(gauss_compress(d, 5).has_value());
}

TEST_CASE("singular start restarts on a larger grid; bad grids are rejected") {
  const auto set = SemiAlgebraicSet::interval();
  CandidateGrid tiny{Eigen::RowVector2d(-0.5, 0.5), GridProvenance::user};
  const auto res = solve_design(set, 2, ObjectiveKind::classical, tiny);
  CHECK(res.report.grid_size > 2);
  CHECK(res.report.converged);

  CandidateGrid outside{Eigen::RowVector2d(0.0, 1.5), GridProvenance::user};
  CHECK_THROWS_AS(solve_design(set, 1, ObjectiveKind::classical, outside), ValidationError);
}

TEST_CASE("custom set with simplex generators") {
  const auto simplex = SemiAlgebraicSet::simplex(2);
  const auto custom = SemiAlgebraicSet::custom(2, simplex.generators(), simplex.bounds(), "triangle");
  const auto grid = default_grid(custom, GridOptions{1, 2000, 7});
  CHECK(grid.size() > 1000);
  for (int i = 0; i < grid.size(); ++i) CHECK(custom.contains(grid.points.col(i)));
  const auto res = solve_design(custom, 2, ObjectiveKind::variant, grid);
  CHECK(res.report.block_dims == std::vector<int>{6, 3, 3, 3});
  CHECK(std::isfinite(res.report.objective));
  check_design_invariants(custom, res.design);

  const auto empty = SemiAlgebraicSet::custom(1, {Polynomial::constant(1, -1.0)},
                                              (Eigen::MatrixX2d(1, 2) << -1.0, 1.0).finished());
  CHECK_THROWS_AS(default_grid(empty), ValidationError);
}
