#include <random>

#include "doctest.h"
#include "eqdesign/basis.hpp"

using namespace eqdesign;

TEST_CASE("multi_indices enumerates in graded-lex order") {
  const auto two = multi_indices(2, 1);
  REQUIRE(two.size() == 3);
  CHECK(two[0] == MultiIndex{0, 0});
  CHECK(two[1] == MultiIndex{1, 0});
  CHECK(two[2] == MultiIndex{0, 1});

  const auto uni = multi_indices(1, 3);
  REQUIRE(uni.size() == 4);
  for (int k = 0; k < 4; ++k) CHECK(uni[static_cast<std::size_t>(k)] == MultiIndex{k});

  CHECK(multi_indices(3, 2).size() == 10);
  CHECK_THROWS_AS(multi_indices(0, 2), ValidationError);
}

TEST_CASE("dim_poly") {
  CHECK(dim_poly(2, 2) == 6);
  CHECK(dim_poly(1, 8) == 9);
  CHECK(dim_poly(3, 4) == 35);
  CHECK_THROWS_AS(dim_poly(40, 1000), std::overflow_error);
  CHECK_THROWS_AS(dim_poly(0, 1), ValidationError);
}

TEST_CASE("enumeration is sorted, complete and prefix-stable") {
  for (int d = 1; d <= 4; ++d) {
    for (int n = 0; n <= 8; ++n) {
      const auto idx = multi_indices(d, n);
      REQUIRE(static_cast<std::int64_t>(idx.size()) == dim_poly(d, n));
      for (std::size_t i = 1; i < idx.size(); ++i) CHECK(idx[i - 1] < idx[i]);
      for (std::size_t i = 0; i < idx.size(); ++i) {
        CHECK(graded_lex_rank(idx[i]) == static_cast<std::int64_t>(i));
      }
      const auto next = multi_indices(d, n + 1);
      CHECK(std::equal(idx.begin(), idx.end(), next.begin()));
    }
  }
}

TEST_CASE("monomial_vector") {
  Eigen::VectorXd x(1);
  x << 2.0;
  CHECK(monomial_vector(x, 2) == Eigen::Vector3d(1, 2, 4));

  CHECK(monomial_vector(Eigen::Vector2d(0, 0), 2) == (Eigen::VectorXd(6) << 1, 0, 0, 0, 0, 0).finished());
  CHECK(monomial_vector(Eigen::Vector2d(1, 1), 5).isOnes());

  const Eigen::Vector3d y(0.3, -1.2, 2.0);
  const auto v4 = monomial_vector(y, 4);
  const auto v3 = monomial_vector(y, 3);
  CHECK(v4.head(v3.size()) == v3);
  // Entry for x1 x2^2 x3.
  const int i = basis_for(3, 4)->index_of(MultiIndex{1, 2, 1});
  CHECK(v4(i) == doctest::Approx(0.3 * 1.44 * 2.0));

  CHECK_THROWS_AS(basis_for(2, 2)->evaluate<double>(y), ValidationError);
}

TEST_CASE("poly_eval") {
  Polynomial g = Polynomial::constant(1, 1.0);
  g.add_term(MultiIndex{2}, -1.0);
  CHECK(poly_eval(g, Eigen::VectorXd::Ones(1)) == 0.0);

  Polynomial disk = Polynomial::constant(2, 1.0);
  disk.add_term(MultiIndex{2, 0}, -1.0);
  disk.add_term(MultiIndex{0, 2}, -1.0);
  CHECK(poly_eval(disk, Eigen::Vector2d(0, 0)) == 1.0);

  const auto x1 = Polynomial::variable(2, 0);
  const auto x2 = Polynomial::variable(2, 1);
  const auto p = x1 * x2 * (Polynomial::constant(2, 1.0) - x1 - x2);
  CHECK(poly_eval(p, Eigen::Vector2d(1.0 / 3, 1.0 / 3)) == doctest::Approx(1.0 / 27).epsilon(1e-15));
  CHECK_THROWS_AS(poly_eval(p, Eigen::Vector3d(0, 0, 0)), ValidationError);
}

TEST_CASE("polynomial arithmetic keeps no zero terms") {
  const auto x = Polynomial::variable(2, 0);
  const auto diff = x - x;
  CHECK(diff.is_zero());
  CHECK(diff.degree() == 0);
  CHECK((x * x).degree() == 2);
  CHECK((x * x).half_degree() == 1);
  CHECK((x * x * x).half_degree() == 2);
}

TEST_CASE("product evaluation matches product of evaluations") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> unif(-1.5, 1.5);
  std::uniform_int_distribution<int> expo(0, 3);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 1 + trial % 3;
    auto random_poly = [&] {
      Polynomial p(d);
      for (int t = 0; t < 4; ++t) {
        std::vector<int> e(static_cast<std::size_t>(d));
        for (auto& v : e) v = expo(rng);
        p.add_term(MultiIndex(e), unif(rng));
      }
      return p;
    };
    const auto p = random_poly();
    const auto q = random_poly();
    Eigen::VectorXd x(d);
    for (int i = 0; i < d; ++i) x(i) = unif(rng);
    const double lhs = poly_eval(p * q, x);
    const double rhs = poly_eval(p, x) * poly_eval(q, x);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12).scale(1.0));
  }
}
