#include "eqdesign/equilibrium.hpp"

#include <bit>
#include <cmath>
#include <numbers>

namespace eqdesign {

std::vector<Generator> as_generators(const std::vector<Polynomial>& polys) {
  std::vector<Generator> out;
  out.reserve(polys.size());
  for (const auto& p : polys) out.push_back({p, p.half_degree()});
  return out;
}

std::vector<Generator> generator_set(SetKind kind, int d, int n) {
  if (n < 0) throw ValidationError("degree must be >= 0");
  if (kind == SetKind::interval) d = 1;
  if (d < 1) throw ValidationError("invalid dimension " + std::to_string(d) + ": must be >= 1");

  std::vector<Polynomial> factors;
  switch (kind) {
    case SetKind::ball: {
      std::vector<Generator> out;
      for (auto& g : as_generators(SemiAlgebraicSet::ball(d).description())) {
        if (n - g.half_degree >= 0) out.push_back(std::move(g));
      }
      return out;
    }
    case SetKind::interval:
    case SetKind::box:
      factors = SemiAlgebraicSet::box(d).generators();
      break;
    case SetKind::simplex:
      factors = SemiAlgebraicSet::simplex(d).generators();
      break;
    case SetKind::custom:
      throw ValidationError("generator families are defined for builtin sets only");
  }

  const int count = static_cast<int>(factors.size());
  std::vector<Generator> out;
  // Subsets ordered by size, then by mask, so that 1 comes first.
  for (int size = 0; size <= count; ++size) {
    if (kind == SetKind::simplex && size % 2) continue;
    for (unsigned mask = 0; mask < (1u << count); ++mask) {
      if (std::popcount(mask) != size) continue;
      Polynomial g = Polynomial::constant(d, 1.0);
      for (int j = 0; j < count; ++j) {
        if (mask & (1u << j)) g = g * factors[static_cast<std::size_t>(j)];
      }
      const int half = g.half_degree();
      if (n - half < 0) continue;
      out.push_back({std::move(g), half});
    }
  }
  return out;
}

std::int64_t block_dimension_sum(int d, int n, const std::vector<Generator>& gens) {
  std::int64_t total = 0;
  for (const auto& g : gens) {
    if (n - g.half_degree >= 0) total += dim_poly(d, n - g.half_degree);
  }
  return total;
}

double CubatureRule::integrate(const Polynomial& f) const {
  double acc = 0.0;
  for (int i = 0; i < size(); ++i) acc += weights(i) * f.eval(Point(atoms.col(i)));
  return acc;
}

double max_moment_residual(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& weights,
                           const MomentVector<double>& target, int degree) {
  const auto m = moments_of_atoms<double>(atoms, weights, degree);
  const int s = m.size();
  return (m.values() - target.values().head(s)).cwiseAbs().maxCoeff();
}

CubatureRule gauss_chebyshev(int n) {
  if (n < 0) throw ValidationError("degree must be >= 0");
  CubatureRule rule;
  rule.atoms.resize(1, n + 1);
  for (int i = 1; i <= n + 1; ++i) {
    rule.atoms(0, i - 1) = std::cos((2.0 * i - 1.0) * std::numbers::pi / (2.0 * (n + 1)));
  }
  // cos(pi/2) is not exactly zero in floating point.
  if (n % 2 == 0) rule.atoms(0, n / 2) = 0.0;
  rule.weights = Eigen::VectorXd::Constant(n + 1, 1.0 / (n + 1));
  rule.exact_degree = 2 * n + 1;
  return rule;
}

CubatureRule tensor_chebyshev(int d, int n) {
  if (d < 1) throw ValidationError("invalid dimension " + std::to_string(d) + ": must be >= 1");
  const auto base = gauss_chebyshev(n);
  const double count = std::pow(static_cast<double>(n + 1), d);
  if (count > 1e7) {
    throw ValidationError("tensor Chebyshev grid would have " + std::to_string(count) +
                          " atoms (limit 1e7)");
  }
  const int total = static_cast<int>(count);
  CubatureRule rule;
  rule.atoms.resize(d, total);
  rule.weights = Eigen::VectorXd::Constant(total, 1.0 / count);
  for (int j = 0; j < total; ++j) {
    int rem = j;
    for (int i = 0; i < d; ++i) {
      rule.atoms(i, j) = base.atoms(0, rem % (n + 1));
      rem /= n + 1;
    }
  }
  rule.exact_degree = d == 1 ? 2 * n + 1 : 2 * n;
  return rule;
}

}  // namespace eqdesign
