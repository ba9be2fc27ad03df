#include "eqdesign/sets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace eqdesign {

std::string_view to_string(SetKind kind) {
  switch (kind) {
    case SetKind::interval: return "interval";
    case SetKind::ball: return "ball";
    case SetKind::box: return "box";
    case SetKind::simplex: return "simplex";
    case SetKind::custom: return "custom";
  }
  return "unknown";
}

SetKind parse_set_kind(std::string_view name) {
  if (name == "interval") return SetKind::interval;
  if (name == "ball") return SetKind::ball;
  if (name == "box") return SetKind::box;
  if (name == "simplex") return SetKind::simplex;
  throw ValidationError("unknown set kind '" + std::string(name) + "'");
}

SemiAlgebraicSet::SemiAlgebraicSet(int d, SetKind kind, std::vector<Polynomial> generators,
                                   Eigen::MatrixX2d bounds, std::string name)
    : dim_(d), kind_(kind), generators_(std::move(generators)), bounds_(std::move(bounds)),
      name_(std::move(name)) {
  if (d < 1) throw ValidationError("invalid dimension " + std::to_string(d) + ": must be >= 1");
  if (bounds_.rows() != d) throw ValidationError("bounding box must have one row per coordinate");
  for (const auto& g : generators_) {
    if (g.dim() != d) throw ValidationError("generator dimension does not match set dimension");
  }
}

namespace {

Polynomial one_minus_square(int d, int j) {
  Polynomial g = Polynomial::constant(d, 1.0);
  g.add_term(MultiIndex::unit(d, j) + MultiIndex::unit(d, j), -1.0);
  return g;
}

Eigen::MatrixX2d symmetric_bounds(int d) {
  Eigen::MatrixX2d b(d, 2);
  b.col(0).setConstant(-1.0);
  b.col(1).setConstant(1.0);
  return b;
}

}  // namespace

SemiAlgebraicSet SemiAlgebraicSet::interval() {
  return SemiAlgebraicSet(1, SetKind::interval, {one_minus_square(1, 0)}, symmetric_bounds(1),
                          "interval");
}

SemiAlgebraicSet SemiAlgebraicSet::ball(int d) {
  if (d < 1) throw ValidationError("invalid dimension " + std::to_string(d) + ": must be >= 1");
  Polynomial g = Polynomial::constant(d, 1.0);
  for (int j = 0; j < d; ++j) g.add_term(MultiIndex::unit(d, j) + MultiIndex::unit(d, j), -1.0);
  return SemiAlgebraicSet(d, SetKind::ball, {g}, symmetric_bounds(d), "ball");
}

SemiAlgebraicSet SemiAlgebraicSet::box(int d) {
  if (d < 1) throw ValidationError("invalid dimension " + std::to_string(d) + ": must be >= 1");
  std::vector<Polynomial> gens;
  for (int j = 0; j < d; ++j) gens.push_back(one_minus_square(d, j));
  return SemiAlgebraicSet(d, SetKind::box, std::move(gens), symmetric_bounds(d), "box");
}

SemiAlgebraicSet SemiAlgebraicSet::simplex(int d) {
  if (d < 1) throw ValidationError("invalid dimension " + std::to_string(d) + ": must be >= 1");
  std::vector<Polynomial> gens;
  Polynomial last = Polynomial::constant(d, 1.0);
  for (int j = 0; j < d; ++j) {
    gens.push_back(Polynomial::variable(d, j));
    last = last - Polynomial::variable(d, j);
  }
  gens.push_back(last);
  Eigen::MatrixX2d b(d, 2);
  b.col(0).setZero();
  b.col(1).setOnes();
  return SemiAlgebraicSet(d, SetKind::simplex, std::move(gens), b, "simplex");
}

SemiAlgebraicSet SemiAlgebraicSet::custom(int d, std::vector<Polynomial> generators,
                                          Eigen::MatrixX2d bounds, std::string name) {
  if (generators.empty()) throw ValidationError("a custom set needs at least one generator");
  for (Eigen::Index i = 0; i < bounds.rows(); ++i) {
    if (!(bounds(i, 0) < bounds(i, 1))) throw ValidationError("bounding box has an empty side");
  }
  return SemiAlgebraicSet(d, SetKind::custom, std::move(generators), std::move(bounds),
                          std::move(name));
}

SemiAlgebraicSet SemiAlgebraicSet::builtin(SetKind kind, int d) {
  switch (kind) {
    case SetKind::interval: return interval();
    case SetKind::ball: return ball(d);
    case SetKind::box: return box(d);
    case SetKind::simplex: return simplex(d);
    case SetKind::custom: break;
  }
  throw ValidationError("custom sets must be loaded from a file");
}

std::vector<Polynomial> SemiAlgebraicSet::description() const {
  std::vector<Polynomial> out{Polynomial::constant(dim_, 1.0)};
  out.insert(out.end(), generators_.begin(), generators_.end());
  return out;
}

double SemiAlgebraicSet::min_generator(const Point& x) const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& g : generators_) m = std::min(m, g.eval(x));
  return m;
}

Point project_to_simplex(const Point& x) {
  Point y = x.cwiseMax(0.0);
  if (y.sum() <= 1.0) return y;
  // Projection onto the face sum = 1 (sort-and-threshold).
  std::vector<double> u(x.data(), x.data() + x.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cumsum += u[k];
    const double t = (cumsum - 1.0) / static_cast<double>(k + 1);
    if (u[k] - t > 0) theta = t;
  }
  return (x.array() - theta).cwiseMax(0.0).matrix();
}

Point SemiAlgebraicSet::project(const Point& x) const {
  switch (kind_) {
    case SetKind::interval:
    case SetKind::box: return x.cwiseMax(-1.0).cwiseMin(1.0);
    case SetKind::ball: {
      const double r = x.norm();
      return r > 1.0 ? Point(x / r) : x;
    }
    case SetKind::simplex: return project_to_simplex(x);
    case SetKind::custom: break;
  }
  return x;
}

void SemiAlgebraicSet::add_ball_constraint(double radius_squared) {
  Polynomial g = Polynomial::constant(dim_, radius_squared);
  for (int j = 0; j < dim_; ++j) g.add_term(MultiIndex::unit(dim_, j) + MultiIndex::unit(dim_, j), -1.0);
  generators_.push_back(std::move(g));
}

bool SemiAlgebraicSet::has_ball_constraint() const {
  for (const auto& g : generators_) {
    if (g.degree() != 2) continue;
    const double c = -g.coefficient(MultiIndex::unit(dim_, 0) + MultiIndex::unit(dim_, 0));
    if (c <= 0) continue;
    bool match = true;
    for (const auto& [alpha, coef] : g.terms()) {
      if (alpha.degree() != 2) continue;
      const bool square = std::find(alpha.exponents().begin(), alpha.exponents().end(), 2) !=
                          alpha.exponents().end();
      if (!square || std::abs(coef + c) > 1e-12 * c) match = false;
    }
    int squares = 0;
    for (const auto& [alpha, coef] : g.terms()) squares += alpha.degree() == 2 ? 1 : 0;
    if (match && squares == dim_) return true;
  }
  return false;
}

}  // namespace eqdesign
