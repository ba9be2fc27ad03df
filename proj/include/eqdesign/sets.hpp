#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "eqdesign/basis.hpp"

namespace eqdesign {

enum class SetKind { interval, ball, box, simplex, custom };

std::string_view to_string(SetKind kind);
/// Parses "interval", "ball", "box" or "simplex".
SetKind parse_set_kind(std::string_view name);

/// S = {x : g_j(x) >= 0, j = 1..m}. The constant generator g_0 = 1 is implicit.
class SemiAlgebraicSet {
 public:
  static SemiAlgebraicSet interval();
  static SemiAlgebraicSet ball(int d);
  static SemiAlgebraicSet box(int d);
  static SemiAlgebraicSet simplex(int d);
  /// `bounds` is a d x 2 matrix of [lower, upper] per coordinate, used for sampling.
  static SemiAlgebraicSet custom(int d, std::vector<Polynomial> generators, Eigen::MatrixX2d bounds,
                                 std::string name = "custom");

  /// Builtin set of the given kind; `d` is ignored for the interval.
  static SemiAlgebraicSet builtin(SetKind kind, int d);

  int dim() const { return dim_; }
  SetKind kind() const { return kind_; }
  bool is_builtin() const { return kind_ != SetKind::custom; }
  const std::string& name() const { return name_; }
  const std::vector<Polynomial>& generators() const { return generators_; }
  /// Per-coordinate [lower, upper] bounding box.
  const Eigen::MatrixX2d& bounds() const { return bounds_; }

  /// {1, g_1, ..., g_m}: the set's own description, used by the general-set objective.
  std::vector<Polynomial> description() const;

  /// Smallest generator value at x (+inf when there are no generators).
  double min_generator(const Point& x) const;
  bool contains(const Point& x, double tol = 1e-9) const { return min_generator(x) >= -tol; }

  /// Maps x into S: clamping for boxes, radial scaling for the ball, Euclidean
  /// projection for the simplex. Custom sets are returned unchanged.
  Point project(const Point& x) const;

  /// Appends M - ||x||^2 to the generator list.
  void add_ball_constraint(double radius_squared);
  /// True when some generator is quadratic with leading form -c ||x||^2, c > 0.
  bool has_ball_constraint() const;

 private:
  SemiAlgebraicSet(int d, SetKind kind, std::vector<Polynomial> generators, Eigen::MatrixX2d bounds,
                   std::string name);

  int dim_;
  SetKind kind_;
  std::vector<Polynomial> generators_;
  Eigen::MatrixX2d bounds_;
  std::string name_;
};

/// Euclidean projection onto {x >= 0, sum x <= 1}.
Point project_to_simplex(const Point& x);

}  // namespace eqdesign
