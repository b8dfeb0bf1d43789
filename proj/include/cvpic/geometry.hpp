#pragma once

#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cvpic {

// Small fixed-capacity (≤ 3) dynamic vectors/matrices: no heap traffic in hot loops.
using Point = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;
using SmallMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

class SingularJacobianError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OutOfDomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class BoundaryKind { wall, periodic };

struct AxisBounds {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  BoundaryKind kind = BoundaryKind::wall;
};

// An orthogonal map F: y -> x with analytic Jacobian (D_F)_ij = dx_i/dy_j.
// Immutable after construction.
class CoordinateChart {
 public:
  using MapFn = std::function<Point(const Point&)>;
  using JacobianFn = std::function<SmallMatrix(const Point&)>;

  CoordinateChart(std::string name, int dim, MapFn forward, JacobianFn jacobian,
                  std::vector<AxisBounds> box, MapFn inverse = {});

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  const std::vector<AxisBounds>& domain_box() const { return box_; }

  Point forward(const Point& y) const { return forward_(y); }
  SmallMatrix jacobian_matrix(const Point& y) const { return jacobian_(y); }
  double jacobian_determinant(const Point& y) const { return jacobian_(y).determinant(); }

  // Cartesian -> curvilinear; only charts built with an inverse support this.
  bool has_inverse() const { return static_cast<bool>(inverse_); }
  Point inverse(const Point& x) const;

  // Walls are open intervals, periodic axes accept any value.
  bool contains(const Point& y) const;
  // Reduces periodic coordinates into [lo, hi).
  Point wrap(Point y) const;

  // 2D conveniences used by the pushers.
  Vec2 forward2(const Vec2& y) const;
  Mat2 jacobian2(const Vec2& y) const;

 private:
  std::string name_;
  int dim_;
  MapFn forward_;
  JacobianFn jacobian_;
  MapFn inverse_;
  std::vector<AxisBounds> box_;
};

/// x1 = r cos(theta), x2 = r sin(theta) on (r_min, r_max) x [0, 2pi).
CoordinateChart chart_polar(double r_min = 0.0,
                            double r_max = std::numeric_limits<double>::infinity());
/// (r, theta, z) with Lame coefficients (1, r, 1).
CoordinateChart chart_cylindrical(double r_min = 0.0,
                                  double r_max = std::numeric_limits<double>::infinity());
CoordinateChart chart_identity(int dim);

// Singularity threshold on |det D_F| used by every inversion below.
inline constexpr double kSingularDeterminant = 1e-14;

/// N(y) = D_F(y)^{-T}.
SmallMatrix n_matrix(const CoordinateChart& chart, const Point& y);
Mat2 n_matrix2(const CoordinateChart& chart, const Vec2& y);

/// h_i = |dx/dy_i|, the norms of the covariant basis vectors.
Point lame_coefficients(const CoordinateChart& chart, const Point& y);

enum class FormKind { zero_form, one_form, two_form, three_form };
enum class Direction { to_cartesian, to_curvilinear };

// Pullback/pushforward of differential forms between y and x components.
//   0-form: g(x) = g~(y)
//   1-form: E = N E~
//   2-form: B = D_F B~ / J   (in 2D the 2-form is the scalar out-of-plane component: b = b~ / J)
//   3-form: h = h~ / J       (3D charts only)
Point transform_form(const CoordinateChart& chart, FormKind kind, const Point& value,
                     const Point& y, Direction direction);

/// Per-axis coefficients H_j H_k / H_i of the Laplace-Beltrami operator (H_3 = 1 in 2D).
Point laplace_beltrami_coeffs(const CoordinateChart& chart, const Point& y);

/// K = [[0, 1], [-1, 0]].
Mat2 rotation_generator();

/// Cross-product matrix: hat(B) v = v x B.
Eigen::Matrix3d hat_matrix(const Eigen::Vector3d& b);

inline Point to_point(const Vec2& v) {
  Point p(2);
  p << v(0), v(1);
  return p;
}

}  // namespace cvpic
