#include "cvpic/geometry.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <utility>

namespace cvpic {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_dim(const Point& p, int dim, const char* what) {
  if (p.size() != dim) {
    std::ostringstream os;
    os << what << ": expected dimension " << dim << ", got " << p.size();
    throw std::invalid_argument(os.str());
  }
}

double wrap_periodic(double value, double lo, double hi) {
  const double period = hi - lo;
  double t = std::fmod(value - lo, period);
  if (t < 0.0) t += period;
  // fmod of a value just below 0 can round up to exactly one period.
  if (t >= period) t = 0.0;
  return lo + t;
}

}  // namespace

CoordinateChart::CoordinateChart(std::string name, int dim, MapFn forward, JacobianFn jacobian,
                                 std::vector<AxisBounds> box, MapFn inverse)
    : name_(std::move(name)),
      dim_(dim),
      forward_(std::move(forward)),
      jacobian_(std::move(jacobian)),
      inverse_(std::move(inverse)),
      box_(std::move(box)) {
  if (dim_ != 2 && dim_ != 3) throw std::invalid_argument("chart dimension must be 2 or 3");
  if (static_cast<int>(box_.size()) != dim_)
    throw std::invalid_argument("chart domain box must have one interval per axis");
}

Point CoordinateChart::inverse(const Point& x) const {
  if (!inverse_) throw std::logic_error("chart '" + name_ + "' has no inverse map");
  return inverse_(x);
}

bool CoordinateChart::contains(const Point& y) const {
  if (y.size() != dim_) return false;
  for (int i = 0; i < dim_; ++i) {
    if (!std::isfinite(y(i))) return false;
    if (box_[i].kind == BoundaryKind::wall && !(y(i) > box_[i].lo && y(i) < box_[i].hi))
      return false;
  }
  return true;
}

Point CoordinateChart::wrap(Point y) const {
  for (int i = 0; i < dim_; ++i)
    if (box_[i].kind == BoundaryKind::periodic) y(i) = wrap_periodic(y(i), box_[i].lo, box_[i].hi);
  return y;
}

Vec2 CoordinateChart::forward2(const Vec2& y) const {
  const Point x = forward_(to_point(y));
  return {x(0), x(1)};
}

Mat2 CoordinateChart::jacobian2(const Vec2& y) const {
  const SmallMatrix d = jacobian_(to_point(y));
  Mat2 m;
  m << d(0, 0), d(0, 1), d(1, 0), d(1, 1);
  return m;
}

CoordinateChart chart_polar(double r_min, double r_max) {
  auto forward = [](const Point& y) {
    Point x(2);
    x << y(0) * std::cos(y(1)), y(0) * std::sin(y(1));
    return x;
  };
  auto jacobian = [](const Point& y) {
    const double c = std::cos(y(1)), s = std::sin(y(1)), r = y(0);
    SmallMatrix d(2, 2);
    d << c, -r * s,
         s, r * c;
    return d;
  };
  auto inverse = [](const Point& x) {
    Point y(2);
    y << std::hypot(x(0), x(1)), wrap_periodic(std::atan2(x(1), x(0)), 0.0, kTwoPi);
    return y;
  };
  return CoordinateChart("polar", 2, forward, jacobian,
                         {{r_min, r_max, BoundaryKind::wall}, {0.0, kTwoPi, BoundaryKind::periodic}},
                         inverse);
}

CoordinateChart chart_cylindrical(double r_min, double r_max) {
  auto forward = [](const Point& y) {
    Point x(3);
    x << y(0) * std::cos(y(1)), y(0) * std::sin(y(1)), y(2);
    return x;
  };
  auto jacobian = [](const Point& y) {
    const double c = std::cos(y(1)), s = std::sin(y(1)), r = y(0);
    SmallMatrix d(3, 3);
    d << c, -r * s, 0.0,
         s, r * c, 0.0,
         0.0, 0.0, 1.0;
    return d;
  };
  auto inverse = [](const Point& x) {
    Point y(3);
    y << std::hypot(x(0), x(1)), wrap_periodic(std::atan2(x(1), x(0)), 0.0, kTwoPi), x(2);
    return y;
  };
  return CoordinateChart("cylindrical", 3, forward, jacobian,
                         {{r_min, r_max, BoundaryKind::wall},
                          {0.0, kTwoPi, BoundaryKind::periodic},
                          {}},
                         inverse);
}

CoordinateChart chart_identity(int dim) {
  auto id = [](const Point& y) { return y; };
  auto jacobian = [dim](const Point&) { return SmallMatrix(SmallMatrix::Identity(dim, dim)); };
  return CoordinateChart("identity", dim, id, jacobian, std::vector<AxisBounds>(dim), id);
}

SmallMatrix n_matrix(const CoordinateChart& chart, const Point& y) {
  require_dim(y, chart.dim(), "n_matrix");
  const SmallMatrix d = chart.jacobian_matrix(y);
  const double det = d.determinant();
  if (!(std::abs(det) >= kSingularDeterminant)) {
    std::ostringstream os;
    os << "singular Jacobian in chart '" << chart.name() << "' (det = " << det << ")";
    throw SingularJacobianError(os.str());
  }
  return d.inverse().transpose();
}

Mat2 n_matrix2(const CoordinateChart& chart, const Vec2& y) {
  const Mat2 d = chart.jacobian2(y);
  const double det = d.determinant();
  if (!(std::abs(det) >= kSingularDeterminant)) {
    std::ostringstream os;
    os << "singular Jacobian in chart '" << chart.name() << "' (det = " << det << ")";
    throw SingularJacobianError(os.str());
  }
  // inverse-transpose of [[a, b], [c, d]] is [[d, -c], [-b, a]] / det
  Mat2 n;
  n << d(1, 1), -d(1, 0), -d(0, 1), d(0, 0);
  return n / det;
}

Point lame_coefficients(const CoordinateChart& chart, const Point& y) {
  require_dim(y, chart.dim(), "lame_coefficients");
  const SmallMatrix d = chart.jacobian_matrix(y);
  Point h(chart.dim());
  for (int i = 0; i < chart.dim(); ++i) h(i) = d.col(i).norm();
  return h;
}

Point transform_form(const CoordinateChart& chart, FormKind kind, const Point& value,
                     const Point& y, Direction direction) {
  const int dim = chart.dim();
  require_dim(y, dim, "transform_form point");
  const bool to_x = direction == Direction::to_cartesian;

  switch (kind) {
    case FormKind::zero_form:
      require_dim(value, 1, "0-form value");
      return value;
    case FormKind::one_form: {
      require_dim(value, dim, "1-form value");
      if (to_x) return n_matrix(chart, y) * value;
      // E~ = N^{-1} E = D_F^T E
      n_matrix(chart, y);  // singularity check
      return chart.jacobian_matrix(y).transpose() * value;
    }
    case FormKind::two_form: {
      const SmallMatrix d = chart.jacobian_matrix(y);
      n_matrix(chart, y);
      const double jac = d.determinant();
      if (dim == 2) {
        require_dim(value, 1, "2-form value (2D)");
        return to_x ? Point(value / jac) : Point(value * jac);
      }
      require_dim(value, dim, "2-form value");
      if (to_x) return d * value / jac;
      return Point(jac * d.inverse() * value);
    }
    case FormKind::three_form: {
      if (dim != 3) throw std::invalid_argument("3-forms require a 3D chart");
      require_dim(value, 1, "3-form value");
      n_matrix(chart, y);
      const double jac = chart.jacobian_determinant(y);
      return to_x ? Point(value / jac) : Point(value * jac);
    }
  }
  throw std::invalid_argument("unknown form kind");
}

Point laplace_beltrami_coeffs(const CoordinateChart& chart, const Point& y) {
  n_matrix(chart, y);
  const Point h = lame_coefficients(chart, y);
  Point c(chart.dim());
  if (chart.dim() == 2) {
    c << h(1) / h(0), h(0) / h(1);
  } else {
    c << h(1) * h(2) / h(0), h(0) * h(2) / h(1), h(0) * h(1) / h(2);
  }
  return c;
}

Mat2 rotation_generator() {
  Mat2 k;
  k << 0.0, 1.0,
       -1.0, 0.0;
  return k;
}

Eigen::Matrix3d hat_matrix(const Eigen::Vector3d& b) {
  Eigen::Matrix3d m;
  m << 0.0, b(2), -b(1),
       -b(2), 0.0, b(0),
       b(1), -b(0), 0.0;
  return m;
}

}  // namespace cvpic
