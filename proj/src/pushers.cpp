#include "cvpic/pushers.hpp"

#include <sstream>

namespace cvpic {

namespace {

Vec2 wrap2(const CoordinateChart& chart, const Vec2& y) {
  const Point w = chart.wrap(to_point(y));
  return {w(0), w(1)};
}

}  // namespace

SchemeParams::SchemeParams(double dt, double epsilon)
    : dt_(dt), epsilon_(epsilon), tau_(dt / epsilon), lambda_(dt / (epsilon * epsilon)) {
  if (!(dt >= 0.0)) throw std::invalid_argument("time step must be non-negative");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
}

Mat2 rotation_inverse(double beta) {
  const double scale = 1.0 / (1.0 + beta * beta);
  Mat2 m;
  m << scale, beta * scale,
       -beta * scale, scale;
  return m;
}

ParticleState apsi1_step(const ParticleState& state, const FieldProvider& field,
                         const CoordinateChart& chart, const SchemeParams& params) {
  const Mat2 n = n_matrix2(chart, state.y);
  const double b = field.b(state.y);
  const Vec2 e = field.e_curvilinear(state.y);

  ParticleState next;
  next.v = rotation_inverse(params.lambda() * b) * (state.v + params.tau() * (n * e));
  next.y = wrap2(chart, state.y + params.tau() * (n.transpose() * next.v));
  return next;
}

ParticleState apsi2_step(const ParticleState& state, const FieldProvider& field,
                         const CoordinateChart& chart, const SchemeParams& params) {
  const double tau = params.tau(), lambda = params.lambda(), eps = params.epsilon();
  const Mat2 k = rotation_generator();

  const Mat2 n0 = n_matrix2(chart, state.y);
  const double b0 = field.b(state.y);
  const Vec2 ne0 = n0 * field.e_curvilinear(state.y);

  // stage 1
  const Vec2 v1 = rotation_inverse(kGamma * lambda * b0) * (state.v + kGamma * tau * ne0);
  const Vec2 f1 = ne0 + (b0 / eps) * (k * v1);

  const Vec2 y2 = state.y + (tau / (2.0 * kGamma)) * (n0.transpose() * v1);
  if (!chart.contains(to_point(y2))) {
    std::ostringstream os;
    os << "stage midpoint (" << y2(0) << ", " << y2(1) << ") left chart '" << chart.name() << "'";
    throw OutOfDomainError(os.str());
  }

  // stage 2, frozen at y2
  const Mat2 n2 = n_matrix2(chart, y2);
  const double b2 = field.b(y2);
  const Vec2 ne2 = n2 * field.e_curvilinear(y2);

  ParticleState next;
  next.v = rotation_inverse(kGamma * lambda * b2) *
           (state.v + (1.0 - kGamma) * tau * f1 + kGamma * tau * ne2);
  next.y = state.y + (1.0 - kGamma) * tau * (n0.transpose() * v1) +
           kGamma * tau * (n2.transpose() * next.v);
  next.y = wrap2(chart, next.y);
  return next;
}

ParticleState scheme_step(Scheme scheme, const ParticleState& state, const FieldProvider& field,
                          const CoordinateChart& chart, const SchemeParams& params) {
  return scheme == Scheme::apsi1 ? apsi1_step(state, field, chart, params)
                                 : apsi2_step(state, field, chart, params);
}

CartesianState boris_step(const CartesianState& state, const AnalyticFieldModel& field,
                          const SchemeParams& params) {
  const double dt = params.dt(), eps = params.epsilon();
  const double half_drift = 0.5 * params.tau();

  const Vec2 x_half = state.x + half_drift * state.v;
  const Vec2 kick = (0.5 * dt / eps) * field.e_field(x_half);
  const Vec2 v_minus = state.v + kick;

  // v' = w K v with w = b/eps^2; Cayley form (I - hK)^{-1}(I + hK), h = w dt / 2.
  const double h = 0.5 * params.lambda() * field.b_scalar(x_half);
  const Vec2 k_v(v_minus(1), -v_minus(0));
  const Vec2 v_plus = rotation_inverse(h) * (v_minus + h * k_v);

  CartesianState next;
  next.v = v_plus + kick;
  next.x = x_half + half_drift * next.v;
  return next;
}

Vec2 gc_velocity(const Vec2& u, const FieldProvider& field, const CoordinateChart& chart) {
  n_matrix2(chart, u);  // singularity check
  const double jac = chart.jacobian2(u).determinant();
  return rotation_generator() * field.e_curvilinear(u) / (field.b(u) * jac);
}

Vec2 gc_euler_step(const Vec2& u, const FieldProvider& field, const CoordinateChart& chart,
                   double dt) {
  return wrap2(chart, u + dt * gc_velocity(u, field, chart));
}

Vec2 gc_rk2_step(const Vec2& u, const FieldProvider& field, const CoordinateChart& chart,
                 double dt) {
  const Vec2 r0 = gc_velocity(u, field, chart);
  const Vec2 u1 = u + (dt / (2.0 * kGamma)) * r0;
  const Vec2 r1 = gc_velocity(u1, field, chart);
  return wrap2(chart, u + (1.0 - kGamma) * dt * r0 + kGamma * dt * r1);
}

Vec2 well_prepared_velocity(const Vec2& y0, const FieldProvider& field,
                            const CoordinateChart& chart, double epsilon) {
  const Mat2 n = n_matrix2(chart, y0);
  return (epsilon / field.b(y0)) * (rotation_generator() * (n * field.e_curvilinear(y0)));
}

Vec2 gc_modified_initial(const Vec2& y0, const Vec2& v0, const FieldProvider& field,
                         const CoordinateChart& chart, double epsilon) {
  const Mat2 n = n_matrix2(chart, y0);
  const double s = epsilon / field.b(y0);
  return y0 + s * (n.transpose() * (rotation_generator() * v0 + s * (n * field.e_curvilinear(y0))));
}

Vec2 gyration_residual(const Vec2& v, const Vec2& y_prev, const FieldProvider& field,
                       const CoordinateChart& chart, double epsilon) {
  const Mat2 n = n_matrix2(chart, y_prev);
  return v / epsilon -
         rotation_generator() * (n * field.e_curvilinear(y_prev)) / field.b(y_prev);
}

}  // namespace cvpic
