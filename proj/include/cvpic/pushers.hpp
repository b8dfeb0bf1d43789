#pragma once

#include <cmath>

#include "cvpic/fields.hpp"
#include "cvpic/geometry.hpp"

namespace cvpic {

// Curvilinear position, Cartesian velocity components.
struct ParticleState {
  Vec2 y = Vec2::Zero();
  Vec2 v = Vec2::Zero();
};

struct CartesianState {
  Vec2 x = Vec2::Zero();
  Vec2 v = Vec2::Zero();
};

// Step size and magnetization; tau = dt/eps and lambda = dt/eps^2 are fixed at construction.
class SchemeParams {
 public:
  SchemeParams(double dt, double epsilon);
  double dt() const { return dt_; }
  double epsilon() const { return epsilon_; }
  double tau() const { return tau_; }
  double lambda() const { return lambda_; }

 private:
  double dt_, epsilon_, tau_, lambda_;
};

enum class Scheme { apsi1, apsi2 };

/// Implicit-stage coefficient of the L-stable two-stage schemes, 1 - 1/sqrt(2).
inline const double kGamma = 1.0 - 1.0 / std::sqrt(2.0);

/// (I - beta K)^{-1} = (I + beta K) / (1 + beta^2).
Mat2 rotation_inverse(double beta);

/// First-order semi-implicit step. Chart and field are frozen at y^n:
///   v' = (I - lambda b K)^{-1} (v + tau N E~),  y' = y + tau N^T v'.
ParticleState apsi1_step(const ParticleState& state, const FieldProvider& field,
                         const CoordinateChart& chart, const SchemeParams& params);

/// Second-order L-stable two-stage step; the second stage is frozen at the
/// explicit midpoint y2 = y + tau/(2 gamma) N(y)^T v1. Throws OutOfDomainError
/// if y2 leaves the chart.
ParticleState apsi2_step(const ParticleState& state, const FieldProvider& field,
                         const CoordinateChart& chart, const SchemeParams& params);

ParticleState scheme_step(Scheme scheme, const ParticleState& state, const FieldProvider& field,
                          const CoordinateChart& chart, const SchemeParams& params);

/// Cartesian Boris step for eps x' = v, eps v' = E + (b/eps) K v:
/// half drift, half kick, Cayley rotation, half kick, half drift.
CartesianState boris_step(const CartesianState& state, const AnalyticFieldModel& field,
                          const SchemeParams& params);

/// Guiding-center drift R(u) = K E~(u) / (b(F(u)) J(u)).
Vec2 gc_velocity(const Vec2& u, const FieldProvider& field, const CoordinateChart& chart);
Vec2 gc_euler_step(const Vec2& u, const FieldProvider& field, const CoordinateChart& chart,
                   double dt);
Vec2 gc_rk2_step(const Vec2& u, const FieldProvider& field, const CoordinateChart& chart,
                 double dt);

/// v0 = eps b0^{-1} K N(y0) E~(y0): starts the particle on the drift manifold.
Vec2 well_prepared_velocity(const Vec2& y0, const FieldProvider& field,
                            const CoordinateChart& chart, double epsilon);

/// u0 = y0 + (eps/b0) N^T (K v0 + (eps/b0) N E~).
Vec2 gc_modified_initial(const Vec2& y0, const Vec2& v0, const FieldProvider& field,
                         const CoordinateChart& chart, double epsilon);

/// z = v/eps - b(y_prev)^{-1} K N(y_prev) E~(y_prev); zero on the drift manifold.
Vec2 gyration_residual(const Vec2& v, const Vec2& y_prev, const FieldProvider& field,
                       const CoordinateChart& chart, double epsilon);

}  // namespace cvpic
