#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include <Eigen/Sparse>

#include "cvpic/geometry.hpp"

namespace cvpic {

class NoConvergenceError : public std::runtime_error {
 public:
  NoConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// Cartesian field description for the single-particle studies. The physical
// magnetic field is b(x) / epsilon along the out-of-plane axis.
struct AnalyticFieldModel {
  std::function<Vec2(const Vec2&)> e_field;
  std::function<double(const Vec2&)> b_scalar;
  std::function<double(const Vec2&)> potential;  // phi with E = -grad phi
  double epsilon = 1.0;
};

/// E(x) = -x, b(x) = 1 + eps sin|x|.
AnalyticFieldModel make_benchmark_field(double epsilon);
/// phi = (x1^3 + x2^3)/3, E = (-x1^2, -x2^2), b as in the benchmark.
AnalyticFieldModel make_cubic_potential_field(double epsilon);

// What a pusher needs at a curvilinear point: the 1-form E~(y) and b(F(y)).
class FieldProvider {
 public:
  virtual ~FieldProvider() = default;
  virtual Vec2 e_curvilinear(const Vec2& y) const = 0;
  virtual double b(const Vec2& y) const = 0;
};

// Analytic model pulled back through a chart: E~ = D_F^T E(F(y)).
class AnalyticField final : public FieldProvider {
 public:
  AnalyticField(const AnalyticFieldModel& model, const CoordinateChart& chart)
      : model_(model), chart_(chart) {}
  Vec2 e_curvilinear(const Vec2& y) const override;
  double b(const Vec2& y) const override;

 private:
  const AnalyticFieldModel& model_;
  const CoordinateChart& chart_;
};

// Tensor-product Q1 mesh on [r0, r_max] x [0, 2pi). Radial ends are homogeneous
// Dirichlet walls, theta is periodic. Nodes (i, j), i = 0..n_r, j = 0..n_theta-1.
class PolarFemGrid {
 public:
  PolarFemGrid(std::vector<double> r_nodes, int n_theta);
  static PolarFemGrid uniform(double r0, double r_max, int n_r, int n_theta);

  int n_r() const { return static_cast<int>(r_nodes_.size()) - 1; }
  int n_theta() const { return n_theta_; }
  double r0() const { return r_nodes_.front(); }
  double r_max() const { return r_nodes_.back(); }
  double r_node(int i) const { return r_nodes_[i]; }
  const std::vector<double>& r_nodes() const { return r_nodes_; }
  double dtheta() const { return dtheta_; }
  double theta_node(int j) const { return j * dtheta_; }

  int node_count() const { return (n_r() + 1) * n_theta_; }
  int node_index(int i, int j) const { return i * n_theta_ + j; }
  int dof_count() const { return (n_r() - 1) * n_theta_; }
  /// -1 on the Dirichlet rings i = 0 and i = n_r.
  int dof_index(int i, int j) const {
    return (i <= 0 || i >= n_r()) ? -1 : (i - 1) * n_theta_ + j;
  }

  struct Location {
    int i, j;     // lower-left node of the containing cell
    double s, t;  // local coordinates in [0, 1]
  };
  /// Throws OutOfDomainError when r is outside [r0, r_max]; theta is wrapped.
  Location locate(const Vec2& y) const;

  // Corner order: (i, j), (i+1, j), (i, j+1), (i+1, j+1).
  std::array<int, 4> cell_nodes(int i, int j) const;
  static std::array<double, 4> basis_values(const Location& loc);
  /// d/dr and d/dtheta of the four corner basis functions.
  std::array<Vec2, 4> basis_gradients(const Location& loc) const;

 private:
  std::vector<double> r_nodes_;
  int n_theta_;
  double dtheta_;
  bool uniform_r_;
};

struct StiffnessMatrix {
  Eigen::SparseMatrix<double> matrix;  // dof_count x dof_count

  Eigen::Index size() const { return matrix.rows(); }
  /// Coordinate-format debug dump: one "row col value" line per stored entry.
  void write_triplets(std::ostream& out) const;
};

struct PotentialCoefficients {
  Eigen::VectorXd values;  // one per free DOF
  double relative_residual = 0.0;
  int iterations = 0;
};

/// M_jk = int (r dW_j/dr dW_k/dr + (1/r) dW_j/dtheta dW_k/dtheta) dr dtheta, 2x2 Gauss per cell.
StiffnessMatrix assemble_stiffness(const PolarFemGrid& grid);

inline constexpr double kPoissonTolerance = 1e-10;

/// Conjugate gradients to ||M x - rhs|| <= tol ||rhs||.
PotentialCoefficients solve_poisson(const StiffnessMatrix& matrix, const Eigen::VectorXd& rhs,
                                    double tolerance = kPoissonTolerance, int max_iterations = 0);

/// E~_h(y) = -sum_j phi_j grad W_j(y), curvilinear components.
Vec2 eval_field_at(const PolarFemGrid& grid, const Eigen::VectorXd& coeffs, const Vec2& y);
double eval_potential_at(const PolarFemGrid& grid, const Eigen::VectorXd& coeffs, const Vec2& y);

/// Load vector int f W_j r dr dtheta for a Cartesian source f(r, theta), 3x3 Gauss.
Eigen::VectorXd assemble_load(const PolarFemGrid& grid,
                              const std::function<double(double, double)>& source);
/// (int (phi_h - phi)^2 r dr dtheta)^{1/2}, 3x3 Gauss.
double l2_error(const PolarFemGrid& grid, const Eigen::VectorXd& coeffs,
                const std::function<double(double, double)>& exact);

// Self-consistent field snapshot for the pushers; b~ = 1 on the annulus.
class MeshField final : public FieldProvider {
 public:
  MeshField(const PolarFemGrid& grid, const Eigen::VectorXd& coeffs, double b = 1.0)
      : grid_(grid), coeffs_(coeffs), b_(b) {}
  Vec2 e_curvilinear(const Vec2& y) const override { return eval_field_at(grid_, coeffs_, y); }
  double b(const Vec2&) const override { return b_; }

 private:
  const PolarFemGrid& grid_;
  const Eigen::VectorXd& coeffs_;
  double b_;
};

}  // namespace cvpic
