#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "cvpic/fields.hpp"
#include "cvpic/pic.hpp"

namespace cvpic {

struct EnergyRecord {
  double time = 0.0;
  double kinetic = 0.0;    // 1/2 sum alpha |V|^2 over active particles
  double potential = 0.0;  // 1/2 Phi^T M Phi
  double total = 0.0;
};

EnergyRecord total_energy(const ParticleEnsemble& ensemble, const StiffnessMatrix& stiffness,
                          const Eigen::VectorXd& coeffs, double time = 0.0);

/// Structure matrix of the discrete bracket in Z = (Y_1..Y_Np, V_1..V_Np), 2D:
///   [[0, W^-1 N^T], [-W^-1 N, (1/eps) W^-1 N (B~ K) N^T]]
/// where B~ = J b(F(y)) is the out-of-plane 2-form of the physical field b.
Eigen::MatrixXd poisson_matrix(std::span<const Vec2> positions, std::span<const double> weights,
                               const CoordinateChart& chart,
                               const std::function<double(const Vec2&)>& b_of_y, double epsilon);

/// max over (i,j,k) of the Jacobi-identity triple sum, with dK/dZ by central differences.
double jacobi_identity_residual(const std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>& structure,
                                const Eigen::VectorXd& z, double step = 1e-6);

struct HatMatrixReport {
  double cube_residual = 0.0;        // max |hat(B)^3 + b^2 hat(B)|
  double projection_residual = 0.0;  // max over samples |(B.y) B - hat(B)^2 y - b^2 y|
};

HatMatrixReport hat_matrix_checks(const Eigen::Vector3d& b, std::uint64_t seed = 7, int samples = 20);

// Node-centered estimate of r rho~ on (n_r + 1) x n_theta nodes, row-major in r.
struct DensityGrid {
  int n_r_nodes = 0;
  int n_theta = 0;
  std::vector<double> values;
  std::vector<double> node_area;  // dual-cell area in (r, theta) per radial node

  double at(int i, int j) const { return values[static_cast<std::size_t>(i) * n_theta + j]; }
  double integral() const;
};

DensityGrid density_grid(const ParticleEnsemble& ensemble, const PolarFemGrid& grid);

/// Cartesian density rho(x) = (r rho~)/r sampled on an n x n lattice over [-extent, extent]^2,
/// zero outside the annulus.
std::vector<double> cartesian_resample(const DensityGrid& density, const PolarFemGrid& grid, int n,
                                       double extent);

/// |c_m| / |c_0| for m = 0..max_mode, c_m the DFT (1/N sum_j P_j e^{-i m theta_j}) of the
/// radially integrated profile. A cos(m theta) perturbation of relative size a reads a/2.
std::vector<double> theta_mode_amplitudes(const DensityGrid& density, int max_mode);

struct TrajectoryError {
  Vec2 final_abs = Vec2::Zero();  // componentwise |y_N - y_ref,N|
  double max_euclidean = 0.0;
  std::vector<double> per_step;
};

/// Component differences on periodic axes are reduced to (-period/2, period/2].
TrajectoryError trajectory_error(std::span<const Vec2> numerical, std::span<const Vec2> reference,
                                 std::optional<Vec2> periods = std::nullopt);

/// Slope of the least-squares line through (log x, log y).
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace cvpic
