#include "cvpic/diagnostics.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

namespace cvpic {

EnergyRecord total_energy(const ParticleEnsemble& ensemble, const StiffnessMatrix& stiffness,
                          const Eigen::VectorXd& coeffs, double time) {
  EnergyRecord e;
  e.time = time;
  for (std::size_t s = 0; s < ensemble.size(); ++s)
    if (ensemble.active[s]) e.kinetic += 0.5 * ensemble.alpha[s] * ensemble.v[s].squaredNorm();
  if (coeffs.size() > 0) e.potential = 0.5 * coeffs.dot(stiffness.matrix * coeffs);
  e.total = e.kinetic + e.potential;
  return e;
}

Eigen::MatrixXd poisson_matrix(std::span<const Vec2> positions, std::span<const double> weights,
                               const CoordinateChart& chart,
                               const std::function<double(const Vec2&)>& b_of_y, double epsilon) {
  if (positions.size() != weights.size())
    throw std::invalid_argument("positions and weights differ in length");
  if (chart.dim() != 2) throw std::invalid_argument("poisson_matrix is implemented for 2D charts");
  const Eigen::Index np = static_cast<Eigen::Index>(positions.size());
  const Mat2 k = rotation_generator();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(4 * np, 4 * np);
  for (Eigen::Index s = 0; s < np; ++s) {
    const Vec2& y = positions[s];
    const Mat2 n = n_matrix2(chart, y);
    const double inv_alpha = 1.0 / weights[s];
    const double two_form = chart.jacobian2(y).determinant() * b_of_y(y);
    const Eigen::Index ys = 2 * s, vs = 2 * np + 2 * s;
    m.block<2, 2>(ys, vs) = inv_alpha * n.transpose();
    m.block<2, 2>(vs, ys) = -inv_alpha * n;
    m.block<2, 2>(vs, vs) = (inv_alpha / epsilon) * n * (two_form * k) * n.transpose();
  }
  return m;
}

double jacobi_identity_residual(const std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>& structure,
                                const Eigen::VectorXd& z, double step) {
  const Eigen::MatrixXd k0 = structure(z);
  const Eigen::Index m = z.size();
  std::vector<Eigen::MatrixXd> dk(static_cast<std::size_t>(m));
  for (Eigen::Index l = 0; l < m; ++l) {
    Eigen::VectorXd zp = z, zm = z;
    zp(l) += step;
    zm(l) -= step;
    dk[l] = (structure(zp) - structure(zm)) / (2.0 * step);
  }
  double worst = 0.0;
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      for (Eigen::Index kk = 0; kk < m; ++kk) {
        double sum = 0.0;
        for (Eigen::Index l = 0; l < m; ++l)
          sum += dk[l](i, j) * k0(l, kk) + dk[l](j, kk) * k0(l, i) + dk[l](kk, i) * k0(l, j);
        worst = std::max(worst, std::abs(sum));
      }
  return worst;
}

HatMatrixReport hat_matrix_checks(const Eigen::Vector3d& b, std::uint64_t seed, int samples) {
  const Eigen::Matrix3d hat = hat_matrix(b);
  const double b2 = b.squaredNorm();
  HatMatrixReport report;
  report.cube_residual = (hat * hat * hat + b2 * hat).cwiseAbs().maxCoeff();

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int n = 0; n < samples; ++n) {
    const Eigen::Vector3d y(u(rng), u(rng), u(rng));
    const Eigen::Vector3d r = b.dot(y) * b - hat * hat * y - b2 * y;
    report.projection_residual = std::max(report.projection_residual, r.cwiseAbs().maxCoeff());
  }
  return report;
}

double DensityGrid::integral() const {
  double q = 0.0;
  for (int i = 0; i < n_r_nodes; ++i)
    for (int j = 0; j < n_theta; ++j) q += at(i, j) * node_area[i];
  return q;
}

DensityGrid density_grid(const ParticleEnsemble& ensemble, const PolarFemGrid& grid) {
  DensityGrid d;
  d.n_r_nodes = grid.n_r() + 1;
  d.n_theta = grid.n_theta();
  d.node_area.resize(d.n_r_nodes);
  for (int i = 0; i < d.n_r_nodes; ++i) {
    const double lo = i > 0 ? grid.r_node(i - 1) : grid.r_node(0);
    const double hi = i < grid.n_r() ? grid.r_node(i + 1) : grid.r_node(grid.n_r());
    d.node_area[i] = 0.5 * (hi - lo) * grid.dtheta();
  }
  const Eigen::VectorXd nodal = deposit_nodal(ensemble, grid);
  d.values.resize(nodal.size());
  for (int i = 0; i < d.n_r_nodes; ++i)
    for (int j = 0; j < d.n_theta; ++j) {
      const int idx = grid.node_index(i, j);
      d.values[idx] = nodal(idx) / d.node_area[i];
    }
  return d;
}

std::vector<double> cartesian_resample(const DensityGrid& density, const PolarFemGrid& grid, int n,
                                       double extent) {
  std::vector<double> out(static_cast<std::size_t>(n) * n, 0.0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const double x = -extent + (a + 0.5) * 2.0 * extent / n;
      const double y = -extent + (b + 0.5) * 2.0 * extent / n;
      const double r = std::hypot(x, y);
      if (r < grid.r0() || r > grid.r_max()) continue;
      const auto loc = grid.locate(Vec2(r, std::atan2(y, x)));
      const auto w = PolarFemGrid::basis_values(loc);
      const auto nodes = grid.cell_nodes(loc.i, loc.j);
      double value = 0.0;
      for (int p = 0; p < 4; ++p) value += w[p] * density.values[nodes[p]];
      out[static_cast<std::size_t>(b) * n + a] = value / r;
    }
  return out;
}

std::vector<double> theta_mode_amplitudes(const DensityGrid& density, int max_mode) {
  if (max_mode < 0 || 2 * max_mode >= density.n_theta)
    throw std::invalid_argument("max_mode must be below n_theta / 2");
  std::vector<double> profile(density.n_theta, 0.0);
  for (int i = 0; i < density.n_r_nodes; ++i)
    for (int j = 0; j < density.n_theta; ++j) profile[j] += density.at(i, j) * density.node_area[i];

  std::vector<double> amp(max_mode + 1, 0.0);
  std::vector<std::complex<double>> c(max_mode + 1);
  for (int m = 0; m <= max_mode; ++m) {
    std::complex<double> sum = 0.0;
    for (int j = 0; j < density.n_theta; ++j) {
      const double phase = -2.0 * std::numbers::pi * m * j / density.n_theta;
      sum += profile[j] * std::polar(1.0, phase);
    }
    c[m] = sum / static_cast<double>(density.n_theta);
  }
  const double c0 = std::abs(c[0]);
  if (c0 == 0.0) return amp;
  for (int m = 0; m <= max_mode; ++m) amp[m] = std::abs(c[m]) / c0;
  return amp;
}

TrajectoryError trajectory_error(std::span<const Vec2> numerical, std::span<const Vec2> reference,
                                 std::optional<Vec2> periods) {
  if (numerical.size() != reference.size())
    throw std::invalid_argument("trajectory lengths differ");
  TrajectoryError out;
  out.per_step.reserve(numerical.size());
  for (std::size_t n = 0; n < numerical.size(); ++n) {
    Vec2 d = numerical[n] - reference[n];
    if (periods) {
      for (int k = 0; k < 2; ++k) {
        const double p = (*periods)(k);
        if (p > 0.0) d(k) -= p * std::round(d(k) / p);
      }
    }
    const double e = d.norm();
    out.per_step.push_back(e);
    out.max_euclidean = std::max(out.max_euclidean, e);
    if (n + 1 == numerical.size()) out.final_abs = d.cwiseAbs();
  }
  return out;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("need matching samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double lx = std::log(x[k]), ly = std::log(y[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace cvpic
