#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cvpic/diagnostics.hpp"

using namespace cvpic;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

DensityGrid synthetic_density(const PolarFemGrid& grid, const std::function<double(double, double)>& f) {
  DensityGrid d;
  d.n_r_nodes = grid.n_r() + 1;
  d.n_theta = grid.n_theta();
  d.values.resize(grid.node_count());
  d.node_area.assign(d.n_r_nodes, 1.0);
  for (int i = 0; i < d.n_r_nodes; ++i)
    for (int j = 0; j < d.n_theta; ++j) d.values[grid.node_index(i, j)] = f(grid.r_node(i), grid.theta_node(j));
  return d;
}

}  // namespace

TEST_CASE("structure matrix layout and skew symmetry") {
  const CoordinateChart polar = chart_polar();
  const auto b = [](const Vec2& y) { return 1.0 + 0.1 * std::sin(y(0)); };
  const std::vector<Vec2> ys{Vec2(1.2, 0.3), Vec2(2.5, 4.0)};
  const std::vector<double> ws{0.5, 2.0};
  const Eigen::MatrixXd k = poisson_matrix(ys, ws, polar, b, 0.1);
  REQUIRE(k.rows() == 8);
  CHECK((k + k.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(k.topLeftCorner(4, 4).cwiseAbs().maxCoeff() == 0.0);
  // Y_1 couples to V_1 only, through N^T / alpha
  const Mat2 block = k.block<2, 2>(0, 4);
  CHECK((block - n_matrix2(polar, ys[0]).transpose() / 0.5).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(k.block<2, 2>(0, 6).cwiseAbs().maxCoeff() == 0.0);
  // in polar, N (J b K) N^T = b K
  const Mat2 vv = k.block<2, 2>(4, 4);
  CHECK((vv - (b(ys[0]) / (0.1 * 0.5)) * rotation_generator()).cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(poisson_matrix(ys, std::vector<double>{1.0}, polar, b, 0.1), std::invalid_argument);
}

TEST_CASE("Jacobi identity holds for the particle bracket") {
  const CoordinateChart polar = chart_polar();
  const double eps = 0.0625;
  const auto b = [&](const Vec2& y) { return 1.0 + eps * std::sin(y(0)); };
  const auto structure = [&](const Eigen::VectorXd& z) {
    return poisson_matrix(std::vector<Vec2>{Vec2(z(0), z(1))}, std::vector<double>{0.7}, polar, b, eps);
  };
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> r(0.5, 3.0), th(0.0, kTwoPi), v(-1.0, 1.0);
  for (int n = 0; n < 5; ++n) {
    Eigen::VectorXd z(4);
    z << r(rng), th(rng), v(rng), v(rng);
    CHECK(jacobi_identity_residual(structure, z) < 1e-5);
  }
}

TEST_CASE("the Jacobi check detects a non-Poisson structure") {
  // K12 = z2, K13 = K23 = 1: the (1,2,3) cyclic sum equals K23 = 1.
  const auto bad = [](const Eigen::VectorXd& z) {
    Eigen::MatrixXd k(3, 3);
    k << 0, z(1), 1, -z(1), 0, 1, -1, -1, 0;
    return k;
  };
  CHECK(jacobi_identity_residual(bad, Eigen::Vector3d(0.1, 0.2, 0.3)) == doctest::Approx(1.0));
}

TEST_CASE("hat-matrix identities") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int n = 0; n < 20; ++n) {
    const Eigen::Vector3d b(u(rng), u(rng), u(rng));
    const HatMatrixReport r = hat_matrix_checks(b, rng(), 1);
    CHECK(r.cube_residual < 1e-13);
    CHECK(r.projection_residual < 1e-13);
  }
}

TEST_CASE("density grid conserves the deposited charge") {
  const PolarFemGrid grid = PolarFemGrid::uniform(1.0, 5.0, 8, 16);
  ParticleEnsemble e;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> r(1.0, 5.0), th(0.0, kTwoPi), w(0.1, 1.0);
  for (int n = 0; n < 500; ++n) e.push_back(Vec2(r(rng), th(rng)), Vec2::Zero(), w(rng));
  const DensityGrid d = density_grid(e, grid);
  CHECK(d.integral() == doctest::Approx(e.active_charge()).epsilon(1e-12));
  // node areas: half cells at the walls
  CHECK(d.node_area[0] == doctest::Approx(0.5 * 0.5 * grid.dtheta()));
  CHECK(d.node_area[3] == doctest::Approx(0.5 * grid.dtheta()));

  // a particle on a node deposits only there
  ParticleEnsemble one;
  one.push_back(Vec2(grid.r_node(3), grid.theta_node(5)), Vec2::Zero(), 2.0);
  const DensityGrid d1 = density_grid(one, grid);
  CHECK(d1.at(3, 5) * d1.node_area[3] == doctest::Approx(2.0));
  CHECK(d1.integral() == doctest::Approx(2.0));
}

TEST_CASE("theta-mode amplitudes read a/2 for a cos perturbation") {
  const PolarFemGrid grid = PolarFemGrid::uniform(1.0, 3.0, 4, 64);
  const DensityGrid d = synthetic_density(grid, [](double r, double th) { return r * (1.0 + 0.3 * std::cos(5 * th + 0.4)); });
  const auto amp = theta_mode_amplitudes(d, 8);
  REQUIRE(amp.size() == 9);
  CHECK(amp[0] == doctest::Approx(1.0));
  CHECK(amp[5] == doctest::Approx(0.15));
  for (int m : {1, 2, 3, 4, 6, 7, 8}) CHECK(amp[m] < 1e-13);
  CHECK_THROWS_AS(theta_mode_amplitudes(d, 32), std::invalid_argument);

  const DensityGrid empty = synthetic_density(grid, [](double, double) { return 0.0; });
  CHECK(theta_mode_amplitudes(empty, 3)[1] == 0.0);
}

TEST_CASE("Cartesian resampling divides by r") {
  const PolarFemGrid grid = PolarFemGrid::uniform(1.0, 3.0, 8, 32);
  const DensityGrid d = synthetic_density(grid, [](double r, double) { return 2.0 * r; });
  const int n = 40;
  const auto rho = cartesian_resample(d, grid, n, 3.5);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const double x = -3.5 + (a + 0.5) * 7.0 / n, y = -3.5 + (b + 0.5) * 7.0 / n;
      const double r = std::hypot(x, y);
      const double value = rho[static_cast<std::size_t>(b) * n + a];
      if (r < 1.0 || r > 3.0) CHECK(value == 0.0);
      else CHECK(value == doctest::Approx(2.0).epsilon(1e-12));
    }
}

TEST_CASE("trajectory error with periodic wrap") {
  const std::vector<Vec2> a{Vec2(1.0, 0.1), Vec2(1.5, 6.2)};
  const std::vector<Vec2> b{Vec2(1.0, 0.1), Vec2(1.2, 0.05)};
  const TrajectoryError wrapped = trajectory_error(a, b, Vec2(0.0, kTwoPi));
  CHECK(wrapped.final_abs(0) == doctest::Approx(0.3));
  CHECK(wrapped.final_abs(1) == doctest::Approx(0.05 + kTwoPi - 6.2));
  CHECK(wrapped.per_step[0] == 0.0);
  const TrajectoryError plain = trajectory_error(a, b);
  CHECK(plain.final_abs(1) == doctest::Approx(6.15));
  CHECK(plain.max_euclidean == doctest::Approx(std::hypot(0.3, 6.15)));
  CHECK_THROWS_AS(trajectory_error(a, std::vector<Vec2>{Vec2::Zero()}), std::invalid_argument);
}

TEST_CASE("log-log slope of a power law") {
  const std::vector<double> x{0.1, 0.05, 0.025, 0.0125};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * v * v);
  CHECK(loglog_slope(x, y) == doctest::Approx(2.0));
  CHECK_THROWS_AS(loglog_slope(std::vector<double>{1.0}, std::vector<double>{1.0}), std::invalid_argument);
}
