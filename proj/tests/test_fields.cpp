#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "cvpic/fields.hpp"

using namespace cvpic;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Vec2 fd_gradient(const std::function<double(const Vec2&)>& f, const Vec2& x, double h = 1e-6) {
  return Vec2((f(x + Vec2(h, 0)) - f(x - Vec2(h, 0))) / (2 * h),
              (f(x + Vec2(0, h)) - f(x - Vec2(0, h))) / (2 * h));
}

Eigen::VectorXd random_coeffs(const PolarFemGrid& grid, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd c(grid.dof_count());
  for (Eigen::Index k = 0; k < c.size(); ++k) c(k) = u(rng);
  return c;
}

}  // namespace

TEST_CASE("analytic fields are minus the gradient of their potentials") {
  for (const auto& model : {make_benchmark_field(0.1), make_cubic_potential_field(0.1)}) {
    for (const Vec2& x : {Vec2(0.3, -0.7), Vec2(1.5, 0.2), Vec2(-2.0, 1.0)}) {
      const Vec2 grad = fd_gradient(model.potential, x);
      CHECK((model.e_field(x) + grad).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
  CHECK(make_benchmark_field(0.5).b_scalar(Vec2(0.0, 2.0)) == doctest::Approx(1.0 + 0.5 * std::sin(2.0)));
  CHECK_THROWS_AS(make_benchmark_field(0.0), std::invalid_argument);
}

TEST_CASE("pulled-back field is the y-gradient of the pulled-back potential") {
  const CoordinateChart polar = chart_polar();
  const AnalyticFieldModel model = make_cubic_potential_field(0.25);
  const AnalyticField field(model, polar);
  const auto phi_y = [&](const Vec2& y) { return model.potential(polar.forward2(y)); };
  for (const Vec2& y : {Vec2(0.5, 0.3), Vec2(2.0, 4.0), Vec2(1.1, -1.0)}) {
    CHECK((field.e_curvilinear(y) + fd_gradient(phi_y, y)).cwiseAbs().maxCoeff() < 1e-7);
    CHECK(field.b(y) == doctest::Approx(1.0 + 0.25 * std::sin(y(0))));
  }
}

TEST_CASE("grid indexing and location") {
  const PolarFemGrid grid = PolarFemGrid::uniform(1.0, 3.0, 4, 8);
  CHECK(grid.node_count() == 5 * 8);
  CHECK(grid.dof_count() == 3 * 8);
  CHECK(grid.dof_index(0, 3) == -1);
  CHECK(grid.dof_index(4, 3) == -1);
  CHECK(grid.dof_index(1, 0) == 0);
  CHECK(grid.dof_index(2, 5) == 13);

  const auto loc = grid.locate(Vec2(1.75, kTwoPi + 0.1));
  CHECK(loc.i == 1);
  CHECK(loc.j == 0);
  CHECK(loc.s == doctest::Approx(0.5));
  CHECK(loc.t == doctest::Approx(0.1 / grid.dtheta()));

  const auto last = grid.cell_nodes(2, 7);  // theta wraps to column 0
  CHECK(last[2] == grid.node_index(2, 0));
  CHECK(last[3] == grid.node_index(3, 0));

  CHECK_THROWS_AS(grid.locate(Vec2(0.99, 0.0)), OutOfDomainError);
  CHECK_THROWS_AS(grid.locate(Vec2(3.01, 0.0)), OutOfDomainError);
  CHECK_NOTHROW(grid.locate(Vec2(3.0, 0.0)));
  CHECK_THROWS_AS(PolarFemGrid::uniform(0.0, 1.0, 4, 8), std::invalid_argument);
  CHECK_THROWS_AS(PolarFemGrid({1.0, 0.5, 2.0}, 8), std::invalid_argument);
}

TEST_CASE("Q1 basis: partition of unity and gradients") {
  const PolarFemGrid grid = PolarFemGrid::uniform(1.0, 2.0, 3, 6);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> r(1.0, 2.0), th(0.0, kTwoPi);
  for (int k = 0; k < 30; ++k) {
    const Vec2 y(r(rng), th(rng));
    const auto loc = grid.locate(y);
    const auto w = PolarFemGrid::basis_values(loc);
    CHECK(w[0] + w[1] + w[2] + w[3] == doctest::Approx(1.0).epsilon(1e-15));
    for (double wk : w) CHECK(wk >= 0.0);

    const auto g = grid.basis_gradients(loc);
    Vec2 sum = Vec2::Zero();
    for (const auto& gk : g) sum += gk;
    CHECK(sum.cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("stiffness matrix is symmetric with the expected sparsity") {
  const PolarFemGrid grid = PolarFemGrid::uniform(1.0, 4.0, 6, 10);
  const StiffnessMatrix m = assemble_stiffness(grid);
  CHECK(m.size() == grid.dof_count());
  const Eigen::MatrixXd dense(m.matrix);
  CHECK((dense - dense.transpose()).cwiseAbs().maxCoeff() < 1e-14);
  // Interior rows couple to the 3x3 neighbourhood; rows next to a wall lose one ring.
  for (int i = 1; i < grid.n_r(); ++i) {
    const int row = grid.dof_index(i, 0);
    int nnz = 0;
    for (Eigen::Index c = 0; c < dense.cols(); ++c) nnz += dense(row, c) != 0.0;
    CHECK(nnz == ((i == 1 || i == grid.n_r() - 1) ? 6 : 9));
  }
  // Positive definite: all eigenvalues > 0.
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dense);
  CHECK(eig.eigenvalues().minCoeff() > 0.0);

  std::ostringstream out;
  m.write_triplets(out);
  int lines = 0;
  std::string line;
  std::istringstream in(out.str());
  while (std::getline(in, line)) lines += !line.empty();
  CHECK(lines == m.matrix.nonZeros());
}

TEST_CASE("stiffness reproduces the energy of a discrete function") {
  // c^T M c = int |grad u_h|^2 dx, compared against an independent fine midpoint sum.
  const PolarFemGrid grid = PolarFemGrid::uniform(1.0, 2.0, 3, 6);
  const Eigen::VectorXd c = random_coeffs(grid, 17);
  const StiffnessMatrix m = assemble_stiffness(grid);
  const double discrete = c.dot(m.matrix * c);

  const int sub = 600;  // a multiple of both cell counts: no sub-cell straddles an element face
  double quad = 0.0;
  const double hr = (grid.r_max() - grid.r0()) / sub, ht = kTwoPi / sub;
  for (int a = 0; a < sub; ++a)
    for (int b = 0; b < sub; ++b) {
      const Vec2 y(grid.r0() + (a + 0.5) * hr, (b + 0.5) * ht);
      const Vec2 e = eval_field_at(grid, c, y);
      quad += (y(0) * e(0) * e(0) + e(1) * e(1) / y(0)) * hr * ht;
    }
  CHECK(discrete == doctest::Approx(quad).epsilon(1e-4));
}

TEST_CASE("Poisson solve: residual, zero rhs, errors") {
  const PolarFemGrid grid = PolarFemGrid::uniform(1.0, 4.0 * std::numbers::pi, 16, 16);
  const StiffnessMatrix m = assemble_stiffness(grid);
  const Eigen::VectorXd rhs = random_coeffs(grid, 21);
  const PotentialCoefficients phi = solve_poisson(m, rhs);
  CHECK(phi.relative_residual <= kPoissonTolerance);
  CHECK((m.matrix * phi.values - rhs).norm() <= kPoissonTolerance * rhs.norm());

  const PotentialCoefficients zero = solve_poisson(m, Eigen::VectorXd::Zero(grid.dof_count()));
  CHECK(zero.values.cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(solve_poisson(m, Eigen::VectorXd::Ones(3)), std::invalid_argument);
  CHECK_THROWS_AS(solve_poisson(m, rhs, 1e-14, 1), NoConvergenceError);
}

TEST_CASE("manufactured solution converges at second order in L2") {
  const double r0 = 1.0, r1 = 4.0 * std::numbers::pi;
  const double k = std::numbers::pi / (r1 - r0);
  auto exact = [=](double r, double th) { return std::sin(k * (r - r0)) * (2.0 + std::cos(2.0 * th)); };
  auto source = [=](double r, double th) {
    const double s = std::sin(k * (r - r0)), c = std::cos(k * (r - r0));
    return (k * k * s - k * c / r) * (2.0 + std::cos(2.0 * th)) + 4.0 * s * std::cos(2.0 * th) / (r * r);
  };
  std::vector<double> err;
  for (int n : {16, 32, 64}) {
    const PolarFemGrid grid = PolarFemGrid::uniform(r0, r1, n, n);
    const PotentialCoefficients phi = solve_poisson(assemble_stiffness(grid), assemble_load(grid, source));
    CHECK(phi.relative_residual <= kPoissonTolerance);
    err.push_back(l2_error(grid, phi.values, exact));
  }
  const double order1 = std::log2(err[0] / err[1]);
  const double order2 = std::log2(err[1] / err[2]);
  CHECK(order1 == doctest::Approx(2.0).epsilon(0.1));
  CHECK(order2 == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("mesh field is minus the gradient of the mesh potential") {
  const PolarFemGrid grid = PolarFemGrid::uniform(1.0, 3.0, 5, 12);
  const Eigen::VectorXd c = random_coeffs(grid, 4);
  const auto phi = [&](const Vec2& y) { return eval_potential_at(grid, c, y); };
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> r(1.01, 2.99), th(0.0, kTwoPi);
  for (int n = 0; n < 40; ++n) {
    const Vec2 y(r(rng), th(rng));
    const auto loc = grid.locate(y);
    // stay clear of cell faces so the central difference sees one polynomial
    if (loc.s < 0.01 || loc.s > 0.99 || loc.t < 0.01 || loc.t > 0.99) continue;
    CHECK((eval_field_at(grid, c, y) + fd_gradient(phi, y, 1e-7)).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("mesh potential and radial field are periodic in theta") {
  const PolarFemGrid grid = PolarFemGrid::uniform(1.0, 3.0, 5, 12);
  const Eigen::VectorXd c = random_coeffs(grid, 8);
  for (double r : {1.3, 2.0, 2.7}) {
    const double lo = 1e-12, hi = kTwoPi - 1e-12;
    CHECK(eval_potential_at(grid, c, Vec2(r, lo)) == doctest::Approx(eval_potential_at(grid, c, Vec2(r, hi))));
    CHECK(eval_field_at(grid, c, Vec2(r, lo))(0) == doctest::Approx(eval_field_at(grid, c, Vec2(r, hi))(0)));
    const Vec2 a = eval_field_at(grid, c, Vec2(r, 0.4));
    const Vec2 b = eval_field_at(grid, c, Vec2(r, 0.4 + kTwoPi));
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
  }
  // potential vanishes on the Dirichlet walls
  CHECK(std::abs(eval_potential_at(grid, c, Vec2(1.0, 0.7))) < 1e-15);
  CHECK(std::abs(eval_potential_at(grid, c, Vec2(3.0, 0.7))) < 1e-15);
}

TEST_CASE("MeshField exposes the mesh field and constant b") {
  const PolarFemGrid grid = PolarFemGrid::uniform(1.0, 3.0, 5, 12);
  const Eigen::VectorXd c = random_coeffs(grid, 6);
  const MeshField field(grid, c, 2.5);
  const Vec2 y(2.2, 1.0);
  CHECK((field.e_curvilinear(y) - eval_field_at(grid, c, y)).norm() == 0.0);
  CHECK(field.b(y) == 2.5);
}
