#include "cvpic/fields.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include <Eigen/IterativeLinearSolvers>

namespace cvpic {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct GaussRule {
  std::vector<double> points;   // on [0, 1]
  std::vector<double> weights;  // sum to 1
};

GaussRule gauss2() {
  const double d = 0.5 / std::sqrt(3.0);
  return {{0.5 - d, 0.5 + d}, {0.5, 0.5}};
}

GaussRule gauss3() {
  const double d = 0.5 * std::sqrt(0.6);
  return {{0.5 - d, 0.5, 0.5 + d}, {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0}};
}

double coefficient_at(const Eigen::VectorXd& coeffs, int dof) { return dof < 0 ? 0.0 : coeffs(dof); }

}  // namespace

AnalyticFieldModel make_benchmark_field(double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  AnalyticFieldModel m;
  m.epsilon = epsilon;
  m.e_field = [](const Vec2& x) { return Vec2(-x); };
  m.b_scalar = [epsilon](const Vec2& x) { return 1.0 + epsilon * std::sin(x.norm()); };
  m.potential = [](const Vec2& x) { return 0.5 * x.squaredNorm(); };
  return m;
}

AnalyticFieldModel make_cubic_potential_field(double epsilon) {
  AnalyticFieldModel m = make_benchmark_field(epsilon);
  m.e_field = [](const Vec2& x) { return Vec2(-x(0) * x(0), -x(1) * x(1)); };
  m.potential = [](const Vec2& x) { return (x(0) * x(0) * x(0) + x(1) * x(1) * x(1)) / 3.0; };
  return m;
}

Vec2 AnalyticField::e_curvilinear(const Vec2& y) const {
  const Mat2 d = chart_.jacobian2(y);
  return d.transpose() * model_.e_field(chart_.forward2(y));
}

double AnalyticField::b(const Vec2& y) const { return model_.b_scalar(chart_.forward2(y)); }

// ---------------------------------------------------------------------------

PolarFemGrid::PolarFemGrid(std::vector<double> r_nodes, int n_theta)
    : r_nodes_(std::move(r_nodes)), n_theta_(n_theta), dtheta_(kTwoPi / n_theta) {
  if (r_nodes_.size() < 3) throw std::invalid_argument("need at least two radial cells");
  if (n_theta_ < 3) throw std::invalid_argument("need at least three theta cells");
  if (!(r_nodes_.front() > 0.0)) throw std::invalid_argument("r0 must be positive");
  for (std::size_t i = 1; i < r_nodes_.size(); ++i)
    if (!(r_nodes_[i] > r_nodes_[i - 1]))
      throw std::invalid_argument("radial nodes must be strictly increasing");
  const double h = (r_nodes_.back() - r_nodes_.front()) / n_r();
  uniform_r_ = true;
  for (int i = 0; i <= n_r(); ++i)
    if (std::abs(r_nodes_[i] - (r_nodes_.front() + i * h)) > 1e-12 * r_nodes_.back())
      uniform_r_ = false;
}

PolarFemGrid PolarFemGrid::uniform(double r0, double r_max, int n_r, int n_theta) {
  if (n_r < 2) throw std::invalid_argument("n_r must be at least 2");
  std::vector<double> nodes(n_r + 1);
  for (int i = 0; i <= n_r; ++i) nodes[i] = r0 + (r_max - r0) * i / n_r;
  nodes.back() = r_max;
  return PolarFemGrid(std::move(nodes), n_theta);
}

PolarFemGrid::Location PolarFemGrid::locate(const Vec2& y) const {
  const double r = y(0);
  if (!(r >= r0() && r <= r_max())) {
    std::ostringstream os;
    os << "r = " << r << " outside [" << r0() << ", " << r_max() << "]";
    throw OutOfDomainError(os.str());
  }
  int i;
  if (uniform_r_) {
    i = static_cast<int>((r - r0()) / (r_max() - r0()) * n_r());
  } else {
    i = static_cast<int>(std::upper_bound(r_nodes_.begin(), r_nodes_.end(), r) - r_nodes_.begin()) - 1;
  }
  i = std::clamp(i, 0, n_r() - 1);
  const double s = (r - r_nodes_[i]) / (r_nodes_[i + 1] - r_nodes_[i]);

  double theta = std::fmod(y(1), kTwoPi);
  if (theta < 0.0) theta += kTwoPi;
  double u = theta / dtheta_;
  int j = static_cast<int>(u);
  if (j >= n_theta_) j = n_theta_ - 1;
  return {i, j, std::clamp(s, 0.0, 1.0), std::clamp(u - j, 0.0, 1.0)};
}

std::array<int, 4> PolarFemGrid::cell_nodes(int i, int j) const {
  const int jp = (j + 1) % n_theta_;
  return {node_index(i, j), node_index(i + 1, j), node_index(i, jp), node_index(i + 1, jp)};
}

std::array<double, 4> PolarFemGrid::basis_values(const Location& loc) {
  const double s = loc.s, t = loc.t;
  return {(1 - s) * (1 - t), s * (1 - t), (1 - s) * t, s * t};
}

std::array<Vec2, 4> PolarFemGrid::basis_gradients(const Location& loc) const {
  const double hr = r_nodes_[loc.i + 1] - r_nodes_[loc.i];
  const double s = loc.s, t = loc.t;
  return {Vec2(-(1 - t) / hr, -(1 - s) / dtheta_), Vec2((1 - t) / hr, -s / dtheta_),
          Vec2(-t / hr, (1 - s) / dtheta_), Vec2(t / hr, s / dtheta_)};
}

void StiffnessMatrix::write_triplets(std::ostream& out) const {
  char buf[96];
  for (int k = 0; k < matrix.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(matrix, k); it; ++it) {
      std::snprintf(buf, sizeof buf, "%ld %ld %.17g\n", static_cast<long>(it.row()),
                    static_cast<long>(it.col()), it.value());
      out << buf;
    }
}

StiffnessMatrix assemble_stiffness(const PolarFemGrid& grid) {
  const GaussRule g = gauss2();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(grid.n_r()) * grid.n_theta() * 16);

  for (int i = 0; i < grid.n_r(); ++i) {
    const double hr = grid.r_node(i + 1) - grid.r_node(i);
    const double area = hr * grid.dtheta();
    for (int j = 0; j < grid.n_theta(); ++j) {
      double local[4][4] = {};
      for (std::size_t a = 0; a < g.points.size(); ++a)
        for (std::size_t b = 0; b < g.points.size(); ++b) {
          const PolarFemGrid::Location loc{i, j, g.points[a], g.points[b]};
          const double r = grid.r_node(i) + g.points[a] * hr;
          const double w = g.weights[a] * g.weights[b] * area;
          const auto grad = grid.basis_gradients(loc);
          for (int p = 0; p < 4; ++p)
            for (int q = 0; q < 4; ++q)
              local[p][q] += w * (r * grad[p](0) * grad[q](0) + grad[p](1) * grad[q](1) / r);
        }

      const int jp = (j + 1) % grid.n_theta();
      const int dofs[4] = {grid.dof_index(i, j), grid.dof_index(i + 1, j), grid.dof_index(i, jp),
                           grid.dof_index(i + 1, jp)};
      for (int p = 0; p < 4; ++p) {
        if (dofs[p] < 0) continue;
        for (int q = 0; q < 4; ++q)
          if (dofs[q] >= 0) triplets.emplace_back(dofs[p], dofs[q], local[p][q]);
      }
    }
  }

  StiffnessMatrix m;
  m.matrix.resize(grid.dof_count(), grid.dof_count());
  m.matrix.setFromTriplets(triplets.begin(), triplets.end());
  m.matrix.makeCompressed();
  return m;
}

PotentialCoefficients solve_poisson(const StiffnessMatrix& matrix, const Eigen::VectorXd& rhs,
                                    double tolerance, int max_iterations) {
  if (rhs.size() != matrix.size())
    throw std::invalid_argument("right-hand side length does not match the DOF count");

  PotentialCoefficients out;
  const double rhs_norm = rhs.norm();
  if (rhs_norm == 0.0) {
    out.values = Eigen::VectorXd::Zero(rhs.size());
    return out;
  }

  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
  // Iterate against a slightly tighter target so the true residual meets the contract.
  cg.setTolerance(0.25 * tolerance);
  cg.setMaxIterations(max_iterations > 0 ? max_iterations : 10 * static_cast<int>(rhs.size()));
  cg.compute(matrix.matrix);
  out.values = cg.solve(rhs);
  out.iterations = static_cast<int>(cg.iterations());
  out.relative_residual = (matrix.matrix * out.values - rhs).norm() / rhs_norm;
  if (cg.info() != Eigen::Success || !(out.relative_residual <= tolerance)) {
    std::ostringstream os;
    os << "conjugate gradients did not converge: relative residual " << out.relative_residual
       << " after " << out.iterations << " iterations";
    throw NoConvergenceError(os.str(), out.relative_residual);
  }
  return out;
}

Vec2 eval_field_at(const PolarFemGrid& grid, const Eigen::VectorXd& coeffs, const Vec2& y) {
  const auto loc = grid.locate(y);
  const auto grad = grid.basis_gradients(loc);
  const int jp = (loc.j + 1) % grid.n_theta();
  const double c[4] = {coefficient_at(coeffs, grid.dof_index(loc.i, loc.j)),
                       coefficient_at(coeffs, grid.dof_index(loc.i + 1, loc.j)),
                       coefficient_at(coeffs, grid.dof_index(loc.i, jp)),
                       coefficient_at(coeffs, grid.dof_index(loc.i + 1, jp))};
  Vec2 e = Vec2::Zero();
  for (int p = 0; p < 4; ++p) e -= c[p] * grad[p];
  return e;
}

double eval_potential_at(const PolarFemGrid& grid, const Eigen::VectorXd& coeffs, const Vec2& y) {
  const auto loc = grid.locate(y);
  const auto w = PolarFemGrid::basis_values(loc);
  const int jp = (loc.j + 1) % grid.n_theta();
  return w[0] * coefficient_at(coeffs, grid.dof_index(loc.i, loc.j)) +
         w[1] * coefficient_at(coeffs, grid.dof_index(loc.i + 1, loc.j)) +
         w[2] * coefficient_at(coeffs, grid.dof_index(loc.i, jp)) +
         w[3] * coefficient_at(coeffs, grid.dof_index(loc.i + 1, jp));
}

Eigen::VectorXd assemble_load(const PolarFemGrid& grid,
                              const std::function<double(double, double)>& source) {
  const GaussRule g = gauss3();
  Eigen::VectorXd load = Eigen::VectorXd::Zero(grid.dof_count());
  for (int i = 0; i < grid.n_r(); ++i) {
    const double hr = grid.r_node(i + 1) - grid.r_node(i);
    for (int j = 0; j < grid.n_theta(); ++j) {
      const int jp = (j + 1) % grid.n_theta();
      const int dofs[4] = {grid.dof_index(i, j), grid.dof_index(i + 1, j), grid.dof_index(i, jp),
                           grid.dof_index(i + 1, jp)};
      for (std::size_t a = 0; a < g.points.size(); ++a)
        for (std::size_t b = 0; b < g.points.size(); ++b) {
          const PolarFemGrid::Location loc{i, j, g.points[a], g.points[b]};
          const double r = grid.r_node(i) + g.points[a] * hr;
          const double theta = (j + g.points[b]) * grid.dtheta();
          const double w = g.weights[a] * g.weights[b] * hr * grid.dtheta() * r;
          const double f = source(r, theta);
          const auto phi = PolarFemGrid::basis_values(loc);
          for (int p = 0; p < 4; ++p)
            if (dofs[p] >= 0) load(dofs[p]) += w * f * phi[p];
        }
    }
  }
  return load;
}

double l2_error(const PolarFemGrid& grid, const Eigen::VectorXd& coeffs,
                const std::function<double(double, double)>& exact) {
  const GaussRule g = gauss3();
  double sum = 0.0;
  for (int i = 0; i < grid.n_r(); ++i) {
    const double hr = grid.r_node(i + 1) - grid.r_node(i);
    for (int j = 0; j < grid.n_theta(); ++j)
      for (std::size_t a = 0; a < g.points.size(); ++a)
        for (std::size_t b = 0; b < g.points.size(); ++b) {
          const double r = grid.r_node(i) + g.points[a] * hr;
          const double theta = (j + g.points[b]) * grid.dtheta();
          const double w = g.weights[a] * g.weights[b] * hr * grid.dtheta() * r;
          const double diff = eval_potential_at(grid, coeffs, Vec2(r, theta)) - exact(r, theta);
          sum += w * diff * diff;
        }
  }
  return std::sqrt(sum);
}

}  // namespace cvpic
