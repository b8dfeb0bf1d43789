#include "cvpic/pic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <thread>

namespace cvpic {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Runs body(begin, end) over [0, n) on up to `threads` workers.
template <class Body>
void parallel_for(std::size_t n, int threads, Body&& body) {
  const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    body(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk, end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] { body(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

double DiocotronParams::density(double r, double theta) const {
  if (r < r_minus || r > r_plus) return 0.0;
  return (1.0 + alpha_perturb * std::cos(mode * theta)) * std::exp(-width * (r - center) * (r - center));
}

void DiocotronParams::validate(double r0, double r_max) const {
  if (!(r0 < r_minus && r_minus < r_plus && r_plus < r_max))
    throw std::invalid_argument("diocotron annulus must satisfy r0 < r_minus < r_plus < r_max");
  if (mode < 1) throw std::invalid_argument("diocotron mode number must be >= 1");
  if (!(std::abs(alpha_perturb) <= 1.0))
    throw std::invalid_argument("diocotron perturbation must satisfy |alpha| <= 1");
  if (!(width > 0.0)) throw std::invalid_argument("diocotron width must be positive");
}

void ParticleEnsemble::push_back(const Vec2& position, const Vec2& velocity, double weight) {
  y.push_back(position);
  v.push_back(velocity);
  alpha.push_back(weight);
  active.push_back(1);
}

double ParticleEnsemble::active_charge() const {
  double q = 0.0;
  for (std::size_t s = 0; s < size(); ++s)
    if (active[s]) q += alpha[s];
  return q;
}

std::size_t ParticleEnsemble::active_count() const {
  return static_cast<std::size_t>(std::count(active.begin(), active.end(), std::uint8_t{1}));
}

double diocotron_total_charge(const DiocotronParams& params, int panels) {
  if (panels < 2 || panels % 2 != 0) throw std::invalid_argument("Simpson needs an even panel count");
  const double hr = (params.r_plus - params.r_minus) / panels;
  const double ht = kTwoPi / panels;
  auto simpson_weight = [panels](int k) { return (k == 0 || k == panels) ? 1.0 : (k % 2 ? 4.0 : 2.0); };
  double sum = 0.0;
  for (int a = 0; a <= panels; ++a) {
    const double r = params.r_minus + a * hr;
    double row = 0.0;
    for (int b = 0; b <= panels; ++b) row += simpson_weight(b) * params.density(r, b * ht);
    sum += simpson_weight(a) * r * row;
  }
  return sum * hr * ht / 9.0;
}

ParticleEnsemble sample_diocotron(const DiocotronParams& params, std::size_t n_particles,
                                  std::uint64_t seed) {
  if (n_particles < 1) throw std::invalid_argument("need at least one particle");
  if (!(params.r_minus > 0.0 && params.r_minus < params.r_plus) || params.mode < 1 ||
      !(std::abs(params.alpha_perturb) <= 1.0))
    throw std::invalid_argument("invalid diocotron parameters");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  // r rho0 <= r_plus (1 + |alpha|)
  const double envelope = params.r_plus * (1.0 + std::abs(params.alpha_perturb));
  const double weight = diocotron_total_charge(params) / static_cast<double>(n_particles);

  ParticleEnsemble out;
  out.y.reserve(n_particles);
  out.v.reserve(n_particles);
  out.alpha.reserve(n_particles);
  out.active.reserve(n_particles);
  while (out.size() < n_particles) {
    const double r = params.r_minus + (params.r_plus - params.r_minus) * unit(rng);
    const double theta = kTwoPi * unit(rng);
    if (envelope * unit(rng) > r * params.density(r, theta)) continue;
    const double vx = normal(rng);
    const double vy = normal(rng);
    out.push_back(Vec2(r, theta), Vec2(vx, vy), weight);
  }
  return out;
}

Eigen::VectorXd deposit_nodal(const ParticleEnsemble& ensemble, const PolarFemGrid& grid) {
  Eigen::VectorXd nodal = Eigen::VectorXd::Zero(grid.node_count());
  for (std::size_t s = 0; s < ensemble.size(); ++s) {
    if (!ensemble.active[s]) continue;
    const auto loc = grid.locate(ensemble.y[s]);
    const auto w = PolarFemGrid::basis_values(loc);
    const auto nodes = grid.cell_nodes(loc.i, loc.j);
    for (int p = 0; p < 4; ++p) nodal(nodes[p]) += ensemble.alpha[s] * w[p];
  }
  return nodal;
}

Eigen::VectorXd deposit_charge(const ParticleEnsemble& ensemble, const PolarFemGrid& grid) {
  const Eigen::VectorXd nodal = deposit_nodal(ensemble, grid);
  // Free DOFs are the contiguous interior rings i = 1..n_r-1.
  return nodal.segment(grid.n_theta(), grid.dof_count());
}

void apply_boundary(ParticleEnsemble& ensemble, const PolarFemGrid& grid, BoundaryPolicy policy) {
  const double r0 = grid.r0(), r_max = grid.r_max();
  for (std::size_t s = 0; s < ensemble.size(); ++s) {
    if (!ensemble.active[s]) continue;
    Vec2& y = ensemble.y[s];
    double theta = std::fmod(y(1), kTwoPi);
    if (theta < 0.0) theta += kTwoPi;
    if (theta >= kTwoPi) theta = 0.0;
    y(1) = theta;

    const double r = y(0);
    if (r > r0 && r < r_max) continue;
    if (policy == BoundaryPolicy::deactivate || !std::isfinite(r)) {
      ensemble.active[s] = 0;
      continue;
    }
    // Mirror across the wall that was crossed; reverse the radial velocity.
    double reflected = r <= r0 ? 2.0 * r0 - r : 2.0 * r_max - r;
    if (!(reflected > r0 && reflected < r_max)) {
      ensemble.active[s] = 0;
      continue;
    }
    y(0) = reflected;
    const Vec2 e_r(std::cos(theta), std::sin(theta));
    Vec2& v = ensemble.v[s];
    v -= 2.0 * v.dot(e_r) * e_r;
  }
}

PotentialCoefficients solve_for_ensemble(const ParticleEnsemble& ensemble, const PicContext& context) {
  return solve_poisson(context.stiffness, deposit_charge(ensemble, context.grid));
}

PotentialCoefficients pic_step(ParticleEnsemble& ensemble, const PicContext& context) {
  PotentialCoefficients potential = solve_for_ensemble(ensemble, context);
  const MeshField field(context.grid, potential.values, context.b);

  parallel_for(ensemble.size(), context.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      if (!ensemble.active[s]) continue;
      try {
        const ParticleState next =
            scheme_step(context.scheme, {ensemble.y[s], ensemble.v[s]}, field, context.chart,
                        context.params);
        ensemble.y[s] = next.y;
        ensemble.v[s] = next.v;
      } catch (const OutOfDomainError&) {
        // two-stage midpoint left the annulus: treat as a wall hit at the pre-step state
        ensemble.active[s] = 0;
      }
    }
  });

  apply_boundary(ensemble, context.grid, context.policy);
  return potential;
}

}  // namespace cvpic
