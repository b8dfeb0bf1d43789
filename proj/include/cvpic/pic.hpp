#pragma once

#include <cstdint>
#include <vector>

#include "cvpic/fields.hpp"
#include "cvpic/pushers.hpp"

namespace cvpic {

// Annular initial density (1 + alpha cos(l theta)) exp(-width (r - center)^2) on [r_minus, r_plus].
struct DiocotronParams {
  double r_minus = 5.0;
  double r_plus = 8.0;
  double alpha_perturb = 0.2;
  int mode = 5;
  double center = 6.5;
  double width = 4.0;

  double density(double r, double theta) const;
  /// Throws std::invalid_argument unless r0 < r_minus < r_plus < r_max and mode >= 1.
  void validate(double r0, double r_max) const;
};

struct ParticleEnsemble {
  std::vector<Vec2> y;
  std::vector<Vec2> v;
  std::vector<double> alpha;
  std::vector<std::uint8_t> active;

  std::size_t size() const { return y.size(); }
  void push_back(const Vec2& position, const Vec2& velocity, double weight);
  double active_charge() const;
  std::size_t active_count() const;
};

/// int int r rho0(r, theta) dr dtheta by composite Simpson on `panels` x `panels`.
double diocotron_total_charge(const DiocotronParams& params, int panels = 512);

/// Rejection-samples positions from r rho0 on [r_minus, r_plus] x [0, 2pi) and
/// standard-normal 2D velocities. Equal weights Q_total / n. Deterministic in seed.
ParticleEnsemble sample_diocotron(const DiocotronParams& params, std::size_t n_particles,
                                  std::uint64_t seed);

/// Nodal CIC weights sum_s alpha_s W_j(Y_s) on every node, Dirichlet rings included.
Eigen::VectorXd deposit_nodal(const ParticleEnsemble& ensemble, const PolarFemGrid& grid);
/// The Poisson right-hand side: nodal deposition restricted to free DOFs.
Eigen::VectorXd deposit_charge(const ParticleEnsemble& ensemble, const PolarFemGrid& grid);

enum class BoundaryPolicy { deactivate, reflect };

/// Wraps theta into [0, 2pi) and handles radial exits: deactivate freezes the
/// particle outside the annulus, reflect mirrors r and the radial velocity.
void apply_boundary(ParticleEnsemble& ensemble, const PolarFemGrid& grid, BoundaryPolicy policy);

struct PicContext {
  const PolarFemGrid& grid;
  const StiffnessMatrix& stiffness;
  const CoordinateChart& chart;
  SchemeParams params;
  Scheme scheme = Scheme::apsi1;
  BoundaryPolicy policy = BoundaryPolicy::deactivate;
  double b = 1.0;
  int threads = 1;
};

/// One deposit/solve/push/boundary cycle, in place. Returns the potential that
/// drove the push (the field at the pre-step positions).
PotentialCoefficients pic_step(ParticleEnsemble& ensemble, const PicContext& context);

/// Solves for the potential of the current active particles.
PotentialCoefficients solve_for_ensemble(const ParticleEnsemble& ensemble, const PicContext& context);

}  // namespace cvpic
