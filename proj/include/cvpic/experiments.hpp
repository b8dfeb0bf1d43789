#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cvpic/config.hpp"
#include "cvpic/diagnostics.hpp"

namespace cvpic {

inline constexpr const char* kFormatVersion = "cvpic-csv 1";

// ---- single particle -------------------------------------------------------

struct TrajectoryRow {
  std::size_t step = 0;
  double t = 0.0;
  Vec2 y = Vec2::Zero();  // curvilinear position
  Vec2 v = Vec2::Zero();  // Cartesian velocity components
  Vec2 x = Vec2::Zero();  // F(y)
};

struct SingleEnergyRow {
  double kinetic = 0.0;
  double potential = 0.0;
  double total = 0.0;
  double rel_err = 0.0;  // (H - H0) / |H0|
};

struct SingleRun {
  std::vector<TrajectoryRow> trajectory;
  std::vector<SingleEnergyRow> energy;
  std::vector<TrajectoryRow> reference;  // empty unless a reference scheme is configured
};

AnalyticFieldModel make_field_model(FieldKind kind, double epsilon);
/// v0 from the config, replaced by the drift-manifold velocity for well_prepared data.
Vec2 initial_velocity(const RunConfig& config, const FieldProvider& field,
                      const CoordinateChart& chart);
/// Period per axis (0 for walls), for wrapped trajectory differences.
Vec2 chart_periods(const CoordinateChart& chart);

/// Integrates `kind` for `steps` steps of size dt from (y0, v0); row 0 is the initial state.
std::vector<TrajectoryRow> integrate(SchemeKind kind, const Vec2& y0, const Vec2& v0,
                                     const AnalyticFieldModel& model, const CoordinateChart& chart,
                                     double dt, std::size_t steps);

/// Boris reference sampled at the coarse times k dt: each coarse step is split into
/// ceil(dt / eps^2) substeps. Throws std::runtime_error if the total exceeds max_steps.
std::vector<TrajectoryRow> boris_reference(const Vec2& y0, const Vec2& v0,
                                           const AnalyticFieldModel& model,
                                           const CoordinateChart& chart, double dt,
                                           std::size_t steps, std::uint64_t max_steps);

SingleRun simulate_single(const RunConfig& config);

// ---- sweeps ------------------------------------------------------------------

struct SweepSeries {
  std::string name;
  std::vector<double> sweep;       // eps or dt
  std::vector<Vec2> err;           // componentwise: max over time (eps sweep) or final (dt sweep)
  std::vector<double> err_norm;    // Euclidean counterpart used for the slope
  double slope = 0.0;
};

/// eps = 2^-m, m = m_min..m_max: max_n |y^n - u^n| against the paired guiding-center
/// scheme (apsi1 with forward Euler, apsi2 with the two-stage scheme), raw and well_prepared.
std::vector<SweepSeries> converge_eps(const RunConfig& config);

/// dt = dt_base 2^-i: final-time error against one Boris reference shared by all levels.
SweepSeries converge_dt(const RunConfig& config);

// ---- diocotron -----------------------------------------------------------------

struct DiocotronSample {
  double t = 0.0;
  std::vector<double> modes;  // |c_m|/|c_0|, m = 0..max_mode
  double active_charge = 0.0;
  std::size_t active_count = 0;
  EnergyRecord energy;
};

struct DensitySnapshot {
  double t = 0.0;
  DensityGrid density;
};

struct DiocotronRun {
  std::vector<DiocotronSample> history;  // one per step, t = 0 .. t_final
  std::vector<DensitySnapshot> snapshots;
  std::vector<DensitySnapshot> gc_snapshots;
  std::vector<DiocotronSample> gc_history;
};

DiocotronRun simulate_diocotron(const RunConfig& config);

// ---- structure checks ----------------------------------------------------------

struct CheckRow {
  std::string name;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct FemStudy {
  std::vector<int> cells;
  std::vector<double> l2_errors;
  std::vector<double> residuals;
  double order = 0.0;
};

/// Manufactured solution phi = sin(pi (r - r0)/(r_max - r0)) (2 + cos 2 theta).
FemStudy fem_manufactured_study(double r0, double r_max, const std::vector<int>& refinements);

std::vector<CheckRow> structure_checks(const RunConfig& config);

// ---- file output ----------------------------------------------------------------

/// Runs the configured experiment into config.out_dir; returns the files written.
std::vector<std::filesystem::path> run_experiment(const RunConfig& config);

std::vector<std::filesystem::path> run_single(const RunConfig& config);
std::vector<std::filesystem::path> run_convergence(const RunConfig& config);
std::vector<std::filesystem::path> run_diocotron(const RunConfig& config);
std::vector<std::filesystem::path> run_structure_checks(const RunConfig& config);

}  // namespace cvpic
