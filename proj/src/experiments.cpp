#include "cvpic/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace cvpic {

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string short_fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

bool is_gc(SchemeKind kind) { return kind == SchemeKind::gc_euler || kind == SchemeKind::gc_rk2; }

SchemeKind paired_gc(SchemeKind kind) {
  return kind == SchemeKind::apsi1 ? SchemeKind::gc_euler : SchemeKind::gc_rk2;
}

Vec2 wrapped_difference(const Vec2& a, const Vec2& b, const Vec2& periods) {
  Vec2 d = a - b;
  for (int k = 0; k < 2; ++k)
    if (periods(k) > 0.0) d(k) -= periods(k) * std::round(d(k) / periods(k));
  return d;
}

Vec2 to_vec2(const Point& p) { return {p(0), p(1)}; }

// A CSV file with the common comment header: format version, resolved config, extras.
class CsvFile {
 public:
  CsvFile(const std::filesystem::path& path, const RunConfig& config,
          const std::vector<std::string>& notes, const std::string& columns)
      : path_(path), out_(path) {
    if (!out_) throw std::runtime_error("cannot write '" + path.string() + "'");
    out_ << "# " << kFormatVersion << '\n';
    for (const auto& line : config.resolved_lines()) out_ << "# " << line << '\n';
    for (const auto& note : notes) out_ << "# " << note << '\n';
    if (!columns.empty()) out_ << columns << '\n';
  }

  void row(const std::vector<double>& values, const std::string& prefix = {}) {
    std::string line = prefix;
    for (double v : values) {
      if (!line.empty()) line += ',';
      line += fmt(v);
    }
    out_ << line << '\n';
  }
  void raw(const std::string& line) { out_ << line << '\n'; }

  const std::filesystem::path& path() const { return path_; }

  ~CsvFile() { out_.flush(); }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

std::filesystem::path prepare_out_dir(const RunConfig& config) {
  std::filesystem::create_directories(config.out_dir);
  return config.out_dir;
}

}  // namespace

// ---- single particle -------------------------------------------------------

AnalyticFieldModel make_field_model(FieldKind kind, double epsilon) {
  switch (kind) {
    case FieldKind::benchmark:
      return make_benchmark_field(epsilon);
    case FieldKind::cubic:
      return make_cubic_potential_field(epsilon);
    case FieldKind::self_consistent:
      break;
  }
  throw std::invalid_argument("the self-consistent field has no analytic model");
}

Vec2 initial_velocity(const RunConfig& config, const FieldProvider& field,
                      const CoordinateChart& chart) {
  if (config.init == InitKind::well_prepared)
    return well_prepared_velocity(config.y0, field, chart, config.epsilon);
  return config.v0;
}

Vec2 chart_periods(const CoordinateChart& chart) {
  Vec2 periods = Vec2::Zero();
  const auto& box = chart.domain_box();
  for (int k = 0; k < 2 && k < static_cast<int>(box.size()); ++k)
    if (box[k].kind == BoundaryKind::periodic) periods(k) = box[k].hi - box[k].lo;
  return periods;
}

std::vector<TrajectoryRow> integrate(SchemeKind kind, const Vec2& y0, const Vec2& v0,
                                     const AnalyticFieldModel& model, const CoordinateChart& chart,
                                     double dt, std::size_t steps) {
  const AnalyticField field(model, chart);
  const SchemeParams params(dt, model.epsilon);
  std::vector<TrajectoryRow> rows;
  rows.reserve(steps + 1);

  auto record = [&](std::size_t n, const Vec2& y, const Vec2& v) {
    rows.push_back({n, static_cast<double>(n) * dt, y, v, chart.forward2(y)});
  };

  switch (kind) {
    case SchemeKind::apsi1:
    case SchemeKind::apsi2: {
      const Scheme scheme = particle_scheme(kind);
      ParticleState s{y0, v0};
      record(0, s.y, s.v);
      for (std::size_t n = 1; n <= steps; ++n) {
        s = scheme_step(scheme, s, field, chart, params);
        record(n, s.y, s.v);
      }
      break;
    }
    case SchemeKind::boris: {
      if (!chart.has_inverse()) throw std::invalid_argument("boris output needs an invertible chart");
      CartesianState s{chart.forward2(y0), v0};
      record(0, y0, v0);
      for (std::size_t n = 1; n <= steps; ++n) {
        s = boris_step(s, model, params);
        record(n, to_vec2(chart.inverse(to_point(s.x))), s.v);
      }
      break;
    }
    case SchemeKind::gc_euler:
    case SchemeKind::gc_rk2: {
      // v column: the drift-manifold velocity at the guiding center
      Vec2 u = y0;
      record(0, u, well_prepared_velocity(u, field, chart, model.epsilon));
      for (std::size_t n = 1; n <= steps; ++n) {
        u = kind == SchemeKind::gc_euler ? gc_euler_step(u, field, chart, dt)
                                         : gc_rk2_step(u, field, chart, dt);
        record(n, u, well_prepared_velocity(u, field, chart, model.epsilon));
      }
      break;
    }
  }
  return rows;
}

std::vector<TrajectoryRow> boris_reference(const Vec2& y0, const Vec2& v0,
                                           const AnalyticFieldModel& model,
                                           const CoordinateChart& chart, double dt,
                                           std::size_t steps, std::uint64_t max_steps) {
  if (!chart.has_inverse()) throw std::invalid_argument("boris reference needs an invertible chart");
  const double eps = model.epsilon;
  const double ratio = dt / (eps * eps);
  const auto sub = static_cast<std::uint64_t>(std::max(1.0, std::ceil(ratio * (1.0 - 1e-12))));
  const double total = static_cast<double>(sub) * static_cast<double>(steps);
  if (total > static_cast<double>(max_steps)) {
    std::ostringstream os;
    os << "boris reference needs " << static_cast<std::uint64_t>(total)
       << " steps (dt_ref <= eps^2), above max_reference_steps=" << max_steps;
    throw std::runtime_error(os.str());
  }
  const SchemeParams params(dt / static_cast<double>(sub), eps);

  std::vector<TrajectoryRow> rows;
  rows.reserve(steps + 1);
  CartesianState s{chart.forward2(y0), v0};
  rows.push_back({0, 0.0, y0, v0, s.x});
  for (std::size_t n = 1; n <= steps; ++n) {
    for (std::uint64_t k = 0; k < sub; ++k) s = boris_step(s, model, params);
    rows.push_back({n, static_cast<double>(n) * dt, to_vec2(chart.inverse(to_point(s.x))), s.v, s.x});
  }
  return rows;
}

SingleRun simulate_single(const RunConfig& config) {
  const CoordinateChart chart = make_chart(config);
  const AnalyticFieldModel model = make_field_model(config.field, config.epsilon);
  const AnalyticField field(model, chart);
  const Vec2 v0 = initial_velocity(config, field, chart);
  const Vec2 u0 = config.init == InitKind::gc_modified
                      ? gc_modified_initial(config.y0, config.v0, field, chart, config.epsilon)
                      : config.y0;
  const std::size_t steps = config.step_count();

  SingleRun run;
  run.trajectory = integrate(config.scheme, is_gc(config.scheme) ? u0 : config.y0, v0, model, chart,
                             config.dt, steps);

  double h0 = 0.0;
  for (const auto& row : run.trajectory) {
    SingleEnergyRow e;
    e.kinetic = 0.5 * row.v.squaredNorm();
    e.potential = model.potential(row.x);
    e.total = e.kinetic + e.potential;
    if (row.step == 0) h0 = e.total;
    e.rel_err = h0 != 0.0 ? (e.total - h0) / std::abs(h0) : e.total - h0;
    run.energy.push_back(e);
  }

  switch (config.reference) {
    case ReferenceKind::none:
      break;
    case ReferenceKind::boris:
      run.reference = boris_reference(config.y0, v0, model, chart, config.dt, steps,
                                      config.max_reference_steps);
      break;
    case ReferenceKind::gc_euler:
      run.reference = integrate(SchemeKind::gc_euler, u0, v0, model, chart, config.dt, steps);
      break;
    case ReferenceKind::gc_rk2:
      run.reference = integrate(SchemeKind::gc_rk2, u0, v0, model, chart, config.dt, steps);
      break;
  }
  return run;
}

// ---- sweeps ------------------------------------------------------------------

std::vector<SweepSeries> converge_eps(const RunConfig& config) {
  const CoordinateChart chart = make_chart(config);
  const Vec2 periods = chart_periods(chart);
  const std::size_t steps = config.step_count();
  std::vector<SweepSeries> out;

  for (InitKind init : {InitKind::raw, InitKind::well_prepared}) {
    SweepSeries series;
    series.name = to_string(config.scheme) + "_" + to_string(init);
    for (int m = config.m_min; m <= config.m_max; ++m) {
      const double eps = std::ldexp(1.0, -m);
      const AnalyticFieldModel model = make_field_model(config.field, eps);
      const AnalyticField field(model, chart);
      const Vec2 v0 = init == InitKind::well_prepared
                          ? well_prepared_velocity(config.y0, field, chart, eps)
                          : config.v0;
      const auto y = integrate(config.scheme, config.y0, v0, model, chart, config.dt, steps);
      const auto u = integrate(paired_gc(config.scheme), config.y0, v0, model, chart, config.dt, steps);
      Vec2 worst = Vec2::Zero();
      double worst_norm = 0.0;
      for (std::size_t n = 0; n <= steps; ++n) {
        const Vec2 d = wrapped_difference(y[n].y, u[n].y, periods);
        worst = worst.cwiseMax(d.cwiseAbs());
        worst_norm = std::max(worst_norm, d.norm());
      }
      series.sweep.push_back(eps);
      series.err.push_back(worst);
      series.err_norm.push_back(worst_norm);
    }
    series.slope = loglog_slope(series.sweep, series.err_norm);
    out.push_back(std::move(series));
  }
  return out;
}

SweepSeries converge_dt(const RunConfig& config) {
  const CoordinateChart chart = make_chart(config);
  const Vec2 periods = chart_periods(chart);
  const AnalyticFieldModel model = make_field_model(config.field, config.epsilon);
  const AnalyticField field(model, chart);
  const Vec2 v0 = initial_velocity(config, field, chart);

  const double coarse = config.t_final / config.dt_base;
  const auto n0 = static_cast<std::size_t>(std::llround(coarse));
  if (n0 < 1 || std::abs(coarse - static_cast<double>(n0)) > 1e-9 * coarse)
    throw ConfigError(ConfigError::Kind::validation, "dt_base", 0,
                      "invalid dt_base: t_final must be an integer multiple of dt_base");
  const std::size_t n_finest = n0 << (config.levels - 1);

  const auto ref = boris_reference(config.y0, v0, model, chart,
                                   config.t_final / static_cast<double>(n_finest), n_finest,
                                   config.max_reference_steps);
  const Vec2 y_ref = ref.back().y;

  SweepSeries series;
  series.name = to_string(config.scheme) + "_" + to_string(config.init);
  for (int i = 0; i < config.levels; ++i) {
    const std::size_t steps = n0 << i;
    const double dt = config.t_final / static_cast<double>(steps);
    const auto y = integrate(config.scheme, config.y0, v0, model, chart, dt, steps);
    const Vec2 d = wrapped_difference(y.back().y, y_ref, periods);
    series.sweep.push_back(dt);
    series.err.push_back(d.cwiseAbs());
    series.err_norm.push_back(d.norm());
  }
  series.slope = loglog_slope(series.sweep, series.err_norm);
  return series;
}

// ---- diocotron -----------------------------------------------------------------

namespace {

DiocotronSample observe(const ParticleEnsemble& ensemble, const PolarFemGrid& grid,
                        int max_mode, double t) {
  DiocotronSample s;
  s.t = t;
  s.modes = theta_mode_amplitudes(density_grid(ensemble, grid), max_mode);
  s.active_charge = ensemble.active_charge();
  s.active_count = ensemble.active_count();
  return s;
}

}  // namespace

DiocotronRun simulate_diocotron(const RunConfig& config) {
  const PolarFemGrid grid = PolarFemGrid::uniform(config.r0, config.r_max, config.n_r, config.n_theta);
  const StiffnessMatrix stiffness = assemble_stiffness(grid);
  const CoordinateChart chart = make_chart(config);
  const PicContext context{grid,
                           stiffness,
                           chart,
                           SchemeParams(config.dt, config.epsilon),
                           particle_scheme(config.scheme),
                           config.policy,
                           1.0,
                           config.threads};

  ParticleEnsemble ensemble = sample_diocotron(config.diocotron, config.n_particles, config.seed);
  ParticleEnsemble centers = ensemble;  // guiding-center ensemble (velocities unused)
  const std::size_t steps = config.step_count();

  DiocotronRun run;
  std::vector<bool> taken(config.snapshot_times.size(), false);
  auto maybe_snapshot = [&](double t) {
    for (std::size_t k = 0; k < config.snapshot_times.size(); ++k) {
      if (taken[k] || t < config.snapshot_times[k] - 0.5 * config.dt * (1.0 + 1e-9)) continue;
      taken[k] = true;
      run.snapshots.push_back({config.snapshot_times[k], density_grid(ensemble, grid)});
      if (config.gc_ensemble)
        run.gc_snapshots.push_back({config.snapshot_times[k], density_grid(centers, grid)});
    }
  };

  for (std::size_t n = 0; n <= steps; ++n) {
    const double t = static_cast<double>(n) * config.dt;
    maybe_snapshot(t);
    DiocotronSample sample = observe(ensemble, grid, config.max_mode, t);
    // kinetic part from the pre-push velocities, potential part from the pre-push positions
    const double kinetic = total_energy(ensemble, stiffness, Eigen::VectorXd(), t).kinetic;
    const PotentialCoefficients potential =
        n < steps ? pic_step(ensemble, context) : solve_for_ensemble(ensemble, context);
    sample.energy = total_energy(ParticleEnsemble{}, stiffness, potential.values, t);
    sample.energy.kinetic = kinetic;
    sample.energy.total += kinetic;
    run.history.push_back(std::move(sample));

    if (config.gc_ensemble) {
      DiocotronSample gc = observe(centers, grid, config.max_mode, t);
      const PotentialCoefficients phi = solve_for_ensemble(centers, context);
      gc.energy = total_energy(ParticleEnsemble{}, stiffness, phi.values, t);
      run.gc_history.push_back(std::move(gc));
      if (n < steps) {
        const MeshField field(grid, phi.values, context.b);
        for (std::size_t s = 0; s < centers.size(); ++s) {
          if (!centers.active[s]) continue;
          try {
            centers.y[s] = config.scheme == SchemeKind::apsi1
                               ? gc_euler_step(centers.y[s], field, chart, config.dt)
                               : gc_rk2_step(centers.y[s], field, chart, config.dt);
          } catch (const OutOfDomainError&) {
            centers.active[s] = 0;
          }
        }
        apply_boundary(centers, grid, BoundaryPolicy::deactivate);
      }
    }
  }
  return run;
}

// ---- structure checks ----------------------------------------------------------

FemStudy fem_manufactured_study(double r0, double r_max, const std::vector<int>& refinements) {
  const double k = std::numbers::pi / (r_max - r0);
  auto exact = [=](double r, double th) { return std::sin(k * (r - r0)) * (2.0 + std::cos(2.0 * th)); };
  auto source = [=](double r, double th) {
    const double s = std::sin(k * (r - r0)), c = std::cos(k * (r - r0));
    return (k * k * s - k * c / r) * (2.0 + std::cos(2.0 * th)) + 4.0 * s * std::cos(2.0 * th) / (r * r);
  };
  FemStudy study;
  for (int n : refinements) {
    const PolarFemGrid grid = PolarFemGrid::uniform(r0, r_max, n, n);
    const StiffnessMatrix m = assemble_stiffness(grid);
    const PotentialCoefficients phi = solve_poisson(m, assemble_load(grid, source));
    study.cells.push_back(n);
    study.l2_errors.push_back(l2_error(grid, phi.values, exact));
    study.residuals.push_back(phi.relative_residual);
  }
  std::vector<double> h;
  for (int n : study.cells) h.push_back(1.0 / n);
  study.order = loglog_slope(h, study.l2_errors);
  return study;
}

std::vector<CheckRow> structure_checks(const RunConfig& config) {
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  std::vector<CheckRow> rows;
  auto add = [&rows](const std::string& name, double residual, double tol) {
    rows.push_back({name, residual, tol, residual < tol || (tol == 0.0 && residual == 0.0)});
  };

  const CoordinateChart polar = chart_polar();
  const AnalyticFieldModel model = make_benchmark_field(config.epsilon);
  const auto b_of_y = [&](const Vec2& y) { return model.b_scalar(polar.forward2(y)); };

  {
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<Vec2> ys;
      std::vector<double> ws;
      for (int s = 0; s < 3; ++s) {
        ys.emplace_back(uniform(0.5, 3.0), uniform(0.0, 2.0 * std::numbers::pi));
        ws.push_back(uniform(0.1, 2.0));
      }
      const Eigen::MatrixXd k = poisson_matrix(ys, ws, polar, b_of_y, config.epsilon);
      worst = std::max(worst, (k + k.transpose()).cwiseAbs().maxCoeff());
    }
    add("skew_symmetry", worst, 1e-12);
  }
  {
    double worst = 0.0;
    const double weight = 0.7;
    const auto structure = [&](const Eigen::VectorXd& z) {
      const std::vector<Vec2> ys{Vec2(z(0), z(1))};
      const std::vector<double> ws{weight};
      return poisson_matrix(ys, ws, polar, b_of_y, config.epsilon);
    };
    for (int trial = 0; trial < 5; ++trial) {
      Eigen::VectorXd z(4);
      z << uniform(0.5, 3.0), uniform(0.0, 2.0 * std::numbers::pi), uniform(-1.0, 1.0), uniform(-1.0, 1.0);
      worst = std::max(worst, jacobi_identity_residual(structure, z));
    }
    add("jacobi_identity_fd", worst, 1e-5);
  }
  {
    double cube = 0.0, projection = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::Vector3d b(uniform(-1.0, 1.0), uniform(-1.0, 1.0), uniform(-1.0, 1.0));
      const HatMatrixReport r = hat_matrix_checks(b, rng(), 1);
      cube = std::max(cube, r.cube_residual);
      projection = std::max(projection, r.projection_residual);
    }
    add("hat_cube", cube, 1e-13);
    add("hat_projection", projection, 1e-13);
  }
  {
    double worst = 0.0;
    const Mat2 k = rotation_generator();
    for (int trial = 0; trial < 1000; ++trial) {
      const double beta = uniform(-1e6, 1e6);
      const Mat2 product = (Mat2::Identity() - beta * k) * rotation_inverse(beta);
      worst = std::max(worst, (product - Mat2::Identity()).cwiseAbs().maxCoeff());
    }
    add("rotation_inverse", worst, 1e-14);
  }
  {
    double n_residual = 0.0, round_trip = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const Vec2 y(uniform(0.1, 10.0), uniform(0.0, 2.0 * std::numbers::pi));
      const Mat2 nd = n_matrix2(polar, y) * polar.jacobian2(y).transpose();
      n_residual = std::max(n_residual, (nd - Mat2::Identity()).cwiseAbs().maxCoeff());
      const Vec2 back = to_vec2(polar.inverse(polar.forward(to_point(y))));
      round_trip = std::max(round_trip, (back - y).cwiseAbs().maxCoeff() / std::max(1.0, y.norm()));
    }
    add("polar_n_times_jacobian_t", n_residual, 1e-12);
    add("polar_round_trip", round_trip, 1e-12);
  }
  {
    const FemStudy fem = fem_manufactured_study(config.r0, config.r_max, config.refinements);
    add("fem_l2_order_deviation", std::abs(fem.order - 2.0), 0.2);
    double res = 0.0;
    for (double r : fem.residuals) res = std::max(res, r);
    rows.push_back({"fem_solver_residual", res, kPoissonTolerance, res <= kPoissonTolerance});
  }
  return rows;
}

// ---- file output ----------------------------------------------------------------

std::vector<std::filesystem::path> run_single(const RunConfig& config) {
  const auto dir = prepare_out_dir(config);
  const SingleRun run = simulate_single(config);
  std::vector<std::filesystem::path> files;

  {
    CsvFile f(dir / "trajectory.csv", config, {"y: curvilinear position, v: Cartesian velocity, x = F(y)"},
              "step,t,y1,y2,v1,v2,x1,x2");
    for (const auto& r : run.trajectory)
      f.row({static_cast<double>(r.step), r.t, r.y(0), r.y(1), r.v(0), r.v(1), r.x(0), r.x(1)});
    files.push_back(f.path());
  }
  {
    CsvFile f(dir / "energy.csv", config, {"total = |v|^2/2 + phi(x); rel_err = (total - total_0)/|total_0|"},
              "step,t,kinetic,potential_analytic,total,rel_err");
    for (std::size_t n = 0; n < run.energy.size(); ++n) {
      const auto& e = run.energy[n];
      f.row({static_cast<double>(n), run.trajectory[n].t, e.kinetic, e.potential, e.total, e.rel_err});
    }
    files.push_back(f.path());
  }
  if (!run.reference.empty()) {
    {
      CsvFile f(dir / "reference.csv", config, {"reference: " + to_string(config.reference)},
                "step,t,y1,y2,v1,v2,x1,x2");
      for (const auto& r : run.reference)
        f.row({static_cast<double>(r.step), r.t, r.y(0), r.y(1), r.v(0), r.v(1), r.x(0), r.x(1)});
      files.push_back(f.path());
    }
    const Vec2 periods = chart_periods(make_chart(config));
    std::vector<Vec2> a, b;
    for (const auto& r : run.trajectory) a.push_back(r.y);
    for (const auto& r : run.reference) b.push_back(r.y);
    const TrajectoryError err = trajectory_error(a, b, periods);
    CsvFile f(dir / "error.csv", config,
              {"final_abs=" + fmt(err.final_abs(0)) + "," + fmt(err.final_abs(1)),
               "max_euclidean=" + fmt(err.max_euclidean)},
              "step,t,err_y1,err_y2,err_norm");
    for (std::size_t n = 0; n < a.size(); ++n) {
      const Vec2 d = wrapped_difference(a[n], b[n], periods).cwiseAbs();
      f.row({static_cast<double>(n), run.trajectory[n].t, d(0), d(1), err.per_step[n]});
    }
    files.push_back(f.path());
  }
  return files;
}

std::vector<std::filesystem::path> run_convergence(const RunConfig& config) {
  const auto dir = prepare_out_dir(config);
  std::vector<SweepSeries> all;
  std::vector<std::string> notes;
  if (config.experiment == Experiment::converge_eps) {
    all = converge_eps(config);
    notes = {"sweep_value = eps; errors are max over time of |y^n - u^n|",
             "guiding-center pairing: apsi1 with forward Euler, apsi2 with the two-stage gamma scheme"};
  } else {
    all = {converge_dt(config)};
    notes = {"sweep_value = dt; errors are |y^N - y_ref(T)| at t_final",
             "reference: boris with dt_ref <= eps^2"};
  }
  std::vector<std::filesystem::path> files;
  {
    CsvFile f(dir / "errors.csv", config, notes, "series,sweep_value,err_y1,err_y2,err_norm");
    for (const auto& s : all)
      for (std::size_t k = 0; k < s.sweep.size(); ++k)
        f.row({s.sweep[k], s.err[k](0), s.err[k](1), s.err_norm[k]}, s.name);
    files.push_back(f.path());
  }
  {
    CsvFile f(dir / "slopes.csv", config, {"least-squares slope of log(err_norm) against log(sweep_value)"},
              "series,slope");
    for (const auto& s : all) f.row({s.slope}, s.name);
    files.push_back(f.path());
  }
  return files;
}

namespace {

std::filesystem::path write_density(const std::filesystem::path& path, const RunConfig& config,
                                    const DensitySnapshot& snap) {
  CsvFile f(path, config,
            {"node values of r*rho~, row i = radial node, column j = theta node, row-major",
             "metadata row: n_r_nodes,n_theta,r0,r_max,t"},
            "");
  f.row({static_cast<double>(snap.density.n_r_nodes), static_cast<double>(snap.density.n_theta),
         config.r0, config.r_max, snap.t});
  for (int i = 0; i < snap.density.n_r_nodes; ++i) {
    std::vector<double> row(snap.density.n_theta);
    for (int j = 0; j < snap.density.n_theta; ++j) row[j] = snap.density.at(i, j);
    f.row(row);
  }
  return f.path();
}

void write_history(std::vector<std::filesystem::path>& files, const std::filesystem::path& dir,
                   const std::string& prefix, const RunConfig& config,
                   const std::vector<DiocotronSample>& history) {
  {
    std::string columns = "t";
    for (int m = 1; m <= config.max_mode; ++m) columns += ",amp" + std::to_string(m);
    CsvFile f(dir / (prefix + "modes.csv"), config,
              {"amp_m = |c_m|/|c_0|, c_m = (1/N_theta) sum_j P_j exp(-i m theta_j),",
               "P_j = radially integrated r*rho~ on theta node j; cos(m theta) of relative size a reads a/2"},
              columns);
    for (const auto& s : history) {
      std::vector<double> row{s.t};
      row.insert(row.end(), s.modes.begin() + 1, s.modes.end());
      f.row(row);
    }
    files.push_back(f.path());
  }
  {
    CsvFile f(dir / (prefix + "energy.csv"), config,
              {"kinetic = sum alpha |v|^2/2 over active particles; potential = Phi^T M Phi / 2"},
              "t,kinetic,potential,total");
    for (const auto& s : history) f.row({s.t, s.energy.kinetic, s.energy.potential, s.energy.total});
    files.push_back(f.path());
  }
  {
    CsvFile f(dir / (prefix + "charge.csv"), config, {}, "t,active_charge,active_count");
    for (const auto& s : history) f.row({s.t, s.active_charge, static_cast<double>(s.active_count)});
    files.push_back(f.path());
  }
}

}  // namespace

std::vector<std::filesystem::path> run_diocotron(const RunConfig& config) {
  const auto dir = prepare_out_dir(config);
  DiocotronRun run = simulate_diocotron(config);
  std::vector<std::filesystem::path> files;
  for (const auto& snap : run.snapshots)
    files.push_back(write_density(dir / ("density_t" + short_fmt(snap.t) + ".csv"), config, snap));
  write_history(files, dir, "", config, run.history);
  if (config.gc_ensemble) {
    for (const auto& snap : run.gc_snapshots)
      files.push_back(write_density(dir / ("gc_density_t" + short_fmt(snap.t) + ".csv"), config, snap));
    write_history(files, dir, "gc_", config, run.gc_history);
  }
  if (config.dump_stiffness) {
    const PolarFemGrid grid = PolarFemGrid::uniform(config.r0, config.r_max, config.n_r, config.n_theta);
    std::ofstream out(dir / "stiffness.txt");
    out << "# " << kFormatVersion << "\n# row col value (free-DOF indices)\n";
    assemble_stiffness(grid).write_triplets(out);
    files.push_back(dir / "stiffness.txt");
  }
  return files;
}

std::vector<std::filesystem::path> run_structure_checks(const RunConfig& config) {
  const auto dir = prepare_out_dir(config);
  const auto rows = structure_checks(config);
  CsvFile f(dir / "checks.csv", config, {}, "check_name,max_residual,tolerance,pass");
  for (const auto& r : rows) f.raw(r.name + "," + fmt(r.max_residual) + "," + fmt(r.tolerance) + "," + (r.pass ? "1" : "0"));
  return {f.path()};
}

std::vector<std::filesystem::path> run_experiment(const RunConfig& config) {
  config.validate();
  switch (config.experiment) {
    case Experiment::single:
      return run_single(config);
    case Experiment::converge_eps:
    case Experiment::converge_dt:
      return run_convergence(config);
    case Experiment::diocotron:
      return run_diocotron(config);
    case Experiment::structure_checks:
      return run_structure_checks(config);
  }
  throw std::logic_error("unhandled experiment");
}

}  // namespace cvpic
