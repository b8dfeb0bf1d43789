#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cvpic/geometry.hpp"
#include "cvpic/pic.hpp"
#include "cvpic/pushers.hpp"

namespace cvpic {

// Parse errors carry the 1-based line; validation errors carry the offending field.
class ConfigError : public std::runtime_error {
 public:
  enum class Kind { parse, validation };
  ConfigError(Kind kind, const std::string& field, int line, const std::string& what)
      : std::runtime_error(what), kind_(kind), field_(field), line_(line) {}
  Kind kind() const { return kind_; }
  const std::string& field() const { return field_; }
  int line() const { return line_; }

 private:
  Kind kind_;
  std::string field_;
  int line_;
};

enum class Experiment { single, converge_eps, converge_dt, diocotron, structure_checks };
enum class ChartKind { polar, cylindrical, identity };
enum class SchemeKind { apsi1, apsi2, boris, gc_euler, gc_rk2 };
enum class InitKind { raw, well_prepared, gc_modified };
enum class FieldKind { benchmark, cubic, self_consistent };
enum class ReferenceKind { none, boris, gc_euler, gc_rk2 };

struct RunConfig {
  Experiment experiment = Experiment::single;
  ChartKind chart = ChartKind::polar;
  SchemeKind scheme = SchemeKind::apsi1;
  double epsilon = 0.0625;
  double dt = 0.1;
  double t_final = 4.0;
  Vec2 y0 = Vec2(0.36, 0.6);
  Vec2 v0 = Vec2(-0.7, 0.08);
  InitKind init = InitKind::raw;
  FieldKind field = FieldKind::benchmark;
  ReferenceKind reference = ReferenceKind::none;
  std::uint64_t max_reference_steps = 100'000'000;

  // converge_eps: eps = 2^-m, m = m_min..m_max; converge_dt: dt = dt_base 2^-i, i = 0..levels-1
  int m_min = 2;
  int m_max = 10;
  double dt_base = 0.15707963267948966;  // pi/20
  int levels = 7;

  // mesh
  double r0 = 1.0;
  double r_max = 12.566370614359172;  // 4 pi
  int n_r = 64;
  int n_theta = 64;
  bool dump_stiffness = false;

  // diocotron
  DiocotronParams diocotron;
  std::size_t n_particles = 200'000;
  BoundaryPolicy policy = BoundaryPolicy::deactivate;
  std::vector<double> snapshot_times = {10.0, 20.0, 30.0};
  int max_mode = 8;
  bool gc_ensemble = false;

  // structure checks
  std::vector<int> refinements = {16, 32, 64};

  std::uint64_t seed = 42;
  int threads = 1;
  std::filesystem::path out_dir = "out";

  /// Throws ConfigError(validation) naming the first offending field.
  void validate() const;
  /// Every key in canonical order as "key=value", suitable for re-parsing.
  std::vector<std::string> resolved_lines() const;
  std::size_t step_count() const;
};

RunConfig parse_config_string(const std::string& text);
/// Throws ConfigError(parse) for a missing file, malformed line, or unknown key.
RunConfig parse_config(const std::filesystem::path& path);

/// Parses a scalar such as "0.1", "1e-3", "pi", "pi/20" or "2*pi".
std::optional<double> parse_scalar(const std::string& text);

CoordinateChart make_chart(const RunConfig& config);
Scheme particle_scheme(SchemeKind kind);

std::string to_string(Experiment v);
std::string to_string(ChartKind v);
std::string to_string(SchemeKind v);
std::string to_string(InitKind v);
std::string to_string(FieldKind v);
std::string to_string(ReferenceKind v);
std::string to_string(BoundaryPolicy v);

}  // namespace cvpic
