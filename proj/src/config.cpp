#include "cvpic/config.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

namespace cvpic {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(trim(item));
  return out;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <class Enum, std::size_t N>
struct EnumTable {
  std::array<std::pair<const char*, Enum>, N> entries;

  std::optional<Enum> find(const std::string& name) const {
    for (const auto& [key, value] : entries)
      if (name == key) return value;
    return std::nullopt;
  }
  std::string name(Enum value) const {
    for (const auto& [key, v] : entries)
      if (v == value) return key;
    return "?";
  }
  std::string choices() const {
    std::string s;
    for (const auto& [key, v] : entries) s += (s.empty() ? "" : "|") + std::string(key);
    return s;
  }
};

constexpr EnumTable<Experiment, 5> kExperiments{{{{"single", Experiment::single},
                                                  {"converge_eps", Experiment::converge_eps},
                                                  {"converge_dt", Experiment::converge_dt},
                                                  {"diocotron", Experiment::diocotron},
                                                  {"structure_checks", Experiment::structure_checks}}}};
constexpr EnumTable<ChartKind, 3> kCharts{{{{"polar", ChartKind::polar},
                                            {"cylindrical", ChartKind::cylindrical},
                                            {"identity", ChartKind::identity}}}};
constexpr EnumTable<SchemeKind, 5> kSchemes{{{{"apsi1", SchemeKind::apsi1},
                                              {"apsi2", SchemeKind::apsi2},
                                              {"boris", SchemeKind::boris},
                                              {"gc_euler", SchemeKind::gc_euler},
                                              {"gc_rk2", SchemeKind::gc_rk2}}}};
constexpr EnumTable<InitKind, 3> kInits{{{{"raw", InitKind::raw},
                                          {"well_prepared", InitKind::well_prepared},
                                          {"gc_modified", InitKind::gc_modified}}}};
constexpr EnumTable<FieldKind, 3> kFields{{{{"benchmark", FieldKind::benchmark},
                                            {"cubic", FieldKind::cubic},
                                            {"self_consistent", FieldKind::self_consistent}}}};
constexpr EnumTable<ReferenceKind, 4> kReferences{{{{"none", ReferenceKind::none},
                                                    {"boris", ReferenceKind::boris},
                                                    {"gc_euler", ReferenceKind::gc_euler},
                                                    {"gc_rk2", ReferenceKind::gc_rk2}}}};
constexpr EnumTable<BoundaryPolicy, 2> kPolicies{{{{"deactivate", BoundaryPolicy::deactivate},
                                                   {"reflect", BoundaryPolicy::reflect}}}};

[[noreturn]] void parse_fail(const std::string& key, int line, const std::string& msg) {
  throw ConfigError(ConfigError::Kind::parse, key, line,
                    "line " + std::to_string(line) + ": " + msg);
}

[[noreturn]] void invalid(const std::string& field, const std::string& msg) {
  throw ConfigError(ConfigError::Kind::validation, field, 0, "invalid " + field + ": " + msg);
}

double scalar_or_fail(const std::string& key, const std::string& value, int line) {
  const auto x = parse_scalar(value);
  if (!x) parse_fail(key, line, "'" + key + "' expects a number, got '" + value + "'");
  return *x;
}

template <class Int>
Int integer_or_fail(const std::string& key, const std::string& value, int line) {
  Int out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec == std::errc{} && ptr == end) return out;
  // Accept integral floating notation such as 2e5.
  const auto x = parse_scalar(value);
  if (x && std::isfinite(*x) && *x == std::floor(*x) && std::abs(*x) < 9.0e18) {
    if constexpr (std::is_unsigned_v<Int>) {
      if (*x >= 0.0) return static_cast<Int>(*x);
    } else {
      return static_cast<Int>(*x);
    }
  }
  parse_fail(key, line, "'" + key + "' expects an integer, got '" + value + "'");
}

bool bool_or_fail(const std::string& key, const std::string& value, int line) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  parse_fail(key, line, "'" + key + "' expects true|false, got '" + value + "'");
}

template <class Enum, std::size_t N>
Enum enum_or_fail(const EnumTable<Enum, N>& table, const std::string& key, const std::string& value,
                  int line) {
  const auto v = table.find(value);
  if (!v) parse_fail(key, line, "'" + key + "' must be one of " + table.choices() + ", got '" + value + "'");
  return *v;
}

Vec2 pair_or_fail(const std::string& key, const std::string& value, int line) {
  const auto parts = split(value, ',');
  if (parts.size() != 2) parse_fail(key, line, "'" + key + "' expects two comma-separated numbers");
  return Vec2(scalar_or_fail(key, parts[0], line), scalar_or_fail(key, parts[1], line));
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value, int line)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"experiment", [](RunConfig& c, auto& k, auto& v, int l) { c.experiment = enum_or_fail(kExperiments, k, v, l); }},
      {"chart", [](RunConfig& c, auto& k, auto& v, int l) { c.chart = enum_or_fail(kCharts, k, v, l); }},
      {"scheme", [](RunConfig& c, auto& k, auto& v, int l) { c.scheme = enum_or_fail(kSchemes, k, v, l); }},
      {"epsilon", [](RunConfig& c, auto& k, auto& v, int l) { c.epsilon = scalar_or_fail(k, v, l); }},
      {"dt", [](RunConfig& c, auto& k, auto& v, int l) { c.dt = scalar_or_fail(k, v, l); }},
      {"t_final", [](RunConfig& c, auto& k, auto& v, int l) { c.t_final = scalar_or_fail(k, v, l); }},
      {"y0", [](RunConfig& c, auto& k, auto& v, int l) { c.y0 = pair_or_fail(k, v, l); }},
      {"v0", [](RunConfig& c, auto& k, auto& v, int l) { c.v0 = pair_or_fail(k, v, l); }},
      {"init", [](RunConfig& c, auto& k, auto& v, int l) { c.init = enum_or_fail(kInits, k, v, l); }},
      {"field", [](RunConfig& c, auto& k, auto& v, int l) { c.field = enum_or_fail(kFields, k, v, l); }},
      {"reference_scheme", [](RunConfig& c, auto& k, auto& v, int l) { c.reference = enum_or_fail(kReferences, k, v, l); }},
      {"max_reference_steps", [](RunConfig& c, auto& k, auto& v, int l) { c.max_reference_steps = integer_or_fail<std::uint64_t>(k, v, l); }},
      {"m_min", [](RunConfig& c, auto& k, auto& v, int l) { c.m_min = integer_or_fail<int>(k, v, l); }},
      {"m_max", [](RunConfig& c, auto& k, auto& v, int l) { c.m_max = integer_or_fail<int>(k, v, l); }},
      {"dt_base", [](RunConfig& c, auto& k, auto& v, int l) { c.dt_base = scalar_or_fail(k, v, l); }},
      {"levels", [](RunConfig& c, auto& k, auto& v, int l) { c.levels = integer_or_fail<int>(k, v, l); }},
      {"r0", [](RunConfig& c, auto& k, auto& v, int l) { c.r0 = scalar_or_fail(k, v, l); }},
      {"r_max", [](RunConfig& c, auto& k, auto& v, int l) { c.r_max = scalar_or_fail(k, v, l); }},
      {"n_r", [](RunConfig& c, auto& k, auto& v, int l) { c.n_r = integer_or_fail<int>(k, v, l); }},
      {"n_theta", [](RunConfig& c, auto& k, auto& v, int l) { c.n_theta = integer_or_fail<int>(k, v, l); }},
      {"dump_stiffness", [](RunConfig& c, auto& k, auto& v, int l) { c.dump_stiffness = bool_or_fail(k, v, l); }},
      {"r_minus", [](RunConfig& c, auto& k, auto& v, int l) { c.diocotron.r_minus = scalar_or_fail(k, v, l); }},
      {"r_plus", [](RunConfig& c, auto& k, auto& v, int l) { c.diocotron.r_plus = scalar_or_fail(k, v, l); }},
      {"alpha_perturb", [](RunConfig& c, auto& k, auto& v, int l) { c.diocotron.alpha_perturb = scalar_or_fail(k, v, l); }},
      {"mode", [](RunConfig& c, auto& k, auto& v, int l) { c.diocotron.mode = integer_or_fail<int>(k, v, l); }},
      {"ring_center", [](RunConfig& c, auto& k, auto& v, int l) { c.diocotron.center = scalar_or_fail(k, v, l); }},
      {"ring_width", [](RunConfig& c, auto& k, auto& v, int l) { c.diocotron.width = scalar_or_fail(k, v, l); }},
      {"n_particles", [](RunConfig& c, auto& k, auto& v, int l) { c.n_particles = integer_or_fail<std::size_t>(k, v, l); }},
      {"policy", [](RunConfig& c, auto& k, auto& v, int l) { c.policy = enum_or_fail(kPolicies, k, v, l); }},
      {"snapshot_times", [](RunConfig& c, auto& k, auto& v, int l) {
         c.snapshot_times.clear();
         if (v.empty()) return;
         for (const auto& part : split(v, ',')) c.snapshot_times.push_back(scalar_or_fail(k, part, l));
       }},
      {"max_mode", [](RunConfig& c, auto& k, auto& v, int l) { c.max_mode = integer_or_fail<int>(k, v, l); }},
      {"gc_ensemble", [](RunConfig& c, auto& k, auto& v, int l) { c.gc_ensemble = bool_or_fail(k, v, l); }},
      {"refinements", [](RunConfig& c, auto& k, auto& v, int l) {
         c.refinements.clear();
         for (const auto& part : split(v, ',')) c.refinements.push_back(integer_or_fail<int>(k, part, l));
       }},
      {"seed", [](RunConfig& c, auto& k, auto& v, int l) { c.seed = integer_or_fail<std::uint64_t>(k, v, l); }},
      {"threads", [](RunConfig& c, auto& k, auto& v, int l) { c.threads = integer_or_fail<int>(k, v, l); }},
      {"out_dir", [](RunConfig& c, auto&, auto& v, int) { c.out_dir = v; }},
  };
  return table;
}

bool positive(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

std::optional<double> parse_scalar(const std::string& text) {
  const std::string s = trim(text);
  if (s.empty()) return std::nullopt;
  // product/quotient of factors, each a number or "pi"
  double value = 1.0;
  char op = '*';
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t next = s.find_first_of("*/", pos);
    const std::string token = trim(s.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
    double factor;
    if (token == "pi") {
      factor = std::numbers::pi;
    } else if (token == "-pi") {
      factor = -std::numbers::pi;
    } else {
      const char* end = token.data() + token.size();
      const auto [ptr, ec] = std::from_chars(token.data(), end, factor);
      if (token.empty() || ec != std::errc{} || ptr != end) return std::nullopt;
    }
    value = op == '*' ? value * factor : value / factor;
    if (next == std::string::npos) break;
    op = s[next];
    pos = next + 1;
  }
  return value;
}

void RunConfig::validate() const {
  if (!positive(epsilon)) invalid("epsilon", "must be positive");
  if (!positive(dt)) invalid("dt", "must be positive");
  if (!positive(t_final)) invalid("t_final", "must be positive");
  if (t_final < dt) invalid("t_final", "must be at least dt");
  if (!y0.allFinite()) invalid("y0", "must be finite");
  if (!v0.allFinite()) invalid("v0", "must be finite");
  if (max_reference_steps < 1) invalid("max_reference_steps", "must be positive");
  if (threads < 1) invalid("threads", "must be at least 1");

  const bool mesh = experiment == Experiment::diocotron || field == FieldKind::self_consistent;
  if (experiment == Experiment::single || experiment == Experiment::converge_eps ||
      experiment == Experiment::converge_dt) {
    if (field == FieldKind::self_consistent) invalid("field", "single-particle runs need an analytic field");
    if (chart == ChartKind::cylindrical) invalid("chart", "single-particle runs are two-dimensional");
  }
  if (experiment == Experiment::converge_eps) {
    if (m_min < 0 || m_max <= m_min) invalid("m_max", "need 0 <= m_min < m_max");
    if (scheme != SchemeKind::apsi1 && scheme != SchemeKind::apsi2)
      invalid("scheme", "converge_eps sweeps apsi1 or apsi2");
  }
  if (experiment == Experiment::converge_dt) {
    if (!positive(dt_base)) invalid("dt_base", "must be positive");
    if (levels < 2 || levels > 30) invalid("levels", "must be in [2, 30]");
    if (scheme != SchemeKind::apsi1 && scheme != SchemeKind::apsi2)
      invalid("scheme", "converge_dt sweeps apsi1 or apsi2");
    if (t_final < dt_base) invalid("t_final", "must be at least dt_base");
  }
  if (mesh || experiment == Experiment::structure_checks) {
    if (!positive(r0)) invalid("r0", "must be positive");
    if (!(r_max > r0) || !std::isfinite(r_max)) invalid("r_max", "must exceed r0");
    if (n_r < 2) invalid("n_r", "must be at least 2");
    if (n_theta < 4) invalid("n_theta", "must be at least 4");
  }
  if (experiment == Experiment::diocotron) {
    if (chart != ChartKind::polar) invalid("chart", "diocotron runs on the polar annulus");
    if (scheme != SchemeKind::apsi1 && scheme != SchemeKind::apsi2)
      invalid("scheme", "diocotron pushes with apsi1 or apsi2");
    if (n_particles < 1) invalid("n_particles", "must be positive");
    if (max_mode < 1 || 2 * max_mode >= n_theta) invalid("max_mode", "must be in [1, n_theta/2)");
    try {
      diocotron.validate(r0, r_max);
    } catch (const std::invalid_argument& e) {
      invalid("diocotron", e.what());
    }
    for (double t : snapshot_times)
      if (!(t >= 0.0) || !std::isfinite(t)) invalid("snapshot_times", "must be non-negative");
  }
  if (experiment == Experiment::structure_checks) {
    if (refinements.size() < 2) invalid("refinements", "need at least two levels");
    for (int n : refinements)
      if (n < 4) invalid("refinements", "each level must be at least 4");
  }
}

std::size_t RunConfig::step_count() const {
  return static_cast<std::size_t>(std::llround(t_final / dt));
}

std::vector<std::string> RunConfig::resolved_lines() const {
  std::vector<std::string> out;
  auto add = [&out](const std::string& key, const std::string& value) { out.push_back(key + "=" + value); };
  auto join = [](const auto& values) {
    std::string s;
    for (const auto& v : values) {
      if (!s.empty()) s += ",";
      if constexpr (std::is_floating_point_v<std::decay_t<decltype(v)>>) s += fmt(v);
      else s += std::to_string(v);
    }
    return s;
  };
  add("experiment", to_string(experiment));
  add("chart", to_string(chart));
  add("scheme", to_string(scheme));
  add("epsilon", fmt(epsilon));
  add("dt", fmt(dt));
  add("t_final", fmt(t_final));
  add("y0", fmt(y0(0)) + "," + fmt(y0(1)));
  add("v0", fmt(v0(0)) + "," + fmt(v0(1)));
  add("init", to_string(init));
  add("field", to_string(field));
  add("reference_scheme", to_string(reference));
  add("max_reference_steps", std::to_string(max_reference_steps));
  add("m_min", std::to_string(m_min));
  add("m_max", std::to_string(m_max));
  add("dt_base", fmt(dt_base));
  add("levels", std::to_string(levels));
  add("r0", fmt(r0));
  add("r_max", fmt(r_max));
  add("n_r", std::to_string(n_r));
  add("n_theta", std::to_string(n_theta));
  add("dump_stiffness", dump_stiffness ? "true" : "false");
  add("r_minus", fmt(diocotron.r_minus));
  add("r_plus", fmt(diocotron.r_plus));
  add("alpha_perturb", fmt(diocotron.alpha_perturb));
  add("mode", std::to_string(diocotron.mode));
  add("ring_center", fmt(diocotron.center));
  add("ring_width", fmt(diocotron.width));
  add("n_particles", std::to_string(n_particles));
  add("policy", to_string(policy));
  add("snapshot_times", join(snapshot_times));
  add("max_mode", std::to_string(max_mode));
  add("gc_ensemble", gc_ensemble ? "true" : "false");
  add("refinements", join(refinements));
  add("seed", std::to_string(seed));
  add("threads", std::to_string(threads));
  add("out_dir", out_dir.string());
  return out;
}

RunConfig parse_config_string(const std::string& text) {
  RunConfig config;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string content = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) parse_fail("", line, "expected key=value, got '" + content + "'");
    const std::string key = trim(content.substr(0, eq));
    const std::string value = trim(content.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) parse_fail(key, line, "unknown key '" + key + "'");
    it->second(config, key, value, line);
  }
  config.validate();
  return config;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(ConfigError::Kind::parse, "", 0, "cannot open config file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_string(buffer.str());
}

CoordinateChart make_chart(const RunConfig& config) {
  switch (config.chart) {
    case ChartKind::polar:
      return config.experiment == Experiment::diocotron ? chart_polar(config.r0, config.r_max)
                                                        : chart_polar();
    case ChartKind::cylindrical:
      return chart_cylindrical();
    case ChartKind::identity:
      return chart_identity(2);
  }
  throw std::logic_error("unhandled chart");
}

Scheme particle_scheme(SchemeKind kind) {
  if (kind == SchemeKind::apsi1) return Scheme::apsi1;
  if (kind == SchemeKind::apsi2) return Scheme::apsi2;
  throw std::invalid_argument("not a semi-implicit particle scheme: " + to_string(kind));
}

std::string to_string(Experiment v) { return kExperiments.name(v); }
std::string to_string(ChartKind v) { return kCharts.name(v); }
std::string to_string(SchemeKind v) { return kSchemes.name(v); }
std::string to_string(InitKind v) { return kInits.name(v); }
std::string to_string(FieldKind v) { return kFields.name(v); }
std::string to_string(ReferenceKind v) { return kReferences.name(v); }
std::string to_string(BoundaryPolicy v) { return kPolicies.name(v); }

}  // namespace cvpic
