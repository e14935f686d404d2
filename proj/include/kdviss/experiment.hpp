#pragma once

// Configuration-driven experiment runner.
//
// Config files are flat `key = value` text with dotted section keys; `#`
// starts a comment. Recognized keys (defaults in brackets):
//
//   preset                  [none]  `figure1` runs the two-simulation preset
//   domain.L                required
//   domain.n_interior       required
//   time.T                  required
//   time.dt                 [1e-3]
//   initial.family          [one_minus_cosine] | zero | sine | smooth
//   initial.amplitude       [1]
//   initial.mode            [1]      (sine)
//   initial.graph_norm      [1]      (smooth; target graph norm)
//   disturbance.kind        [zero] | cosine
//   disturbance.amplitude   [0]
//   disturbance.frequency   [1]
//   saturation.kind         [none] | pointwise | hilbert
//   saturation.level        [1]
//   analysis.axioms         [false]
//   analysis.axiom_samples  [10000]
//   analysis.dissipation    [none] | V | V1 | V2
//   analysis.gap            [false]
//   analysis.semiglobal     []       comma-separated r values
//   analysis.semiglobal_samples [5]
//   analysis.semiglobal_T   [time.T]
//   analysis.certificate    [false]
//   certificate.z0_scales   [0,0.5,1,2,4]
//   certificate.d_scales    [0,0.5,1,2]
//   output.states           [false]
//   rng_seed                [1]
//   output_dir              [out]

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kdviss/closed_loop.hpp"
#include "kdviss/errors.hpp"
#include "kdviss/iss.hpp"
#include "kdviss/kdv.hpp"
#include "kdviss/lyapunov.hpp"
#include "kdviss/saturation.hpp"

namespace kdviss {

/// Parse or validation failure. `line` is 0 when the problem is a missing key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, int line, const std::string& what)
      : std::runtime_error(line > 0 ? "config line " + std::to_string(line) + " (" + field + "): " + what
                                    : "config field '" + field + "': " + what),
        field_(std::move(field)),
        line_(line) {}

  const std::string& field() const noexcept { return field_; }
  int line() const noexcept { return line_; }

 private:
  std::string field_;
  int line_;
};

/// The certificate step could not produce a valid certificate.
class CertificationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DissipationChoice { None, V, V1, V2 };

struct ExperimentConfig {
  std::string preset;
  double length = 0.0;
  std::size_t n_interior = 0;
  double t_final = 0.0;
  double dt = 1e-3;
  std::string initial_family = "one_minus_cosine";
  double initial_amplitude = 1.0;
  int initial_mode = 1;
  double initial_graph_norm = 1.0;
  std::string disturbance_kind = "zero";
  double disturbance_amplitude = 0.0;
  double disturbance_frequency = 1.0;
  std::string saturation_kind = "none";
  double saturation_level = 1.0;
  bool axioms = false;
  long axiom_samples = 10000;
  DissipationChoice dissipation = DissipationChoice::None;
  bool gap = false;
  std::vector<double> semiglobal_r;
  long semiglobal_samples = 5;
  std::optional<double> semiglobal_t;
  bool certificate = false;
  std::vector<double> certificate_z0_scales{0.0, 0.5, 1.0, 2.0, 4.0};
  std::vector<double> certificate_d_scales{0.0, 0.5, 1.0, 2.0};
  bool write_states = false;
  std::uint64_t rng_seed = 1;
  std::string output_dir = "out";

  /// Echo of the parsed key/value pairs in file order.
  std::vector<std::pair<std::string, std::string>> echo;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v, int line) {
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE || !std::isfinite(x)) {
    throw ConfigError(key, line, "expected a finite number, got '" + v + "'");
  }
  return x;
}

inline long parse_long(const std::string& key, const std::string& v, int line) {
  errno = 0;
  char* end = nullptr;
  const long x = std::strtol(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE) {
    throw ConfigError(key, line, "expected an integer, got '" + v + "'");
  }
  return x;
}

inline bool parse_bool(const std::string& key, const std::string& v, int line) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key, line, "expected a boolean, got '" + v + "'");
}

inline std::vector<double> parse_list(const std::string& key, const std::string& v, int line) {
  std::vector<double> out;
  if (v.empty()) return out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item), line));
  return out;
}

inline void require_choice(const std::string& key, const std::string& v, int line,
                           std::initializer_list<const char*> allowed) {
  for (const char* a : allowed) {
    if (v == a) return;
  }
  throw ConfigError(key, line, "unsupported value '" + v + "'");
}

}  // namespace detail

inline ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::map<std::string, int> seen;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(line, line_no, "expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("", line_no, "empty key");
    if (seen.count(key)) throw ConfigError(key, line_no, "duplicate key");
    seen[key] = line_no;
    cfg.echo.emplace_back(key, val);
    const int l = line_no;

    if (key == "preset") {
      detail::require_choice(key, val, l, {"figure1", "none"});
      cfg.preset = val == "none" ? "" : val;
    } else if (key == "domain.L") {
      cfg.length = detail::parse_double(key, val, l);
    } else if (key == "domain.n_interior") {
      const long n = detail::parse_long(key, val, l);
      if (n < 5) throw ConfigError(key, l, "must be >= 5");
      cfg.n_interior = static_cast<std::size_t>(n);
    } else if (key == "time.T") {
      cfg.t_final = detail::parse_double(key, val, l);
    } else if (key == "time.dt") {
      cfg.dt = detail::parse_double(key, val, l);
    } else if (key == "initial.family") {
      detail::require_choice(key, val, l, {"one_minus_cosine", "zero", "sine", "smooth"});
      cfg.initial_family = val;
    } else if (key == "initial.amplitude") {
      cfg.initial_amplitude = detail::parse_double(key, val, l);
    } else if (key == "initial.mode") {
      cfg.initial_mode = static_cast<int>(detail::parse_long(key, val, l));
    } else if (key == "initial.graph_norm") {
      cfg.initial_graph_norm = detail::parse_double(key, val, l);
    } else if (key == "disturbance.kind") {
      detail::require_choice(key, val, l, {"zero", "cosine"});
      cfg.disturbance_kind = val;
    } else if (key == "disturbance.amplitude") {
      cfg.disturbance_amplitude = detail::parse_double(key, val, l);
    } else if (key == "disturbance.frequency") {
      cfg.disturbance_frequency = detail::parse_double(key, val, l);
    } else if (key == "saturation.kind") {
      detail::require_choice(key, val, l, {"none", "pointwise", "hilbert"});
      cfg.saturation_kind = val;
    } else if (key == "saturation.level") {
      cfg.saturation_level = detail::parse_double(key, val, l);
    } else if (key == "analysis.axioms") {
      cfg.axioms = detail::parse_bool(key, val, l);
    } else if (key == "analysis.axiom_samples") {
      cfg.axiom_samples = detail::parse_long(key, val, l);
      if (cfg.axiom_samples < 1) throw ConfigError(key, l, "must be >= 1");
    } else if (key == "analysis.dissipation") {
      detail::require_choice(key, val, l, {"none", "V", "V1", "V2"});
      cfg.dissipation = val == "V"    ? DissipationChoice::V
                        : val == "V1" ? DissipationChoice::V1
                        : val == "V2" ? DissipationChoice::V2
                                      : DissipationChoice::None;
    } else if (key == "analysis.gap") {
      cfg.gap = detail::parse_bool(key, val, l);
    } else if (key == "analysis.semiglobal") {
      cfg.semiglobal_r = detail::parse_list(key, val, l);
      for (double r : cfg.semiglobal_r) {
        if (!(r > 0.0)) throw ConfigError(key, l, "r values must be positive");
      }
    } else if (key == "analysis.semiglobal_samples") {
      cfg.semiglobal_samples = detail::parse_long(key, val, l);
      if (cfg.semiglobal_samples < 1) throw ConfigError(key, l, "must be >= 1");
    } else if (key == "analysis.semiglobal_T") {
      cfg.semiglobal_t = detail::parse_double(key, val, l);
    } else if (key == "analysis.certificate") {
      cfg.certificate = detail::parse_bool(key, val, l);
    } else if (key == "certificate.z0_scales") {
      cfg.certificate_z0_scales = detail::parse_list(key, val, l);
    } else if (key == "certificate.d_scales") {
      cfg.certificate_d_scales = detail::parse_list(key, val, l);
    } else if (key == "output.states") {
      cfg.write_states = detail::parse_bool(key, val, l);
    } else if (key == "rng_seed") {
      const long s = detail::parse_long(key, val, l);
      if (s < 0) throw ConfigError(key, l, "must be non-negative");
      cfg.rng_seed = static_cast<std::uint64_t>(s);
    } else if (key == "output_dir") {
      if (val.empty()) throw ConfigError(key, l, "must not be empty");
      cfg.output_dir = val;
    } else {
      throw ConfigError(key, l, "unknown key");
    }
  }

  if (cfg.preset == "figure1") return cfg;

  auto line_of = [&](const char* k) { return seen.count(k) ? seen[k] : 0; };
  for (const char* k : {"domain.L", "domain.n_interior", "time.T"}) {
    if (!seen.count(k)) throw ConfigError(k, 0, "missing required field");
  }
  if (!(cfg.length > 0.0)) throw ConfigError("domain.L", line_of("domain.L"), "must be positive");
  if (!(cfg.t_final > 0.0)) throw ConfigError("time.T", line_of("time.T"), "must be positive");
  if (!(cfg.dt > 0.0) || cfg.dt > cfg.t_final) {
    throw ConfigError("time.dt", line_of("time.dt"), "must lie in (0, T]");
  }
  if (!(cfg.saturation_level > 0.0)) {
    throw ConfigError("saturation.level", line_of("saturation.level"), "must be positive");
  }
  const double k = cfg.saturation_kind == "hilbert" ? 3.0 : 1.0;
  if (!(cfg.dt * k < 1.0)) {
    throw ConfigError("time.dt", line_of("time.dt"), "violates dt * k * |B|^2 < 1");
  }
  if (cfg.dissipation == DissipationChoice::V && cfg.saturation_kind != "none") {
    throw ConfigError("analysis.dissipation", line_of("analysis.dissipation"),
                      "V is only an ISS-Lyapunov function for the unsaturated loop");
  }
  if ((cfg.dissipation == DissipationChoice::V1 || cfg.dissipation == DissipationChoice::V2) &&
      cfg.saturation_kind == "none") {
    throw ConfigError("analysis.dissipation", line_of("analysis.dissipation"),
                      "V1/V2 need a saturation");
  }
  if (cfg.dissipation == DissipationChoice::V2 &&
      (cfg.disturbance_kind != "zero" && cfg.disturbance_amplitude != 0.0)) {
    throw ConfigError("analysis.dissipation", line_of("analysis.dissipation"), "V2 needs d = 0");
  }
  return cfg;
}

inline ExperimentConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), 0, "cannot open config file");
  return parse_config(in);
}

/// Resolves a relative output directory against $KDVISS_OUTPUT_ROOT when set.
inline std::filesystem::path resolve_output_dir(const std::string& dir) {
  std::filesystem::path p(dir);
  if (p.is_relative()) {
    if (const char* root = std::getenv("KDVISS_OUTPUT_ROOT"); root && *root) {
      return std::filesystem::path(root) / p;
    }
  }
  return p;
}

/// Tracks the files written by one run and emits the manifest.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  const std::filesystem::path& dir() const noexcept { return dir_; }

  void write(const std::string& name, const std::function<void(std::ostream&)>& body) {
    std::ofstream out(dir_ / name, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + (dir_ / name).string());
    body(out);
    if (!out) throw std::runtime_error("write failed for " + (dir_ / name).string());
    files_.push_back(name);
  }

  const std::vector<std::string>& files() const noexcept { return files_; }

  void write_manifest(const std::vector<std::pair<std::string, std::string>>& config_echo,
                      const std::vector<std::pair<std::string, std::string>>& notes) {
    std::ofstream out(dir_ / "manifest.txt", std::ios::binary | std::ios::trunc);
    out << "# artifacts\n";
    for (const auto& f : files_) out << "file=" << f << '\n';
    out << "# config\n";
    for (const auto& [k, v] : config_echo) out << "config." << k << '=' << v << '\n';
    out << "# run\n";
    for (const auto& [k, v] : notes) out << k << '=' << v << '\n';
  }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

inline std::string format_double(double x) {
  std::ostringstream s;
  s.precision(17);
  s << x;
  return s.str();
}

struct Figure1Result {
  Trajectory disturbed;  // pointwise saturation, d = 0.05 cos t
  Trajectory linear;     // no saturation, d = 0
  std::vector<std::string> files;
};

/// Defaults of the figure-1 preset.
struct Figure1Settings {
  double length = 2.0 * std::numbers::pi;
  std::size_t n_interior = 127;
  double t_final = 9.0;
  double dt = 1e-3;
  double disturbance_amplitude = 0.05;
};

inline StateVector one_minus_cosine(const Grid& grid, double amplitude = 1.0) {
  return StateVector::sample(grid, [amplitude](double x) { return amplitude * (1.0 - std::cos(x)); });
}

inline Figure1Result run_figure1(const Figure1Settings& s = {}) {
  const Grid grid(s.length, s.n_interior);
  const LinearOperator a = build_kdv_operator(grid);
  const StateVector z0 = one_minus_cosine(grid);
  const SaturatedSystem sat_loop = assemble_closed_loop(
      a, SaturationMap::pointwise(1.0, s.length), DisturbanceSignal::cosine(s.disturbance_amplitude, 1.0));
  const SaturatedSystem lin_loop = assemble_closed_loop(a, std::nullopt, DisturbanceSignal::zero());
  Figure1Result r;
  parallel_for(2, [&](std::size_t i) {
    if (i == 0) r.disturbed = simulate(sat_loop, z0, s.t_final, s.dt);
    else r.linear = simulate(lin_loop, z0, s.t_final, s.dt);
  });
  return r;
}

inline Figure1Result reproduce_figure1(const std::filesystem::path& output_dir,
                                       const std::vector<std::pair<std::string, std::string>>& echo = {},
                                       const Figure1Settings& s = {}) {
  Figure1Result r = run_figure1(s);
  ArtifactWriter out(output_dir);
  out.write("figure1_surface.csv", [&](std::ostream& os) { write_states_csv(os, r.disturbed); });
  out.write("figure1_norms.csv", [&](std::ostream& os) {
    std::ostringstream b;
    b.precision(17);
    b << "t,norm_disturbed,norm_linear\n";
    for (std::size_t k = 0; k < r.disturbed.size(); ++k) {
      b << r.disturbed.times[k] << ',' << r.disturbed.observables[k].norm_l2 << ','
        << r.linear.observables[k].norm_l2 << '\n';
    }
    os << b.str();
  });
  out.write("figure1_disturbed_observables.csv",
            [&](std::ostream& os) { write_observables_csv(os, r.disturbed); });
  out.write("figure1_linear_observables.csv",
            [&](std::ostream& os) { write_observables_csv(os, r.linear); });
  out.write_manifest(echo, {{"preset", "figure1"},
                            {"domain.L", format_double(s.length)},
                            {"domain.n_interior", std::to_string(s.n_interior)},
                            {"time.T", format_double(s.t_final)},
                            {"time.dt", format_double(s.dt)},
                            {"initial", "1-cos(x)"},
                            {"run_a", "pointwise saturation level 1, d=0.05cos(t)"},
                            {"run_b", "no saturation, d=0"},
                            {"scheme", "Crank-Nicolson + explicit midpoint feedback"}});
  r.files = out.files();
  return r;
}

inline StateVector initial_state(const ExperimentConfig& cfg, const LinearOperator& a) {
  const Grid& g = a.grid();
  if (cfg.initial_family == "zero") return StateVector(g);
  if (cfg.initial_family == "sine") {
    const double l = g.length();
    const int m = cfg.initial_mode;
    const double amp = cfg.initial_amplitude;
    return StateVector::sample(g, [=](double x) { return amp * std::sin(m * std::numbers::pi * x / l); });
  }
  if (cfg.initial_family == "smooth") {
    auto rng = sample_engine(cfg.rng_seed, 0);
    return random_smooth_with_graph_norm(a, cfg.initial_graph_norm, rng);
  }
  return one_minus_cosine(g, cfg.initial_amplitude);
}

inline std::optional<SaturationMap> make_saturation(const ExperimentConfig& cfg) {
  if (cfg.saturation_kind == "pointwise") return SaturationMap::pointwise(cfg.saturation_level, cfg.length);
  if (cfg.saturation_kind == "hilbert") return SaturationMap::hilbert(cfg.saturation_level);
  return std::nullopt;
}

inline DisturbanceSignal make_disturbance(const ExperimentConfig& cfg, double scale = 1.0) {
  if (cfg.disturbance_kind == "cosine") {
    return DisturbanceSignal::cosine(scale * cfg.disturbance_amplitude, cfg.disturbance_frequency);
  }
  return DisturbanceSignal::zero();
}

struct RunSummary {
  std::vector<std::string> files;
  std::optional<IssCertificate> certificate;
};

/// Executes every analysis enabled in `cfg` and writes its artifacts plus a
/// manifest into the (resolved) output directory. Throws
/// DissipativityGateFailed / InfeasibleParameters on gate failures and
/// CertificationFailure when a requested certificate is invalid (artifacts
/// are written first).
inline RunSummary run_experiment(const ExperimentConfig& cfg) {
  const std::filesystem::path dir = resolve_output_dir(cfg.output_dir);
  if (cfg.preset == "figure1") {
    Figure1Result r = reproduce_figure1(dir, cfg.echo);
    return {r.files, std::nullopt};
  }

  const Grid grid(cfg.length, cfg.n_interior);
  const LinearOperator a = build_kdv_operator(grid);
  const auto sigma = make_saturation(cfg);
  const SaturatedSystem sys = assemble_closed_loop(a, sigma, make_disturbance(cfg));
  const StateVector z0 = initial_state(cfg, a);

  ArtifactWriter out(dir);
  std::vector<std::pair<std::string, std::string>> notes;
  const double c = measure_decay_constant(a);
  notes.emplace_back("measured_C", format_double(c));
  notes.emplace_back("dissipativity_lambda_max", format_double(a.max_symmetric_eigenvalue()));
  notes.emplace_back("scheme", "Crank-Nicolson + explicit midpoint feedback");

  LyapunovParams params;
  params.c = c;
  params.k = sigma ? sigma->lipschitz_k() : 1.0;
  params.c0 = sigma ? sigma->item5_c0() : 1.0;
  double alpha = 0.0;
  double rho = 0.0;
  LyapunovChoice which = LyapunovChoice::V;
  if (cfg.dissipation == DissipationChoice::V) {
    // -C|z|^2 + 2|d||z| <= -(C/2)|z|^2 + (2/C)|d|^2
    alpha = 0.5 * c;
    rho = 2.0 / c;
  } else if (cfg.dissipation == DissipationChoice::V1) {
    const Case1Params p1 = select_params_case1(c, 1.0, 1.0, params.c0, params.k);
    params.m = p1.m;
    params.eps1 = p1.eps1;
    params.eps2 = p1.eps2;
    alpha = p1.alpha;
    rho = p1.rho_gain;
    which = LyapunovChoice::V1;
    notes.emplace_back("case1.M", format_double(p1.m));
    notes.emplace_back("case1.eps1", format_double(p1.eps1));
    notes.emplace_back("case1.eps2", format_double(p1.eps2));
    notes.emplace_back("case1.alpha", format_double(p1.alpha));
    notes.emplace_back("case1.alpha_without_c0", format_double(p1.alpha_without_c0));
    notes.emplace_back("case1.rho_gain", format_double(p1.rho_gain));
  } else if (cfg.dissipation == DissipationChoice::V2) {
    const double cs = estimate_embedding_constant(a, 1000, cfg.rng_seed);
    params.r = norm_graph(z0, a);
    params.c_s = cs;
    const Case2Params p2 = select_param_case2(cs, 1.0, 1.1, c, params.r);
    params.m_tilde = p2.m_tilde;
    alpha = c;
    rho = 0.0;
    which = LyapunovChoice::V2;
    notes.emplace_back("case2.c_S", format_double(cs));
    notes.emplace_back("case2.r", format_double(params.r));
    notes.emplace_back("case2.M_tilde", format_double(p2.m_tilde));
    notes.emplace_back("case2.mu", format_double(*p2.mu));
  }

  ObserverSettings obs = params.observers();
  obs.store_states = cfg.write_states;
  const Trajectory traj = simulate(sys, z0, cfg.t_final, cfg.dt, obs);
  out.write("trajectory.csv", [&](std::ostream& os) { write_observables_csv(os, traj); });
  if (cfg.write_states) out.write("states.csv", [&](std::ostream& os) { write_states_csv(os, traj); });

  if (sigma) {
    const BrsResult brs = brs_check(traj, sigma->item5_c0());
    notes.emplace_back("brs.holds", brs.holds ? "true" : "false");
    notes.emplace_back("brs.worst_margin", format_double(brs.worst_margin));
  }

  if (cfg.axioms && sigma) {
    const AxiomReport rep = check_axioms(*sigma, grid, cfg.axiom_samples, 2.0 * sigma->level(), cfg.rng_seed);
    out.write("axioms.txt", [&](std::ostream& os) { write_key_values(os, rep); });
  }

  if (cfg.dissipation != DissipationChoice::None) {
    const DissipationReport rep = dissipation_report(traj, which, alpha, rho);
    notes.emplace_back("dissipation.violations", std::to_string(rep.violation_count));
    out.write("dissipation.csv", [&](std::ostream& os) { write_dissipation_csv(os, rep); });
  }

  if (cfg.gap) {
    const GapReport rep = gronwall_gap(sys, z0, make_disturbance(cfg), cfg.t_final, cfg.dt);
    notes.emplace_back("gap.paper_bound_violations", std::to_string(rep.paper_bound_violations));
    notes.emplace_back("gap.conservative_violations", std::to_string(rep.conservative_violations));
    out.write("gap.csv", [&](std::ostream& os) { write_gap_csv(os, rep); });
  }

  if (!cfg.semiglobal_r.empty()) {
    const SaturatedSystem free_sys = sys.with_disturbance(DisturbanceSignal::zero());
    const SemiGlobalFit fit = fit_semiglobal(free_sys, cfg.semiglobal_r, cfg.semiglobal_samples,
                                             cfg.semiglobal_t.value_or(cfg.t_final), cfg.dt, cfg.rng_seed);
    out.write("semiglobal.txt", [&](std::ostream& os) { write_key_values(os, fit); });
  }

  RunSummary summary;
  if (cfg.certificate) {
    std::vector<StateVector> z0s;
    for (double s : cfg.certificate_z0_scales) z0s.push_back(s * z0);
    std::vector<DisturbanceSignal> ds;
    for (double s : cfg.certificate_d_scales) ds.push_back(make_disturbance(cfg, s));
    const IssCertificate cert = iss_certificate(sys, z0s, ds, cfg.t_final, cfg.dt);
    out.write("certificate.txt", [&](std::ostream& os) { write_key_values(os, cert); });
    summary.certificate = cert;
  }

  out.write_manifest(cfg.echo, notes);
  summary.files = out.files();
  if (summary.certificate && !summary.certificate->valid) {
    throw CertificationFailure("ISS certificate invalid: max_violation=" +
                               format_double(summary.certificate->max_violation) +
                               " worst_member=" + std::to_string(summary.certificate->worst_member));
  }
  return summary;
}

}  // namespace kdviss
