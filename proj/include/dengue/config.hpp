#pragma once

// Flat, sectioned key-value run configuration. Keys mirror the model's
// symbol names one-for-one so a config file can be audited line by line
// against the parameter table it encodes. Unknown sections or keys are
// rejected, not ignored.

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "io.hpp"
#include "model.hpp"
#include "ocp.hpp"
#include "simulate.hpp"

namespace dengue {

/// Configuration problem: carries the 1-based line number when it comes from
/// a file ( -1 for semantic errors found after parsing).
class config_error : public std::runtime_error {
 public:
  config_error(int line, const std::string& what)
      : std::runtime_error(line >= 0 ? "line " + std::to_string(line) + ": " + what
                                     : what),
        line_(line) {}

  int line() const { return line_; }

 private:
  int line_;
};

/// Everything one CLI run needs. Defaults are the built-in calibration with
/// no intervention.
struct RunConfig {
  // [model]
  ModelParams params = ModelParams::defaults();
  // [initial]; entries left unset in the file are derived from the params:
  // S_h0 = N_h - I_h0 - R_h0, A_m0 = k*N_h, S_m0 = m*N_h.
  double S_h0 = 479990.0;
  double I_h0 = 10.0;
  double R_h0 = 0.0;
  double A_m0 = 1440000.0;
  double S_m0 = 1440000.0;
  double I_m0 = 0.0;
  // [control]
  ControlVector control{};
  double alpha_min = kDefaultAlphaMin;
  std::string schedule_file;  ///< CSV t,c_A,c_m,alpha; overrides the constants
  // [ocp]
  OcpWeights weights{};
  std::size_t n_intervals = 28;
  std::size_t max_iter = 500;
  double tol_g = 1e-6;
  double fd_eps = 1e-5;
  bool normalize_infected = false;
  // [run]
  double t_f = 365.0;
  double h = 0.05;
  std::string out_dir = "out";
  double output_stride = 1.0;

  State initial_state() const { return {S_h0, I_h0, R_h0, A_m0, S_m0, I_m0}; }
  ControlBounds bounds() const { return {alpha_min}; }
};

namespace detail {

struct KeyRef {
  enum class Kind { Double, Size, Bool, String } kind;
  void* ptr;
};

struct ConfigSchema {
  // section -> key -> member binding
  std::map<std::string, std::map<std::string, KeyRef>, std::less<>> sections;

  static ConfigSchema bind(RunConfig& c) {
    using K = KeyRef::Kind;
    ConfigSchema s;
    auto& model = s.sections["model"];
    model["N_h"] = {K::Double, &c.params.N_h};
    model["B"] = {K::Double, &c.params.B};
    model["beta_mh"] = {K::Double, &c.params.beta_mh};
    model["beta_hm"] = {K::Double, &c.params.beta_hm};
    model["mu_h"] = {K::Double, &c.params.mu_h};
    model["eta_h"] = {K::Double, &c.params.eta_h};
    model["mu_m"] = {K::Double, &c.params.mu_m};
    model["phi"] = {K::Double, &c.params.phi};
    model["mu_A"] = {K::Double, &c.params.mu_A};
    model["eta_A"] = {K::Double, &c.params.eta_A};
    model["m"] = {K::Double, &c.params.m};
    model["k"] = {K::Double, &c.params.k};
    auto& initial = s.sections["initial"];
    initial["S_h0"] = {K::Double, &c.S_h0};
    initial["I_h0"] = {K::Double, &c.I_h0};
    initial["R_h0"] = {K::Double, &c.R_h0};
    initial["A_m0"] = {K::Double, &c.A_m0};
    initial["S_m0"] = {K::Double, &c.S_m0};
    initial["I_m0"] = {K::Double, &c.I_m0};
    auto& control = s.sections["control"];
    control["c_A"] = {K::Double, &c.control.c_A};
    control["c_m"] = {K::Double, &c.control.c_m};
    control["alpha"] = {K::Double, &c.control.alpha};
    control["alpha_min"] = {K::Double, &c.alpha_min};
    control["schedule_file"] = {K::String, &c.schedule_file};
    auto& ocp = s.sections["ocp"];
    ocp["gamma_D"] = {K::Double, &c.weights.gamma_D};
    ocp["gamma_S"] = {K::Double, &c.weights.gamma_S};
    ocp["gamma_L"] = {K::Double, &c.weights.gamma_L};
    ocp["gamma_E"] = {K::Double, &c.weights.gamma_E};
    ocp["n_intervals"] = {K::Size, &c.n_intervals};
    ocp["max_iter"] = {K::Size, &c.max_iter};
    ocp["tol_g"] = {K::Double, &c.tol_g};
    ocp["fd_eps"] = {K::Double, &c.fd_eps};
    ocp["normalize_infected"] = {K::Bool, &c.normalize_infected};
    auto& run = s.sections["run"];
    run["t_f"] = {K::Double, &c.t_f};
    run["h"] = {K::Double, &c.h};
    run["out_dir"] = {K::String, &c.out_dir};
    run["output_stride"] = {K::Double, &c.output_stride};
    return s;
  }
};

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

}  // namespace detail

/// Parses config text. Grammar: `[section]` headers, `key = value` entries,
/// `#` comments, blank lines. Initial-state entries not present in the text
/// are derived from the (possibly overridden) model parameters.
inline RunConfig parse_config_text(std::string_view text) {
  RunConfig cfg;
  auto schema = detail::ConfigSchema::bind(cfg);

  std::set<std::string> initial_set;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view raw = text.substr(
        pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        throw config_error(line_no, "malformed section header");
      std::string name(detail::trim(line.substr(1, line.size() - 2)));
      if (schema.sections.find(name) == schema.sections.end())
        throw config_error(line_no, "unknown section [" + name + "]");
      section = std::move(name);
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw config_error(line_no, "expected key = value");
    std::string key(detail::trim(line.substr(0, eq)));
    std::string value(detail::trim(line.substr(eq + 1)));
    if (section.empty())
      throw config_error(line_no, "key '" + key + "' before any [section]");

    auto& keys = schema.sections[section];
    auto it = keys.find(key);
    if (it == keys.end())
      throw config_error(line_no,
                         "unknown key '" + key + "' in section [" + section + "]");

    const detail::KeyRef ref = it->second;
    switch (ref.kind) {
      case detail::KeyRef::Kind::Double: {
        double v;
        if (!parse_double(value, v))
          throw config_error(line_no, "invalid number for '" + key + "': " + value);
        *static_cast<double*>(ref.ptr) = v;
        break;
      }
      case detail::KeyRef::Kind::Size: {
        std::size_t v;
        if (!parse_size(value, v))
          throw config_error(line_no,
                             "invalid non-negative integer for '" + key + "': " + value);
        *static_cast<std::size_t*>(ref.ptr) = v;
        break;
      }
      case detail::KeyRef::Kind::Bool: {
        bool v;
        if (value == "true" || value == "1") v = true;
        else if (value == "false" || value == "0") v = false;
        else throw config_error(line_no, "invalid bool for '" + key + "': " + value);
        *static_cast<bool*>(ref.ptr) = v;
        break;
      }
      case detail::KeyRef::Kind::String:
        *static_cast<std::string*>(ref.ptr) = value;
        break;
    }
    if (section == "initial") initial_set.insert(key);
  }

  // Derive unset initial-state entries from the parameter block.
  if (!initial_set.count("S_h0")) cfg.S_h0 = cfg.params.N_h - cfg.I_h0 - cfg.R_h0;
  if (!initial_set.count("A_m0")) cfg.A_m0 = cfg.params.k * cfg.params.N_h;
  if (!initial_set.count("S_m0")) cfg.S_m0 = cfg.params.m * cfg.params.N_h;
  return cfg;
}

inline RunConfig parse_config_file(const std::filesystem::path& path) {
  return parse_config_text(read_file(path));
}

/// Serializes every key with round-trip-exact numbers; the result re-parses
/// to an identical RunConfig.
inline std::string dump_config(const RunConfig& c) {
  std::ostringstream os;
  auto num = [](double v) { return format_exact(v); };
  os << "[model]\n";
  os << "N_h = " << num(c.params.N_h) << "\n";
  os << "B = " << num(c.params.B) << "\n";
  os << "beta_mh = " << num(c.params.beta_mh) << "\n";
  os << "beta_hm = " << num(c.params.beta_hm) << "\n";
  os << "mu_h = " << num(c.params.mu_h) << "\n";
  os << "eta_h = " << num(c.params.eta_h) << "\n";
  os << "mu_m = " << num(c.params.mu_m) << "\n";
  os << "phi = " << num(c.params.phi) << "\n";
  os << "mu_A = " << num(c.params.mu_A) << "\n";
  os << "eta_A = " << num(c.params.eta_A) << "\n";
  os << "m = " << num(c.params.m) << "\n";
  os << "k = " << num(c.params.k) << "\n";
  os << "\n[initial]\n";
  os << "S_h0 = " << num(c.S_h0) << "\n";
  os << "I_h0 = " << num(c.I_h0) << "\n";
  os << "R_h0 = " << num(c.R_h0) << "\n";
  os << "A_m0 = " << num(c.A_m0) << "\n";
  os << "S_m0 = " << num(c.S_m0) << "\n";
  os << "I_m0 = " << num(c.I_m0) << "\n";
  os << "\n[control]\n";
  os << "c_A = " << num(c.control.c_A) << "\n";
  os << "c_m = " << num(c.control.c_m) << "\n";
  os << "alpha = " << num(c.control.alpha) << "\n";
  os << "alpha_min = " << num(c.alpha_min) << "\n";
  if (!c.schedule_file.empty()) os << "schedule_file = " << c.schedule_file << "\n";
  os << "\n[ocp]\n";
  os << "gamma_D = " << num(c.weights.gamma_D) << "\n";
  os << "gamma_S = " << num(c.weights.gamma_S) << "\n";
  os << "gamma_L = " << num(c.weights.gamma_L) << "\n";
  os << "gamma_E = " << num(c.weights.gamma_E) << "\n";
  os << "n_intervals = " << c.n_intervals << "\n";
  os << "max_iter = " << c.max_iter << "\n";
  os << "tol_g = " << num(c.tol_g) << "\n";
  os << "fd_eps = " << num(c.fd_eps) << "\n";
  os << "normalize_infected = " << (c.normalize_infected ? "true" : "false") << "\n";
  os << "\n[run]\n";
  os << "t_f = " << num(c.t_f) << "\n";
  os << "h = " << num(c.h) << "\n";
  os << "out_dir = " << c.out_dir << "\n";
  os << "output_stride = " << num(c.output_stride) << "\n";
  return os.str();
}

/// Semantic validation beyond syntax: parameter invariants, state
/// non-negativity, control bounds, run-block sanity.
inline void validate_config(const RunConfig& c) {
  if (auto rep = validate_params(c.params); !rep.ok())
    throw config_error(-1, "invalid [model] values:\n" + rep.str());
  const State x0 = c.initial_state();
  if (!state_finite(x0) || !state_nonnegative(x0))
    throw config_error(-1, "[initial] values must be finite and non-negative");
  if (!(c.alpha_min > 0.0) || c.alpha_min > 1.0)
    throw config_error(-1, "alpha_min must be in (0, 1]");
  if (!c.bounds().contains(c.control))
    throw config_error(-1, "[control] constants outside bounds");
  if (!(c.t_f > 0.0) || !(c.h > 0.0) || c.h > c.t_f)
    throw config_error(-1, "[run] needs 0 < h <= t_f");
  if (!(c.output_stride > 0.0))
    throw config_error(-1, "[run] output_stride must be positive");
  if (c.n_intervals < 1) throw config_error(-1, "[ocp] n_intervals must be >= 1");
  for (double g : {c.weights.gamma_D, c.weights.gamma_S, c.weights.gamma_L,
                   c.weights.gamma_E})
    if (!(g >= 0.0)) throw config_error(-1, "[ocp] weights must be >= 0");
}

/// Loads a piecewise-constant schedule from CSV with header t,c_A,c_m,alpha.
inline ControlSchedule load_schedule_csv(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::vector<double> bp;
  std::vector<ControlVector> vals;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = detail::trim(line);
    if (sv.empty()) continue;
    if (line_no == 1) {
      if (sv != "t,c_A,c_m,alpha")
        throw config_error(line_no,
                           "schedule CSV must start with header t,c_A,c_m,alpha");
      continue;
    }
    double fields[4];
    std::size_t start = 0;
    for (int f = 0; f < 4; ++f) {
      const std::size_t comma = sv.find(',', start);
      const bool last = (f == 3);
      if (last != (comma == std::string_view::npos))
        throw config_error(line_no, "schedule CSV row needs 4 fields");
      std::string_view cell = detail::trim(
          sv.substr(start, last ? std::string_view::npos : comma - start));
      if (!parse_double(cell, fields[f]))
        throw config_error(line_no, "invalid number in schedule CSV");
      start = comma + 1;
    }
    bp.push_back(fields[0]);
    vals.push_back({fields[1], fields[2], fields[3]});
  }
  if (bp.empty()) throw config_error(-1, "schedule CSV has no rows");
  try {
    return ControlSchedule(std::move(bp), std::move(vals));
  } catch (const std::invalid_argument& e) {
    throw config_error(-1, std::string("schedule CSV: ") + e.what());
  }
}

/// The control functions a run uses: the schedule file if named, otherwise
/// the constant [control] values.
inline ControlSchedule make_schedule(const RunConfig& c) {
  if (!c.schedule_file.empty()) return load_schedule_csv(c.schedule_file);
  return ControlSchedule::constant(c.control);
}

inline OcpSpec make_ocp_spec(const RunConfig& c) {
  OcpSpec spec(c.params);
  spec.weights = c.weights;
  spec.t_f = c.t_f;
  spec.n_intervals = c.n_intervals;
  spec.h = c.h;
  spec.bounds = c.bounds();
  spec.x0 = InitialState(c.initial_state());
  spec.normalize_infected = c.normalize_infected;
  return spec;
}

}  // namespace dengue
