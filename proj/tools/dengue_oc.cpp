// Command-line front end: scenario simulation, reproduction-number reports
// and sweeps, and the optimal-control solver, all driven by one sectioned
// key-value config file (every value has a built-in default, so a bare
// invocation runs the stock calibration).
//
// Exit codes: 0 success, 2 configuration/usage error, 3 integration failure,
// 4 optimizer stopped at max_iter (outputs still written), 1 anything else.

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "dengue/config.hpp"
#include "dengue/io.hpp"
#include "dengue/model.hpp"
#include "dengue/ocp.hpp"
#include "dengue/parallel.hpp"
#include "dengue/reproduction.hpp"
#include "dengue/simulate.hpp"

namespace fs = std::filesystem;
using namespace dengue;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIntegration = 3;
constexpr int kExitMaxIter = 4;

std::vector<double> output_grid(double t_f, double stride) {
  std::vector<double> grid;
  const double eps = 1e-9 * t_f;
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * stride;
    if (t > t_f + eps) break;
    grid.push_back(std::min(t, t_f));
  }
  if (grid.empty() || grid.back() < t_f - eps) grid.push_back(t_f);
  return grid;
}

std::string trajectory_csv(const Trajectory& traj) {
  std::string csv = "t,S_h,I_h,R_h,A_m,S_m,I_m,c_A,c_m,alpha\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const State& x = traj.states[i];
    const ControlVector& u = traj.controls[i];
    csv += format_num(traj.times[i]);
    for (double v : {x.S_h, x.I_h, x.R_h, x.A_m, x.S_m, x.I_m, u.c_A, u.c_m,
                     u.alpha}) {
      csv += ',';
      csv += format_num(v);
    }
    csv += '\n';
  }
  return csv;
}

std::string simulate_summary(const Trajectory& traj) {
  const auto pk = traj.peak_infected();
  const State& end = traj.states.back();
  std::ostringstream os;
  os << "peak_I_h = " << format_num(pk.value) << "\n";
  os << "t_peak = " << format_num(pk.time) << "\n";
  os << "final_S_h = " << format_num(end.S_h) << "\n";
  os << "final_I_h = " << format_num(end.I_h) << "\n";
  os << "final_R_h = " << format_num(end.R_h) << "\n";
  os << "final_A_m = " << format_num(end.A_m) << "\n";
  os << "final_S_m = " << format_num(end.S_m) << "\n";
  os << "final_I_m = " << format_num(end.I_m) << "\n";
  os << "conservation_residual = " << format_num(traj.conservation_residual())
     << "\n";
  return os.str();
}

int cmd_simulate(const RunConfig& cfg) {
  const ControlSchedule sched = make_schedule(cfg);
  const Trajectory traj =
      integrate(InitialState(cfg.initial_state()), sched, cfg.params, cfg.t_f,
                cfg.h, cfg.bounds());
  const Trajectory out = resample(traj, output_grid(cfg.t_f, cfg.output_stride));

  const fs::path dir(cfg.out_dir);
  write_file_atomic(dir / "trajectory.csv", trajectory_csv(out));
  const std::string summary = simulate_summary(traj);
  write_file_atomic(dir / "summary.txt", summary);
  std::cout << summary;
  return kExitOk;
}

int cmd_r0(const RunConfig& cfg) {
  const R0Result res = r0(cfg.control, cfg.params, cfg.bounds());
  std::cout << "R0=" << format_num(res.r0) << " M=" << format_num(res.m_factor)
            << " viable=" << (res.viable ? "true" : "false")
            << " A*=" << format_num(res.dfe.A_star)
            << " S*=" << format_num(res.dfe.S_star) << "\n";
  return kExitOk;
}

struct SweepCli {
  std::string axis1 = "c_m";
  std::string axis2 = "c_A";
  std::size_t n1 = 51;
  std::size_t n2 = 51;
  double min1 = -1.0, max1 = -1.0;  // negative means "full range of the axis"
  double min2 = -1.0, max2 = -1.0;
};

SweepAxis resolve_axis(const std::string& name, double lo, double hi,
                       std::size_t n, const ControlBounds& bounds) {
  const auto id = parse_control_name(name);
  if (!id)
    throw config_error(-1, "unknown sweep axis '" + name +
                               "' (expected c_A, c_m or alpha)");
  const double def_lo = (*id == ControlId::alpha) ? bounds.alpha_min : 0.0;
  return SweepAxis{*id, lo < 0.0 ? def_lo : lo, hi < 0.0 ? 1.0 : hi, n};
}

int cmd_r0_sweep(const RunConfig& cfg, const SweepCli& cli) {
  const ControlBounds bounds = cfg.bounds();
  const SweepAxis ax1 = resolve_axis(cli.axis1, cli.min1, cli.max1, cli.n1, bounds);
  const SweepAxis ax2 = resolve_axis(cli.axis2, cli.min2, cli.max2, cli.n2, bounds);
  if (ax1.control == ax2.control)
    throw config_error(-1, "sweep axes must be two distinct controls");

  const R0Grid grid = r0_sweep(ax1, ax2, cfg.control, cfg.params, bounds,
                               detail::default_threads());

  const std::string n1 = control_name(ax1.control);
  const std::string n2 = control_name(ax2.control);
  std::string csv = n1 + "," + n2 + ",r0\n";
  for (std::size_t i = 0; i < grid.axis1_pts.size(); ++i)
    for (std::size_t j = 0; j < grid.axis2_pts.size(); ++j)
      csv += format_num(grid.axis1_pts[i]) + "," + format_num(grid.axis2_pts[j]) +
             "," + format_num(grid.at(i, j)) + "\n";

  std::string contour_csv = "polyline," + n1 + "," + n2 + "\n";
  const auto polys = r0_contour(grid, 1.0);
  for (std::size_t pi = 0; pi < polys.size(); ++pi)
    for (const auto& pt : polys[pi].points)
      contour_csv += std::to_string(pi) + "," + format_num(pt[0]) + "," +
                     format_num(pt[1]) + "\n";

  const fs::path dir(cfg.out_dir);
  write_file_atomic(dir / "r0_grid.csv", csv);
  write_file_atomic(dir / "r0_contour.csv", contour_csv);
  std::cout << "grid " << grid.axis1_pts.size() << "x" << grid.axis2_pts.size()
            << " written; " << polys.size() << " contour polyline(s)\n";
  return kExitOk;
}

int cmd_optimize(const RunConfig& cfg) {
  const OcpSpec spec = make_ocp_spec(cfg);
  SolveOptions opts;
  opts.tol_g = cfg.tol_g;
  opts.max_iter = cfg.max_iter;
  opts.fd_eps = cfg.fd_eps;
  opts.threads = detail::default_threads();

  const OcpSolution sol = solve(spec, opts);

  const ControlSchedule nocontrol = ControlSchedule::constant({0.0, 0.0, 1.0});
  const Trajectory traj_nc = integrate(spec.x0, nocontrol, spec.params,
                                       spec.t_f, spec.h, spec.bounds);
  const double J_nc = evaluate_cost(nocontrol, spec);

  const fs::path dir(cfg.out_dir);
  const auto grid = output_grid(cfg.t_f, cfg.output_stride);

  std::string controls = "interval,t_start,t_end,c_A,c_m,alpha\n";
  const auto& bp = sol.schedule.breakpoints();
  for (std::size_t i = 0; i < sol.schedule.intervals(); ++i) {
    const double t0 = bp[i];
    const double t1 = (i + 1 < bp.size()) ? bp[i + 1] : spec.t_f;
    const ControlVector& u = sol.schedule.values()[i];
    controls += std::to_string(i) + "," + format_num(t0) + "," + format_num(t1) +
                "," + format_num(u.c_A) + "," + format_num(u.c_m) + "," +
                format_num(u.alpha) + "\n";
  }
  write_file_atomic(dir / "controls_opt.csv", controls);
  write_file_atomic(dir / "trajectory_opt.csv",
                    trajectory_csv(resample(sol.trajectory, grid)));
  write_file_atomic(dir / "trajectory_nocontrol.csv",
                    trajectory_csv(resample(traj_nc, grid)));

  const auto pk_opt = sol.trajectory.peak_infected();
  const auto pk_nc = traj_nc.peak_infected();
  std::ostringstream rep;
  rep << "J_opt = " << format_num(sol.objective) << "\n";
  rep << "J_nocontrol = " << format_num(J_nc) << "\n";
  rep << "peak_I_h_opt = " << format_num(pk_opt.value) << "\n";
  rep << "t_peak_opt = " << format_num(pk_opt.time) << "\n";
  rep << "peak_I_h_nocontrol = " << format_num(pk_nc.value) << "\n";
  rep << "t_peak_nocontrol = " << format_num(pk_nc.time) << "\n";
  rep << "iterations = " << sol.iterations << "\n";
  rep << "convergence = " << to_string(sol.status) << "\n";
  rep << "grad_norm = " << format_num(sol.grad_norm) << "\n";
  write_file_atomic(dir / "report.txt", rep.str());
  std::cout << rep.str();

  return sol.status == SolveStatus::MaxIter ? kExitMaxIter : kExitOk;
}

int cmd_compare(const RunConfig& cfg) {
  const OcpSpec spec = make_ocp_spec(cfg);
  const std::vector<std::pair<std::string, ControlSchedule>> scheds{
      {"nocontrol", ControlSchedule::constant({0.0, 0.0, 1.0})},
      {"config", make_schedule(cfg)},
  };
  const auto rows = compare_scenarios(spec, scheds);

  std::string csv = "name,J,peak_I_h,t_peak,total_infections\n";
  for (const auto& r : rows)
    csv += r.name + "," + format_num(r.objective) + "," +
           format_num(r.peak_infected) + "," + format_num(r.peak_time) + "," +
           format_num(r.total_infections) + "\n";
  write_file_atomic(fs::path(cfg.out_dir) / "compare.csv", csv);
  std::cout << csv;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Host-vector outbreak simulator and vector-control optimizer"};
  app.require_subcommand(0, 1);

  std::string config_path;
  std::string out_dir;
  double flag_ca = 0.0, flag_cm = 0.0, flag_alpha = 1.0;
  double flag_tf = 0.0, flag_step = 0.0;
  bool dump = false;

  app.add_option("--config", config_path, "config file (sectioned key = value)")
      ->check(CLI::ExistingFile);
  auto* o_out = app.add_option("--out", out_dir, "output directory");
  auto* o_ca = app.add_option("--ca", flag_ca, "constant larvicide proportion");
  auto* o_cm = app.add_option("--cm", flag_cm, "constant adulticide proportion");
  auto* o_alpha =
      app.add_option("--alpha", flag_alpha, "constant mechanical-control proportion");
  auto* o_tf = app.add_option("--tf", flag_tf, "horizon in days");
  auto* o_step = app.add_option("--step", flag_step, "integrator step in days");
  app.add_flag("--dump-config", dump,
               "print the effective config to stdout and exit");

  auto* sub_sim = app.add_subcommand("simulate", "integrate and write trajectory.csv");
  auto* sub_r0 = app.add_subcommand("r0", "report the basic reproduction number");
  auto* sub_sweep =
      app.add_subcommand("r0-sweep", "R0 over a 2-D control grid + R0=1 contour");
  auto* sub_opt =
      app.add_subcommand("optimize", "solve the optimal-control problem");
  auto* sub_cmp =
      app.add_subcommand("compare", "compare the configured controls to no control");

  // Global flags remain usable after the subcommand name.
  for (auto* sub : {sub_sim, sub_r0, sub_sweep, sub_opt, sub_cmp})
    sub->fallthrough();

  SweepCli sweep;
  sub_sweep->add_option("--axis1", sweep.axis1, "first axis: c_A, c_m or alpha");
  sub_sweep->add_option("--axis2", sweep.axis2, "second axis: c_A, c_m or alpha");
  sub_sweep->add_option("--n1", sweep.n1, "grid points along axis1");
  sub_sweep->add_option("--n2", sweep.n2, "grid points along axis2");
  sub_sweep->add_option("--min1", sweep.min1, "axis1 lower end");
  sub_sweep->add_option("--max1", sweep.max1, "axis1 upper end");
  sub_sweep->add_option("--min2", sweep.min2, "axis2 lower end");
  sub_sweep->add_option("--max2", sweep.max2, "axis2 upper end");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = parse_config_file(config_path);

    // Flag overrides beat the file; control flags replace any schedule file.
    if (o_ca->count()) cfg.control.c_A = flag_ca;
    if (o_cm->count()) cfg.control.c_m = flag_cm;
    if (o_alpha->count()) cfg.control.alpha = flag_alpha;
    if (o_ca->count() || o_cm->count() || o_alpha->count())
      cfg.schedule_file.clear();
    if (o_tf->count()) cfg.t_f = flag_tf;
    if (o_step->count()) cfg.h = flag_step;
    if (o_out->count()) cfg.out_dir = out_dir;

    validate_config(cfg);

    if (dump) {
      std::cout << dump_config(cfg);
      return kExitOk;
    }

    if (sub_sim->parsed()) return cmd_simulate(cfg);
    if (sub_r0->parsed()) return cmd_r0(cfg);
    if (sub_sweep->parsed()) return cmd_r0_sweep(cfg, sweep);
    if (sub_opt->parsed()) return cmd_optimize(cfg);
    if (sub_cmp->parsed()) return cmd_compare(cfg);

    std::cerr << "error: no subcommand given (try --help)\n";
    return kExitConfig;
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const integration_error& e) {
    std::cerr << "integration error: " << e.what() << "\n";
    return kExitIntegration;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOther;
  }
}
