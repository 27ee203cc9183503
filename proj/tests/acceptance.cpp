// Acceptance suite: every release-gate property of the toolchain, one
// pass/fail line per criterion. Returns the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "dengue/model.hpp"
#include "dengue/ocp.hpp"
#include "dengue/parallel.hpp"
#include "dengue/reproduction.hpp"
#include "dengue/simulate.hpp"

using namespace dengue;

namespace {

const ModelParams kP = ModelParams::defaults();
const ControlSchedule kNoControl = ControlSchedule::constant({0.0, 0.0, 1.0});

int g_failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s — %s\n", pass ? "PASS" : "FAIL", id, name,
              detail.c_str());
  if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

struct RandomCase {
  ControlVector u;
  ModelParams p;
};

RandomCase random_case(std::mt19937& rng, bool mild_controls) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uni = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  ModelParams p;
  p.N_h = std::pow(10.0, uni(3.0, 6.5));
  p.B = uni(0.1, 2.0);
  p.beta_mh = uni(0.01, 1.0);
  p.beta_hm = uni(0.01, 1.0);
  p.mu_h = uni(1e-5, 1e-3);
  p.eta_h = uni(0.05, 1.0);
  p.mu_m = uni(0.02, 0.5);
  p.phi = uni(0.5, 10.0);
  p.mu_A = uni(0.05, 1.0);
  p.eta_A = uni(0.01, 0.5);
  p.m = uni(0.5, 5.0);
  p.k = uni(0.5, 5.0);
  const double c_hi = mild_controls ? 0.3 : 1.0;
  ControlVector u{uni(0.0, c_hi), uni(0.0, c_hi), uni(0.01, 1.0)};
  return {u, p};
}

// --- criterion 1 -----------------------------------------------------------

void criterion_formula_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937 rng(20250810);
  int compared = 0;
  double worst = 0.0;
  bool ok = true;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto [u, p] = random_case(rng, trial % 2 == 0);
    const auto res = r0(u, p);
    if (!res.viable) {
      ok = ok && res.r0 == 0.0;
      continue;
    }
    const double oracle = r0_ngm_oracle(u, p);
    const double rel = std::abs(res.r0 - oracle) / std::max(1.0, res.r0);
    worst = std::max(worst, rel);
    ok = ok && rel <= 1e-10;
    ++compared;
  }
  const double dt = seconds_since(t0);
  ok = ok && compared > 300 && dt < 1.0;
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "%d viable samples, worst |closed form - NGM| = %.2e rel "
                "(tol 1e-10), %.2f s",
                compared, worst, dt);
  report(1, "R0 formula/oracle equivalence", ok, buf);
}

// --- criterion 2 -----------------------------------------------------------

void criterion_baseline_r0() {
  bool ok = true;
  std::string detail;

  // Hand-evaluated closed forms from the printed parameter values.
  const double hand0 = std::sqrt((1.0 * 3.0 * 0.64 * 0.375 * 0.375 * 0.447) /
                                 (6.0 * (1.0 / 3.0 + 1.0 / 25915.0) * 0.01));
  const double hand25 = std::sqrt((1.0 * 3.0 * 0.64 * 0.375 * 0.375 * 0.3645) /
                                  (6.0 * (1.0 / 3.0 + 1.0 / 25915.0) * 0.1225));
  const double r0_none = r0({0.0, 0.0, 1.0}, kP).r0;
  const double r0_cm25 = r0({0.0, 0.25, 1.0}, kP).r0;
  ok = ok && std::abs(r0_none - hand0) <= 1e-6 * hand0;
  ok = ok && std::abs(r0_cm25 - hand25) <= 1e-6 * hand25;
  ok = ok && std::abs(r0_none - 2.456) < 5e-4;
  ok = ok && std::abs(r0_cm25 - 0.634) < 5e-4;

  // Adulticide is the decisive instrument: 25% adulticide crosses the
  // threshold while even full larvicide does not.
  const double r0_ca100 = r0({1.0, 0.0, 1.0}, kP).r0;
  ok = ok && r0_cm25 < 1.0 && r0_ca100 > 1.0;

  // 101-point larvicide scan at alpha = 1, c_m = 0: the R0 = 1 contour never
  // appears at c_A <= 0.9 (here R0 in fact stays above 1 over the whole
  // range, so aquatic control alone cannot end transmission).
  double first_crossing = std::numeric_limits<double>::infinity();
  double prev = r0({0.0, 0.0, 1.0}, kP).r0;
  for (int i = 1; i <= 100; ++i) {
    const double ca = i / 100.0;
    const double cur = r0({ca, 0.0, 1.0}, kP).r0;
    if (prev > 1.0 && cur <= 1.0 && first_crossing > 1.0)
      first_crossing = (i - 1) / 100.0 +
                       0.01 * (prev - 1.0) / (prev - cur);
    prev = cur;
  }
  ok = ok && !(first_crossing <= 0.9);

  char buf[200];
  std::snprintf(buf, sizeof buf,
                "R0(none) = %.6f, R0(c_m=0.25) = %.6f (|err| vs hand form "
                "<= 1e-6); c_A-only scan min R0 = %.3f, crossing at c_A <= 0.9: none",
                r0_none, r0_cm25, r0({1.0, 0.0, 1.0}, kP).r0);
  report(2, "baseline threshold values", ok, buf);
}

// --- criteria 3, 4, 5 ------------------------------------------------------

void criterion_conservation() {
  const auto t0 = std::chrono::steady_clock::now();
  const Trajectory traj =
      integrate(InitialState::default_for(kP), kNoControl, kP, 365.0, 0.05);
  const double residual = traj.conservation_residual();
  const double dt = seconds_since(t0);
  const bool ok = residual <= 1e-6 * kP.N_h && dt < 1.0;
  char buf[120];
  std::snprintf(buf, sizeof buf, "max |S_h+I_h+R_h - N_h| = %.3e (tol %.3e), %.2f s",
                residual, 1e-6 * kP.N_h, dt);
  report(3, "human population conservation", ok, buf);
}

void criterion_disease_free() {
  State x0 = InitialState::default_for(kP).state;
  x0.S_h = kP.N_h;
  x0.I_h = 0.0;
  x0.I_m = 0.0;
  const Trajectory traj =
      integrate(InitialState(x0), kNoControl, kP, 365.0, 0.05);
  bool ok = true;
  for (const auto& x : traj.states) ok = ok && x.I_h == 0.0 && x.I_m == 0.0;
  char buf[120];
  std::snprintf(buf, sizeof buf, "%zu samples, every I_h and I_m bit-exact 0",
                traj.size());
  report(4, "disease-free invariance", ok, buf);
}

void criterion_order() {
  auto ih_at_mid = [&](double h) {
    const Trajectory traj =
        integrate(InitialState::default_for(kP), kNoControl, kP, 20.0, h);
    for (std::size_t i = 0; i < traj.size(); ++i)
      if (traj.times[i] == 10.0) return traj.states[i].I_h;
    return std::numeric_limits<double>::quiet_NaN();
  };
  const double v1 = ih_at_mid(0.2);
  const double v2 = ih_at_mid(0.1);
  const double v3 = ih_at_mid(0.05);
  const double order = std::log2(std::abs(v1 - v2) / std::abs(v2 - v3));
  const bool ok = order > 3.5 && order < 4.5;
  char buf[120];
  std::snprintf(buf, sizeof buf, "observed order on I_h(t_f/2) = %.3f (in [3.5, 4.5])",
                order);
  report(5, "integrator convergence order", ok, buf);
}

// --- criterion 6 -----------------------------------------------------------

void criterion_gradient() {
  bool ok = true;
  double worst_rel = 0.0;

  OcpSpec spec(kP);
  spec.t_f = 40.0;
  spec.n_intervals = 4;
  spec.h = 0.05;

  std::mt19937 rng(6181);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<ControlVector> vals(4);
    for (auto& u : vals)
      u = {0.05 + 0.3 * unit(rng), 0.05 + 0.3 * unit(rng),
           0.75 + 0.24 * unit(rng)};
    const ControlSchedule sched = ControlSchedule::uniform(40.0, vals);
    const FdGradient g1 = gradient_fd(sched, spec, 1e-5, 2);
    const FdGradient g2 = gradient_fd(sched, spec, 1e-6, 2);
    for (std::size_t i = 0; i < g1.values.size(); ++i) {
      const double denom =
          std::max(std::abs(g1.values[i]), std::abs(g2.values[i]));
      if (denom == 0.0) continue;
      const double rel = std::abs(g1.values[i] - g2.values[i]) / denom;
      worst_rel = std::max(worst_rel, rel);
      ok = ok && rel <= 0.01;
    }
  }

  // Decoupled analytic case: with gamma_D = 0 the cost separates per interval
  // and the c_m gradient is exactly 2 * gamma_S * c_m * dt.
  OcpSpec dec = spec;
  dec.weights = {0.0, 0.25, 0.25, 0.25};
  std::vector<ControlVector> vals(4, ControlVector{0.25, 0.3, 0.9});
  const FdGradient g = gradient_fd(ControlSchedule::uniform(40.0, vals), dec, 1e-5);
  double worst_dec = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double expected = 2.0 * 0.25 * 0.3 * 10.0;
    worst_dec = std::max(worst_dec,
                         std::abs(g.values[3 * i + 1] - expected) / expected);
  }
  ok = ok && worst_dec <= 1e-8;

  char buf[160];
  std::snprintf(buf, sizeof buf,
                "eps 1e-5 vs 1e-6: worst component disagreement %.2e "
                "(tol 1e-2); decoupled case off by %.2e rel (tol 1e-8)",
                worst_rel, worst_dec);
  report(6, "finite-difference gradient consistency", ok, buf);
}

// --- criteria 7 and 8 ------------------------------------------------------

void criteria_optimizer() {
  const auto t0 = std::chrono::steady_clock::now();
  OcpSpec spec(kP);  // equal weights 0.25, t_f = 365, n = 28, h = 0.05
  SolveOptions opts;
  opts.threads = detail::default_threads();
  const OcpSolution sol = solve(spec, opts);

  const double J_nc = evaluate_cost(kNoControl, spec);
  const auto pk_nc =
      integrate(spec.x0, kNoControl, kP, spec.t_f, spec.h).peak_infected();
  const auto pk_opt = sol.trajectory.peak_infected();

  // Constant-schedule oracle on the 5^3 grid (the transcription's feasible
  // set contains every constant schedule; settings the integrator rejects at
  // this step size are not competitors).
  double grid_best = std::numeric_limits<double>::infinity();
  int grid_ok = 0;
  for (int ia = 0; ia <= 4; ++ia)
    for (int im = 0; im <= 4; ++im)
      for (int il = 0; il <= 4; ++il) {
        const ControlVector u{ia / 4.0, im / 4.0,
                              0.01 + 0.99 * il / 4.0};
        try {
          grid_best =
              std::min(grid_best, evaluate_cost(ControlSchedule::constant(u), spec));
          ++grid_ok;
        } catch (const integration_error&) {
        }
      }

  const double dt = seconds_since(t0);
  bool ok7 = sol.objective <= grid_best && sol.objective < J_nc &&
             pk_opt.value < pk_nc.value && dt < 120.0;
  char buf[220];
  std::snprintf(buf, sizeof buf,
                "J_opt = %.4f <= best of %d/125 constant schedules (%.4f), "
                "J_nocontrol = %.4g, peak %.4g < %.4g, %s in %zu iters, %.1f s",
                sol.objective, grid_ok, grid_best, J_nc, pk_opt.value,
                pk_nc.value, to_string(sol.status), sol.iterations, dt);
  report(7, "optimizer dominance (equal weights)", ok7, buf);

  double mean_cm = 0.0, mean_ca = 0.0, mean_mech = 0.0;
  for (const auto& u : sol.schedule.values()) {
    mean_cm += u.c_m;
    mean_ca += u.c_A;
    mean_mech += 1.0 - u.alpha;
  }
  const double n = static_cast<double>(sol.schedule.intervals());
  mean_cm /= n;
  mean_ca /= n;
  mean_mech /= n;
  const bool ok8 = mean_cm > mean_ca && mean_cm > mean_mech;
  char buf8[160];
  std::snprintf(buf8, sizeof buf8,
                "time-averages: c_m = %.4f > c_A = %.4f and > (1-alpha) = %.4f",
                mean_cm, mean_ca, mean_mech);
  report(8, "adulticide dominance in the optimal policy", ok8, buf8);
}

}  // namespace

int main() {
  criterion_formula_oracle();
  criterion_baseline_r0();
  criterion_conservation();
  criterion_disease_free();
  criterion_order();
  criterion_gradient();
  criteria_optimizer();
  if (g_failures == 0)
    std::printf("acceptance: all 8 criteria passed\n");
  else
    std::printf("acceptance: %d criterion(s) FAILED\n", g_failures);
  return g_failures;
}
