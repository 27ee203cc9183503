#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "dengue/ocp.hpp"

using namespace dengue;

namespace {

const ModelParams kP = ModelParams::defaults();
const ControlSchedule kNoControl = ControlSchedule::constant({0.0, 0.0, 1.0});

OcpSpec small_spec(double t_f, std::size_t n, double h) {
  OcpSpec spec(kP);
  spec.t_f = t_f;
  spec.n_intervals = n;
  spec.h = h;
  return spec;
}

// Exhaustive constant-schedule baseline: the best J over an axis-uniform
// grid of constant controls. Non-integrable corners count as +inf.
double best_constant_cost(const OcpSpec& spec, std::size_t pts) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t ia = 0; ia < pts; ++ia)
    for (std::size_t im = 0; im < pts; ++im)
      for (std::size_t il = 0; il < pts; ++il) {
        const double f = pts == 1 ? 0.0 : 1.0 / static_cast<double>(pts - 1);
        const ControlVector u{static_cast<double>(ia) * f,
                              static_cast<double>(im) * f,
                              spec.bounds.alpha_min +
                                  (1.0 - spec.bounds.alpha_min) *
                                      static_cast<double>(il) * f};
        try {
          best = std::min(best, evaluate_cost(ControlSchedule::constant(u), spec));
        } catch (const integration_error&) {
          // constant setting too harsh for the step size; not a competitor
        }
      }
  return best;
}

}  // namespace

TEST_CASE("spec validation") {
  OcpSpec spec(kP);
  CHECK_NOTHROW(spec.validate());

  spec.weights = {0.0, 0.0, 0.0, 0.0};
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

  spec = OcpSpec(kP);
  spec.weights.gamma_D = -1.0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

  spec = OcpSpec(kP);
  spec.n_intervals = 0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

  spec = OcpSpec(kP);
  spec.h = spec.t_f;  // bigger than one control interval
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("cost is zero for a disease-free uncontrolled run") {
  OcpSpec spec = small_spec(100.0, 1, 0.05);
  spec.x0 = InitialState(State{kP.N_h, 0.0, 0.0, kP.k * kP.N_h, kP.m * kP.N_h, 0.0});
  CHECK(evaluate_cost(kNoControl, spec) == 0.0);
}

TEST_CASE("control terms integrate in closed form when gamma_D = 0") {
  OcpSpec spec = small_spec(365.0, 1, 0.05);
  spec.weights = {0.0, 0.25, 0.25, 0.25};
  const double J =
      evaluate_cost(ControlSchedule::constant({0.2, 0.3, 0.8}), spec);
  const double expected = 365.0 * (0.25 * 0.09 + 0.25 * 0.04 + 0.25 * 0.04);
  CHECK(J == Catch::Approx(expected).epsilon(1e-12));
}

TEST_CASE("no-control cost matches a fine-step quadrature reference") {
  OcpSpec spec = small_spec(365.0, 28, 0.05);
  const double J = evaluate_cost(kNoControl, spec);

  OcpSpec fine = spec;
  fine.h = 0.01;
  const double J_ref = evaluate_cost(kNoControl, fine);

  CHECK(J == Catch::Approx(J_ref).epsilon(5e-3));
  // Scale sanity: the disease term dominates by orders of magnitude.
  CHECK(J > 1e9);
}

TEST_CASE("decoupled gradient is 2*gamma*u*dt when gamma_D = 0") {
  OcpSpec spec = small_spec(40.0, 4, 0.05);
  spec.weights = {0.0, 0.25, 0.2, 0.15};
  const double dt = 10.0;

  std::vector<ControlVector> vals(4, ControlVector{0.25, 0.3, 0.9});
  const ControlSchedule sched = ControlSchedule::uniform(40.0, vals);
  const FdGradient g = gradient_fd(sched, spec, 1e-5);
  REQUIRE(g.values.size() == 12);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(g.values[3 * i + 0] ==
          Catch::Approx(2.0 * 0.2 * 0.25 * dt).epsilon(1e-8));
    CHECK(g.values[3 * i + 1] ==
          Catch::Approx(2.0 * 0.25 * 0.3 * dt).epsilon(1e-8));
    // d/dalpha of gamma_E (1-alpha)^2 is -2 gamma_E (1-alpha)
    CHECK(g.values[3 * i + 2] ==
          Catch::Approx(-2.0 * 0.15 * 0.1 * dt).epsilon(1e-8));
    CHECK(g.at_bound[3 * i] == 0);
  }
}

TEST_CASE("gradient at a pinned bound is one-sided and flagged") {
  OcpSpec spec = small_spec(40.0, 2, 0.05);
  spec.weights = {0.0, 0.25, 0.25, 0.25};
  std::vector<ControlVector> vals{{0.0, 1.0, 1.0}, {0.5, 0.5, 0.9}};
  const ControlSchedule sched = ControlSchedule::uniform(40.0, vals);
  const FdGradient g = gradient_fd(sched, spec, 1e-5);

  // c_A pinned at 0, c_m at 1, alpha at 1 on the first interval.
  CHECK(g.at_bound[0] == 1);
  CHECK(g.at_bound[1] == 1);
  CHECK(g.at_bound[2] == 1);
  CHECK(g.values[1] == Catch::Approx(2.0 * 0.25 * 1.0 * 20.0).epsilon(1e-4));
  // interior parameters stay central
  CHECK(g.at_bound[3] == 0);
  CHECK(g.at_bound[4] == 0);
  CHECK(g.at_bound[5] == 0);

  CHECK_THROWS_AS(gradient_fd(sched, spec, 1e-2), std::invalid_argument);
  CHECK_THROWS_AS(gradient_fd(sched, spec, 1e-9), std::invalid_argument);
}

TEST_CASE("finite-difference gradient is step-size consistent") {
  OcpSpec spec = small_spec(40.0, 4, 0.05);
  std::mt19937 rng(424242);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<ControlVector> vals(4);
    for (auto& u : vals)
      u = {0.05 + 0.3 * unit(rng), 0.05 + 0.3 * unit(rng),
           0.75 + 0.24 * unit(rng)};
    const ControlSchedule sched = ControlSchedule::uniform(40.0, vals);
    const FdGradient g1 = gradient_fd(sched, spec, 1e-5);
    const FdGradient g2 = gradient_fd(sched, spec, 1e-6);
    const FdGradient gh = gradient_fd(sched, spec, 0.5e-5);  // eps/2
    for (std::size_t i = 0; i < g1.values.size(); ++i) {
      const double denom = std::max(std::abs(g1.values[i]), std::abs(g2.values[i]));
      if (denom == 0.0) continue;
      CHECK(std::abs(g1.values[i] - g2.values[i]) <= 0.01 * denom);
      CHECK(std::abs(g1.values[i] - gh.values[i]) <= 0.01 * denom);
    }
  }
}

TEST_CASE("solve with no disease cost turns every control off") {
  OcpSpec spec = small_spec(60.0, 4, 0.1);
  spec.weights = {0.0, 0.25, 0.25, 0.25};
  const OcpSolution sol = solve(spec);

  CHECK(sol.status == SolveStatus::Converged);
  CHECK(sol.objective == 0.0);
  for (const auto& u : sol.schedule.values()) {
    CHECK(u.c_A == 0.0);
    CHECK(u.c_m == 0.0);
    CHECK(u.alpha == 1.0);
  }
}

TEST_CASE("pure disease cost drives adulticide to its bound over the wave") {
  OcpSpec spec = small_spec(120.0, 6, 0.1);
  spec.weights = {1.0, 0.0, 0.0, 0.0};
  SolveOptions opts;
  opts.threads = 2;
  const OcpSolution sol = solve(spec, opts);

  const double J_nocontrol = evaluate_cost(kNoControl, spec);
  CHECK(sol.objective < J_nocontrol);

  // Must beat or match the best constant policy on an 11^3 grid (the
  // feasible set contains every constant schedule).
  const double J_grid = best_constant_cost(spec, 11);
  CHECK(sol.objective <= J_grid * (1.0 + 1e-9));

  // Unopposed disease cost pushes c_m to its upper bound on the interval
  // covering the wave of the solution trajectory (the controls kill the
  // outbreak early, so that wave is the decay of the initial seed).
  const auto pk = sol.trajectory.peak_infected();
  const std::size_t wave_interval = sol.schedule.interval_index(pk.time);
  CHECK(sol.schedule.values()[wave_interval].c_m == 1.0);

  // Objective history is non-increasing and ends at the reported value.
  for (std::size_t i = 1; i < sol.history.size(); ++i)
    CHECK(sol.history[i] <= sol.history[i - 1]);
  CHECK(sol.history.back() == sol.objective);
  CHECK(sol.objective ==
        Catch::Approx(evaluate_cost(sol.schedule, spec)).epsilon(1e-10));
}

TEST_CASE("iterates respect the box exactly") {
  OcpSpec spec = small_spec(80.0, 4, 0.1);
  SolveOptions opts;
  opts.threads = 2;
  const OcpSolution sol = solve(spec, opts);
  for (const auto& u : sol.schedule.values()) {
    CHECK(u.c_A >= 0.0);
    CHECK(u.c_A <= 1.0);
    CHECK(u.c_m >= 0.0);
    CHECK(u.c_m <= 1.0);
    CHECK(u.alpha >= spec.bounds.alpha_min);
    CHECK(u.alpha <= 1.0);
  }
  for (std::size_t i = 1; i < sol.history.size(); ++i)
    CHECK(sol.history[i] <= sol.history[i - 1]);
}

TEST_CASE("max_iter cap returns the best iterate with the max-iter flag") {
  OcpSpec spec = small_spec(80.0, 4, 0.1);
  SolveOptions opts;
  opts.max_iter = 2;
  const OcpSolution sol = solve(spec, opts);
  CHECK(sol.status == SolveStatus::MaxIter);
  CHECK(sol.iterations == 2);
  CHECK(sol.history.size() <= 3);
  CHECK(sol.objective ==
        Catch::Approx(evaluate_cost(sol.schedule, spec)).epsilon(1e-10));
}

TEST_CASE("doubling the interval count never hurts the optimum") {
  OcpSpec coarse = small_spec(80.0, 4, 0.1);
  OcpSpec fine = small_spec(80.0, 8, 0.1);
  SolveOptions opts;
  opts.threads = 2;
  const double J4 = solve(coarse, opts).objective;
  const double J8 = solve(fine, opts).objective;
  CHECK(J8 <= J4 + opts.tol_g * coarse.t_f);
}

TEST_CASE("scenario comparison") {
  OcpSpec spec = small_spec(365.0, 28, 0.05);
  const ControlSchedule treated = ControlSchedule::constant({0.0, 0.25, 1.0});
  const std::vector<std::pair<std::string, ControlSchedule>> scheds{
      {"nocontrol", kNoControl},
      {"nocontrol-again", kNoControl},
      {"adulticide-25", treated},
  };
  const auto rows = compare_scenarios(spec, scheds);
  REQUIRE(rows.size() == 3);

  // Determinism: one schedule, one answer.
  CHECK(rows[0].objective == rows[1].objective);
  CHECK(rows[0].peak_infected == rows[1].peak_infected);
  CHECK(rows[0].peak_time == rows[1].peak_time);
  CHECK(rows[0].total_infections == rows[1].total_infections);

  // Keeping R0 below 1 flattens the wave and cuts total infections.
  CHECK(rows[2].peak_infected < rows[0].peak_infected);
  CHECK(rows[2].total_infections < rows[0].total_infections);

  // No-control row reproduces the epidemic wave.
  CHECK(rows[0].peak_infected == Catch::Approx(79391.0).epsilon(5e-3));
  CHECK(rows[0].peak_time == Catch::Approx(43.15).margin(1.0));
  // Final size: most of the population passes through infection when R0 ~ 2.5.
  CHECK(rows[0].total_infections > 0.8 * kP.N_h);
  CHECK(rows[0].total_infections < kP.N_h);

  // With the epidemic suppressed the seed infections just decay away.
  CHECK(rows[2].peak_infected == Catch::Approx(10.0).epsilon(1e-6));
}
