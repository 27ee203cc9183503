#pragma once

// Optimal control of the outbreak by direct transcription: the three control
// functions are parameterized as piecewise-constant over n equal intervals
// and the quadratic cost
//   J = \int_0^{t_f} [ gamma_D I_h^2 + gamma_S c_m^2 + gamma_L c_A^2
//                      + gamma_E (1-alpha)^2 ] dt
// is minimized over the box-constrained parameters by projected gradient
// descent with an Armijo line search.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "model.hpp"
#include "parallel.hpp"
#include "simulate.hpp"

namespace dengue {

/// Cost weights: disease burden, adulticide, larvicide, mechanical control.
struct OcpWeights {
  double gamma_D = 0.25;
  double gamma_S = 0.25;
  double gamma_L = 0.25;
  double gamma_E = 0.25;
};

/// Full problem statement for one optimal-control run.
struct OcpSpec {
  OcpWeights weights{};
  double t_f = 365.0;          ///< horizon (days)
  std::size_t n_intervals = 28;  ///< equal control intervals over [0, t_f]
  double h = 0.05;             ///< integrator step (days); shortened locally
                               ///< so interval edges are hit exactly
  ControlBounds bounds{};
  ModelParams params;
  InitialState x0;
  bool normalize_infected = false;  ///< cost uses (I_h/N_h)^2 instead of I_h^2

  explicit OcpSpec(const ModelParams& p = ModelParams::defaults(),
                   double infected0 = 10.0)
      : params(p), x0(InitialState::default_for(p, infected0)) {}

  void validate() const {
    const auto& w = weights;
    for (double g : {w.gamma_D, w.gamma_S, w.gamma_L, w.gamma_E})
      if (!(g >= 0.0) || !std::isfinite(g))
        throw std::invalid_argument("OcpSpec: weights must be >= 0");
    if (w.gamma_D == 0.0 && w.gamma_S == 0.0 && w.gamma_L == 0.0 && w.gamma_E == 0.0)
      throw std::invalid_argument("OcpSpec: weights must not all be zero");
    if (n_intervals < 1)
      throw std::invalid_argument("OcpSpec: n_intervals must be >= 1");
    if (!(t_f > 0.0) || !(h > 0.0) || h > t_f / static_cast<double>(n_intervals))
      throw std::invalid_argument("OcpSpec: need 0 < h <= t_f/n_intervals");
    if (auto rep = validate_params(params); !rep.ok())
      throw std::invalid_argument("OcpSpec: invalid params\n" + rep.str());
  }
};

/// Cost of one schedule. The disease term is a composite trapezoid over the
/// integration grid; the control terms are piecewise-constant and integrate
/// in closed form (value^2 * interval length).
inline double evaluate_cost(const ControlSchedule& sched, const OcpSpec& spec) {
  spec.validate();
  const double scale = spec.normalize_infected ? 1.0 / spec.params.N_h : 1.0;

  double disease = 0.0;
  double t_prev = 0.0, f_prev = 0.0;
  bool first = true;
  detail::integrate_observe(
      spec.x0.state, sched, spec.params, spec.t_f, spec.h, spec.bounds,
      [&](double t, const State& x, const ControlVector&) {
        const double ih = x.I_h * scale;
        const double f = ih * ih;
        if (!first) disease += 0.5 * (f_prev + f) * (t - t_prev);
        first = false;
        t_prev = t;
        f_prev = f;
      });

  double control = 0.0;
  const auto& bp = sched.breakpoints();
  const auto& vals = sched.values();
  for (std::size_t i = 0; i < bp.size(); ++i) {
    const double a = bp[i];
    if (a >= spec.t_f) break;
    const double b = (i + 1 < bp.size()) ? std::min(bp[i + 1], spec.t_f) : spec.t_f;
    const ControlVector& u = vals[i];
    const double one_minus_alpha = 1.0 - u.alpha;
    control += (b - a) * (spec.weights.gamma_S * u.c_m * u.c_m +
                          spec.weights.gamma_L * u.c_A * u.c_A +
                          spec.weights.gamma_E * one_minus_alpha * one_minus_alpha);
  }
  return spec.weights.gamma_D * disease + control;
}

namespace detail {

// Decision-vector layout: (c_A, c_m, alpha) per interval, interval-major.
inline std::vector<double> schedule_parameters(const ControlSchedule& s) {
  std::vector<double> theta;
  theta.reserve(3 * s.intervals());
  for (const auto& u : s.values()) {
    theta.push_back(u.c_A);
    theta.push_back(u.c_m);
    theta.push_back(u.alpha);
  }
  return theta;
}

inline ControlSchedule uniform_schedule(double t_f, std::span<const double> theta) {
  std::vector<ControlVector> vals(theta.size() / 3);
  for (std::size_t i = 0; i < vals.size(); ++i)
    vals[i] = {theta[3 * i], theta[3 * i + 1], theta[3 * i + 2]};
  return ControlSchedule::uniform(t_f, std::move(vals));
}

inline void component_bounds(std::size_t comp, const ControlBounds& b,
                             double& lo, double& hi) {
  switch (comp % 3) {
    case 0: lo = 0.0; hi = 1.0; break;          // c_A
    case 1: lo = 0.0; hi = 1.0; break;          // c_m
    default: lo = b.alpha_min; hi = 1.0; break; // alpha
  }
}

}  // namespace detail

/// Central finite-difference gradient of evaluate_cost with respect to each
/// piecewise-constant control parameter; at_bound marks components where a
/// box bound forced a one-sided difference. eps is relative: the actual step
/// for component i is eps * max(1, |theta_i|).
struct FdGradient {
  std::vector<double> values;
  std::vector<char> at_bound;
};

inline FdGradient gradient_fd(const ControlSchedule& sched, const OcpSpec& spec,
                              double eps = 1e-5, unsigned threads = 1) {
  if (!(eps >= 1e-8 && eps <= 1e-3))
    throw std::invalid_argument("gradient_fd: eps outside [1e-8, 1e-3]");
  spec.validate();
  sched.validate(spec.bounds);

  const std::vector<double> theta = detail::schedule_parameters(sched);
  const auto& bp = sched.breakpoints();
  const double cost0 = evaluate_cost(sched, spec);  // reused by one-sided comps

  FdGradient g;
  g.values.assign(theta.size(), 0.0);
  g.at_bound.assign(theta.size(), 0);

  auto cost_at = [&](std::size_t comp, double value) {
    std::vector<double> th = theta;
    th[comp] = value;
    return evaluate_cost(ControlSchedule(bp, [&] {
                           std::vector<ControlVector> vals(th.size() / 3);
                           for (std::size_t i = 0; i < vals.size(); ++i)
                             vals[i] = {th[3 * i], th[3 * i + 1], th[3 * i + 2]};
                           return vals;
                         }()),
                         spec);
  };

  detail::parallel_for(theta.size(), threads, [&](std::size_t i) {
    double lo, hi;
    detail::component_bounds(i, spec.bounds, lo, hi);
    const double step = eps * std::max(1.0, std::abs(theta[i]));
    const bool can_up = theta[i] + step <= hi;
    const bool can_down = theta[i] - step >= lo;
    if (can_up && can_down) {
      g.values[i] = (cost_at(i, theta[i] + step) - cost_at(i, theta[i] - step)) /
                    (2.0 * step);
    } else if (can_down) {
      g.values[i] = (cost0 - cost_at(i, theta[i] - step)) / step;
      g.at_bound[i] = 1;
    } else if (can_up) {
      g.values[i] = (cost_at(i, theta[i] + step) - cost0) / step;
      g.at_bound[i] = 1;
    } else {
      throw std::invalid_argument("gradient_fd: eps exceeds box width");
    }
  });
  return g;
}

enum class SolveStatus { Converged, MaxIter, Stalled };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIter: return "max-iter";
    default: return "stalled";
  }
}

struct SolveOptions {
  double tol_g = 1e-6;       ///< stop when ||proj grad|| <= tol_g * (1 + |J|)
  std::size_t max_iter = 500;
  double fd_eps = 1e-5;
  unsigned threads = 1;
  double armijo_c1 = 1e-4;
  int max_backtracks = 60;
};

struct OcpSolution {
  ControlSchedule schedule;
  Trajectory trajectory;
  double objective = 0.0;
  std::size_t iterations = 0;
  double grad_norm = 0.0;  ///< projected-gradient 2-norm at termination
  double step_size = 0.0;  ///< last accepted line-search step
  SolveStatus status = SolveStatus::Stalled;
  std::vector<double> history;  ///< objective per accepted iterate, J0 first
};

namespace detail {

inline double projected_gradient_norm(std::span<const double> theta,
                                      std::span<const double> grad,
                                      const ControlBounds& bounds) {
  double sq = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    double lo, hi;
    component_bounds(i, bounds, lo, hi);
    double gi = grad[i];
    if ((theta[i] <= lo && gi > 0.0) || (theta[i] >= hi && gi < 0.0)) gi = 0.0;
    sq += gi * gi;
  }
  return std::sqrt(sq);
}

inline std::vector<double> project_box(std::span<const double> theta,
                                       const ControlBounds& bounds) {
  std::vector<double> out(theta.begin(), theta.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double lo, hi;
    component_bounds(i, bounds, lo, hi);
    double v = std::min(hi, std::max(lo, out[i]));
    // Quantize the projection near the box faces: a value this close to a
    // bound is indistinguishable from it at solver tolerances, and pinning it
    // keeps corner optima exact instead of 1e-10-ish.
    const double snap = 1e-9 * (hi - lo);
    if (v - lo < snap) v = lo;
    else if (hi - v < snap) v = hi;
    out[i] = v;
  }
  return out;
}

}  // namespace detail

/// Minimizes the transcribed problem from the given initial guess (values are
/// read at each interval midpoint and projected onto the bounds). Iterates
/// stay exactly inside the box, the objective history is non-increasing, and
/// candidates whose integration fails are rejected by the line search.
inline OcpSolution solve(const OcpSpec& spec, const ControlSchedule& init,
                         const SolveOptions& opts = {}) {
  spec.validate();
  const std::size_t n = spec.n_intervals;
  const double dt = spec.t_f / static_cast<double>(n);

  // Initial parameters on the solver's uniform grid.
  std::vector<double> theta(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const ControlVector u = init.value_at((static_cast<double>(i) + 0.5) * dt);
    theta[3 * i] = u.c_A;
    theta[3 * i + 1] = u.c_m;
    theta[3 * i + 2] = u.alpha;
  }
  theta = detail::project_box(theta, spec.bounds);

  auto cost_of = [&](std::span<const double> th) {
    return evaluate_cost(detail::uniform_schedule(spec.t_f, th), spec);
  };
  auto cost_or_inf = [&](std::span<const double> th) {
    try {
      return cost_of(th);
    } catch (const integration_error&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  double J = cost_of(theta);  // initial guess must integrate; errors propagate
  std::vector<double> history{J};
  SolveStatus status = SolveStatus::MaxIter;
  double grad_norm = 0.0;
  double last_step = 0.0;

  double step = -1.0;  // unset until the first gradient is known
  constexpr double kTinyGrad = 1e-300;

  std::size_t iter = 0;
  for (; iter < opts.max_iter; ++iter) {
    FdGradient grad;
    try {
      grad = gradient_fd(detail::uniform_schedule(spec.t_f, theta), spec,
                         opts.fd_eps, opts.threads);
    } catch (const integration_error&) {
      // Perturbation crossed into a non-integrable region; retry closer in,
      // then give up on this iterate.
      try {
        grad = gradient_fd(detail::uniform_schedule(spec.t_f, theta), spec,
                           std::max(1e-8, opts.fd_eps / 10.0), opts.threads);
      } catch (const integration_error&) {
        status = SolveStatus::Stalled;
        break;
      }
    }

    grad_norm = detail::projected_gradient_norm(theta, grad.values, spec.bounds);
    if (grad_norm <= opts.tol_g * (1.0 + std::abs(J))) {
      status = SolveStatus::Converged;
      break;
    }

    double ginf = 0.0;
    for (double v : grad.values) ginf = std::max(ginf, std::abs(v));
    const double step_cap = 2.0 / std::max(ginf, kTinyGrad);
    step = (step < 0.0) ? 0.5 / std::max(ginf, kTinyGrad)
                        : std::min(step * 4.0, step_cap);

    bool accepted = false;
    for (int bt = 0; bt <= opts.max_backtracks; ++bt) {
      std::vector<double> cand(theta.size());
      for (std::size_t i = 0; i < cand.size(); ++i)
        cand[i] = theta[i] - step * grad.values[i];
      cand = detail::project_box(cand, spec.bounds);

      double move_dot = 0.0;  // g . (theta - cand) >= 0 by projection
      bool moved = false;
      for (std::size_t i = 0; i < cand.size(); ++i) {
        move_dot += grad.values[i] * (theta[i] - cand[i]);
        moved = moved || cand[i] != theta[i];
      }
      if (!moved) break;  // projection pinned every component; no progress

      const double Jc = cost_or_inf(cand);
      if (Jc <= J - opts.armijo_c1 * move_dot) {
        theta = std::move(cand);
        J = Jc;
        history.push_back(J);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      status = SolveStatus::Stalled;
      break;
    }
    last_step = step;
  }

  ControlSchedule best = detail::uniform_schedule(spec.t_f, theta);
  Trajectory traj =
      integrate(spec.x0, best, spec.params, spec.t_f, spec.h, spec.bounds);
  return OcpSolution{std::move(best), std::move(traj), J,       iter,
                     grad_norm,       last_step,       status, std::move(history)};
}

/// Mid-box starting guess: (0.5, 0.5, (1 + alpha_min)/2) on every interval.
inline OcpSolution solve(const OcpSpec& spec, const SolveOptions& opts = {}) {
  const ControlVector mid{0.5, 0.5, 0.5 * (1.0 + spec.bounds.alpha_min)};
  return solve(spec, ControlSchedule::constant(mid), opts);
}

/// Side-by-side outcome metrics for one named schedule.
struct ScenarioMetrics {
  std::string name;
  double objective;          ///< evaluate_cost of the schedule
  double peak_infected;      ///< max_t I_h
  double peak_time;          ///< argmax_t I_h (first occurrence)
  double total_infections;   ///< integral of eta_h * I_h dt (cases recovered)
};

/// Integrates each named schedule on the spec's grid settings and reports
/// per-schedule metrics, rows in input order. Failures name the schedule.
inline std::vector<ScenarioMetrics> compare_scenarios(
    const OcpSpec& spec,
    std::span<const std::pair<std::string, ControlSchedule>> schedules) {
  spec.validate();
  std::vector<ScenarioMetrics> rows;
  rows.reserve(schedules.size());
  for (const auto& [name, sched] : schedules) {
    try {
      const Trajectory traj =
          integrate(spec.x0, sched, spec.params, spec.t_f, spec.h, spec.bounds);
      double total = 0.0;
      for (std::size_t i = 1; i < traj.size(); ++i)
        total += 0.5 * (traj.states[i - 1].I_h + traj.states[i].I_h) *
                 (traj.times[i] - traj.times[i - 1]);
      total *= spec.params.eta_h;
      const auto pk = traj.peak_infected();
      rows.push_back({name, evaluate_cost(sched, spec), pk.value, pk.time, total});
    } catch (const integration_error& e) {
      throw integration_error(e.time(), "scenario '" + name + "': " + e.what());
    }
  }
  return rows;
}

}  // namespace dengue
