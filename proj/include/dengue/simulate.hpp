#pragma once

// Fixed-step RK4 integration of the model under piecewise-constant control
// schedules. Steps are shortened locally so the grid lands exactly on every
// schedule breakpoint; controls are never averaged across a switch.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "model.hpp"

namespace dengue {

/// Integration failure (component driven negative beyond the clip tolerance,
/// or a non-finite state). Carries the time of the failing step.
class integration_error : public std::runtime_error {
 public:
  integration_error(double t, const std::string& what)
      : std::runtime_error(what + " (t = " + std::to_string(t) + ")"),
        time_(t) {}

  double time() const { return time_; }

 private:
  double time_;
};

/// Piecewise-constant control functions over time. Interval i covers
/// [breakpoints[i], breakpoints[i+1]) and the last interval extends to the
/// end of whatever horizon the schedule is used on; breakpoints[0] must be 0.
class ControlSchedule {
 public:
  ControlSchedule(std::vector<double> breakpoints, std::vector<ControlVector> values)
      : bp_(std::move(breakpoints)), values_(std::move(values)) {
    if (bp_.empty() || bp_.size() != values_.size())
      throw std::invalid_argument(
          "ControlSchedule: need one control value per breakpoint");
    if (bp_.front() != 0.0)
      throw std::invalid_argument("ControlSchedule: breakpoints must start at 0");
    for (std::size_t i = 0; i < bp_.size(); ++i) {
      if (!std::isfinite(bp_[i]))
        throw std::invalid_argument("ControlSchedule: non-finite breakpoint");
      if (i > 0 && !(bp_[i] > bp_[i - 1]))
        throw std::invalid_argument(
            "ControlSchedule: breakpoints must be strictly increasing");
    }
  }

  static ControlSchedule constant(const ControlVector& u) {
    return ControlSchedule({0.0}, {u});
  }

  /// n equal intervals over [0, t_f], one value per interval.
  static ControlSchedule uniform(double t_f, std::vector<ControlVector> values) {
    if (!(t_f > 0.0) || values.empty())
      throw std::invalid_argument("ControlSchedule::uniform: bad arguments");
    const std::size_t n = values.size();
    std::vector<double> bp(n);
    for (std::size_t i = 0; i < n; ++i)
      bp[i] = t_f * static_cast<double>(i) / static_cast<double>(n);
    return ControlSchedule(std::move(bp), std::move(values));
  }

  std::size_t interval_index(double t) const {
    auto it = std::upper_bound(bp_.begin(), bp_.end(), t);
    return it == bp_.begin() ? 0 : static_cast<std::size_t>(it - bp_.begin()) - 1;
  }

  const ControlVector& value_at(double t) const {
    return values_[interval_index(t)];
  }

  const std::vector<double>& breakpoints() const { return bp_; }
  const std::vector<ControlVector>& values() const { return values_; }
  std::size_t intervals() const { return values_.size(); }

  void validate(const ControlBounds& bounds) const {
    for (const auto& u : values_)
      if (!bounds.contains(u))
        throw std::invalid_argument(
            "ControlSchedule: control value outside bounds");
  }

 private:
  std::vector<double> bp_;
  std::vector<ControlVector> values_;
};

/// Sampled solution of one integration: time grid plus state and the control
/// active at each sample. Immutable once produced.
struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;
  std::vector<ControlVector> controls;
  ModelParams params{};

  std::size_t size() const { return times.size(); }

  struct Peak {
    double value;
    double time;
  };

  /// Maximum of I_h over the grid (first occurrence).
  Peak peak_infected() const {
    Peak pk{0.0, 0.0};
    for (std::size_t i = 0; i < times.size(); ++i)
      if (states[i].I_h > pk.value) pk = {states[i].I_h, times[i]};
    return pk;
  }

  /// max_t |S_h + I_h + R_h - N_h|
  double conservation_residual() const {
    double worst = 0.0;
    for (const auto& x : states)
      worst = std::max(worst, std::abs(x.human_total() - params.N_h));
    return worst;
  }
};

namespace detail {

inline State rk4_advance(const State& x, const Rates& a, double w) {
  return {x.S_h + w * a.dS_h, x.I_h + w * a.dI_h, x.R_h + w * a.dR_h,
          x.A_m + w * a.dA_m, x.S_m + w * a.dS_m, x.I_m + w * a.dI_m};
}

/// Classical RK4 over [0, t_f] with nominal step h, split so every schedule
/// breakpoint is hit exactly (each inter-breakpoint segment is subdivided
/// into equal steps no longer than h). After each step, components below
/// -clip_tol abort the run and components in [-clip_tol, 0) are clipped to 0.
/// The observer is called as obs(t, state, active control) for the initial
/// point and after every accepted step.
template <class Observer>
void integrate_observe(const State& x0, const ControlSchedule& sched,
                       const ModelParams& p, double t_f, double h,
                       const ControlBounds& bounds, Observer&& obs) {
  if (!(t_f > 0.0))
    throw std::invalid_argument("integrate: t_f must be positive");
  if (!(h > 0.0) || !(h <= t_f))
    throw std::invalid_argument("integrate: need 0 < h <= t_f");
  if (auto rep = validate_params(p); !rep.ok())
    throw std::invalid_argument("integrate: invalid params\n" + rep.str());
  if (!state_finite(x0) || !state_nonnegative(x0))
    throw std::invalid_argument("integrate: invalid initial state");
  sched.validate(bounds);

  const double clip_tol = 1e-9 * std::max(p.N_h, p.k * p.N_h);
  State x = x0;
  obs(0.0, x, sched.value_at(0.0));

  std::vector<double> edges;  // segment ends: interior breakpoints then t_f
  for (double b : sched.breakpoints())
    if (b > 0.0 && b < t_f) edges.push_back(b);
  edges.push_back(t_f);

  double a = 0.0;
  for (double b : edges) {
    const ControlVector& u = sched.value_at(a);
    const double len = b - a;
    const auto nsub = static_cast<std::size_t>(
        std::max(1.0, std::ceil(len / h - 1e-12)));
    for (std::size_t j = 1; j <= nsub; ++j) {
      const double t0 = std::lerp(a, b, static_cast<double>(j - 1) / nsub);
      const double t1 = std::lerp(a, b, static_cast<double>(j) / nsub);
      const double dt = t1 - t0;

      const Rates k1 = rhs(t0, x, u, p, bounds.alpha_min);
      const Rates k2 = rhs(t0 + 0.5 * dt, rk4_advance(x, k1, 0.5 * dt), u, p,
                           bounds.alpha_min);
      const Rates k3 = rhs(t0 + 0.5 * dt, rk4_advance(x, k2, 0.5 * dt), u, p,
                           bounds.alpha_min);
      const Rates k4 = rhs(t1, rk4_advance(x, k3, dt), u, p, bounds.alpha_min);

      const double w = dt / 6.0;
      x.S_h += w * (k1.dS_h + 2.0 * (k2.dS_h + k3.dS_h) + k4.dS_h);
      x.I_h += w * (k1.dI_h + 2.0 * (k2.dI_h + k3.dI_h) + k4.dI_h);
      x.R_h += w * (k1.dR_h + 2.0 * (k2.dR_h + k3.dR_h) + k4.dR_h);
      x.A_m += w * (k1.dA_m + 2.0 * (k2.dA_m + k3.dA_m) + k4.dA_m);
      x.S_m += w * (k1.dS_m + 2.0 * (k2.dS_m + k3.dS_m) + k4.dS_m);
      x.I_m += w * (k1.dI_m + 2.0 * (k2.dI_m + k3.dI_m) + k4.dI_m);

      if (!state_finite(x))
        throw integration_error(t1, "integrate: state blew up");
      for (double* c : {&x.S_h, &x.I_h, &x.R_h, &x.A_m, &x.S_m, &x.I_m}) {
        if (*c < -clip_tol)
          throw integration_error(
              t1, "integrate: component went negative beyond tolerance; "
                  "step size too coarse for these controls");
        if (*c < 0.0) *c = 0.0;
      }

      obs(t1, x, sched.value_at(t1));
    }
    a = b;
  }
}

}  // namespace detail

/// Integrates the system over [0, t_f] and returns one sample per accepted
/// step. Deterministic: identical inputs give bit-identical trajectories.
inline Trajectory integrate(const InitialState& x0, const ControlSchedule& sched,
                            const ModelParams& p, double t_f, double h,
                            const ControlBounds& bounds = {}) {
  Trajectory traj;
  traj.params = p;
  const auto expected = static_cast<std::size_t>(t_f / h) + sched.intervals() + 2;
  traj.times.reserve(expected);
  traj.states.reserve(expected);
  traj.controls.reserve(expected);
  detail::integrate_observe(
      x0.state, sched, p, t_f, h, bounds,
      [&traj](double t, const State& x, const ControlVector& u) {
        traj.times.push_back(t);
        traj.states.push_back(x);
        traj.controls.push_back(u);
      });
  return traj;
}

/// Linear interpolation of states onto `grid`; controls are copied exactly
/// from the sample at or immediately before each grid time (every schedule
/// switch is itself a sample, so this reproduces the schedule, not a blend).
inline Trajectory resample(const Trajectory& traj, std::span<const double> grid) {
  if (traj.size() < 2)
    throw std::invalid_argument("resample: trajectory has fewer than 2 samples");
  Trajectory out;
  out.params = traj.params;
  out.times.reserve(grid.size());
  out.states.reserve(grid.size());
  out.controls.reserve(grid.size());
  const auto& ts = traj.times;
  for (double g : grid) {
    if (!(g >= ts.front()) || !(g <= ts.back()))
      throw std::out_of_range("resample: grid time outside trajectory horizon");
    auto it = std::upper_bound(ts.begin(), ts.end(), g);
    const auto ic = static_cast<std::size_t>(it - ts.begin()) - 1;  // control
    const auto is = std::min(ic, ts.size() - 2);                    // segment
    const double theta = (g - ts[is]) / (ts[is + 1] - ts[is]);
    const State& x0 = traj.states[is];
    const State& x1 = traj.states[is + 1];
    out.times.push_back(g);
    out.states.push_back({std::lerp(x0.S_h, x1.S_h, theta),
                          std::lerp(x0.I_h, x1.I_h, theta),
                          std::lerp(x0.R_h, x1.R_h, theta),
                          std::lerp(x0.A_m, x1.A_m, theta),
                          std::lerp(x0.S_m, x1.S_m, theta),
                          std::lerp(x0.I_m, x1.I_m, theta)});
    out.controls.push_back(traj.controls[ic]);
  }
  return out;
}

}  // namespace dengue
