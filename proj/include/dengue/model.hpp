#pragma once

// Core domain types and the right-hand side of the six-compartment
// host-vector system: an SIR block for humans coupled to an
// aquatic/susceptible/infected block for female mosquitoes, with three
// vector-control inputs (larvicide, adulticide, mechanical control).

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dengue {

/// Smallest admissible mechanical-control proportion. The model divides by
/// alpha*k*N_h, so alpha must stay strictly positive; this floor closes the
/// constraint box for the optimizer. Configurable wherever bounds are taken.
inline constexpr double kDefaultAlphaMin = 0.01;

/// Epidemiological and entomological constants. Rates are per day,
/// populations are head counts, probabilities are dimensionless.
struct ModelParams {
  double N_h;      ///< total human population
  double B;        ///< average daily biting rate (bites/day)
  double beta_mh;  ///< transmission probability per bite, mosquito -> human
  double beta_hm;  ///< transmission probability per bite, human -> mosquito
  double mu_h;     ///< human mortality rate (1/day)
  double eta_h;    ///< human recovery rate, 1 / mean viremic period (1/day)
  double mu_m;     ///< adult-mosquito mortality rate (1/day)
  double phi;      ///< eggs laid per capita per day (1/day)
  double mu_A;     ///< larval natural mortality (1/day)
  double eta_A;    ///< larva-to-adult maturation rate (1/day)
  double m;        ///< female mosquitoes per human
  double k;        ///< larvae per human

  /// Built-in default calibration (urban outbreak, ~480k inhabitants).
  static constexpr ModelParams defaults() {
    return {480000.0,           // N_h
            0.8,                // B
            0.375,              // beta_mh
            0.375,              // beta_hm
            1.0 / (71.0 * 365.0),  // mu_h  (71-year lifespan)
            1.0 / 3.0,          // eta_h (3-day viremic period)
            0.1,                // mu_m  (10-day adult lifespan)
            6.0,                // phi
            0.25,               // mu_A
            0.08,               // eta_A
            3.0,                // m
            3.0};               // k
  }
};

struct ValidationIssue {
  std::string field;
  std::string message;
};

/// Outcome of a parameter check; empty iff every invariant holds.
struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool ok() const { return issues.empty(); }

  std::string str() const {
    std::ostringstream os;
    for (const auto& v : issues) os << v.field << ": " << v.message << "\n";
    return os.str();
  }
};

/// Lists every violated ModelParams invariant (strict positivity of all
/// fields, transmission probabilities <= 1, at least one human).
inline ValidationReport validate_params(const ModelParams& p) {
  ValidationReport rep;
  auto positive = [&rep](const char* name, double v) {
    if (!(v > 0.0) || !std::isfinite(v))
      rep.issues.push_back({name, "must be strictly positive and finite"});
  };
  positive("N_h", p.N_h);
  positive("B", p.B);
  positive("beta_mh", p.beta_mh);
  positive("beta_hm", p.beta_hm);
  positive("mu_h", p.mu_h);
  positive("eta_h", p.eta_h);
  positive("mu_m", p.mu_m);
  positive("phi", p.phi);
  positive("mu_A", p.mu_A);
  positive("eta_A", p.eta_A);
  positive("m", p.m);
  positive("k", p.k);
  if (p.beta_mh > 1.0)
    rep.issues.push_back({"beta_mh", "transmission probability exceeds 1"});
  if (p.beta_hm > 1.0)
    rep.issues.push_back({"beta_hm", "transmission probability exceeds 1"});
  if (std::isfinite(p.N_h) && p.N_h > 0.0 && p.N_h < 1.0)
    rep.issues.push_back({"N_h", "population must be at least 1"});
  return rep;
}

/// One instantaneous setting of the three vector-control instruments.
/// c_A and c_m live in [0,1]; alpha in [alpha_min, 1] (alpha is the fraction
/// of breeding capacity left in place, so alpha = 1 means no intervention).
struct ControlVector {
  double c_A = 0.0;    ///< larvicide proportion
  double c_m = 0.0;    ///< adulticide proportion
  double alpha = 1.0;  ///< mechanical-control proportion
};

/// Box bounds for ControlVector; only the alpha floor is configurable.
struct ControlBounds {
  double alpha_min = kDefaultAlphaMin;

  bool contains(const ControlVector& u) const {
    return std::isfinite(u.c_A) && u.c_A >= 0.0 && u.c_A <= 1.0 &&
           std::isfinite(u.c_m) && u.c_m >= 0.0 && u.c_m <= 1.0 &&
           std::isfinite(u.alpha) && u.alpha >= alpha_min && u.alpha <= 1.0;
  }

  ControlVector clamp(const ControlVector& u) const {
    auto clip = [](double v, double lo, double hi) {
      return v < lo ? lo : (v > hi ? hi : v);
    };
    return {clip(u.c_A, 0.0, 1.0), clip(u.c_m, 0.0, 1.0),
            clip(u.alpha, alpha_min, 1.0)};
  }
};

/// The six compartment values at one instant: humans S/I/R (persons) and
/// mosquitoes aquatic/susceptible/infected (counts).
struct State {
  double S_h = 0.0;
  double I_h = 0.0;
  double R_h = 0.0;
  double A_m = 0.0;
  double S_m = 0.0;
  double I_m = 0.0;

  double human_total() const { return S_h + I_h + R_h; }
};

inline bool state_finite(const State& x) {
  return std::isfinite(x.S_h) && std::isfinite(x.I_h) && std::isfinite(x.R_h) &&
         std::isfinite(x.A_m) && std::isfinite(x.S_m) && std::isfinite(x.I_m);
}

inline bool state_nonnegative(const State& x) {
  return x.S_h >= 0.0 && x.I_h >= 0.0 && x.R_h >= 0.0 && x.A_m >= 0.0 &&
         x.S_m >= 0.0 && x.I_m >= 0.0;
}

/// Validated starting point for an integration.
struct InitialState {
  State state;

  explicit InitialState(const State& x) : state(x) {
    if (!state_finite(x) || !state_nonnegative(x))
      throw std::invalid_argument(
          "InitialState: components must be finite and non-negative");
  }

  /// The stock starting point for a given parameter set: `infected0` viremic
  /// humans seeded into an otherwise susceptible population, mosquitoes at
  /// their uncontrolled carrying levels (A_m = k*N_h, S_m = m*N_h).
  static InitialState default_for(const ModelParams& p, double infected0 = 10.0) {
    if (!(infected0 >= 0.0) || infected0 > p.N_h)
      throw std::invalid_argument("InitialState: infected0 outside [0, N_h]");
    return InitialState(
        State{p.N_h - infected0, infected0, 0.0, p.k * p.N_h, p.m * p.N_h, 0.0});
  }
};

/// Time derivatives of the six compartments (per day).
struct Rates {
  double dS_h, dI_h, dR_h, dA_m, dS_m, dI_m;
};

/// Right-hand side of the state equations, evaluated term by term exactly as
/// the model is written; no clamping or smoothing. The aquatic recruitment
/// bracket 1 - A_m/(alpha*k*N_h) may be negative when A_m exceeds the
/// alpha-reduced carrying capacity; that is the intended reading (mechanical
/// control removes breeding sites out from under the current population).
inline Rates rhs(double /*t*/, const State& x, const ControlVector& u,
                 const ModelParams& p, double alpha_min = kDefaultAlphaMin) {
  if (!state_finite(x))
    throw std::invalid_argument("rhs: non-finite state component");
  if (!(std::isfinite(u.c_A) && std::isfinite(u.c_m) && std::isfinite(u.alpha)))
    throw std::invalid_argument("rhs: non-finite control component");
  if (u.alpha < alpha_min)
    throw std::domain_error("rhs: alpha below alpha_min");

  // Flow terms are computed once and reused so that the human equations
  // cancel pairwise: dS_h + dI_h + dR_h = mu_h * (N_h - S_h - I_h - R_h)
  // holds to a few ulps of the largest flow, not just approximately.
  const double force_h = p.B * p.beta_mh * x.I_m / p.N_h;  // on humans
  const double force_m = p.B * p.beta_hm * x.I_h / p.N_h;  // on mosquitoes
  const double infections_h = force_h * x.S_h;
  const double infections_m = force_m * x.S_m;
  const double recoveries = p.eta_h * x.I_h;
  const double capacity = u.alpha * p.k * p.N_h;

  Rates d;
  d.dS_h = p.mu_h * p.N_h - infections_h - p.mu_h * x.S_h;
  d.dI_h = infections_h - recoveries - p.mu_h * x.I_h;
  d.dR_h = recoveries - p.mu_h * x.R_h;
  d.dA_m = p.phi * (1.0 - x.A_m / capacity) * (x.S_m + x.I_m) -
           (p.eta_A + p.mu_A + u.c_A) * x.A_m;
  d.dS_m = p.eta_A * x.A_m - (force_m + p.mu_m + u.c_m) * x.S_m;
  d.dI_m = infections_m - (p.mu_m + u.c_m) * x.I_m;
  return d;
}

}  // namespace dengue
