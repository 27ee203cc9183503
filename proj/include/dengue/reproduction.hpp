#pragma once

// Basic reproduction number under the three control instruments: closed
// form, next-generation-matrix cross-check, and 2-D control sweeps with
// R0 = 1 contour extraction.

#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "model.hpp"
#include "parallel.hpp"

namespace dengue {

/// Mosquito part of the disease-free equilibrium. Not every control setting
/// sustains a vector population: viable is false (and the sizes 0) when
/// recruitment loses to removal.
struct MosquitoEquilibrium {
  double A_star = 0.0;
  double S_star = 0.0;
  bool viable = false;
};

/// Net aquatic-cycle margin phi*eta_A - (eta_A + mu_A + c_A)(mu_m + c_m)
/// (units 1/day^2). Positive iff the vector population is sustainable.
inline double vector_viability_margin(const ControlVector& u, const ModelParams& p) {
  return p.phi * p.eta_A - (p.eta_A + p.mu_A + u.c_A) * (p.mu_m + u.c_m);
}

namespace detail {
inline void check_r0_inputs(const ControlVector& u, const ModelParams& p,
                            const ControlBounds& bounds) {
  if (auto rep = validate_params(p); !rep.ok())
    throw std::invalid_argument("invalid params\n" + rep.str());
  if (!bounds.contains(u))
    throw std::invalid_argument("control vector outside bounds");
}
}  // namespace detail

/// Steady state of the aquatic/adult subsystem with no infection present.
/// When viable: A* = alpha*k*N_h * (1 - (eta_A+mu_A+c_A)(mu_m+c_m)/(phi*eta_A))
/// and S* = eta_A * A* / (mu_m + c_m); otherwise (0, 0).
inline MosquitoEquilibrium dfe_mosquito_equilibrium(const ControlVector& u,
                                                    const ModelParams& p,
                                                    const ControlBounds& bounds = {}) {
  detail::check_r0_inputs(u, p, bounds);
  const double removal = (p.eta_A + p.mu_A + u.c_A) * (p.mu_m + u.c_m);
  if (!(p.phi * p.eta_A > removal)) return {0.0, 0.0, false};
  const double A = u.alpha * p.k * p.N_h * (1.0 - removal / (p.phi * p.eta_A));
  const double S = p.eta_A * A / (p.mu_m + u.c_m);
  return {A, S, true};
}

struct R0Result {
  double r0 = 0.0;        ///< dimensionless; 0 when the vector dies out
  double m_factor = 0.0;  ///< vector_viability_margin value (1/day^2)
  MosquitoEquilibrium dfe;
  bool viable = false;
};

/// Closed-form basic reproduction number,
///   R0 = sqrt( alpha k B^2 beta_hm beta_mh M / (phi (eta_h+mu_h) (c_m+mu_m)^2) )
/// with M the viability margin. A non-sustainable vector population
/// transmits nothing, so R0 is defined as 0 there.
inline R0Result r0(const ControlVector& u, const ModelParams& p,
                   const ControlBounds& bounds = {}) {
  const MosquitoEquilibrium dfe = dfe_mosquito_equilibrium(u, p, bounds);
  const double margin = vector_viability_margin(u, p);
  if (!dfe.viable) return {0.0, margin, dfe, false};
  const double denom_rate = u.c_m + p.mu_m;
  const double r0_sq = (u.alpha * p.k * p.B * p.B * p.beta_hm * p.beta_mh * margin) /
                       (p.phi * (p.eta_h + p.mu_h) * denom_rate * denom_rate);
  return {std::sqrt(r0_sq), margin, dfe, true};
}

/// Spectral radius of F V^-1 for the infected subsystem (I_h, I_m) linearized
/// at a disease-free point with S_h = N_h and the given adult-mosquito count:
///   F = [[0, B beta_mh], [B beta_hm S*/N_h, 0]],  V = diag(eta_h+mu_h, mu_m+c_m).
inline double ngm_spectral_radius(double S_star, const ControlVector& u,
                                  const ModelParams& p) {
  const double h_to_m = p.B * p.beta_hm * (S_star / p.N_h) / (p.eta_h + p.mu_h);
  const double m_to_h = p.B * p.beta_mh / (p.mu_m + u.c_m);
  return std::sqrt(h_to_m * m_to_h);
}

/// Independent next-generation route to R0: computes the mosquito equilibrium
/// and feeds it to the 2x2 spectral-radius formula. Kept free of the closed
/// form above so the two can check each other. Requires a viable equilibrium.
inline double r0_ngm_oracle(const ControlVector& u, const ModelParams& p,
                            const ControlBounds& bounds = {}) {
  const MosquitoEquilibrium dfe = dfe_mosquito_equilibrium(u, p, bounds);
  if (!dfe.viable)
    throw std::domain_error(
        "r0_ngm_oracle: vector population not viable under these controls");
  return ngm_spectral_radius(dfe.S_star, u, p);
}

/// Identifies one of the three control instruments for sweeps.
enum class ControlId { c_A, c_m, alpha };

inline const char* control_name(ControlId id) {
  switch (id) {
    case ControlId::c_A: return "c_A";
    case ControlId::c_m: return "c_m";
    default: return "alpha";
  }
}

inline std::optional<ControlId> parse_control_name(std::string_view s) {
  if (s == "c_A" || s == "ca" || s == "cA") return ControlId::c_A;
  if (s == "c_m" || s == "cm") return ControlId::c_m;
  if (s == "alpha") return ControlId::alpha;
  return std::nullopt;
}

inline void set_control(ControlVector& u, ControlId id, double v) {
  switch (id) {
    case ControlId::c_A: u.c_A = v; break;
    case ControlId::c_m: u.c_m = v; break;
    case ControlId::alpha: u.alpha = v; break;
  }
}

/// One sweep axis: which control varies, over [lo, hi], with n points.
struct SweepAxis {
  ControlId control;
  double lo;
  double hi;
  std::size_t n;
};

/// Dense R0 evaluation over the Cartesian product of two axes. Values are
/// row-major with axis1 outer; the third control keeps its value from
/// `fixed`.
struct R0Grid {
  SweepAxis axis1, axis2;
  ControlVector fixed;
  std::vector<double> axis1_pts, axis2_pts;
  std::vector<double> values;

  double at(std::size_t i, std::size_t j) const {
    return values[i * axis2_pts.size() + j];
  }
};

namespace detail {
inline std::vector<double> axis_points(const SweepAxis& ax) {
  std::vector<double> pts(ax.n);
  if (ax.n == 1) {
    pts[0] = ax.lo;
  } else {
    for (std::size_t i = 0; i < ax.n; ++i)
      pts[i] = std::lerp(ax.lo, ax.hi, static_cast<double>(i) / (ax.n - 1));
  }
  return pts;
}

inline void check_axis(const SweepAxis& ax, const ControlBounds& bounds) {
  if (ax.n < 1) throw std::invalid_argument("r0_sweep: empty axis");
  if (!(ax.lo <= ax.hi)) throw std::invalid_argument("r0_sweep: axis range reversed");
  const double lo_ok = ax.control == ControlId::alpha ? bounds.alpha_min : 0.0;
  if (ax.lo < lo_ok || ax.hi > 1.0)
    throw std::invalid_argument(std::string("r0_sweep: range for ") +
                                control_name(ax.control) + " outside bounds");
}
}  // namespace detail

inline R0Grid r0_sweep(const SweepAxis& axis1, const SweepAxis& axis2,
                       const ControlVector& fixed, const ModelParams& p,
                       const ControlBounds& bounds = {}, unsigned threads = 1) {
  if (axis1.control == axis2.control)
    throw std::invalid_argument("r0_sweep: axes must be two distinct controls");
  detail::check_axis(axis1, bounds);
  detail::check_axis(axis2, bounds);

  R0Grid grid;
  grid.axis1 = axis1;
  grid.axis2 = axis2;
  grid.fixed = fixed;
  grid.axis1_pts = detail::axis_points(axis1);
  grid.axis2_pts = detail::axis_points(axis2);
  grid.values.resize(axis1.n * axis2.n);

  detail::parallel_for(axis1.n, threads, [&](std::size_t i) {
    ControlVector u = fixed;
    set_control(u, axis1.control, grid.axis1_pts[i]);
    for (std::size_t j = 0; j < axis2.n; ++j) {
      set_control(u, axis2.control, grid.axis2_pts[j]);
      grid.values[i * axis2.n + j] = r0(u, p, bounds).r0;
    }
  });
  return grid;
}

/// Connected piece of a level-set polyline, in (axis1, axis2) coordinates.
struct ContourPolyline {
  std::vector<std::array<double, 2>> points;
};

namespace detail {

struct ContourSegment {
  std::array<double, 2> a, b;
};

// Linear crossing of `level` between two grid nodes.
inline std::array<double, 2> edge_point(double level, double va, double vb,
                                        std::array<double, 2> pa,
                                        std::array<double, 2> pb) {
  const double t = (level - va) / (vb - va);
  return {std::lerp(pa[0], pb[0], t), std::lerp(pa[1], pb[1], t)};
}

}  // namespace detail

/// Marching-squares extraction of the `level` iso-lines of an R0 grid, with
/// crossings placed by linear interpolation along cell edges. Segments are
/// chained into polylines; saddle cells are split using the cell-center mean.
inline std::vector<ContourPolyline> r0_contour(const R0Grid& grid,
                                               double level = 1.0) {
  const auto& xs = grid.axis1_pts;
  const auto& ys = grid.axis2_pts;
  std::vector<detail::ContourSegment> segs;

  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
      const double v00 = grid.at(i, j), v10 = grid.at(i + 1, j);
      const double v01 = grid.at(i, j + 1), v11 = grid.at(i + 1, j + 1);
      const std::array<double, 2> p00{xs[i], ys[j]}, p10{xs[i + 1], ys[j]};
      const std::array<double, 2> p01{xs[i], ys[j + 1]}, p11{xs[i + 1], ys[j + 1]};

      int mask = 0;
      if (v00 >= level) mask |= 1;
      if (v10 >= level) mask |= 2;
      if (v11 >= level) mask |= 4;
      if (v01 >= level) mask |= 8;
      if (mask == 0 || mask == 15) continue;

      auto bottom = [&] { return detail::edge_point(level, v00, v10, p00, p10); };
      auto right = [&] { return detail::edge_point(level, v10, v11, p10, p11); };
      auto top = [&] { return detail::edge_point(level, v01, v11, p01, p11); };
      auto left = [&] { return detail::edge_point(level, v00, v01, p00, p01); };

      switch (mask) {
        case 1: case 14: segs.push_back({left(), bottom()}); break;
        case 2: case 13: segs.push_back({bottom(), right()}); break;
        case 3: case 12: segs.push_back({left(), right()}); break;
        case 4: case 11: segs.push_back({right(), top()}); break;
        case 6: case 9:  segs.push_back({bottom(), top()}); break;
        case 7: case 8:  segs.push_back({left(), top()}); break;
        case 5: case 10: {
          const bool center_in = 0.25 * (v00 + v10 + v01 + v11) >= level;
          const bool split_a = (mask == 5) == center_in;
          if (split_a) {
            segs.push_back({left(), top()});
            segs.push_back({bottom(), right()});
          } else {
            segs.push_back({left(), bottom()});
            segs.push_back({right(), top()});
          }
          break;
        }
        default: break;
      }
    }
  }

  // Chain segments into polylines by matching quantized endpoints.
  const double qx = 0.5e-9 * (std::abs(xs.front()) + std::abs(xs.back()) + 1.0);
  const double qy = 0.5e-9 * (std::abs(ys.front()) + std::abs(ys.back()) + 1.0);
  auto key = [&](const std::array<double, 2>& pt) {
    return std::pair<long long, long long>(
        static_cast<long long>(std::llround(pt[0] / qx)),
        static_cast<long long>(std::llround(pt[1] / qy)));
  };

  using Key = std::pair<long long, long long>;
  std::multimap<Key, std::size_t> by_end;
  for (std::size_t s = 0; s < segs.size(); ++s) {
    by_end.emplace(key(segs[s].a), s);
    by_end.emplace(key(segs[s].b), s);
  }
  std::vector<bool> used(segs.size(), false);
  std::vector<ContourPolyline> polys;

  auto take_next = [&](const std::array<double, 2>& pt, std::array<double, 2>& out_end)
      -> bool {
    auto [lo, hi] = by_end.equal_range(key(pt));
    for (auto it = lo; it != hi; ++it) {
      const std::size_t s = it->second;
      if (used[s]) continue;
      used[s] = true;
      out_end = (key(segs[s].a) == key(pt)) ? segs[s].b : segs[s].a;
      return true;
    }
    return false;
  };

  for (std::size_t s = 0; s < segs.size(); ++s) {
    if (used[s]) continue;
    used[s] = true;
    ContourPolyline poly;
    poly.points.push_back(segs[s].a);
    poly.points.push_back(segs[s].b);
    // extend forward
    std::array<double, 2> end = segs[s].b;
    std::array<double, 2> next;
    while (take_next(end, next)) {
      poly.points.push_back(next);
      end = next;
    }
    // extend backward
    end = segs[s].a;
    while (take_next(end, next)) {
      poly.points.insert(poly.points.begin(), next);
      end = next;
    }
    polys.push_back(std::move(poly));
  }
  return polys;
}

}  // namespace dengue
