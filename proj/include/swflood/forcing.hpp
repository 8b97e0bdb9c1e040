#pragma once

#include <cmath>
#include <vector>

#include "swflood/grid.hpp"
#include "swflood/sources.hpp"

namespace swflood {

/// Per-cell right-hand-side forces [m/s^2]. fx/fy hold the total force
/// (slope + friction + viscous + Coriolis + wind + source exchange);
/// fric_x/fric_y hold the explicit bottom-friction part separately so the
/// stepper can integrate friction semi-implicitly. sigma_eff mirrors the
/// source density the forces were assembled with.
struct ForceField {
  int nx = 0;
  int ny = 0;
  std::vector<double> fx, fy;
  std::vector<double> fric_x, fric_y;
  std::vector<double> sigma_eff;

  void resize(int nx_, int ny_);
  void clear();
};

/// Bottom friction -(lambda/2) U |U| with lambda = 2 g n^2 / H^{4/3}.
/// Caller guarantees a wet cell (H > eps_dry).
Vec2 bottom_friction(Vec2 u, double H, double g, double n_manning);
Vec2 bottom_friction(Vec2 u, double H, const PhysicalParams& params);

/// nu * Laplacian(U) via the 5-point stencil; dry neighbors and domain
/// boundaries contribute the center value (zero-gradient closure).
Vec2 viscous_force(const FlowState& state, const PhysicalParams& params,
                   const Terrain& terrain, int i, int j);

/// f-plane Coriolis: (2 Uy Omega_z, -2 Ux Omega_z).
Vec2 coriolis_force(Vec2 u, const PhysicalParams& params);

/// Wind drag C_a (rho_a / (rho H)) (W - U) |W - U| with W interpolated at t.
/// Caller guarantees a wet cell.
Vec2 wind_force(Vec2 u, double H, const WindForcing& wind, double t,
                const PhysicalParams& params);

/// -g * grad(eta), central differences over 2h, one-sided at wet/dry and
/// domain boundaries. A dry neighbor whose bed sits at or above the local
/// free surface is excluded (the balance guard); a dry neighbor below it
/// contributes its bed level.
Vec2 surface_gradient_force(const FlowState& state, const Terrain& terrain,
                            const PhysicalParams& params, int i, int j);

/// Sum of all force terms per cell plus the source momentum-exchange term
/// (sigma/H)(V - U). Dry cells get zero force (their source mass arrives
/// through sigma; momentum follows once the cell holds water).
ForceField assemble_forces(const FlowState& state, const Terrain& terrain,
                           const PhysicalParams& params, const WindForcing& wind,
                           const SourceField& src, double t);

namespace detail {

/// Field-view concept used by the assembler: depth(k), mom_x(k), mom_y(k).
/// The stepper provides a view that reads the half-step scratch for active
/// cells and the step-start state otherwise.
struct StateRef {
  const double* H = nullptr;
  const double* hux = nullptr;
  const double* huy = nullptr;
  double depth(int k) const { return H[k]; }
  double mom_x(int k) const { return hux[k]; }
  double mom_y(int k) const { return huy[k]; }
};

template <class V>
inline Vec2 view_velocity(const V& v, double eps_dry, int k) {
  double H = v.depth(k);
  if (H <= eps_dry) return {0.0, 0.0};
  return {v.mom_x(k) / H, v.mom_y(k) / H};
}

inline Vec2 friction_core(Vec2 u, double H, double g, double n) {
  double lam = 2.0 * g * n * n / (H * std::cbrt(H));
  double speed = std::sqrt(u.x * u.x + u.y * u.y);
  return {-0.5 * lam * u.x * speed, -0.5 * lam * u.y * speed};
}

/// One component of grad(eta) with the wet/dry closures described on
/// surface_gradient_force. `kl`/`kr` are the neighbor cell indices in the
/// sampled direction, or -1 outside the domain.
template <class V>
inline double eta_gradient_component(const V& v, const double* b, double eps_dry,
                                     double h, double eta_c, int kl, int kr) {
  bool has_l = false, has_r = false;
  double eta_l = 0.0, eta_r = 0.0;
  if (kl >= 0) {
    double Hl = v.depth(kl);
    double el = Hl + b[kl];
    if (Hl > eps_dry) {
      has_l = true;
      eta_l = el;
    } else if (el < eta_c) {  // dry neighbor below the local surface
      has_l = true;
      eta_l = el;
    }
  }
  if (kr >= 0) {
    double Hr = v.depth(kr);
    double er = Hr + b[kr];
    if (Hr > eps_dry) {
      has_r = true;
      eta_r = er;
    } else if (er < eta_c) {
      has_r = true;
      eta_r = er;
    }
  }
  if (has_l && has_r) return (eta_r - eta_l) / (2.0 * h);
  if (has_r) return (eta_r - eta_c) / h;
  if (has_l) return (eta_c - eta_l) / h;
  return 0.0;
}

template <class V>
inline Vec2 eta_gradient(const V& v, const Terrain& terrain, double eps_dry,
                         int i, int j) {
  const double* b = terrain.b.data();
  int k = terrain.idx(i, j);
  double eta_c = v.depth(k) + b[k];
  double gx = eta_gradient_component(v, b, eps_dry, terrain.h, eta_c,
                                     i > 0 ? k - 1 : -1,
                                     i + 1 < terrain.nx ? k + 1 : -1);
  double gy = eta_gradient_component(v, b, eps_dry, terrain.h, eta_c,
                                     j > 0 ? k - terrain.nx : -1,
                                     j + 1 < terrain.ny ? k + terrain.nx : -1);
  return {gx, gy};
}

template <class V>
inline Vec2 laplacian_velocity(const V& v, const Terrain& terrain, double eps_dry,
                               int i, int j, Vec2 u_c) {
  double sx = 0.0, sy = 0.0;
  auto add = [&](int ni, int nj) {
    if (ni < 0 || ni >= terrain.nx || nj < 0 || nj >= terrain.ny) {
      sx += u_c.x;
      sy += u_c.y;
      return;
    }
    int nk = terrain.idx(ni, nj);
    if (v.depth(nk) > eps_dry) {
      Vec2 un = view_velocity(v, eps_dry, nk);
      sx += un.x;
      sy += un.y;
    } else {
      sx += u_c.x;
      sy += u_c.y;
    }
  };
  add(i - 1, j);
  add(i + 1, j);
  add(i, j - 1);
  add(i, j + 1);
  double inv_h2 = 1.0 / (terrain.h * terrain.h);
  return {(sx - 4.0 * u_c.x) * inv_h2, (sy - 4.0 * u_c.y) * inv_h2};
}

/// Pointer view over a source field; lets the stepper swap in the midpoint
/// sigma samples while keeping the step-start markers and velocities.
struct SourceView {
  const double* sigma = nullptr;
  const double* vx = nullptr;
  const double* vy = nullptr;
  bool present = false;
};

/// Assemble forces for every cell of the inclusive rectangle
/// [i0..i1] x [j0..j1]. `w_t` is the wind vector already sampled at the
/// stage time.
template <class V>
void assemble_forces_rect(const V& v, const Terrain& terrain,
                          const PhysicalParams& p, Vec2 w_t, bool has_wind,
                          const SourceView& src, ForceField& out, int i0,
                          int j0, int i1, int j1) {
  for (int j = j0; j <= j1; ++j) {
    for (int i = i0; i <= i1; ++i) {
      int k = terrain.idx(i, j);
      double H = v.depth(k);
      double sig = src.present ? src.sigma[k] : 0.0;
      out.sigma_eff[k] = sig;
      if (H <= p.eps_dry) {
        out.fx[k] = 0.0;
        out.fy[k] = 0.0;
        out.fric_x[k] = 0.0;
        out.fric_y[k] = 0.0;
        continue;
      }
      Vec2 u{v.mom_x(k) / H, v.mom_y(k) / H};

      Vec2 grad = eta_gradient(v, terrain, p.eps_dry, i, j);
      double fx = -p.g * grad.x;
      double fy = -p.g * grad.y;

      Vec2 fr = friction_core(u, H, p.g, p.manning(k));
      fx += fr.x;
      fy += fr.y;

      if (p.nu > 0.0) {
        Vec2 lap = laplacian_velocity(v, terrain, p.eps_dry, i, j, u);
        fx += p.nu * lap.x;
        fy += p.nu * lap.y;
      }

      if (p.omega_z != 0.0) {
        fx += 2.0 * u.y * p.omega_z;
        fy += -2.0 * u.x * p.omega_z;
      }

      if (has_wind) {
        double rx = w_t.x - u.x;
        double ry = w_t.y - u.y;
        double rel = std::sqrt(rx * rx + ry * ry);
        double c = p.c_a * p.rho_air / (p.rho_water * H);
        fx += c * rx * rel;
        fy += c * ry * rel;
      }

      if (sig != 0.0) {
        double s_h = sig / H;
        fx += s_h * (src.vx[k] - u.x);
        fy += s_h * (src.vy[k] - u.y);
      }

      out.fx[k] = fx;
      out.fy[k] = fy;
      out.fric_x[k] = fr.x;
      out.fric_y[k] = fr.y;
    }
  }
}

}  // namespace detail
}  // namespace swflood
