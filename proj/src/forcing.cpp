#include "swflood/forcing.hpp"

#include <algorithm>

namespace swflood {

void ForceField::resize(int nx_, int ny_) {
  nx = nx_;
  ny = ny_;
  std::size_t n = static_cast<std::size_t>(nx_) * ny_;
  fx.assign(n, 0.0);
  fy.assign(n, 0.0);
  fric_x.assign(n, 0.0);
  fric_y.assign(n, 0.0);
  sigma_eff.assign(n, 0.0);
}

void ForceField::clear() {
  std::fill(fx.begin(), fx.end(), 0.0);
  std::fill(fy.begin(), fy.end(), 0.0);
  std::fill(fric_x.begin(), fric_x.end(), 0.0);
  std::fill(fric_y.begin(), fric_y.end(), 0.0);
  std::fill(sigma_eff.begin(), sigma_eff.end(), 0.0);
}

Vec2 bottom_friction(Vec2 u, double H, double g, double n_manning) {
  return detail::friction_core(u, H, g, n_manning);
}

Vec2 bottom_friction(Vec2 u, double H, const PhysicalParams& params) {
  return detail::friction_core(u, H, params.g, params.n_manning);
}

Vec2 viscous_force(const FlowState& state, const PhysicalParams& params,
                   const Terrain& terrain, int i, int j) {
  detail::StateRef v{state.H.data(), state.HUx.data(), state.HUy.data()};
  Vec2 u_c = detail::view_velocity(v, params.eps_dry, terrain.idx(i, j));
  Vec2 lap = detail::laplacian_velocity(v, terrain, params.eps_dry, i, j, u_c);
  return {params.nu * lap.x, params.nu * lap.y};
}

Vec2 coriolis_force(Vec2 u, const PhysicalParams& params) {
  return {2.0 * u.y * params.omega_z, -2.0 * u.x * params.omega_z};
}

Vec2 wind_force(Vec2 u, double H, const WindForcing& wind, double t,
                const PhysicalParams& params) {
  Vec2 w = wind.at(t);
  double rx = w.x - u.x;
  double ry = w.y - u.y;
  double rel = std::sqrt(rx * rx + ry * ry);
  double c = params.c_a * params.rho_air / (params.rho_water * H);
  return {c * rx * rel, c * ry * rel};
}

Vec2 surface_gradient_force(const FlowState& state, const Terrain& terrain,
                            const PhysicalParams& params, int i, int j) {
  detail::StateRef v{state.H.data(), state.HUx.data(), state.HUy.data()};
  if (state.H[state.idx(i, j)] <= params.eps_dry) return {0.0, 0.0};
  Vec2 grad = detail::eta_gradient(v, terrain, params.eps_dry, i, j);
  return {-params.g * grad.x, -params.g * grad.y};
}

ForceField assemble_forces(const FlowState& state, const Terrain& terrain,
                           const PhysicalParams& params, const WindForcing& wind,
                           const SourceField& src, double t) {
  ForceField out;
  out.resize(terrain.nx, terrain.ny);
  detail::StateRef v{state.H.data(), state.HUx.data(), state.HUy.data()};
  Vec2 w = wind.at(t);
  detail::SourceView sv{src.sigma.data(), src.vx.data(), src.vy.data(), !src.empty()};
  detail::assemble_forces_rect(v, terrain, params, w, wind.any(), sv, out, 0, 0,
                               terrain.nx - 1, terrain.ny - 1);
  return out;
}

}  // namespace swflood
