#include "swflood/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "swflood/errors.hpp"

namespace swflood {

void Terrain::validate() const {
  if (nx < 1 || ny < 1) throw ConfigError("terrain: nx and ny must be >= 1");
  if (!(h > 0.0)) throw ConfigError("terrain: cell size must be positive");
  if (b.size() != cells()) throw ConfigError("terrain: bed array size mismatch");
  for (std::size_t k = 0; k < b.size(); ++k) {
    if (!std::isfinite(b[k]))
      throw ConfigError("terrain: non-finite bed elevation at cell " + std::to_string(k));
  }
}

FlowState FlowState::dry(const Terrain& terrain) {
  FlowState s;
  s.nx = terrain.nx;
  s.ny = terrain.ny;
  s.H.assign(terrain.cells(), 0.0);
  s.HUx.assign(terrain.cells(), 0.0);
  s.HUy.assign(terrain.cells(), 0.0);
  return s;
}

void FlowState::enforce_dry_rule(double eps_dry) {
  for (std::size_t k = 0; k < H.size(); ++k) {
    if (H[k] <= eps_dry) {
      HUx[k] = 0.0;
      HUy[k] = 0.0;
    }
  }
}

void PhysicalParams::validate() const {
  if (!(g > 0.0)) throw ConfigError("params: gravity must be positive");
  if (n_manning < 0.0) throw ConfigError("params: Manning coefficient must be >= 0");
  for (double n : n_field)
    if (n < 0.0) throw ConfigError("params: Manning field must be >= 0");
  if (nu < 0.0) throw ConfigError("params: viscosity must be >= 0");
  if (!(rho_water > 0.0)) throw ConfigError("params: water density must be positive");
  if (rho_air < 0.0) throw ConfigError("params: air density must be >= 0");
  if (!(eps_dry > 0.0)) throw ConfigError("params: dry threshold must be positive");
}

double latitude_to_omega_z(double latitude_deg) {
  constexpr double earth_rate = 7.2921159e-5;  // [1/s]
  return earth_rate * std::sin(latitude_deg * std::numbers::pi / 180.0);
}

WindForcing WindForcing::constant(double wx, double wy) {
  WindForcing w;
  w.series.push_back({0.0, wx, wy});
  return w;
}

Vec2 WindForcing::at(double t) const {
  if (series.empty()) return {0.0, 0.0};
  if (series.size() == 1 || t <= series.front().t)
    return {series.front().wx, series.front().wy};
  if (t >= series.back().t) return {series.back().wx, series.back().wy};
  auto it = std::upper_bound(series.begin(), series.end(), t,
                             [](double v, const WindSample& s) { return v < s.t; });
  const WindSample& hi = *it;
  const WindSample& lo = *(it - 1);
  double a = (t - lo.t) / (hi.t - lo.t);
  return {lo.wx + a * (hi.wx - lo.wx), lo.wy + a * (hi.wy - lo.wy)};
}

void WindForcing::validate() const {
  for (std::size_t k = 1; k < series.size(); ++k) {
    if (!(series[k].t > series[k - 1].t))
      throw ConfigError("wind: sample times must be strictly increasing");
  }
}

void SourceField::resize(int nx_, int ny_) {
  nx = nx_;
  ny = ny_;
  std::size_t n = static_cast<std::size_t>(nx_) * ny_;
  sigma.assign(n, 0.0);
  vx.assign(n, 0.0);
  vy.assign(n, 0.0);
  index_q.assign(n, 0);
}

void SourceField::clear_values() {
  std::fill(sigma.begin(), sigma.end(), 0.0);
  std::fill(vx.begin(), vx.end(), 0.0);
  std::fill(vy.begin(), vy.end(), 0.0);
  std::fill(index_q.begin(), index_q.end(), 0);
}

double free_surface(const FlowState& state, const Terrain& terrain, int i, int j) {
  if (!terrain.contains(i, j))
    throw std::out_of_range("free_surface: cell (" + std::to_string(i) + "," +
                            std::to_string(j) + ") outside grid");
  return state.H[state.idx(i, j)] + terrain.b[terrain.idx(i, j)];
}

Vec2 velocity(const FlowState& state, const PhysicalParams& params, int i, int j) {
  if (i < 0 || i >= state.nx || j < 0 || j >= state.ny)
    throw std::out_of_range("velocity: cell index outside grid");
  int k = state.idx(i, j);
  double H = state.H[k];
  if (H <= params.eps_dry) return {0.0, 0.0};
  return {state.HUx[k] / H, state.HUy[k] / H};
}

double total_volume(const FlowState& state, const Terrain& terrain) {
  double sum = 0.0;
  for (double v : state.H) sum += v;
  return sum * terrain.cell_area();
}

}  // namespace swflood
