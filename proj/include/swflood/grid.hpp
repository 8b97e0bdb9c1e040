#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace swflood {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Bed elevation raster on a uniform Cartesian grid of square cells.
/// Row-major storage, index = i + j*nx, with j increasing northward
/// (row 0 is the southern edge). (x0, y0) is the lower-left corner.
struct Terrain {
  int nx = 0;
  int ny = 0;
  double h = 0.0;   // cell size [m]
  double x0 = 0.0;  // lower-left corner [m]
  double y0 = 0.0;
  std::vector<double> b;  // bed elevation [m], size nx*ny

  std::size_t cells() const { return static_cast<std::size_t>(nx) * ny; }
  int idx(int i, int j) const { return i + j * nx; }
  bool contains(int i, int j) const { return i >= 0 && i < nx && j >= 0 && j < ny; }
  double cell_area() const { return h * h; }
  /// Cell-center coordinates.
  double xc(int i) const { return x0 + (i + 0.5) * h; }
  double yc(int j) const { return y0 + (j + 0.5) * h; }

  /// Throws ConfigError if dimensions/cell size are invalid or the bed
  /// contains non-finite values.
  void validate() const;
};

/// Conserved fields: water depth H and depth-integrated momentum (HUx, HUy).
/// Invariant: H >= 0 everywhere, and cells with H <= eps_dry carry zero
/// momentum (velocity is exactly (0,0) below the dry threshold).
struct FlowState {
  int nx = 0;
  int ny = 0;
  double t = 0.0;  // current time [s]
  std::vector<double> H;    // [m]
  std::vector<double> HUx;  // [m^2/s]
  std::vector<double> HUy;  // [m^2/s]

  static FlowState dry(const Terrain& terrain);
  std::size_t cells() const { return static_cast<std::size_t>(nx) * ny; }
  int idx(int i, int j) const { return i + j * nx; }

  /// Zeroes momentum wherever H <= eps_dry (restores the dry-cell rule
  /// after ingesting external data).
  void enforce_dry_rule(double eps_dry);
};

struct PhysicalParams {
  double g = 9.81;           // gravity [m/s^2]
  double n_manning = 0.02;   // Manning roughness [s m^-1/3]
  std::vector<double> n_field;  // optional per-cell roughness; empty = scalar
  double nu = 0.0;           // kinematic turbulent viscosity [m^2/s]
  double omega_z = 0.0;      // vertical component of Earth's rotation [1/s]
  double c_a = 1.0e-3;       // wind drag parameter [-]
  double rho_air = 1.2;      // [kg/m^3]
  double rho_water = 1000.0; // [kg/m^3]
  double eps_dry = 1.0e-6;   // dry threshold [m]

  double manning(int cell) const {
    return n_field.empty() ? n_manning : n_field[cell];
  }
  void validate() const;
};

/// Vertical rotation-rate component for a given latitude [deg].
double latitude_to_omega_z(double latitude_deg);

struct WindSample {
  double t = 0.0;
  double wx = 0.0;
  double wy = 0.0;
};

/// Horizontal wind velocity, constant or a time series with linear
/// interpolation (clamped outside the sampled range).
struct WindForcing {
  std::vector<WindSample> series;  // empty = no wind

  static WindForcing constant(double wx, double wy);
  Vec2 at(double t) const;
  bool any() const { return !series.empty(); }
  /// Throws ConfigError unless sample times are strictly increasing.
  void validate() const;
};

/// Per-cell source/drain density sigma [m/s], source water velocity, and
/// the activity marker consumed by the block mask.
struct SourceField {
  int nx = 0;
  int ny = 0;
  std::vector<double> sigma;
  std::vector<double> vx;
  std::vector<double> vy;
  std::vector<std::uint8_t> index_q;  // 1 where a source/drain is active

  void resize(int nx_, int ny_);
  void clear_values();
  bool empty() const { return sigma.empty(); }
};

/// Free water surface level eta = H + b. Throws std::out_of_range for bad
/// indices.
double free_surface(const FlowState& state, const Terrain& terrain, int i, int j);

/// Momentum-to-velocity conversion with the dry-cell rule: exactly (0,0)
/// when H <= eps_dry.
Vec2 velocity(const FlowState& state, const PhysicalParams& params, int i, int j);

/// Total water volume, sum of H * h^2 over all cells.
double total_volume(const FlowState& state, const Terrain& terrain);

}  // namespace swflood
