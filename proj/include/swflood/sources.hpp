#pragma once

#include <string>
#include <vector>

#include "swflood/grid.hpp"

namespace swflood {

/// Inclusive cell rectangle [i0..i1] x [j0..j1] on a grid.
struct CellRect {
  int i0 = 0, j0 = 0, i1 = 0, j1 = 0;
  int count() const { return (i1 - i0 + 1) * (j1 - j0 + 1); }
};

struct HydrographSample {
  double t = 0.0;
  double q = 0.0;  // discharge [m^3/s]
};

/// A water source or drain tied to a set of cells.
///  - Discharge: Q(t) [m^3/s] spread uniformly over the covered cells,
///    sigma = Q / (n_cells * h^2). Negative Q drains.
///  - Rain: uniform sigma [m/s] over the region.
struct SourceSpec {
  enum class Kind { Discharge, Rain };
  Kind kind = Kind::Discharge;
  std::string name;
  CellRect cells;              // on the grid the spec is evaluated for
  std::vector<HydrographSample> hydrograph;  // discharge sources; constant if one sample
  double rate = 0.0;           // rain sigma [m/s]
  Vec2 source_velocity;        // water velocity at the source; (0,0) for rain

  double discharge_at(double t) const;  // linear interpolation, clamped
  void validate(const Terrain& terrain) const;
};

/// Evaluate all sources at time t into a per-cell field. index_q marks the
/// cells where sigma is nonzero at t.
SourceField source_terms(const std::vector<SourceSpec>& sources, double t,
                         const Terrain& terrain);

/// Re-evaluate sigma at time t on the cells already marked in `field`
/// (markers and velocities are left untouched).
void resample_sigma(const std::vector<SourceSpec>& sources, double t,
                    const Terrain& terrain, SourceField& field);

}  // namespace swflood
