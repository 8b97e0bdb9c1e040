#include "swflood/sources.hpp"

#include <algorithm>
#include <cmath>

#include "swflood/errors.hpp"

namespace swflood {

double SourceSpec::discharge_at(double t) const {
  if (hydrograph.empty()) return 0.0;
  if (hydrograph.size() == 1 || t <= hydrograph.front().t) return hydrograph.front().q;
  if (t >= hydrograph.back().t) return hydrograph.back().q;
  auto it = std::upper_bound(hydrograph.begin(), hydrograph.end(), t,
                             [](double v, const HydrographSample& s) { return v < s.t; });
  const HydrographSample& hi = *it;
  const HydrographSample& lo = *(it - 1);
  double a = (t - lo.t) / (hi.t - lo.t);
  return lo.q + a * (hi.q - lo.q);
}

void SourceSpec::validate(const Terrain& terrain) const {
  if (cells.i0 > cells.i1 || cells.j0 > cells.j1)
    throw ConfigError("source '" + name + "': empty cell rectangle");
  if (!terrain.contains(cells.i0, cells.j0) || !terrain.contains(cells.i1, cells.j1))
    throw ConfigError("source '" + name + "': cells outside grid");
  for (std::size_t k = 1; k < hydrograph.size(); ++k) {
    if (!(hydrograph[k].t > hydrograph[k - 1].t))
      throw ConfigError("source '" + name + "': hydrograph times must be strictly increasing");
  }
  if (kind == Kind::Discharge && hydrograph.empty())
    throw ConfigError("source '" + name + "': discharge source needs a hydrograph");
}

namespace {

double cell_sigma(const SourceSpec& s, double t, const Terrain& terrain) {
  if (s.kind == SourceSpec::Kind::Rain) return s.rate;
  double q = s.discharge_at(t);
  return q / (s.cells.count() * terrain.cell_area());
}

}  // namespace

SourceField source_terms(const std::vector<SourceSpec>& sources, double t,
                         const Terrain& terrain) {
  SourceField f;
  f.resize(terrain.nx, terrain.ny);
  for (const SourceSpec& s : sources) {
    s.validate(terrain);
    double sig = cell_sigma(s, t, terrain);
    for (int j = s.cells.j0; j <= s.cells.j1; ++j) {
      for (int i = s.cells.i0; i <= s.cells.i1; ++i) {
        int k = terrain.idx(i, j);
        f.sigma[k] += sig;
        f.vx[k] = s.source_velocity.x;
        f.vy[k] = s.source_velocity.y;
      }
    }
  }
  for (std::size_t k = 0; k < f.sigma.size(); ++k)
    f.index_q[k] = (f.sigma[k] != 0.0) ? 1 : 0;
  return f;
}

void resample_sigma(const std::vector<SourceSpec>& sources, double t,
                    const Terrain& terrain, SourceField& field) {
  std::fill(field.sigma.begin(), field.sigma.end(), 0.0);
  for (const SourceSpec& s : sources) {
    double sig = cell_sigma(s, t, terrain);
    for (int j = s.cells.j0; j <= s.cells.j1; ++j)
      for (int i = s.cells.i0; i <= s.cells.i1; ++i)
        field.sigma[terrain.idx(i, j)] += sig;
  }
}

}  // namespace swflood
