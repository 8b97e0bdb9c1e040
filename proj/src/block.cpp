#include "swflood/block.hpp"

#include <algorithm>

namespace swflood {

void BlockMask::block_rect(int ib, int& i0, int& j0, int& i1, int& j1) const {
  int bi = ib % nbx;
  int bj = ib / nbx;
  i0 = bi * block_size;
  j0 = bj * block_size;
  i1 = std::min(i0 + block_size - 1, nx - 1);
  j1 = std::min(j0 + block_size - 1, ny - 1);
}

BlockMask compute_block_mask(const FlowState& state, const SourceField& sources,
                             double eps_dry, int block_size) {
  BlockMask m;
  m.block_size = block_size;
  m.nx = state.nx;
  m.ny = state.ny;
  m.nbx = (state.nx + block_size - 1) / block_size;
  m.nby = (state.ny + block_size - 1) / block_size;
  m.interior_wet.assign(m.total_blocks(), 0);
  m.halo_wet.assign(m.total_blocks(), 0);

  const bool has_src = !sources.empty();
  auto wet = [&](int i, int j) {
    int k = state.idx(i, j);
    return state.H[k] > eps_dry || (has_src && sources.index_q[k] != 0);
  };

  for (int ib = 0; ib < m.total_blocks(); ++ib) {
    int i0, j0, i1, j1;
    m.block_rect(ib, i0, j0, i1, j1);
    int interior = 0;
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i)
        if (wet(i, j)) ++interior;

    // One-cell ring, positions clamped into the domain (edge blocks fold the
    // ring onto their own border cells, matching the kernel's index fixup).
    int halo = 0;
    auto ring = [&](int i, int j) {
      int ci = std::clamp(i, 0, state.nx - 1);
      int cj = std::clamp(j, 0, state.ny - 1);
      if (wet(ci, cj)) ++halo;
    };
    for (int i = i0 - 1; i <= i1 + 1; ++i) {
      ring(i, j0 - 1);
      ring(i, j1 + 1);
    }
    for (int j = j0; j <= j1; ++j) {
      ring(i0 - 1, j);
      ring(i1 + 1, j);
    }
    m.interior_wet[ib] = interior;
    m.halo_wet[ib] = halo;
  }
  return m;
}

void for_each_active_block(const BlockMask& mask, StageKind kind,
                           const std::function<void(int)>& body,
                           const std::function<void(int)>& skipped) {
  for (int ib = 0; ib < mask.total_blocks(); ++ib) {
    if (mask.active(ib, kind))
      body(ib);
    else if (skipped)
      skipped(ib);
  }
}

std::vector<int> active_blocks(const BlockMask& mask, StageKind kind) {
  std::vector<int> out;
  for (int ib = 0; ib < mask.total_blocks(); ++ib)
    if (mask.active(ib, kind)) out.push_back(ib);
  return out;
}

double active_fraction(const BlockMask& mask) {
  if (mask.total_blocks() == 0) return 0.0;
  int n = 0;
  for (int ib = 0; ib < mask.total_blocks(); ++ib)
    if (mask.flux_active(ib)) ++n;
  return static_cast<double>(n) / mask.total_blocks();
}

}  // namespace swflood
