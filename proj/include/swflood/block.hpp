#pragma once

#include <functional>
#include <vector>

#include "swflood/grid.hpp"

namespace swflood {

/// Which stages a block participates in. Lagrangian stages only touch cells
/// holding water, so interior wetness suffices; flux-type stages (and the
/// final update) must also run where water sits just outside the block,
/// since it can cross the block boundary within one step.
enum class StageKind { Lagrangian, Flux, Final };

/// Per-block wet/halo-wet activity counts over B x B cell blocks.
/// interior_wet counts block cells with H > eps_dry or an active source
/// marker; halo_wet counts such cells in the one-cell ring around the block
/// (ring positions are clamped at domain edges).
struct BlockMask {
  int block_size = 16;
  int nbx = 0, nby = 0;
  int nx = 0, ny = 0;
  std::vector<int> interior_wet;
  std::vector<int> halo_wet;

  int total_blocks() const { return nbx * nby; }
  bool lagrangian_active(int ib) const { return interior_wet[ib] > 0; }
  bool flux_active(int ib) const { return interior_wet[ib] > 0 || halo_wet[ib] > 0; }
  bool active(int ib, StageKind kind) const {
    return kind == StageKind::Lagrangian ? lagrangian_active(ib) : flux_active(ib);
  }
  /// Inclusive cell rectangle covered by block ib (edge blocks may be
  /// partial).
  void block_rect(int ib, int& i0, int& j0, int& i1, int& j1) const;
};

BlockMask compute_block_mask(const FlowState& state, const SourceField& sources,
                             double eps_dry, int block_size);

/// Runs `body(ib)` for every block active for the given stage kind, in block
/// order. For the final stage, `skipped` (when provided) runs for every
/// inactive block so its scratch can be cleared.
void for_each_active_block(const BlockMask& mask, StageKind kind,
                           const std::function<void(int)>& body,
                           const std::function<void(int)>& skipped = {});

/// Block ids active for the given stage kind, ascending.
std::vector<int> active_blocks(const BlockMask& mask, StageKind kind);

/// Fraction of blocks touched by the step (interior or halo wet).
double active_fraction(const BlockMask& mask);

}  // namespace swflood
