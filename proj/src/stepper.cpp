#include "swflood/stepper.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include "swflood/errors.hpp"
#include "swflood/parallel.hpp"
#include "swflood/riemann.hpp"

namespace swflood {

namespace {

using Clock = std::chrono::steady_clock;

inline double elapsed(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

inline double minmod(double a, double b) {
  if (a > 0.0 && b > 0.0) return std::min(a, b);
  if (a < 0.0 && b < 0.0) return std::max(a, b);
  return 0.0;
}

}  // namespace

void TimestepControl::validate() const {
  if (!(courant > 0.0 && courant < 1.0))
    throw ConfigError("timestep: Courant number must be in (0,1)");
  if (!(dt_max > 0.0)) throw ConfigError("timestep: dt_max must be positive");
  if (!(dt_min > 0.0 && dt_min < dt_max))
    throw ConfigError("timestep: need 0 < dt_min < dt_max");
}

StageTimings& StageTimings::operator+=(const StageTimings& o) {
  mask += o.mask;
  forces += o.forces;
  dt += o.dt;
  predictor += o.predictor;
  mid_forces += o.mid_forces;
  corrector += o.corrector;
  flux += o.flux;
  finalize += o.finalize;
  return *this;
}

/// Reads the half-step scratch for cells the Lagrangian stages processed
/// and the step-start state elsewhere, so downstream stages see the same
/// values whether or not a block was dispatched.
struct CsphTvdStepper::HalfView {
  const double* Hn;
  const double* HUxn;
  const double* HUyn;
  const double* hH;
  const double* hHUx;
  const double* hHUy;
  const double* drx;
  const double* dry;
  const std::uint8_t* q;
  double eps;

  bool act(int k) const { return Hn[k] > eps || q[k] != 0; }
  double depth(int k) const { return act(k) ? hH[k] : Hn[k]; }
  double mom_x(int k) const { return act(k) ? hHUx[k] : HUxn[k]; }
  double mom_y(int k) const { return act(k) ? hHUy[k] : HUyn[k]; }
  bool wet(int k) const { return depth(k) > eps; }
  // half-step sampling shift (half of the stored full displacement)
  double shift_x(int k) const { return act(k) ? 0.5 * drx[k] : 0.0; }
  double shift_y(int k) const { return act(k) ? 0.5 * dry[k] : 0.0; }
};

namespace {

struct SideState {
  double hs = 0.0;     // depth after hydrostatic reconstruction at the face
  double hcell = 0.0;  // cell-side reconstructed depth (own bed)
  double un = 0.0;
  double ut = 0.0;
};

/// Reconstruct one side of a face with minmod-limited slopes over the
/// displaced particle positions. `k` is the cell, `kout` the neighbor away
/// from the face (-1 at the domain edge), `kin` the cell across the face.
/// `sgn` is +1 when the face lies on the cell's positive-axis side.
template <class ShiftFn, class NormFn, class TanFn>
SideState reconstruct_side(const CsphTvdStepper::HalfView& v, const double* b,
                           double h, double b_face, int k, int kout, int kin,
                           double sgn, const ShiftFn& shift, const NormFn& un_of,
                           const TanFn& ut_of) {
  SideState s;
  double eta_c = v.depth(k) + b[k];
  double un_c = un_of(k);
  double ut_c = ut_of(k);
  double p_c = shift(k);
  double p_in = sgn * h + shift(kin);
  double face = sgn * 0.5 * h;

  double s_eta = 0.0, s_un = 0.0, s_ut = 0.0;
  if (kout >= 0) {
    double p_out = -sgn * h + shift(kout);
    double d_in = p_in - p_c;
    double d_out = p_c - p_out;
    s_eta = minmod((v.depth(kin) + b[kin] - eta_c) / d_in,
                   (eta_c - (v.depth(kout) + b[kout])) / d_out);
    s_un = minmod((un_of(kin) - un_c) / d_in, (un_c - un_of(kout)) / d_out);
    s_ut = minmod((ut_of(kin) - ut_c) / d_in, (ut_c - ut_of(kout)) / d_out);
  }
  double off = face - p_c;
  double eta_f = eta_c + s_eta * off;
  s.hcell = std::max(0.0, eta_f - b[k]);
  if (s.hcell <= 0.0) {
    s.hcell = 0.0;
    return s;  // side dry at the face
  }
  s.hs = std::max(0.0, eta_f - b_face);
  s.un = un_c + s_un * off;
  s.ut = ut_c + s_ut * off;
  return s;
}

}  // namespace

CsphTvdStepper::CsphTvdStepper(const Terrain& terrain, PhysicalParams params,
                               TimestepControl control, StepperOptions options)
    : terrain_(&terrain),
      params_(std::move(params)),
      ctl_(control),
      opt_(options) {
  terrain.validate();
  params_.validate();
  ctl_.validate();
  if (opt_.block_size < 1) throw ConfigError("stepper: block size must be >= 1");
  if (opt_.workers < 1) opt_.workers = 1;
  if (!params_.n_field.empty() && params_.n_field.size() != terrain.cells())
    throw ConfigError("stepper: Manning field size mismatch");

  const std::size_t n = terrain.cells();
  src_.resize(terrain.nx, terrain.ny);
  sigma_mid_.assign(n, 0.0);
  f_n_.resize(terrain.nx, terrain.ny);
  f_mid_.resize(terrain.nx, terrain.ny);
  half_H_.assign(n, 0.0);
  half_HUx_.assign(n, 0.0);
  half_HUy_.assign(n, 0.0);
  Ht_.assign(n, 0.0);
  HVtx_.assign(n, 0.0);
  HVty_.assign(n, 0.0);
  drx_.assign(n, 0.0);
  dry_.assign(n, 0.0);
  Fh_.assign(n, 0.0);
  Fvx_.assign(n, 0.0);
  Fvy_.assign(n, 0.0);
  xf_.assign(static_cast<std::size_t>(terrain.nx + 1) * terrain.ny, FaceRec{});
  yf_.assign(static_cast<std::size_t>(terrain.nx) * (terrain.ny + 1), FaceRec{});
}

void CsphTvdStepper::set_wind(WindForcing wind) {
  wind.validate();
  wind_ = std::move(wind);
}

void CsphTvdStepper::set_sources(std::vector<SourceSpec> sources) {
  for (const SourceSpec& s : sources) s.validate(*terrain_);
  source_specs_ = std::move(sources);
  if (source_specs_.empty()) src_.clear_values();
}

void CsphTvdStepper::begin_step(const FlowState& state) {
  if (state.nx != terrain_->nx || state.ny != terrain_->ny)
    throw ConfigError("stepper: state does not match the terrain grid");

  if (!source_specs_.empty())
    src_ = source_terms(source_specs_, state.t, *terrain_);

  mask_ = compute_block_mask(state, src_, params_.eps_dry, opt_.block_size);
  const int nb = mask_.total_blocks();
  blk_reduce_.assign(nb, 0.0);
  blk_srcvol_.assign(nb, 0.0);
  blk_err_.assign(nb, -1);

  if (opt_.skip_dry_blocks) {
    lag_blocks_ = active_blocks(mask_, StageKind::Lagrangian);
    flux_blocks_ = active_blocks(mask_, StageKind::Flux);
    skipped_blocks_.clear();
    for (int ib = 0; ib < nb; ++ib)
      if (!mask_.flux_active(ib)) skipped_blocks_.push_back(ib);
  } else {
    lag_blocks_.resize(nb);
    std::iota(lag_blocks_.begin(), lag_blocks_.end(), 0);
    flux_blocks_ = lag_blocks_;
    skipped_blocks_.clear();
  }

  clamp_deficit_ = 0.0;
  source_volume_ = 0.0;
  boundary_outflow_ = 0.0;
}

CsphTvdStepper::HalfView CsphTvdStepper::half_view(const FlowState& state) const {
  return HalfView{state.H.data(), state.HUx.data(), state.HUy.data(),
                  half_H_.data(), half_HUx_.data(), half_HUy_.data(),
                  drx_.data(),    dry_.data(),      src_.index_q.data(),
                  params_.eps_dry};
}

void CsphTvdStepper::compute_forces(const FlowState& state) {
  detail::StateRef v{state.H.data(), state.HUx.data(), state.HUy.data()};
  const Vec2 w = wind_.at(state.t);
  const bool has_wind = wind_.any();
  detail::SourceView sv{src_.sigma.data(), src_.vx.data(), src_.vy.data(),
                        !source_specs_.empty()};
  parallel_for_blocks(lag_blocks_, opt_.workers, [&](int ib) {
    int i0, j0, i1, j1;
    mask_.block_rect(ib, i0, j0, i1, j1);
    detail::assemble_forces_rect(v, *terrain_, params_, w, has_wind, sv, f_n_,
                                 i0, j0, i1, j1);
  });
}

double CsphTvdStepper::compute_dt(const FlowState& state, double dt_cap) const {
  const double eps = params_.eps_dry;
  const double g = params_.g;
  const double h = terrain_->h;
  std::vector<double> partial(lag_blocks_.size(), 0.0);
  parallel_for_index(lag_blocks_.size(), opt_.workers, [&](std::size_t idx) {
    int i0, j0, i1, j1;
    mask_.block_rect(lag_blocks_[idx], i0, j0, i1, j1);
    double m = 0.0;
    for (int j = j0; j <= j1; ++j) {
      for (int i = i0; i <= i1; ++i) {
        int k = terrain_->idx(i, j);
        double H = state.H[k];
        if (H <= eps) continue;
        double ux = state.HUx[k] / H;
        double uy = state.HUy[k] / H;
        double fx = f_n_.fx[k];
        double fy = f_n_.fy[k];
        double rx = std::sqrt(h * std::fabs(fx));
        double ry = std::sqrt(h * std::fabs(fy));
        double up_x = std::fabs(fx > 0.0 ? ux + rx : (fx < 0.0 ? ux - rx : ux));
        double up_y = std::fabs(fy > 0.0 ? uy + ry : (fy < 0.0 ? uy - ry : uy));
        double c = std::sqrt(g * H);
        double us = std::max(std::fabs(ux), std::fabs(uy)) + c;
        m = std::max({m, up_x, up_y, us});
      }
    }
    partial[idx] = m;
  });
  double speed = 0.0;
  for (double p : partial) speed = std::max(speed, p);

  double tau = ctl_.dt_max;
  if (speed > 0.0) {
    double cfl = ctl_.courant * h / speed;
    if (cfl < ctl_.dt_min)
      throw NumericalError("timestep " + std::to_string(cfl) + " s fell below the abort floor " +
                           std::to_string(ctl_.dt_min) + " s (max wave speed " +
                           std::to_string(speed) + " m/s)");
    tau = std::min(tau, cfl);
  }
  if (dt_cap > 0.0) tau = std::min(tau, dt_cap);
  return tau;
}

void CsphTvdStepper::predictor(const FlowState& state, double tau) {
  const double half_tau = 0.5 * tau;
  const double eps = params_.eps_dry;
  const double g = params_.g;
  parallel_for_blocks(lag_blocks_, opt_.workers, [&](int ib) {
    int i0, j0, i1, j1;
    mask_.block_rect(ib, i0, j0, i1, j1);
    for (int j = j0; j <= j1; ++j) {
      for (int i = i0; i <= i1; ++i) {
        int k = terrain_->idx(i, j);
        if (!cell_active(state, k)) continue;
        double Hn = state.H[k];
        double H12 = Hn + half_tau * src_.sigma[k];
        if (H12 < 0.0) H12 = 0.0;
        double qx = state.HUx[k] + half_tau * Hn * (f_n_.fx[k] - f_n_.fric_x[k]);
        double qy = state.HUy[k] + half_tau * Hn * (f_n_.fy[k] - f_n_.fric_y[k]);
        if (H12 > eps) {
          double n = params_.manning(k);
          if (n > 0.0) {
            double ux = qx / H12;
            double uy = qy / H12;
            double sp = std::sqrt(ux * ux + uy * uy);
            if (sp > 0.0) {
              double lam = 2.0 * g * n * n / (H12 * std::cbrt(H12));
              double fac = 1.0 / (1.0 + 0.5 * lam * sp * half_tau);
              qx = H12 * (ux * fac);
              qy = H12 * (uy * fac);
            }
          }
        } else {
          qx = 0.0;
          qy = 0.0;
        }
        half_H_[k] = H12;
        half_HUx_[k] = qx;
        half_HUy_[k] = qy;
      }
    }
  });
}

void CsphTvdStepper::mid_forces(const FlowState& state, double tau) {
  const double t_mid = state.t + 0.5 * tau;
  if (!source_specs_.empty())
    resample_sigma(source_specs_, t_mid, *terrain_, sigma_mid_);

  HalfView v{state.H.data(),  state.HUx.data(), state.HUy.data(),
             half_H_.data(),  half_HUx_.data(), half_HUy_.data(),
             drx_.data(),     dry_.data(),      src_.index_q.data(),
             params_.eps_dry};
  const Vec2 w = wind_.at(t_mid);
  const bool has_wind = wind_.any();
  SourceField mid_src;  // shares markers/velocities, swaps in sigma_mid
  mid_src.nx = src_.nx;
  mid_src.ny = src_.ny;
  parallel_for_blocks(lag_blocks_, opt_.workers, [&](int ib) {
    int i0, j0, i1, j1;
    mask_.block_rect(ib, i0, j0, i1, j1);
    detail::assemble_forces_rect(v, *terrain_, params_,  w, has_wind,
                                 detail::SourceView{sigma_mid_.data(), src_.vx.data(),
                                                    src_.vy.data(),
                                                    !source_specs_.empty()},
                                 f_mid_, i0, j0, i1, j1);
  });
}

void CsphTvdStepper::corrector(const FlowState& state, double tau) {
  const double eps = params_.eps_dry;
  const double g = params_.g;
  const double half_h = 0.5 * terrain_->h;
  const bool has_src = !source_specs_.empty();
  parallel_for_blocks(lag_blocks_, opt_.workers, [&](int ib) {
    int i0, j0, i1, j1;
    mask_.block_rect(ib, i0, j0, i1, j1);
    double srcvol = 0.0;
    long long err = -1;
    for (int j = j0; j <= j1; ++j) {
      for (int i = i0; i <= i1; ++i) {
        int k = terrain_->idx(i, j);
        if (!cell_active(state, k)) continue;
        double Hn = state.H[k];
        double Ht = Hn;
        if (has_src) {
          Ht = Hn + tau * sigma_mid_[k];
          if (Ht < 0.0) Ht = 0.0;
          srcvol += Ht - Hn;
        }
        double H12 = half_H_[k];
        double qx = state.HUx[k] + tau * H12 * (f_mid_.fx[k] - f_mid_.fric_x[k]);
        double qy = state.HUy[k] + tau * H12 * (f_mid_.fy[k] - f_mid_.fric_y[k]);
        if (Ht > eps) {
          double n = params_.manning(k);
          if (n > 0.0) {
            double ux = qx / Ht;
            double uy = qy / Ht;
            double sp = std::sqrt(ux * ux + uy * uy);
            if (sp > 0.0) {
              double lam = 2.0 * g * n * n / (Ht * std::cbrt(Ht));
              double fac = 1.0 / (1.0 + 0.5 * lam * sp * tau);
              qx = Ht * (ux * fac);
              qy = Ht * (uy * fac);
            }
          }
        }
        double ux12 = 0.0, uy12 = 0.0;
        if (H12 > eps) {
          ux12 = half_HUx_[k] / H12;
          uy12 = half_HUy_[k] / H12;
        }
        double dx = tau * ux12;
        double dy = tau * uy12;
        if (err < 0 && (std::fabs(dx) >= half_h || std::fabs(dy) >= half_h)) err = k;
        Ht_[k] = Ht;
        HVtx_[k] = qx;
        HVty_[k] = qy;
        drx_[k] = dx;
        dry_[k] = dy;
      }
    }
    blk_srcvol_[ib] = srcvol;
    blk_err_[ib] = err;
  });
  for (int ib : lag_blocks_) {
    if (blk_err_[ib] >= 0) {
      long long k = blk_err_[ib];
      throw NumericalError(
          "particle displacement reached h/2 at cell (" +
          std::to_string(k % terrain_->nx) + "," + std::to_string(k / terrain_->nx) +
          "); the Courant number is too large for this flow");
    }
  }
}

void CsphTvdStepper::compute_x_face(const FlowState& state, int iface, int j) {
  const Terrain& T = *terrain_;
  HalfView v{state.H.data(), state.HUx.data(), state.HUy.data(),
             half_H_.data(), half_HUx_.data(), half_HUy_.data(),
             drx_.data(),    dry_.data(),      src_.index_q.data(),
             params_.eps_dry};
  const int ka = T.idx(iface - 1, j);
  const int kb = T.idx(iface, j);
  FaceRec rec;
  const bool wetA = v.wet(ka);
  const bool wetB = v.wet(kb);
  if (!wetA && !wetB) {
    xf_[iface + static_cast<std::size_t>(j) * (T.nx + 1)] = rec;
    return;
  }
  const double* b = T.b.data();
  const double g = params_.g;
  const double bf = std::max(b[ka], b[kb]);
  auto shift = [&](int k) { return v.shift_x(k); };
  auto un_of = [&](int k) {
    double H = v.depth(k);
    return H > params_.eps_dry ? v.mom_x(k) / H : 0.0;
  };
  auto ut_of = [&](int k) {
    double H = v.depth(k);
    return H > params_.eps_dry ? v.mom_y(k) / H : 0.0;
  };
  SideState L, R;
  if (wetA)
    L = reconstruct_side(v, b, T.h, bf, ka, iface - 2 >= 0 ? ka - 1 : -1, kb, 1.0,
                         shift, un_of, ut_of);
  if (wetB)
    R = reconstruct_side(v, b, T.h, bf, kb, iface + 1 < T.nx ? kb + 1 : -1, ka,
                         -1.0, shift, un_of, ut_of);
  FaceFlux F = hll_face_flux(L.hs, L.un, L.ut, R.hs, R.un, R.ut, g);
  rec.fm = F.fm;
  rec.ft = F.ft;
  rec.fnl = (F.fn - 0.5 * g * L.hs * L.hs) + 0.5 * g * L.hcell * L.hcell;
  rec.fnr = (F.fn - 0.5 * g * R.hs * R.hs) + 0.5 * g * R.hcell * R.hcell;
  if (!std::isfinite(rec.fm + rec.fnl + rec.fnr + rec.ft)) {
    int ib = (iface == T.nx ? T.nx - 1 : iface) / mask_.block_size +
             (j / mask_.block_size) * mask_.nbx;
    blk_err_[ib] = ka;
  }
  xf_[iface + static_cast<std::size_t>(j) * (T.nx + 1)] = rec;
}

void CsphTvdStepper::compute_y_face(const FlowState& state, int i, int jface) {
  const Terrain& T = *terrain_;
  HalfView v{state.H.data(), state.HUx.data(), state.HUy.data(),
             half_H_.data(), half_HUx_.data(), half_HUy_.data(),
             drx_.data(),    dry_.data(),      src_.index_q.data(),
             params_.eps_dry};
  const int ka = T.idx(i, jface - 1);
  const int kb = T.idx(i, jface);
  FaceRec rec;
  const bool wetA = v.wet(ka);
  const bool wetB = v.wet(kb);
  if (!wetA && !wetB) {
    yf_[i + static_cast<std::size_t>(jface) * T.nx] = rec;
    return;
  }
  const double* b = T.b.data();
  const double g = params_.g;
  const double bf = std::max(b[ka], b[kb]);
  auto shift = [&](int k) { return v.shift_y(k); };
  auto un_of = [&](int k) {
    double H = v.depth(k);
    return H > params_.eps_dry ? v.mom_y(k) / H : 0.0;
  };
  auto ut_of = [&](int k) {
    double H = v.depth(k);
    return H > params_.eps_dry ? v.mom_x(k) / H : 0.0;
  };
  SideState L, R;
  if (wetA)
    L = reconstruct_side(v, b, T.h, bf, ka, jface - 2 >= 0 ? ka - T.nx : -1, kb,
                         1.0, shift, un_of, ut_of);
  if (wetB)
    R = reconstruct_side(v, b, T.h, bf, kb, jface + 1 < T.ny ? kb + T.nx : -1, ka,
                         -1.0, shift, un_of, ut_of);
  FaceFlux F = hll_face_flux(L.hs, L.un, L.ut, R.hs, R.un, R.ut, g);
  rec.fm = F.fm;
  rec.ft = F.ft;
  rec.fnl = (F.fn - 0.5 * g * L.hs * L.hs) + 0.5 * g * L.hcell * L.hcell;
  rec.fnr = (F.fn - 0.5 * g * R.hs * R.hs) + 0.5 * g * R.hcell * R.hcell;
  if (!std::isfinite(rec.fm + rec.fnl + rec.fnr + rec.ft)) {
    int ib = (i / mask_.block_size) +
             ((jface == T.ny ? T.ny - 1 : jface) / mask_.block_size) * mask_.nbx;
    blk_err_[ib] = ka;
  }
  yf_[i + static_cast<std::size_t>(jface) * T.nx] = rec;
}

void CsphTvdStepper::boundary_x_face(const FlowState& state, int iface, int j) {
  const Terrain& T = *terrain_;
  HalfView v{state.H.data(), state.HUx.data(), state.HUy.data(),
             half_H_.data(), half_HUx_.data(), half_HUy_.data(),
             drx_.data(),    dry_.data(),      src_.index_q.data(),
             params_.eps_dry};
  const bool west = (iface == 0);
  const int k = west ? T.idx(0, j) : T.idx(T.nx - 1, j);
  FaceRec rec;
  if (v.wet(k)) {
    double H = v.depth(k);
    double ux = v.mom_x(k) / H;
    double uy = v.mom_y(k) / H;
    EdgeKind kind = west ? opt_.boundaries.west : opt_.boundaries.east;
    double ghost_un = (kind == EdgeKind::Reflective) ? -ux : ux;
    FaceFlux F = west ? hll_face_flux(H, ghost_un, uy, H, ux, uy, params_.g)
                      : hll_face_flux(H, ux, uy, H, ghost_un, uy, params_.g);
    rec = {F.fm, F.fn, F.fn, F.ft};
  }
  xf_[iface + static_cast<std::size_t>(j) * (T.nx + 1)] = rec;
}

void CsphTvdStepper::boundary_y_face(const FlowState& state, int i, int jface) {
  const Terrain& T = *terrain_;
  HalfView v{state.H.data(), state.HUx.data(), state.HUy.data(),
             half_H_.data(), half_HUx_.data(), half_HUy_.data(),
             drx_.data(),    dry_.data(),      src_.index_q.data(),
             params_.eps_dry};
  const bool south = (jface == 0);
  const int k = south ? T.idx(i, 0) : T.idx(i, T.ny - 1);
  FaceRec rec;
  if (v.wet(k)) {
    double H = v.depth(k);
    double ux = v.mom_x(k) / H;
    double uy = v.mom_y(k) / H;
    EdgeKind kind = south ? opt_.boundaries.south : opt_.boundaries.north;
    double ghost_un = (kind == EdgeKind::Reflective) ? -uy : uy;
    FaceFlux F = south ? hll_face_flux(H, ghost_un, ux, H, uy, ux, params_.g)
                       : hll_face_flux(H, uy, ux, H, ghost_un, ux, params_.g);
    rec = {F.fm, F.fn, F.fn, F.ft};
  }
  yf_[i + static_cast<std::size_t>(jface) * T.nx] = rec;
}

void CsphTvdStepper::accumulate_cell(const FlowState& state, int i, int j) {
  const Terrain& T = *terrain_;
  const int k = T.idx(i, j);
  const FaceRec& W = xf_[i + static_cast<std::size_t>(j) * (T.nx + 1)];
  const FaceRec& E = xf_[i + 1 + static_cast<std::size_t>(j) * (T.nx + 1)];
  const FaceRec& S = yf_[i + static_cast<std::size_t>(j) * T.nx];
  const FaceRec& N = yf_[i + static_cast<std::size_t>(j + 1) * T.nx];

  Fh_[k] = (W.fm - E.fm) + (S.fm - N.fm);

  HalfView v{state.H.data(), state.HUx.data(), state.HUy.data(),
             half_H_.data(), half_HUx_.data(), half_HUy_.data(),
             drx_.data(),    dry_.data(),      src_.index_q.data(),
             params_.eps_dry};
  // The face pressure fluxes carry the depth-gradient part of -g H grad(eta),
  // which the Lagrangian stage has already applied through the slope force;
  // add it back so the two stages together apply it exactly once.
  double cx = 0.0, cy = 0.0;
  if (v.wet(k)) {
    Vec2 grad = detail::eta_gradient(v, T, params_.eps_dry, i, j);
    double gh = params_.g * v.depth(k) * T.h;
    cx = gh * grad.x;
    cy = gh * grad.y;
  }
  Fvx_[k] = (W.fnr - E.fnl) + (S.ft - N.ft) + cx;
  Fvy_[k] = (S.fnr - N.fnl) + (W.ft - E.ft) + cy;
}

void CsphTvdStepper::raise_pending_error() const {
  for (int ib : flux_blocks_) {
    if (blk_err_[ib] >= 0) {
      long long k = blk_err_[ib];
      throw NumericalError("non-finite flux near cell (" +
                           std::to_string(k % terrain_->nx) + "," +
                           std::to_string(k / terrain_->nx) + ")");
    }
  }
}

void CsphTvdStepper::flux(const FlowState& state, double tau) {
  (void)tau;
  const Terrain& T = *terrain_;
  parallel_for_blocks(flux_blocks_, opt_.workers, [&](int ib) {
    int i0, j0, i1, j1;
    mask_.block_rect(ib, i0, j0, i1, j1);
    const int bi = ib % mask_.nbx;
    const int bj = ib / mask_.nbx;
    const bool own_west =
        (bi == 0) || (opt_.skip_dry_blocks && !mask_.flux_active(ib - 1));
    const bool own_south =
        (bj == 0) || (opt_.skip_dry_blocks && !mask_.flux_active(ib - mask_.nbx));
    for (int j = j0; j <= j1; ++j) {
      if (own_west) {
        if (i0 == 0)
          boundary_x_face(state, 0, j);
        else
          compute_x_face(state, i0, j);
      }
      for (int f = i0 + 1; f <= i1; ++f) compute_x_face(state, f, j);
      if (i1 + 1 == T.nx)
        boundary_x_face(state, T.nx, j);
      else
        compute_x_face(state, i1 + 1, j);
    }
    for (int i = i0; i <= i1; ++i) {
      if (own_south) {
        if (j0 == 0)
          boundary_y_face(state, i, 0);
        else
          compute_y_face(state, i, j0);
      }
      for (int f = j0 + 1; f <= j1; ++f) compute_y_face(state, i, f);
      if (j1 + 1 == T.ny)
        boundary_y_face(state, i, T.ny);
      else
        compute_y_face(state, i, j1 + 1);
    }
  });
  raise_pending_error();

  parallel_for_blocks(flux_blocks_, opt_.workers, [&](int ib) {
    int i0, j0, i1, j1;
    mask_.block_rect(ib, i0, j0, i1, j1);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) accumulate_cell(state, i, j);
  });
}

void CsphTvdStepper::final_update(FlowState& state, double tau) {
  const Terrain& T = *terrain_;
  const double dt_h = tau / T.h;
  const double eps = params_.eps_dry;

  parallel_for_blocks(flux_blocks_, opt_.workers, [&](int ib) {
    int i0, j0, i1, j1;
    mask_.block_rect(ib, i0, j0, i1, j1);
    double deficit = 0.0;
    for (int j = j0; j <= j1; ++j) {
      for (int i = i0; i <= i1; ++i) {
        int k = T.idx(i, j);
        bool act = cell_active(state, k);
        double base = act ? Ht_[k] : state.H[k];
        double Hn1 = base + dt_h * Fh_[k];
        if (Hn1 < 0.0) {
          deficit += -Hn1;
          Hn1 = 0.0;
        }
        double qx = 0.0, qy = 0.0;
        if (Hn1 > eps) {
          qx = (act ? HVtx_[k] : state.HUx[k]) + dt_h * Fvx_[k];
          qy = (act ? HVty_[k] : state.HUy[k]) + dt_h * Fvy_[k];
        }
        state.H[k] = Hn1;
        state.HUx[k] = qx;
        state.HUy[k] = qy;
        Ht_[k] = 0.0;
        HVtx_[k] = 0.0;
        HVty_[k] = 0.0;
      }
    }
    blk_reduce_[ib] = deficit;
  });

  parallel_for_blocks(skipped_blocks_, opt_.workers, [&](int ib) {
    int i0, j0, i1, j1;
    mask_.block_rect(ib, i0, j0, i1, j1);
    for (int j = j0; j <= j1; ++j) {
      for (int i = i0; i <= i1; ++i) {
        int k = T.idx(i, j);
        Ht_[k] = 0.0;
        HVtx_[k] = 0.0;
        HVty_[k] = 0.0;
      }
    }
  });

  // fixed-order reductions
  double deficit = 0.0;
  for (int ib : flux_blocks_) deficit += blk_reduce_[ib];
  clamp_deficit_ = deficit * T.cell_area();
  double srcvol = 0.0;
  for (int ib : lag_blocks_) srcvol += blk_srcvol_[ib];
  source_volume_ = srcvol * T.cell_area();

  // net volume through the domain edges (nonzero only for open boundaries)
  auto face_live = [&](int ci, int cj) {
    if (!opt_.skip_dry_blocks) return true;
    int ib = ci / mask_.block_size + (cj / mask_.block_size) * mask_.nbx;
    return mask_.flux_active(ib);
  };
  double out = 0.0;
  for (int j = 0; j < T.ny; ++j) {
    if (face_live(0, j)) out -= xf_[0 + static_cast<std::size_t>(j) * (T.nx + 1)].fm;
    if (face_live(T.nx - 1, j))
      out += xf_[T.nx + static_cast<std::size_t>(j) * (T.nx + 1)].fm;
  }
  for (int i = 0; i < T.nx; ++i) {
    if (face_live(i, 0)) out -= yf_[i].fm;
    if (face_live(i, T.ny - 1))
      out += yf_[i + static_cast<std::size_t>(T.ny) * T.nx].fm;
  }
  boundary_outflow_ = out * tau * T.h;

  state.t += tau;
}

StepInfo CsphTvdStepper::step(FlowState& state, double dt_cap) {
  StepInfo info;
  auto t0 = Clock::now();
  begin_step(state);
  info.timings.mask = elapsed(t0);

  t0 = Clock::now();
  compute_forces(state);
  info.timings.forces = elapsed(t0);

  t0 = Clock::now();
  double tau = compute_dt(state, dt_cap);
  info.timings.dt = elapsed(t0);

  t0 = Clock::now();
  predictor(state, tau);
  info.timings.predictor = elapsed(t0);

  t0 = Clock::now();
  mid_forces(state, tau);
  info.timings.mid_forces = elapsed(t0);

  t0 = Clock::now();
  corrector(state, tau);
  info.timings.corrector = elapsed(t0);

  t0 = Clock::now();
  flux(state, tau);
  info.timings.flux = elapsed(t0);

  t0 = Clock::now();
  final_update(state, tau);
  info.timings.finalize = elapsed(t0);

  info.tau = tau;
  info.active_fraction = active_fraction(mask_);
  info.lagrangian_blocks = static_cast<int>(lag_blocks_.size());
  info.flux_blocks = static_cast<int>(flux_blocks_.size());
  info.total_blocks = mask_.total_blocks();
  info.clamp_deficit_volume = clamp_deficit_;
  info.source_volume = source_volume_;
  info.boundary_outflow_volume = boundary_outflow_;
  return info;
}

}  // namespace swflood
