#include "swflood/riemann.hpp"

#include <algorithm>
#include <cmath>

namespace swflood {

namespace {

struct Flux1 {
  double fm, fn;
};

inline Flux1 physical_flux(double h, double un, double g) {
  double q = h * un;
  return {q, q * un + 0.5 * g * h * h};
}

// Sample a left rarefaction expanding onto a dry right bed at x/t = 0.
inline Flux1 dry_right_fan(double hL, double unL, double g) {
  double cL = std::sqrt(g * hL);
  double head = unL - cL;       // fan head
  double front = unL + 2.0 * cL;  // wet/dry front
  if (head >= 0.0) return physical_flux(hL, unL, g);
  if (front <= 0.0) return {0.0, 0.0};
  double u0 = (unL + 2.0 * cL) / 3.0;  // transonic point: u = c
  double h0 = u0 * u0 / g;
  return physical_flux(h0, u0, g);
}

}  // namespace

FaceFlux hll_face_flux(double hL, double unL, double utL, double hR, double unR,
                       double utR, double g) {
  bool dryL = hL <= 0.0;
  bool dryR = hR <= 0.0;
  if (dryL && dryR) return {};

  Flux1 f;
  if (dryR) {
    f = dry_right_fan(hL, unL, g);
  } else if (dryL) {
    Flux1 m = dry_right_fan(hR, -unR, g);  // mirrored problem
    f = {-m.fm, m.fn};
  } else {
    double cL = std::sqrt(g * hL);
    double cR = std::sqrt(g * hR);
    double sL = std::min(unL - cL, unR - cR);
    double sR = std::max(unL + cL, unR + cR);
    Flux1 fL = physical_flux(hL, unL, g);
    Flux1 fR = physical_flux(hR, unR, g);
    if (sL >= 0.0) {
      f = fL;
    } else if (sR <= 0.0) {
      f = fR;
    } else {
      double inv = 1.0 / (sR - sL);
      f.fm = (sR * fL.fm - sL * fR.fm + sL * sR * (hR - hL)) * inv;
      f.fn = (sR * fL.fn - sL * fR.fn + sL * sR * (hR * unR - hL * unL)) * inv;
    }
  }
  double ft = f.fm * (f.fm >= 0.0 ? utL : utR);
  return {f.fm, f.fn, ft};
}

}  // namespace swflood
