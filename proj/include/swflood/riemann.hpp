#pragma once

namespace swflood {

/// Flux of (H, H*un, H*ut) through a face, per unit face length.
/// fn includes the hydrostatic pressure term g h^2 / 2.
struct FaceFlux {
  double fm = 0.0;  // mass [m^2/s]
  double fn = 0.0;  // normal momentum [m^3/s^2]
  double ft = 0.0;  // tangential momentum [m^3/s^2]
};

/// Approximate Riemann flux at a face. Wet/wet faces use an HLL solver with
/// Davis wave-speed estimates; a face with one dry side samples the exact
/// single-rarefaction solution at the face (the HLL middle state badly
/// overshoots the transonic fan there). Dry/dry gives exactly zero.
/// Depths are the already-reconstructed face depths (>= 0, 0 meaning dry).
FaceFlux hll_face_flux(double hL, double unL, double utL, double hR, double unR,
                       double utR, double g);

}  // namespace swflood
