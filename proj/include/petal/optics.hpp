#pragma once

#include "petal/field.hpp"

namespace petal {

/// G = exp(-(X² + Y²)/w0²): 1/e field radius w0, 1/e² intensity radius w0.
ComplexField gaussian_beam(const GridSpec& grid, const OpticalConfig& opt);

/// Θ = arg(e^{iℓφ} + e^{-iℓφ}): 0 where cos(ℓφ) >= 0, π elsewhere, φ = atan2(Y, X).
ModeMask superposition_phase_mask(const GridSpec& grid, int ell);

/// u · exp(i·sign·phase), pointwise.
ComplexField apply_phase(const ComplexField& u, const RealField& phase, double sign = 1.0);

RealField intensity(const ComplexField& u);

/// round-half-up(255 · i / max i). Throws DegenerateField when max i <= 0.
Image8 to_image8(const RealField& i);

/// Mean squared 8-bit difference.
double raw_mse(const Image8& a, const Image8& b);
/// raw_mse / 1000; the accuracy metric reported everywhere.
double mse_index(const Image8& a, const Image8& b);

struct PetalOptions {
  // A harmonic counts only if its cosine amplitude exceeds this fraction of the ring mean.
  double threshold = 0.2;
  int angular_samples = 720;
};

/// Dominant angular harmonic of the intensity on the ring of maximal azimuthal mean.
/// An ideal ±ℓ petal pattern gives 2ℓ; an azimuthally symmetric spot gives 0.
int petal_count(const RealField& i, const PetalOptions& options = {});

}  // namespace petal
