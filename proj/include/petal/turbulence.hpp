#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "petal/field.hpp"

namespace petal {

struct TurbulenceParams {
  double cn2 = 0.0;      // m^{-2/3}
  double l_min = 0.0;    // inner scale, m
  double l_max = 0.0;    // outer scale, m
  double z_path = 0.0;   // m
  double kappa0 = 0.0;   // 2π / l_max, rad/m
  double kappa_m = 0.0;  // 5.92 / l_min, rad/m
  double r0 = 0.0;       // Fried parameter, m
};

/// r0 = (0.423 k² cn2 z)^{-3/5}. Throws InvalidTurbulence for non-positive inputs.
double fried_parameter(double k, double cn2, double z);

/// Throws InvalidTurbulence unless cn2 > 0, 0 < l_min < l_max and z > 0.
TurbulenceParams make_turbulence(double k, double cn2, double l_min, double l_max, double z_path);

/// Angular spatial frequencies of the DFT samples (rad/m), DC at index 0.
struct KappaGrid {
  GridSpec grid;
  double dkappa = 0.0;           // 2π / l
  std::vector<double> axis;      // κ of a 1-D index
  std::vector<double> magnitude; // |κ| per 2-D sample

  double kx(int ix) const { return axis[ix]; }
  double ky(int iy) const { return axis[iy]; }
};

KappaGrid kappa_grid(const GridSpec& grid);

/// Phase power spectral density sampled on a KappaGrid, normalized as a density in
/// angular frequency: the phase covariance is Σ S(κ) cos(κ·r) Δκ².
struct SpectrumField {
  GridSpec grid;
  double dkappa = 0.0;
  std::vector<double> values;
};

/// Coefficient of the κ-density von Karman phase spectrum. The customary 0.023 is the
/// coefficient of the density over cycles/m; re-expressed over rad/m it becomes
/// 0.023·(2π)^{5/3} ≈ 0.49, which yields D(r) = 6.88 (r/r0)^{5/3} in the inertial range.
inline const double kVonKarmanCoefficient = 0.023 * std::pow(2.0 * std::numbers::pi, 5.0 / 3.0);

/// S(κ) = kVonKarmanCoefficient · r0^{-5/3} (κ² + κ0²)^{-11/6} exp(-κ²/κm²).
double von_karman_value(double kappa, const TurbulenceParams& p);
SpectrumField von_karman_spectrum(const KappaGrid& kappa, const TurbulenceParams& p);

/// Complex Gaussian draws driving a screen: zero mean, E|c|² = 1.
struct ScreenSeed {
  GridSpec grid;
  std::vector<cd> values;
  std::uint64_t rng_seed = 0;
};

ScreenSeed draw_seed(std::uint64_t rng_seed, const GridSpec& grid);

enum class ScreenRole { Real, Estimated };

struct PhaseScreen {
  RealField phase;
  ScreenRole role = ScreenRole::Real;
};

/// Per-sample Fourier amplitude √(2 S(κ)) · Δκ. The √2 restores the variance lost
/// when the real part of a circular complex sum is taken.
std::vector<double> screen_weights(const SpectrumField& spectrum);

/// Φ = Re{ Σ_κ c_κ √(2S(κ)) Δκ e^{iκ·x} } (unnormalized inverse DFT).
PhaseScreen synthesize_screen(const ScreenSeed& seed, const SpectrumField& spectrum,
                              ScreenRole role = ScreenRole::Real);

/// Ensemble estimate of D(r) = E[(Φ(x + r) - Φ(x))²], averaged over every position
/// (periodic wrap), both grid axes and all screens. r must be a whole number of
/// samples and below l/2.
double structure_function_est(std::span<const PhaseScreen> screens, double r);

/// Brute-force D(r) = 2 Σ_κ S(κ)(1 - cos(κ_x r)) Δκ² over the sampled spectrum.
double oracle_structure_function(const SpectrumField& spectrum, double r);

}  // namespace petal
