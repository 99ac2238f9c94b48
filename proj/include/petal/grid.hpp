#pragma once

#include <cstddef>
#include <numbers>

namespace petal {

/// Square sampling grid. Sample (ix, iy) sits at X = (ix - n/2)·dx, Y = (iy - n/2)·dx,
/// stored row-major with iy as the slow index.
struct GridSpec {
  int n = 0;
  double dx = 0.0;
  double l = 0.0;

  std::size_t size() const noexcept { return static_cast<std::size_t>(n) * static_cast<std::size_t>(n); }
  double coord(int i) const noexcept { return (i - n / 2) * dx; }
  /// DFT frequency (cycles/m) of index i, DC at 0, negative frequencies in the upper half.
  double freq(int i) const noexcept { return (i < n / 2 ? i : i - n) / l; }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Throws Error(InvalidGrid) unless n is even, n >= 8 and dx > 0.
GridSpec make_grid(int n, double dx);

struct OpticalConfig {
  double lambda = 0.0;
  double k = 0.0;
  double w0 = 0.0;
  double z_slm_tx = 0.0;
  double z_tx_rx = 0.0;
};

/// Throws Error(InvalidOptics) for non-positive inputs.
OpticalConfig make_optics(double lambda, double w0, double z_slm_tx, double z_tx_rx);

// Link-geometry constants used by the simulated setup.
namespace link_defaults {
inline constexpr int kGridN = 128;
inline constexpr double kDx = 4e-4;
inline constexpr double kLambda = 1550e-9;
inline constexpr double kW0 = 7e-3;
inline constexpr double kLMin = 1e-3;
inline constexpr double kLMax = 25.0;
inline constexpr double kZSlmTx = 1.0;
inline constexpr double kZTxRx = 25.0;
inline constexpr double kCn2Min = 5e-12;
inline constexpr double kCn2Max = 9e-11;
}  // namespace link_defaults

}  // namespace petal
