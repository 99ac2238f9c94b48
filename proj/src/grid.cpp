#include "petal/grid.hpp"

#include <cmath>
#include <string>

#include "petal/error.hpp"

namespace petal {

GridSpec make_grid(int n, double dx) {
  if (n < 8 || n % 2 != 0) {
    throw Error(ErrorKind::InvalidGrid, "n must be even and >= 8, got " + std::to_string(n));
  }
  if (!(dx > 0.0) || !std::isfinite(dx)) {
    throw Error(ErrorKind::InvalidGrid, "dx must be positive");
  }
  return GridSpec{n, dx, n * dx};
}

OpticalConfig make_optics(double lambda, double w0, double z_slm_tx, double z_tx_rx) {
  if (!(lambda > 0.0) || !(w0 > 0.0) || !(z_slm_tx > 0.0) || !(z_tx_rx > 0.0)) {
    throw Error(ErrorKind::InvalidOptics, "wavelength, waist and distances must be positive");
  }
  return OpticalConfig{lambda, 2.0 * std::numbers::pi / lambda, w0, z_slm_tx, z_tx_rx};
}

}  // namespace petal
