#include "petal/turbulence.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "petal/error.hpp"
#include "petal/fft.hpp"
#include "petal/rng.hpp"
#include "petal/simd/kernels.hpp"

namespace petal {
namespace {
constexpr double kPi = std::numbers::pi;
}

double fried_parameter(double k, double cn2, double z) {
  if (!(k > 0.0) || !(cn2 > 0.0) || !(z > 0.0)) {
    throw Error(ErrorKind::InvalidTurbulence, "fried_parameter: k, cn2 and z must be positive");
  }
  return std::pow(0.423 * k * k * cn2 * z, -3.0 / 5.0);
}

TurbulenceParams make_turbulence(double k, double cn2, double l_min, double l_max, double z_path) {
  if (!(l_min > 0.0) || !(l_max > l_min)) {
    throw Error(ErrorKind::InvalidTurbulence, "need 0 < l_min < l_max");
  }
  TurbulenceParams p;
  p.cn2 = cn2;
  p.l_min = l_min;
  p.l_max = l_max;
  p.z_path = z_path;
  p.kappa0 = 2.0 * kPi / l_max;
  p.kappa_m = 5.92 / l_min;
  p.r0 = fried_parameter(k, cn2, z_path);
  return p;
}

KappaGrid kappa_grid(const GridSpec& grid) {
  KappaGrid kg{grid, 2.0 * kPi / grid.l, std::vector<double>(grid.n), std::vector<double>(grid.size())};
  for (int i = 0; i < grid.n; ++i) kg.axis[i] = 2.0 * kPi * grid.freq(i);
  for (int iy = 0; iy < grid.n; ++iy) {
    for (int ix = 0; ix < grid.n; ++ix) {
      kg.magnitude[static_cast<std::size_t>(iy) * grid.n + ix] = std::hypot(kg.axis[ix], kg.axis[iy]);
    }
  }
  return kg;
}

double von_karman_value(double kappa, const TurbulenceParams& p) {
  const double k2 = kappa * kappa;
  return kVonKarmanCoefficient * std::pow(p.r0, -5.0 / 3.0) *
         std::pow(k2 + p.kappa0 * p.kappa0, -11.0 / 6.0) * std::exp(-k2 / (p.kappa_m * p.kappa_m));
}

SpectrumField von_karman_spectrum(const KappaGrid& kappa, const TurbulenceParams& p) {
  SpectrumField s{kappa.grid, kappa.dkappa, std::vector<double>(kappa.magnitude.size())};
  for (std::size_t i = 0; i < s.values.size(); ++i) s.values[i] = von_karman_value(kappa.magnitude[i], p);
  return s;
}

ScreenSeed draw_seed(std::uint64_t rng_seed, const GridSpec& grid) {
  ScreenSeed seed{grid, std::vector<cd>(grid.size()), rng_seed};
  CounterRng rng(rng_seed);
  for (auto& c : seed.values) c = rng.complex_normal();
  return seed;
}

std::vector<double> screen_weights(const SpectrumField& spectrum) {
  std::vector<double> w(spectrum.values.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::sqrt(2.0 * spectrum.values[i]) * spectrum.dkappa;
  return w;
}

PhaseScreen synthesize_screen(const ScreenSeed& seed, const SpectrumField& spectrum, ScreenRole role) {
  if (!(seed.grid == spectrum.grid) || seed.values.size() != spectrum.values.size()) {
    throw Error(ErrorKind::ShapeMismatch, "synthesize_screen: seed and spectrum grids differ");
  }
  const std::vector<double> w = screen_weights(spectrum);
  std::vector<cd> buf(seed.values.size());
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = seed.values[i] * w[i];
  fft::inverse_unnormalized(buf, buf, seed.grid.n);
  PhaseScreen screen{RealField(seed.grid), role};
  for (std::size_t i = 0; i < buf.size(); ++i) screen.phase.values[i] = buf[i].real();
  return screen;
}

double structure_function_est(std::span<const PhaseScreen> screens, double r) {
  if (screens.size() < 2) {
    throw Error(ErrorKind::InsufficientEnsemble, "structure_function_est needs at least 2 screens");
  }
  const GridSpec& g = screens.front().phase.grid;
  const double steps = r / g.dx;
  const int shift = static_cast<int>(std::lround(steps));
  if (std::abs(steps - shift) > 1e-9 * std::max(1.0, steps) || shift < 0 || 2 * shift >= g.n) {
    throw Error(ErrorKind::InvalidGrid, "separation must be a whole number of samples below l/2");
  }
  if (shift == 0) return 0.0;
  const int n = g.n;
  double total = 0.0;
  std::vector<double> shifted(g.size());
  for (const auto& s : screens) {
    if (!(s.phase.grid == g)) throw Error(ErrorKind::ShapeMismatch, "screens on different grids");
    const auto& v = s.phase.values;
    // x direction
    for (int iy = 0; iy < n; ++iy) {
      for (int ix = 0; ix < n; ++ix) {
        shifted[static_cast<std::size_t>(iy) * n + ix] = v[static_cast<std::size_t>(iy) * n + (ix + shift) % n];
      }
    }
    total += simd::sq_diff_sum(v, shifted);
    // y direction
    for (int iy = 0; iy < n; ++iy) {
      const std::size_t src = static_cast<std::size_t>((iy + shift) % n) * n;
      for (int ix = 0; ix < n; ++ix) shifted[static_cast<std::size_t>(iy) * n + ix] = v[src + ix];
    }
    total += simd::sq_diff_sum(v, shifted);
  }
  return total / (2.0 * static_cast<double>(screens.size()) * static_cast<double>(g.size()));
}

double oracle_structure_function(const SpectrumField& spectrum, double r) {
  const GridSpec& g = spectrum.grid;
  const double dk2 = spectrum.dkappa * spectrum.dkappa;
  double d = 0.0;
  for (int iy = 0; iy < g.n; ++iy) {
    for (int ix = 0; ix < g.n; ++ix) {
      const double kx = 2.0 * kPi * g.freq(ix);
      d += spectrum.values[static_cast<std::size_t>(iy) * g.n + ix] * (1.0 - std::cos(kx * r));
    }
  }
  return 2.0 * d * dk2;
}

}  // namespace petal
