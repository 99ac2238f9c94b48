#include "petal/optics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "petal/error.hpp"
#include "petal/simd/kernels.hpp"

namespace petal {
namespace {

constexpr double kPi = std::numbers::pi;

double bilinear(const RealField& f, double x, double y) {
  const int n = f.grid.n;
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  if (x0 < 0 || y0 < 0 || x0 + 1 >= n || y0 + 1 >= n) return 0.0;
  const double tx = x - x0, ty = y - y0;
  return (1 - ty) * ((1 - tx) * f.at(x0, y0) + tx * f.at(x0 + 1, y0)) +
         ty * ((1 - tx) * f.at(x0, y0 + 1) + tx * f.at(x0 + 1, y0 + 1));
}

}  // namespace

ComplexField gaussian_beam(const GridSpec& grid, const OpticalConfig& opt) {
  ComplexField g(grid);
  const double inv_w2 = 1.0 / (opt.w0 * opt.w0);
  for (int iy = 0; iy < grid.n; ++iy) {
    const double y = grid.coord(iy);
    for (int ix = 0; ix < grid.n; ++ix) {
      const double x = grid.coord(ix);
      g.at(ix, iy) = std::exp(-(x * x + y * y) * inv_w2);
    }
  }
  return g;
}

ModeMask superposition_phase_mask(const GridSpec& grid, int ell) {
  ModeMask m{ell, RealField(grid)};
  if (ell == 0) return m;
  for (int iy = 0; iy < grid.n; ++iy) {
    const double y = grid.coord(iy);
    for (int ix = 0; ix < grid.n; ++ix) {
      const double phi = std::atan2(y, grid.coord(ix));
      m.phase.at(ix, iy) = std::cos(ell * phi) >= 0.0 ? 0.0 : kPi;
    }
  }
  return m;
}

ComplexField apply_phase(const ComplexField& u, const RealField& phase, double sign) {
  if (!(u.grid == phase.grid)) throw Error(ErrorKind::ShapeMismatch, "apply_phase: grid mismatch");
  ComplexField out(u.grid);
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    const double p = sign * phase.values[i];
    const cd rot(std::cos(p), std::sin(p));
    const cd v = u.values[i];
    out.values[i] = cd(v.real() * rot.real() - v.imag() * rot.imag(),
                       v.imag() * rot.real() + v.real() * rot.imag());
  }
  return out;
}

RealField intensity(const ComplexField& u) {
  RealField out(u.grid);
  simd::norm_sq(u.values, out.values);
  return out;
}

Image8 to_image8(const RealField& i) {
  const double peak = i.values.empty() ? 0.0 : *std::max_element(i.values.begin(), i.values.end());
  if (!(peak > 0.0) || !std::isfinite(peak)) {
    throw Error(ErrorKind::DegenerateField, "to_image8: field maximum must be positive");
  }
  Image8 img{i.grid.n, i.grid.n, std::vector<std::uint8_t>(i.values.size())};
  const double scale = 255.0 / peak;
  for (std::size_t k = 0; k < i.values.size(); ++k) {
    const double v = std::floor(i.values[k] * scale + 0.5);
    img.pixels[k] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
  }
  return img;
}

double raw_mse(const Image8& a, const Image8& b) {
  if (a.width != b.width || a.height != b.height) {
    throw Error(ErrorKind::ShapeMismatch, "mse_index: image dimensions differ");
  }
  std::uint64_t acc = 0;
  for (std::size_t k = 0; k < a.pixels.size(); ++k) {
    const int d = int(a.pixels[k]) - int(b.pixels[k]);
    acc += static_cast<std::uint64_t>(d * d);
  }
  return static_cast<double>(acc) / static_cast<double>(a.pixels.size());
}

double mse_index(const Image8& a, const Image8& b) { return raw_mse(a, b) / 1000.0; }

int petal_count(const RealField& i, const PetalOptions& options) {
  const double peak = i.values.empty() ? 0.0 : *std::max_element(i.values.begin(), i.values.end());
  if (!(peak > 0.0)) throw Error(ErrorKind::DegenerateField, "petal_count: field maximum must be positive");

  const int n = i.grid.n;
  const int m = options.angular_samples;
  const double cx = n / 2, cy = n / 2;
  std::vector<double> ring(m), best_ring(m);
  double best_mean = -1.0;
  for (double r = 0.0; r <= n / 2 - 1; r += 0.5) {
    double mean = 0.0;
    for (int a = 0; a < m; ++a) {
      const double th = 2.0 * kPi * a / m;
      ring[a] = bilinear(i, cx + r * std::cos(th), cy + r * std::sin(th));
      mean += ring[a];
    }
    mean /= m;
    if (mean > best_mean) {
      best_mean = mean;
      best_ring = ring;
    }
  }
  if (!(best_mean > 0.0)) return 0;

  int best_h = 0;
  double best_amp = 0.0;
  for (int h = 1; h < m / 2; ++h) {
    double re = 0.0, im = 0.0;
    for (int a = 0; a < m; ++a) {
      const double th = 2.0 * kPi * h * a / m;
      re += best_ring[a] * std::cos(th);
      im -= best_ring[a] * std::sin(th);
    }
    const double amp = 2.0 * std::hypot(re, im) / m;
    if (amp > best_amp) {
      best_amp = amp;
      best_h = h;
    }
  }
  return best_amp > options.threshold * best_mean ? best_h : 0;
}

}  // namespace petal
