#include "petal/fresnel.hpp"

#include <cmath>
#include <numbers>

#include "petal/error.hpp"
#include "petal/fft.hpp"
#include "petal/simd/kernels.hpp"

namespace petal {
namespace {

constexpr double kPi = std::numbers::pi;

void check_grid(const ComplexField& u, const PropagatorKernel& kern) {
  if (!(u.grid == kern.grid) || u.values.size() != kern.h_spec.size()) {
    throw Error(ErrorKind::ShapeMismatch, "propagate: field and kernel grids differ");
  }
}

ComplexField filter(const ComplexField& u, const PropagatorKernel& kern, bool conjugate) {
  check_grid(u, kern);
  ComplexField out(u.grid);
  fft::forward(u.values, out.values, u.grid.n);
  if (conjugate) {
    simd::cmul_conj(out.values, kern.h_spec, out.values);
  } else {
    simd::cmul(out.values, kern.h_spec, out.values);
  }
  fft::inverse(out.values, out.values, u.grid.n);
  return out;
}

}  // namespace

namespace {

// kz reduced mod 2π in extended precision; kz itself reaches 1e8 rad, where a double
// rounding step would already cost ~1e-8 rad and break exact composition of distances.
double carrier_phase(double lambda, double z) {
  const long double cycles = static_cast<long double>(z) / static_cast<long double>(lambda);
  const long double frac = cycles - std::floor(cycles);
  return static_cast<double>(2.0L * std::numbers::pi_v<long double> * frac);
}

}  // namespace

std::string_view to_string(PropagationMethod m) {
  return m == PropagationMethod::TransferFunction ? "tf" : "ir";
}

PropagationMethod parse_method(std::string_view s) {
  if (s == "tf" || s == "TF") return PropagationMethod::TransferFunction;
  if (s == "ir" || s == "IR") return PropagationMethod::ImpulseResponse;
  throw Error(ErrorKind::InvalidConfig, "unknown propagation method: " + std::string(s));
}

PropagatorKernel tf_kernel(const GridSpec& grid, double lambda, double z) {
  PropagatorKernel kern{grid, PropagationMethod::TransferFunction, z, lambda, std::vector<cd>(grid.size())};
  const double carrier = carrier_phase(lambda, z);
  for (int iy = 0; iy < grid.n; ++iy) {
    const double fy = grid.freq(iy);
    for (int ix = 0; ix < grid.n; ++ix) {
      const double fx = grid.freq(ix);
      const double phase = carrier - kPi * lambda * z * (fx * fx + fy * fy);
      kern.h_spec[static_cast<std::size_t>(iy) * grid.n + ix] = cd(std::cos(phase), std::sin(phase));
    }
  }
  return kern;
}

ComplexField ir_impulse(const GridSpec& grid, double lambda, double z) {
  if (!(z > 0.0)) throw Error(ErrorKind::ZeroDistance, "impulse response needs z > 0");
  const double k = 2.0 * kPi / lambda;
  const cd prefactor = std::polar(1.0, carrier_phase(lambda, z)) / cd(0.0, lambda * z);
  ComplexField h(grid);
  for (int iy = 0; iy < grid.n; ++iy) {
    const double y = grid.coord(iy);
    for (int ix = 0; ix < grid.n; ++ix) {
      const double x = grid.coord(ix);
      h.at(ix, iy) = prefactor * std::polar(1.0, k * (x * x + y * y) / (2.0 * z));
    }
  }
  return h;
}

PropagatorKernel ir_kernel(const GridSpec& grid, double lambda, double z) {
  const ComplexField centered = ir_impulse(grid, lambda, z);
  const int n = grid.n, half = n / 2;
  std::vector<cd> shifted(grid.size());
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      shifted[static_cast<std::size_t>(iy) * n + ix] = centered.at((ix + half) % n, (iy + half) % n);
    }
  }
  PropagatorKernel kern{grid, PropagationMethod::ImpulseResponse, z, lambda, std::vector<cd>(grid.size())};
  fft::forward(shifted, kern.h_spec, n);
  const double area = grid.dx * grid.dx;
  for (auto& v : kern.h_spec) v *= area;
  return kern;
}

PropagatorKernel make_kernel(PropagationMethod method, const GridSpec& grid, double lambda, double z) {
  return method == PropagationMethod::TransferFunction ? tf_kernel(grid, lambda, z)
                                                       : ir_kernel(grid, lambda, z);
}

ComplexField propagate(const ComplexField& u, const PropagatorKernel& kern) {
  return filter(u, kern, false);
}

ComplexField inverse_propagate(const ComplexField& u, const PropagatorKernel& kern) {
  if (kern.method != PropagationMethod::TransferFunction) {
    throw Error(ErrorKind::NonInvertibleKernel, "only unit-modulus transfer-function kernels are inverted");
  }
  return filter(u, kern, true);
}

ComplexField propagate_adjoint(const ComplexField& u, const PropagatorKernel& kern) {
  return filter(u, kern, true);
}

PropagationMethod preferred_method(const GridSpec& grid, double lambda, double z) {
  const double critical = lambda * z / grid.l;
  return grid.dx >= critical ? PropagationMethod::TransferFunction : PropagationMethod::ImpulseResponse;
}

}  // namespace petal
