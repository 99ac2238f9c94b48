#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "petal/grid.hpp"

namespace petal {

using cd = std::complex<double>;

template <class T>
struct Field {
  GridSpec grid;
  std::vector<T> values;

  Field() = default;
  explicit Field(const GridSpec& g, T fill = T{}) : grid(g), values(g.size(), fill) {}

  T& at(int ix, int iy) { return values[static_cast<std::size_t>(iy) * grid.n + ix]; }
  const T& at(int ix, int iy) const { return values[static_cast<std::size_t>(iy) * grid.n + ix]; }
};

using ComplexField = Field<cd>;
using RealField = Field<double>;

/// Binary phase mask of the ±ell superposition, values in {0, π}.
struct ModeMask {
  int ell = 0;
  RealField phase;
};

/// Peak-normalized 8-bit grayscale image, row-major.
struct Image8 {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  friend bool operator==(const Image8&, const Image8&) = default;
};

}  // namespace petal
