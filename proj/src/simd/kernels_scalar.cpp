#include "petal/simd/kernels.hpp"

namespace petal::simd::scalar {
namespace {

// Written out by hand: std::complex operator* takes the Annex G NaN path.
void cmul(const cd* a, const cd* b, cd* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    out[i] = cd(ar * br - ai * bi, ai * br + ar * bi);
  }
}

void cmul_conj(const cd* a, const cd* b, cd* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    out[i] = cd(ar * br + ai * bi, ai * br - ar * bi);
  }
}

void norm_sq(const cd* a, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double re = a[i].real(), im = a[i].imag();
    out[i] = re * re + im * im;
  }
}

double sq_diff_sum(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

double dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace

const KernelTable kTable{cmul, cmul_conj, norm_sq, sq_diff_sum, dot, axpy};

}  // namespace petal::simd::scalar
