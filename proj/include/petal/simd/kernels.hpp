#pragma once

// Data-parallel inner loops. Each kernel has a scalar reference implementation and,
// on x86-64, an AVX2 variant picked at startup from CPUID. Elementwise kernels are
// bit-identical across variants; reductions agree to rounding (different summation order).

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace petal::simd {

using cd = std::complex<double>;

enum class Isa { Scalar, Avx2 };

struct KernelTable {
  // out[i] = a[i] * b[i]; out may alias a or b.
  void (*cmul)(const cd* a, const cd* b, cd* out, std::size_t n);
  // out[i] = a[i] * conj(b[i]); out may alias a or b.
  void (*cmul_conj)(const cd* a, const cd* b, cd* out, std::size_t n);
  // out[i] = |a[i]|^2
  void (*norm_sq)(const cd* a, double* out, std::size_t n);
  // sum (x[i] - y[i])^2
  double (*sq_diff_sum)(const double* x, const double* y, std::size_t n);
  // sum x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
};

std::string_view name(Isa isa);
bool available(Isa isa);
const KernelTable& table_for(Isa isa);

/// The table in use. Defaults to the best ISA the CPU supports; PETAL_SIMD=scalar
/// in the environment pins the scalar reference.
const KernelTable& active();
Isa active_isa();
/// Override the runtime choice (tests, --simd flag). Throws if the ISA is unavailable.
void force(Isa isa);

inline void cmul(std::span<const cd> a, std::span<const cd> b, std::span<cd> out) {
  active().cmul(a.data(), b.data(), out.data(), out.size());
}
inline void cmul_conj(std::span<const cd> a, std::span<const cd> b, std::span<cd> out) {
  active().cmul_conj(a.data(), b.data(), out.data(), out.size());
}
inline void norm_sq(std::span<const cd> a, std::span<double> out) {
  active().norm_sq(a.data(), out.data(), out.size());
}
inline double sq_diff_sum(std::span<const double> x, std::span<const double> y) {
  return active().sq_diff_sum(x.data(), y.data(), x.size());
}
inline double dot(std::span<const double> x, std::span<const double> y) {
  return active().dot(x.data(), y.data(), x.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

namespace scalar {
extern const KernelTable kTable;
}
#if defined(PETAL_HAVE_AVX2)
namespace avx2 {
extern const KernelTable kTable;
}
#endif

}  // namespace petal::simd
