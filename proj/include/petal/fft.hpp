#pragma once

#include <complex>
#include <span>

namespace petal::fft {

using cd = std::complex<double>;
using cld = std::complex<long double>;

// 2-D n×n DFTs, DC at index 0. Forward is unnormalized; inverse carries 1/n².
// Plans are created once per size under a lock and shared; execution is thread-safe.

void forward(std::span<const cd> in, std::span<cd> out, int n);
void inverse(std::span<const cd> in, std::span<cd> out, int n);
/// Inverse without the 1/n² factor: out_x = Σ_k in_k e^{+2πi k·x/n}.
void inverse_unnormalized(std::span<const cd> in, std::span<cd> out, int n);

/// Extended-precision pair for one-shot computations that must stay exact to ~1e-15 at
/// pixels far below the field peak. Same conventions as the double versions.
void forward(std::span<const cld> in, std::span<cld> out, int n);
void inverse(std::span<const cld> in, std::span<cld> out, int n);

}  // namespace petal::fft
