#pragma once

#include <string_view>
#include <vector>

#include "petal/field.hpp"

namespace petal {

enum class PropagationMethod { TransferFunction, ImpulseResponse };

std::string_view to_string(PropagationMethod m);
/// "tf" / "ir"; throws InvalidConfig otherwise.
PropagationMethod parse_method(std::string_view s);

/// Frequency-domain Fresnel kernel laid out like the unshifted DFT (DC at index 0).
struct PropagatorKernel {
  GridSpec grid;
  PropagationMethod method = PropagationMethod::TransferFunction;
  double z = 0.0;
  double lambda = 0.0;
  std::vector<cd> h_spec;
};

/// H(fx, fy) = exp(ikz) · exp(-iπλz(fx² + fy²)). Unit modulus; z = 0 gives H ≡ 1.
PropagatorKernel tf_kernel(const GridSpec& grid, double lambda, double z);

/// Spatial impulse response h(x, y) = exp(ikz)/(iλz) · exp(ik(x² + y²)/(2z)) on the
/// centered grid coordinates. Throws ZeroDistance for z <= 0.
ComplexField ir_impulse(const GridSpec& grid, double lambda, double z);

/// DFT(h)·dx² with h re-centred on index 0. Throws ZeroDistance for z <= 0.
PropagatorKernel ir_kernel(const GridSpec& grid, double lambda, double z);

PropagatorKernel make_kernel(PropagationMethod method, const GridSpec& grid, double lambda, double z);

/// U_out = F⁻¹(F(U_in) ⊙ H).
ComplexField propagate(const ComplexField& u, const PropagatorKernel& kern);

/// U_out = F⁻¹(F(U_in) ⊘ H) = F⁻¹(F(U_in) ⊙ conj(H)) for transfer-function kernels.
/// Throws NonInvertibleKernel for impulse-response kernels.
ComplexField inverse_propagate(const ComplexField& u, const PropagatorKernel& kern);

/// Hermitian adjoint of propagate, F⁻¹(F(U) ⊙ conj(H)), for any kernel.
ComplexField propagate_adjoint(const ComplexField& u, const PropagatorKernel& kern);

/// TF when dx >= λz/l (tie goes to TF), IR otherwise.
PropagationMethod preferred_method(const GridSpec& grid, double lambda, double z);

}  // namespace petal
