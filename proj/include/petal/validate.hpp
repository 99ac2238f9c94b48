#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace petal {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ValidationOptions {
  int unitarity_fields = 100;
  int screens = 200;
  int gradient_cases = 20;  // split between the 16×16 and 32×32 grids
  std::uint64_t seed = 7;
};

/// Power conservation and inverse∘forward identity of the transfer-function propagator
/// on the default grid over 1 m and 25 m.
CheckResult check_unitarity(const ValidationOptions& o);
/// Second-moment radius of the 7 mm waist after 25 m against w(z).
CheckResult check_beam_radius();
/// Ensemble structure function against the spectral oracle, its log-log slope, and r0.
CheckResult check_screen_statistics(const ValidationOptions& o);
/// 2ℓ petals for ℓ = 1..10.
CheckResult check_petals();
/// Mask update with a zero estimate reproduces the ideal mask; vacuum observation matches.
CheckResult check_mask_identity();
/// Adjoint gradient of the correction objective against central differences.
CheckResult check_gradients(const ValidationOptions& o);

std::vector<CheckResult> run_validation(const ValidationOptions& o);

}  // namespace petal
