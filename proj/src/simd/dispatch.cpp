#include <atomic>
#include <cstdlib>
#include <string>

#include "petal/error.hpp"
#include "petal/simd/kernels.hpp"

namespace petal::simd {
namespace {

bool cpu_has_avx2() {
#if defined(PETAL_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa detect() {
  if (const char* env = std::getenv("PETAL_SIMD"); env != nullptr && std::string(env) == "scalar") {
    return Isa::Scalar;
  }
  return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

std::string_view name(Isa isa) {
  return isa == Isa::Avx2 ? "avx2" : "scalar";
}

bool available(Isa isa) {
  return isa == Isa::Scalar || cpu_has_avx2();
}

const KernelTable& table_for(Isa isa) {
#if defined(PETAL_HAVE_AVX2)
  if (isa == Isa::Avx2 && cpu_has_avx2()) return avx2::kTable;
#endif
  (void)isa;
  return scalar::kTable;
}

const KernelTable& active() { return table_for(current().load(std::memory_order_relaxed)); }

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void force(Isa isa) {
  if (!available(isa)) {
    throw Error(ErrorKind::InvalidConfig, "SIMD variant not available: " + std::string(name(isa)));
  }
  current().store(isa, std::memory_order_relaxed);
}

}  // namespace petal::simd
