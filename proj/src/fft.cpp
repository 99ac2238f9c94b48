#include "petal/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "petal/error.hpp"

namespace petal::fft {
namespace {

struct Double {
  using complex = cd;
  using raw = fftw_complex;
  using plan = fftw_plan;
  static plan make(int n, raw* buf, int sign, unsigned flags) { return fftw_plan_dft_2d(n, n, buf, buf, sign, flags); }
  static void execute(plan p, raw* buf) { fftw_execute_dft(p, buf, buf); }
  static void destroy(plan p) { fftw_destroy_plan(p); }
};

struct LongDouble {
  using complex = cld;
  using raw = fftwl_complex;
  using plan = fftwl_plan;
  static plan make(int n, raw* buf, int sign, unsigned flags) { return fftwl_plan_dft_2d(n, n, buf, buf, sign, flags); }
  static void execute(plan p, raw* buf) { fftwl_execute_dft(p, buf, buf); }
  static void destroy(plan p) { fftwl_destroy_plan(p); }
};

template <class P>
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) P::destroy(plan);
  }

  typename P::plan get(int n, int sign) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_pair(n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<typename P::complex> scratch(static_cast<std::size_t>(n) * n);
    auto* buf = reinterpret_cast<typename P::raw*>(scratch.data());
    // ESTIMATE keeps plan choice independent of timing, so results are reproducible run to run.
    auto plan = P::make(n, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<int, int>, typename P::plan> plans_;
};

template <class P>
PlanCache<P>& cache() {
  static PlanCache<P> c;
  return c;
}

template <class P>
void run(std::span<const typename P::complex> in, std::span<typename P::complex> out, int n, int sign) {
  const std::size_t total = static_cast<std::size_t>(n) * n;
  if (in.size() != total || out.size() != total) {
    throw Error(ErrorKind::ShapeMismatch, "fft: buffer size does not match n*n");
  }
  if (in.data() != out.data()) std::copy(in.begin(), in.end(), out.begin());
  auto* buf = reinterpret_cast<typename P::raw*>(out.data());
  P::execute(cache<P>().get(n, sign), buf);
}

void run(std::span<const cd> in, std::span<cd> out, int n, int sign) { run<Double>(in, out, n, sign); }

}  // namespace

void forward(std::span<const cd> in, std::span<cd> out, int n) { run(in, out, n, FFTW_FORWARD); }

void forward(std::span<const cld> in, std::span<cld> out, int n) { run<LongDouble>(in, out, n, FFTW_FORWARD); }

void inverse(std::span<const cld> in, std::span<cld> out, int n) {
  run<LongDouble>(in, out, n, FFTW_BACKWARD);
  const long double scale = 1.0L / (static_cast<long double>(n) * n);
  for (auto& v : out) v *= scale;
}

void inverse_unnormalized(std::span<const cd> in, std::span<cd> out, int n) {
  run(in, out, n, FFTW_BACKWARD);
}

void inverse(std::span<const cd> in, std::span<cd> out, int n) {
  run(in, out, n, FFTW_BACKWARD);
  const double scale = 1.0 / (static_cast<double>(n) * n);
  for (auto& v : out) v *= scale;
}

}  // namespace petal::fft
