#include "petal/validate.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "petal/gdo.hpp"
#include "petal/rng.hpp"
#include "petal/stats.hpp"

namespace petal {
namespace {

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

double power(const ComplexField& u) {
  double p = 0.0;
  for (const cd& v : u.values) p += std::norm(v);
  return p;
}

ComplexField random_field(const GridSpec& g, std::uint64_t seed) {
  CounterRng rng(seed);
  ComplexField u(g);
  for (auto& v : u.values) v = rng.complex_normal();
  return u;
}

}  // namespace

CheckResult check_unitarity(const ValidationOptions& o) {
  const LinkConfig lc = default_link_config();
  const PropagatorKernel k1 = tf_kernel(lc.grid, lc.optics.lambda, lc.optics.z_slm_tx);
  const PropagatorKernel k2 = tf_kernel(lc.grid, lc.optics.lambda, lc.optics.z_tx_rx);
  double worst_power = 0.0, worst_inverse = 0.0;
  for (int f = 0; f < o.unitarity_fields; ++f) {
    const ComplexField u = random_field(lc.grid, derive_seed(o.seed, 0xF1E1D, f));
    const double p0 = power(u);
    for (const auto* k : {&k1, &k2}) {
      const ComplexField v = propagate(u, *k);
      worst_power = std::max(worst_power, std::abs(power(v) / p0 - 1.0));
      const ComplexField back = inverse_propagate(v, *k);
      double err = 0.0;
      for (std::size_t i = 0; i < u.values.size(); ++i) err += std::norm(back.values[i] - u.values[i]);
      worst_inverse = std::max(worst_inverse, std::sqrt(err / p0));
    }
  }
  return {"unitarity", worst_power < 1e-12 && worst_inverse < 1e-12,
          format("max power error %.3e, max inverse error %.3e over %d fields", worst_power, worst_inverse,
                 o.unitarity_fields)};
}

CheckResult check_beam_radius() {
  const LinkConfig lc = default_link_config();
  const auto& g = lc.grid;
  const ComplexField out = propagate(gaussian_beam(g, lc.optics), tf_kernel(g, lc.optics.lambda, lc.optics.z_tx_rx));
  double m0 = 0.0, m2 = 0.0;
  for (int y = 0; y < g.n; ++y) {
    for (int x = 0; x < g.n; ++x) {
      const double i = std::norm(out.at(x, y));
      m0 += i;
      m2 += i * (g.coord(x) * g.coord(x) + g.coord(y) * g.coord(y));
    }
  }
  const double w_fit = std::sqrt(2.0 * m2 / m0);
  const double w0 = lc.optics.w0;
  const double zr = std::numbers::pi * w0 * w0 / lc.optics.lambda;
  const double z = lc.optics.z_tx_rx;
  const double w_ref = w0 * std::sqrt(1.0 + (z / zr) * (z / zr));
  const double rel = std::abs(w_fit / w_ref - 1.0);
  return {"beam radius", rel < 0.02, format("fitted %.4f mm, analytic %.4f mm, error %.3f%%", w_fit * 1e3,
                                            w_ref * 1e3, rel * 100)};
}

CheckResult check_screen_statistics(const ValidationOptions& o) {
  const double cn2 = 1e-11;
  const Link link(default_link_config());
  const SpectrumField spec = link.spectrum(cn2);
  std::vector<PhaseScreen> screens;
  screens.reserve(o.screens);
  for (int s = 0; s < o.screens; ++s) {
    screens.push_back(synthesize_screen(draw_seed(derive_seed(o.seed, 0x5C4EE, s), link.grid()), spec));
  }
  const double dx = link.grid().dx;
  std::vector<double> logr, logd;
  double worst = 0.0;
  std::string detail;
  for (int m : {4, 8, 12, 16}) {
    const double r = m * dx;
    const double est = structure_function_est(screens, r);
    const double ref = oracle_structure_function(spec, r);
    worst = std::max(worst, std::abs(est / ref - 1.0));
    logr.push_back(std::log(r));
    logd.push_back(std::log(est));
    detail += format("D(%ddx)=%.4g/%.4g ", m, est, ref);
  }
  const double slope = stats::slope(logr, logd);

  // r0 = (0.423 k² cn2 z)^(-3/5), evaluated directly.
  const double k = 2.0 * std::numbers::pi / link.optics().lambda;
  const double closed = std::pow(0.423 * k * k * cn2 * link.optics().z_tx_rx, -0.6);
  const double r0 = link.turbulence(cn2).r0;
  const double r0_err = std::abs(r0 / closed - 1.0);
  const bool r0_ok = r0_err < 1e-3 && std::abs(r0 - 1.14e-2) < 0.005e-2;
  const bool pass = worst < 0.10 && std::abs(slope - 5.0 / 3.0) < 0.3 && r0_ok;
  return {"screen statistics", pass,
          detail + format("worst %.2f%%, slope %.3f, r0 %.5g m (closed form %.5g)", worst * 100, slope, r0, closed)};
}

CheckResult check_petals() {
  const Link link(default_link_config());
  std::string detail;
  bool pass = true;
  for (int ell = 1; ell <= 10; ++ell) {
    const int c = petal_count(target_pattern(link, ell).intensity);
    if (c != 2 * ell) pass = false;
    detail += format("%d:%d ", ell, c);
  }
  return {"petal count", pass, "ell:petals " + detail};
}

CheckResult check_mask_identity() {
  const Link link(default_link_config());
  const RealField zero(link.grid());
  double worst_phase = 0.0, worst_mse = 0.0;
  const auto& beam = link.beam().values;
  double peak = 0.0;
  for (const cd& b : beam) peak = std::max(peak, std::abs(b));
  for (int ell = 0; ell <= 10; ++ell) {
    const ModeMask ideal = superposition_phase_mask(link.grid(), ell);
    const SlmState s = update_mask(link, zero, ell);
    for (std::size_t i = 0; i < beam.size(); ++i) {
      // The phase is only observable where the beam carries light.
      if (std::abs(beam[i]) < 1e-6 * peak) continue;
      const double d = std::remainder(s.theta.values[i] - ideal.phase.values[i], 2.0 * std::numbers::pi);
      worst_phase = std::max(worst_phase, std::abs(d));
    }
    const Pattern target = target_pattern(link, ell);
    worst_mse = std::max(worst_mse, observe(link, s, vacuum_channel(link), target.image).mse);
  }
  return {"mask identity", worst_phase < 1e-6 && worst_mse < 1e-6,
          format("max phase deviation %.3e rad, max mse %.3e", worst_phase, worst_mse)};
}

CheckResult check_gradients(const ValidationOptions& o) {
  double worst = 0.0;
  int cases = 0;
  for (int n : {16, 32}) {
    const Link link(default_link_config(n, 51.2e-3 / n));
    const int count = (o.gradient_cases + 1) / 2;
    for (int c = 0; c < count; ++c, ++cases) {
      CounterRng rng(derive_seed(o.seed, 0x6DAD, static_cast<std::uint64_t>(n * 1000 + c)));
      const int ell = 1 + static_cast<int>(rng.below(6));
      const double cn2_real = (0.5 + 8.0 * rng.uniform()) * 1e-11;
      const double cn2_est = (0.5 + 8.0 * rng.uniform()) * 1e-11;
      const ChannelInstance ch = make_channel(link, cn2_real, rng.next_u64());
      const Pattern target = target_pattern(link, ell);
      const CorrectionObjective obj(link, ch, cn2_est, ell, target);
      const ScreenSeed seed = draw_seed(rng.next_u64(), link.grid());
      const ObjectiveValue v = obj.evaluate(seed, true);

      // Five-point central stencil, O(h⁴) truncation.
      const double h = 1e-3;
      const auto at = [&](std::size_t i, cd step) {
        ScreenSeed p = seed;
        p.values[i] += step;
        return obj.evaluate(p, false).objective;
      };
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < seed.values.size(); ++i) {
        double fd[2];
        for (int part = 0; part < 2; ++part) {
          const cd e = part == 0 ? cd(h, 0.0) : cd(0.0, h);
          fd[part] = (8.0 * (at(i, e) - at(i, -e)) - (at(i, 2.0 * e) - at(i, -2.0 * e))) / (12.0 * h);
        }
        const cd g_fd(fd[0], fd[1]);
        num += std::norm(v.grad[i] - g_fd);
        den += std::norm(g_fd);
      }
      worst = std::max(worst, std::sqrt(num / den));
    }
  }
  return {"gradient", worst < 1e-6, format("worst relative L2 error %.3e over %d cases", worst, cases)};
}

std::vector<CheckResult> run_validation(const ValidationOptions& o) {
  return {check_unitarity(o), check_beam_radius(), check_screen_statistics(o),
          check_petals(),     check_mask_identity(), check_gradients(o)};
}

}  // namespace petal
