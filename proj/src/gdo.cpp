#include "petal/gdo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "petal/error.hpp"
#include "petal/fft.hpp"
#include "petal/simd/kernels.hpp"

namespace petal {
namespace {

// out = F⁻¹(F(in) ⊙ H) or ⊙ conj(H); in and out may alias.
void filter(std::span<const cd> in, std::span<cd> out, const PropagatorKernel& kern, bool conjugate) {
  const int n = kern.grid.n;
  fft::forward(in, out, n);
  if (conjugate) {
    simd::cmul_conj(out, kern.h_spec, out);
  } else {
    simd::cmul(out, kern.h_spec, out);
  }
  fft::inverse(out, out, n);
}

std::vector<cd> rotations(const RealField& phase, double sign) {
  std::vector<cd> r(phase.values.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double p = sign * phase.values[i];
    r[i] = cd(std::cos(p), std::sin(p));
  }
  return r;
}

// std::arg can return -π for a negative real with a -0 imaginary part; masks live in (-π, π].
double wrapped_arg(cd w) {
  const double a = std::arg(w);
  return a <= -std::numbers::pi ? std::numbers::pi : a;
}

std::vector<fft::cld> tf_spectrum_long(const GridSpec& g, double lambda, double z) {
  using ld = long double;
  const ld pi = std::numbers::pi_v<ld>;
  const ld cycles = static_cast<ld>(z) / static_cast<ld>(lambda);
  const ld carrier = 2.0L * pi * (cycles - std::floor(cycles));
  std::vector<fft::cld> h(g.size());
  for (int iy = 0; iy < g.n; ++iy) {
    const ld fy = g.freq(iy);
    for (int ix = 0; ix < g.n; ++ix) {
      const ld fx = g.freq(ix);
      h[static_cast<std::size_t>(iy) * g.n + ix] = std::polar(1.0L, carrier - pi * lambda * z * (fx * fx + fy * fy));
    }
  }
  return h;
}

Image8 quantize_or_blank(const RealField& i) {
  const double peak = *std::max_element(i.values.begin(), i.values.end());
  if (peak > 0.0) return to_image8(i);
  return Image8{i.grid.n, i.grid.n, std::vector<std::uint8_t>(i.values.size(), 0)};
}

}  // namespace

ChannelInstance make_channel(const Link& link, double cn2, std::uint64_t rng_seed) {
  return ChannelInstance{synthesize_screen(draw_seed(rng_seed, link.grid()), link.spectrum(cn2), ScreenRole::Real),
                         cn2, rng_seed};
}

ChannelInstance vacuum_channel(const Link& link) {
  return ChannelInstance{PhaseScreen{RealField(link.grid()), ScreenRole::Real}, 0.0, 0};
}

Pattern target_pattern(const Link& link, int ell) {
  const ModeMask mask = superposition_phase_mask(link.grid(), ell);
  Pattern p;
  p.intensity = link.receiver_intensity(mask.phase, nullptr);
  p.image = to_image8(p.intensity);
  return p;
}

Observation distorted_pattern(const Link& link, int ell, const ChannelInstance& ch, const Image8& target) {
  const ModeMask mask = superposition_phase_mask(link.grid(), ell);
  Observation o;
  o.intensity = link.receiver_intensity(mask.phase, &ch.phi_real.phase);
  o.image = quantize_or_blank(o.intensity);
  o.mse = mse_index(target, o.image);
  return o;
}

Observation distorted_pattern(const Link& link, int ell, const ChannelInstance& ch) {
  return distorted_pattern(link, ell, ch, target_pattern(link, ell).image);
}

ScreenEstimate estimate_screen(const Link& link, const CnnModel& model, const Image8& distorted,
                               std::uint64_t rng_seed) {
  ScreenEstimate e;
  e.prediction = predict(model, distorted);
  e.seed = draw_seed(rng_seed, link.grid());
  e.phi_est = synthesize_screen(e.seed, link.spectrum(e.prediction.cn2), ScreenRole::Estimated);
  return e;
}

SlmState update_mask(const Link& link, const RealField& phi_est, int ell, int j) {
  const PropagatorKernel& h1 = link.slm_to_tx();
  if (h1.method != PropagationMethod::TransferFunction) {
    throw Error(ErrorKind::NonInvertibleKernel, "the SLM leg must use a transfer-function kernel");
  }
  if (phi_est.grid.n != link.grid().n) throw Error(ErrorKind::ShapeMismatch, "screen does not match the link grid");
  const GridSpec& g = link.grid();
  const int n = g.n;
  const std::size_t total = g.size();
  const ModeMask ideal = superposition_phase_mask(g, ell);
  const auto& beam = link.beam().values;

  // Extended precision: at the dim edge of the beam, double round-off through four FFTs
  // shifts the recovered phase by ~1e-10.
  const std::vector<fft::cld> h = tf_spectrum_long(g, h1.lambda, h1.z);
  std::vector<fft::cld> u(total);
  for (std::size_t i = 0; i < total; ++i) {
    u[i] = fft::cld(beam[i].real(), beam[i].imag()) * std::polar(1.0L, static_cast<long double>(ideal.phase.values[i]));
  }
  fft::forward(u, u, n);
  for (std::size_t i = 0; i < total; ++i) u[i] *= h[i];
  fft::inverse(u, u, n);
  for (std::size_t i = 0; i < total; ++i) u[i] *= std::polar(1.0L, -static_cast<long double>(phi_est.values[i]));
  fft::forward(u, u, n);
  for (std::size_t i = 0; i < total; ++i) u[i] *= std::conj(h[i]);
  fft::inverse(u, u, n);

  SlmState s{RealField(g), j};
  for (std::size_t i = 0; i < total; ++i) {
    s.theta.values[i] = wrapped_arg(cd(static_cast<double>(u[i].real()), static_cast<double>(u[i].imag())));
  }
  return s;
}

Observation observe(const Link& link, const SlmState& mask, const ChannelInstance& ch, const Image8& target) {
  Observation o;
  o.intensity = link.receiver_intensity(mask.theta, &ch.phi_real.phase);
  o.image = quantize_or_blank(o.intensity);
  o.mse = mse_index(target, o.image);
  return o;
}

CorrectionObjective::CorrectionObjective(const Link& link, const ChannelInstance& ch, double cn2_est, int ell,
                                         const Pattern& target, double eps_angle, double intensity_scale)
    : link_(link), ch_(ch), target_(target), eps_angle_(eps_angle) {
  if (!(eps_angle > 0.0)) throw Error(ErrorKind::InvalidConfig, "eps_angle must be positive");
  if (link.slm_to_tx().method != PropagationMethod::TransferFunction) {
    throw Error(ErrorKind::NonInvertibleKernel, "the SLM leg must use a transfer-function kernel");
  }
  weights_ = screen_weights(link.spectrum(cn2_est));
  tx_ideal_ = link.transmit(superposition_phase_mask(link.grid(), ell).phase);
  real_rot_ = rotations(ch.phi_real.phase, 1.0);
  const double peak = *std::max_element(target.intensity.values.begin(), target.intensity.values.end());
  scale_ = intensity_scale * 255.0 / peak;
  target_scaled_.resize(target.intensity.values.size());
  for (std::size_t i = 0; i < target_scaled_.size(); ++i) target_scaled_[i] = scale_ * target.intensity.values[i];
}

void CorrectionObjective::set_spectrum(const SpectrumField& spectrum) { weights_ = screen_weights(spectrum); }

ObjectiveValue CorrectionObjective::evaluate(const ScreenSeed& seed, bool with_gradient) const {
  const GridSpec& g = link_.grid();
  const int n = g.n;
  const std::size_t total = g.size();
  if (seed.values.size() != total) throw Error(ErrorKind::ShapeMismatch, "seed size does not match grid");
  const auto& h1 = link_.slm_to_tx();
  const auto& h2 = link_.tx_to_rx();
  const auto& beam = link_.beam().values;

  ObjectiveValue out;
  out.intensity = RealField(g);
  out.theta = RealField(g);

  // Estimated screen φ = Re B(c ⊙ a), B the unnormalized inverse DFT.
  std::vector<cd> z(total);
  for (std::size_t i = 0; i < total; ++i) z[i] = seed.values[i] * weights_[i];
  fft::inverse_unnormalized(z, z, n);

  // Mask update: V = P e^{-iφ}, W = H1⁻¹ V, Θ = ∠W.
  std::vector<cd> est_rot(total), v(total), w(total);
  for (std::size_t i = 0; i < total; ++i) {
    const double p = -z[i].real();
    est_rot[i] = cd(std::cos(p), std::sin(p));
  }
  simd::cmul(tx_ideal_.values, est_rot, v);
  filter(v, w, h1, true);

  // Observation: U0 = G e^{iΘ}, U1 = H1 U0, U2 = U1 e^{iΦ_real}, U3 = H2 U2.
  std::vector<cd> u0(total), u3(total);
  const double eps2 = eps_angle_ * eps_angle_;
  for (std::size_t i = 0; i < total; ++i) {
    const double m2 = std::norm(w[i]);
    if (m2 < eps2) ++out.degenerate_pixels;
    out.theta.values[i] = wrapped_arg(w[i]);
    u0[i] = std::polar(beam[i].real(), out.theta.values[i]);
  }
  filter(u0, u3, h1, false);
  simd::cmul(u3, real_rot_, u3);
  filter(u3, u3, h2, false);
  simd::norm_sq(u3, out.intensity.values);

  const double norm = 1.0 / (1000.0 * static_cast<double>(total));
  std::vector<double> scaled(total);
  for (std::size_t i = 0; i < total; ++i) scaled[i] = scale_ * out.intensity.values[i];
  out.objective = simd::sq_diff_sum(scaled, target_scaled_) * norm;
  const double peak = *std::max_element(out.intensity.values.begin(), out.intensity.values.end());
  if (peak > 0.0) out.mse = mse_index(target_.image, to_image8(out.intensity));
  else out.mse = mse_index(target_.image, quantize_or_blank(out.intensity));
  if (!with_gradient) return out;

  // Adjoint sweep. Complex gradients use g = ∂J/∂Re + i ∂J/∂Im.
  std::vector<cd> gu(total);
  for (std::size_t i = 0; i < total; ++i) {
    const double gi = 2.0 * scale_ * (scaled[i] - target_scaled_[i]) * norm;
    gu[i] = 2.0 * gi * u3[i];
  }
  filter(gu, gu, h2, true);
  simd::cmul_conj(gu, real_rot_, gu);
  filter(gu, gu, h1, true);  // now ∂J/∂U0

  // Θ = ∠W: ∂J/∂W = gΘ · iW / |W|², with |W|² clamped at eps².
  for (std::size_t i = 0; i < total; ++i) {
    const double g_theta = -(std::conj(gu[i]) * u0[i]).imag();
    const double m2 = std::max(std::norm(w[i]), eps2);
    gu[i] = cd(-w[i].imag(), w[i].real()) * (g_theta / m2);
  }
  filter(gu, gu, h1, false);  // adjoint of H1⁻¹ = conj(H1)

  // V = P e^{-iφ}: ∂J/∂φ = Im(conj(gV) V); then c-gradient a ⊙ F(gφ).
  for (std::size_t i = 0; i < total; ++i) gu[i] = cd((std::conj(gu[i]) * v[i]).imag(), 0.0);
  fft::forward(gu, gu, n);
  out.grad.resize(total);
  for (std::size_t i = 0; i < total; ++i) out.grad[i] = gu[i] * weights_[i];
  return out;
}

ObjectiveValue objective_grad(const Link& link, const ScreenSeed& seed, const ChannelInstance& ch, double cn2_est,
                              int ell, const Pattern& target, double eps_angle) {
  CorrectionObjective obj(link, ch, cn2_est, ell, target, eps_angle);
  return obj.evaluate(seed, true);
}

CorrectionResult run_correction(const Link& link, const ChannelInstance& ch, double cn2_est, const GdoConfig& cfg,
                                int ell) {
  if (!(cfg.eta > 0.0) || cfg.max_iter < 1 || cfg.record_stride < 1) {
    throw Error(ErrorKind::InvalidConfig, "GDO needs eta > 0, max_iter >= 1 and record_stride >= 1");
  }
  const Pattern target = target_pattern(link, ell);
  const Observation distorted = distorted_pattern(link, ell, ch, target.image);

  CorrectionResult r;
  r.target = target.image;
  r.distorted = distorted.image;
  r.uncorrected_mse = distorted.mse;
  r.cn2_true = ch.hidden_cn2;
  r.cn2_predicted = cn2_est;
  r.channel_seed = ch.rng_seed;
  r.gdo_seed = cfg.rng_seed;
  r.best_mse = std::numeric_limits<double>::infinity();

  CorrectionObjective objective(link, ch, cn2_est, ell, target, cfg.eps_angle);
  ScreenSeed seed = draw_seed(cfg.rng_seed, link.grid());
  for (int j = 0; j <= cfg.max_iter; ++j) {
    ObjectiveValue val = objective.evaluate(seed, j < cfg.max_iter);
    if (val.degenerate()) ++r.degenerate_iterations;
    if (val.mse < r.best_mse) {
      r.best_mse = val.mse;
      r.best_iter = j;
      r.best_mask = SlmState{std::move(val.theta), j};
      r.corrected_best = quantize_or_blank(val.intensity);
    }
    if (j % cfg.record_stride == 0) r.trace.push_back({j, val.mse, r.best_mse});
    if (j == cfg.max_iter) {
      r.final_mse = val.mse;
      break;
    }
    for (std::size_t i = 0; i < seed.values.size(); ++i) seed.values[i] -= cfg.eta * val.grad[i];
  }
  return r;
}

CorrectionResult gdo_run(const Link& link, const ChannelInstance& ch, const CnnModel& model, const GdoConfig& cfg,
                         int ell) {
  const Pattern target = target_pattern(link, ell);
  const Observation distorted = distorted_pattern(link, ell, ch, target.image);
  const Prediction p = predict(model, distorted.image);
  return run_correction(link, ch, p.cn2, cfg, ell);
}

}  // namespace petal
