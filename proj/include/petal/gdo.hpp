#pragma once

#include <cstdint>
#include <vector>

#include "petal/cnn.hpp"
#include "petal/link.hpp"

namespace petal {

/// One realization of the turbulent channel. The corrector never sees hidden_cn2.
struct ChannelInstance {
  PhaseScreen phi_real;
  double hidden_cn2 = 0.0;
  std::uint64_t rng_seed = 0;
};

ChannelInstance make_channel(const Link& link, double cn2, std::uint64_t rng_seed);
/// A channel with Φ_real ≡ 0.
ChannelInstance vacuum_channel(const Link& link);

/// Phase mask on the SLM at iteration j, values in (-π, π].
struct SlmState {
  RealField theta;
  int j = 0;
};

struct GdoConfig {
  double eta = 1.0;
  int max_iter = 300;
  int record_stride = 10;
  double eps_angle = 1e-12;
  std::uint64_t rng_seed = 1;
};

struct Pattern {
  Image8 image;
  RealField intensity;
};

struct Observation {
  Image8 image;
  double mse = 0.0;
  RealField intensity;
};

/// Receiver intensity of the ideal ±ell mode without turbulence.
Pattern target_pattern(const Link& link, int ell);
/// Ideal mask sent through the channel; mse against `target`.
Observation distorted_pattern(const Link& link, int ell, const ChannelInstance& ch, const Image8& target);
Observation distorted_pattern(const Link& link, int ell, const ChannelInstance& ch);

struct ScreenEstimate {
  PhaseScreen phi_est;
  Prediction prediction;
  ScreenSeed seed;
};

/// Classifies the distorted image and synthesizes a fresh screen at the predicted strength.
ScreenEstimate estimate_screen(const Link& link, const CnnModel& model, const Image8& distorted,
                               std::uint64_t rng_seed);

/// Θ = ∠[ inverse_propagate( propagate(G e^{iΘ_ideal}) · e^{-iΦ_est} ) ] through the SLM leg.
/// Throws NonInvertibleKernel if the SLM leg is not a transfer-function kernel.
SlmState update_mask(const Link& link, const RealField& phi_est, int ell, int j = 0);

/// G e^{iΘ} → SLM leg → e^{iΦ_real} → channel leg → intensity; mse against `target`.
Observation observe(const Link& link, const SlmState& mask, const ChannelInstance& ch, const Image8& target);

struct ObjectiveValue {
  double objective = 0.0;       // smooth surrogate J
  double mse = 0.0;             // quantized mse_index of the same observation
  std::vector<cd> grad;         // ∂J/∂Re c + i ∂J/∂Im c per seed entry; empty if not requested
  int degenerate_pixels = 0;    // |W| < eps_angle entering ∠ (derivative clamped)
  RealField intensity;
  RealField theta;

  bool degenerate() const { return degenerate_pixels > 0; }
};

/// The differentiable correction objective for one channel and one strength estimate:
///   J(c) = (1/(1000 n²)) Σ (s·I(c) - s·I_target)²,  s = 255 / max I_target,
/// with I(c) the receiver intensity after the mask update driven by the screen of seed c.
/// Gradients come from a hand-written adjoint of the whole chain.
class CorrectionObjective {
 public:
  CorrectionObjective(const Link& link, const ChannelInstance& ch, double cn2_est, int ell,
                      const Pattern& target, double eps_angle = 1e-12, double intensity_scale = 1.0);

  ObjectiveValue evaluate(const ScreenSeed& seed, bool with_gradient) const;
  /// Same objective for a spectrum supplied directly (used to zero the spectrum in tests).
  void set_spectrum(const SpectrumField& spectrum);
  const std::vector<double>& weights() const { return weights_; }

 private:
  const Link& link_;
  const ChannelInstance& ch_;
  const Pattern& target_;
  double eps_angle_;
  double scale_;
  std::vector<double> weights_;
  ComplexField tx_ideal_;  // propagate(G e^{iΘ_ideal}) at the transmitter plane
  std::vector<cd> real_rot_;  // e^{iΦ_real}
  std::vector<double> target_scaled_;
};

/// Convenience wrapper: value and gradient of J at `seed`.
ObjectiveValue objective_grad(const Link& link, const ScreenSeed& seed, const ChannelInstance& ch,
                              double cn2_est, int ell, const Pattern& target, double eps_angle = 1e-12);

struct TracePoint {
  int iter = 0;
  double mse = 0.0;
  double best_so_far = 0.0;
};

struct CorrectionResult {
  std::vector<TracePoint> trace;
  double best_mse = 0.0;
  int best_iter = 0;
  double final_mse = 0.0;
  double uncorrected_mse = 0.0;
  SlmState best_mask;
  Image8 target, distorted, corrected_best;
  double cn2_true = 0.0;
  double cn2_predicted = 0.0;
  std::uint64_t channel_seed = 0;
  std::uint64_t gdo_seed = 0;
  int degenerate_iterations = 0;
};

/// Gradient descent on the screen seed for a fixed strength estimate: seed ← seed - η∇J,
/// mse recorded every record_stride iterations, best mask tracked over every iteration.
CorrectionResult run_correction(const Link& link, const ChannelInstance& ch, double cn2_est, const GdoConfig& cfg,
                                int ell);

/// Full feedback loop: classify the distorted image once, then run_correction.
CorrectionResult gdo_run(const Link& link, const ChannelInstance& ch, const CnnModel& model, const GdoConfig& cfg,
                         int ell);

}  // namespace petal
