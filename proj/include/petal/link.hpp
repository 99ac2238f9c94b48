#pragma once

#include "petal/fresnel.hpp"
#include "petal/optics.hpp"
#include "petal/turbulence.hpp"

namespace petal {

/// Geometry of the simulated link: SLM → (1 m) → transmitter/screen → (25 m) → receiver.
struct LinkConfig {
  GridSpec grid;
  OpticalConfig optics;
  double l_min = link_defaults::kLMin;
  double l_max = link_defaults::kLMax;
  PropagationMethod slm_tx_method = PropagationMethod::TransferFunction;
  PropagationMethod tx_rx_method = PropagationMethod::TransferFunction;
};

/// Default geometry on an n×n grid of pitch dx.
LinkConfig default_link_config(int n = link_defaults::kGridN, double dx = link_defaults::kDx);

/// Precomputed kernels, input beam and κ grid for one link geometry. Immutable and
/// shareable across threads.
class Link {
 public:
  explicit Link(const LinkConfig& cfg);

  const LinkConfig& config() const { return cfg_; }
  const GridSpec& grid() const { return cfg_.grid; }
  const OpticalConfig& optics() const { return cfg_.optics; }
  const ComplexField& beam() const { return beam_; }
  const PropagatorKernel& slm_to_tx() const { return h1_; }
  const PropagatorKernel& tx_to_rx() const { return h2_; }
  const KappaGrid& kappa() const { return kappa_; }

  TurbulenceParams turbulence(double cn2) const;
  SpectrumField spectrum(double cn2) const;

  /// G · e^{iΘ} carried to the transmitter plane.
  ComplexField transmit(const RealField& slm_phase) const;
  /// Screen applied at the transmitter plane (nullptr = vacuum), then carried to the receiver.
  ComplexField receive(const ComplexField& tx_field, const RealField* screen) const;
  RealField receiver_intensity(const RealField& slm_phase, const RealField* screen) const;

 private:
  LinkConfig cfg_;
  PropagatorKernel h1_;
  PropagatorKernel h2_;
  ComplexField beam_;
  KappaGrid kappa_;
};

}  // namespace petal
