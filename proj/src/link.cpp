#include "petal/link.hpp"

namespace petal {

LinkConfig default_link_config(int n, double dx) {
  LinkConfig cfg;
  cfg.grid = make_grid(n, dx);
  cfg.optics = make_optics(link_defaults::kLambda, link_defaults::kW0, link_defaults::kZSlmTx, link_defaults::kZTxRx);
  return cfg;
}

Link::Link(const LinkConfig& cfg)
    : cfg_(cfg),
      h1_(make_kernel(cfg.slm_tx_method, cfg.grid, cfg.optics.lambda, cfg.optics.z_slm_tx)),
      h2_(make_kernel(cfg.tx_rx_method, cfg.grid, cfg.optics.lambda, cfg.optics.z_tx_rx)),
      beam_(gaussian_beam(cfg.grid, cfg.optics)),
      kappa_(kappa_grid(cfg.grid)) {}

TurbulenceParams Link::turbulence(double cn2) const {
  return make_turbulence(cfg_.optics.k, cn2, cfg_.l_min, cfg_.l_max, cfg_.optics.z_tx_rx);
}

SpectrumField Link::spectrum(double cn2) const { return von_karman_spectrum(kappa_, turbulence(cn2)); }

ComplexField Link::transmit(const RealField& slm_phase) const {
  return propagate(apply_phase(beam_, slm_phase), h1_);
}

ComplexField Link::receive(const ComplexField& tx_field, const RealField* screen) const {
  if (screen == nullptr) return propagate(tx_field, h2_);
  return propagate(apply_phase(tx_field, *screen), h2_);
}

RealField Link::receiver_intensity(const RealField& slm_phase, const RealField* screen) const {
  return intensity(receive(transmit(slm_phase), screen));
}

}  // namespace petal
