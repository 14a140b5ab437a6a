#pragma once

// Brute-force time-domain evaluation of the second-order amplitudes.
// Nothing here calls the special-function code: the intermediate state is
// propagated step by step and the IR transition is integrated numerically.

#include "rktomo/model.hpp"

namespace rktomo::oracle {

struct QuadratureOptions {
  double step = 0.02;      // time step in 1/eV
  double span = 12.0;      // envelope cut-off in standard deviations of each pulse
  bool richardson = true;  // combine steps h and h/2
};

/// Amplitude through a single intermediate pole omega_n (complex for
/// decaying states) with unit coupling: -mu int dt e^{iEt} E_ir(t) y_n(t),
/// where y_n' = -i omega_n y_n + E_xuv(t).
Complex pole_amplitude(const GaussianPulse& xuv, const GaussianPulse& ir, double E, double tau, Complex omega_n,
                       double mu, const QuadratureOptions& opt = {});

/// Time-local overlap int dt e^{iEt} E_xuv(t) E_ir(t).
Complex field_overlap(const GaussianPulse& xuv, const GaussianPulse& ir, double E, double tau,
                      const QuadratureOptions& opt = {});

/// Full amplitude for a level structure built from pole_amplitude and field_overlap.
Complex amplitude(const LevelStructure& structure, const GaussianPulse& xuv, const GaussianPulse& ir, double E,
                  double tau, const QuadratureOptions& opt = {});

}  // namespace rktomo::oracle
