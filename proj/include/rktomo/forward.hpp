#pragma once

#include <vector>

#include "rktomo/model.hpp"

namespace rktomo {

// All amplitudes take E as the final-state energy above the ground state
// (photon-equivalent, eV) and return values in units of mu_continuum times
// the field amplitudes. tau is in fs.

/// Two-photon amplitude for Gaussian XUV and IR pulses with the IR delayed by tau.
/// Handles any number of XUV resonances; flat continuum if there are none.
Complex amplitude_time(const LevelStructure& structure, const GaussianPulse& xuv, const GaussianPulse& ir,
                       double E, double tau);

/// Narrowband-reference limit at tau = 0. Warns when ir_ref.sigma > 1e-2 * xuv.sigma.
Complex amplitude_narrowband_fixed(const LevelStructure& structure, const GaussianPulse& xuv,
                                   const GaussianPulse& ir_ref, double E);

/// Same prefactor as amplitude_narrowband_fixed with the line-shape deviation
/// removed: G(delta_ref) times the product of bare Fano profiles.
Complex amplitude_narrowband_fano(const LevelStructure& structure, const GaussianPulse& xuv,
                                  const GaussianPulse& ir_ref, double E);

/// Closed-form Fourier transform of amplitude_time over the natural delay
/// t = tau / hbar, i.e. integral of A e^{-i omega_tau t} dt. omega_tau in eV, nonzero.
Complex amplitude_fourier_analytic(const LevelStructure& structure, const GaussianPulse& xuv,
                                   const GaussianPulse& ir_probe, double E, double omega_tau);

/// General amplitude with several XUV resonances, an optional final-manifold
/// resonance |b> and bound levels |n>. Equals amplitude_time when |b> and |n> are absent.
Complex amplitude_general_time(const LevelStructure& structure, const GaussianPulse& xuv, const GaussianPulse& ir,
                               double E, double tau);

/// Probe modulation M+(E, omega_tau) in 1/eV; M-(omega) = M+(-omega).
double modulation_plus(const GaussianPulse& xuv, const GaussianPulse& ir_probe, double E, double omega_tau);

/// Complex asymmetry parameters seen by the reference (at omega_ref) and the
/// probe (at omega_tau) for one resonance at final energy E.
FanoDeviation fano_deviation(const FanoResonance& res, double E, double omega_ref, double omega_tau);

/// Moves E off real resonance poles: points within 1e-9 eV are shifted by half_step.
double nudge_off_poles(const LevelStructure& structure, double E, double half_step);

/// Synthesizes S(E_f, tau) on the given grids. E_f is the kinetic energy;
/// channel j is evaluated at E_f + ionization_threshold + threshold_shift.
/// Columns are computed independently, so the output does not depend on threads.
Interferogram synthesize_interferogram(const std::vector<IonChannel>& channels, const PulseSet& pulses,
                                       const EnergyGrid& e_grid, const DelayGrid& tau_grid, SignalMode mode,
                                       int threads = 1);

/// Weighted incoherent sum of the XUV-manifold states of each channel, normalized.
DensityMatrix theoretical_density_matrix(const std::vector<IonChannel>& channels, const GaussianPulse& xuv,
                                         const EnergyGrid& axis);

}  // namespace rktomo
