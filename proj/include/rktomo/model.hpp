#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "rktomo/specfun.hpp"

namespace rktomo {

/// Reduced Planck constant in eV fs.
inline constexpr double kHbarEvFs = 0.6582119569;

/// Photon energy (eV) to angular frequency (rad/fs) and back.
inline double ev_to_rad_per_fs(double ev) { return ev / kHbarEvFs; }
inline double rad_per_fs_to_ev(double w) { return w * kHbarEvFs; }
/// Delay in fs to the natural time unit 1/eV used inside the amplitudes.
inline double fs_to_natural(double fs) { return fs / kHbarEvFs; }

struct GaussianPulse {
  double omega = 0.0;  // photon energy, eV
  double sigma = 0.0;  // spectral amplitude width, eV
  double amplitude = 1.0;
  double phase = 0.0;  // rad
};

void validate(const GaussianPulse& p, const char* name);

struct PulseSet {
  GaussianPulse xuv;
  GaussianPulse ir_ref;
  GaussianPulse ir_probe;
};

/// Discrete state |a> in the XUV manifold coupled to the continuum.
struct FanoResonance {
  double omega_ag = 0.0;  // eV
  double gamma_a = 0.0;   // half-width, eV
  double q_ag = 0.0;
  double beta = 0.0;
};

/// Discrete state |b> in the XUV+IR manifold.
struct FinalManifoldResonance {
  double omega_bg = 0.0;
  double gamma_b = 0.0;
  double q_ba = 0.0;
  double q_ab = 0.0;
  std::vector<double> q_bn;  // one entry per bound level; missing entries are 0
  double delta_ba = 0.0;
  double xi_ba = 0.0;
  double dipole_ratio_b = 0.0;  // mu_b,eps / mu_E,eps
};

/// Discrete level reached from the ground state and not coupled to the continuum.
struct BoundLevel {
  double omega_ng = 0.0;
  double dipole_ratio_n = 0.0;
};

struct LevelStructure {
  std::vector<FanoResonance> xuv_resonances;  // empty: flat continuum
  std::vector<FinalManifoldResonance> final_resonances;
  std::vector<BoundLevel> bound_levels;
  double mu_continuum = 1.0;
  double ionization_threshold = 0.0;  // eV
};

void validate(const LevelStructure& s);

struct IonChannel {
  double threshold_shift = 0.0;  // eV
  double weight = 1.0;
  LevelStructure structure;
};

/// Weights must be non-negative and sum to one.
void validate_channels(const std::vector<IonChannel>& channels);

/// Derived bandwidth and time scales for an XUV + IR pair at final energy E.
struct PulseScales {
  double sigma_quad = 0.0;  // sqrt(sx^2 + si^2), eV
  double sigma_t = 0.0;     // sqrt(sx^-2 + si^-2), 1/eV
  double delta = 0.0;       // omega_xuv + omega_ir - E
  double delta_E = 0.0;     // Omega_c - E
  std::optional<double> delta_a;  // Omega_c - omega_ag
  double omega_F = 0.0;     // frequency shift of F(tau): (si^2/s^2) delta
  double omega_c = 0.0;     // collision frequency omega_xuv - (sx^2/s^2) delta
  double tau_E = 0.0;       // sigma_t^2 delta_E, 1/eV
  std::optional<double> tau_a;
};

PulseScales pulse_scales(const GaussianPulse& xuv, const GaussianPulse& ir, double E,
                         std::optional<double> omega_ag = std::nullopt);

struct EnergyGrid {
  double e_min = 0.0;
  double e_max = 0.0;
  int n = 0;

  double step() const { return (e_max - e_min) / (n - 1); }
  double at(int i) const { return e_min + i * step(); }
  bool operator==(const EnergyGrid&) const = default;
};

void validate(const EnergyGrid& g);

struct DelayGrid {
  double tau_min = 0.0;  // fs
  double tau_max = 0.0;
  int n = 0;

  double step() const { return (tau_max - tau_min) / (n - 1); }
  double at(int i) const { return tau_min + i * step(); }
  bool operator==(const DelayGrid&) const = default;
};

void validate(const DelayGrid& g);

enum class SignalMode { InterferenceOnly, Full };

/// Real photoelectron signal S(E_f, tau); rows are delays, columns energies.
struct Interferogram {
  EnergyGrid e_grid;
  DelayGrid tau_grid;
  SignalMode mode = SignalMode::InterferenceOnly;
  Eigen::MatrixXd values;
};

/// Uniform axis in eV, used for the omega_tau direction of Fourier maps.
struct Axis {
  double start = 0.0;
  double step = 0.0;
  int n = 0;

  double at(int i) const { return start + i * step; }
  bool operator==(const Axis&) const = default;
};

/// Complex map S~(E_f, omega_tau); rows are omega_tau samples, columns energies.
struct FourierMap {
  EnergyGrid e_grid;
  Axis omega_tau;
  SignalMode mode = SignalMode::InterferenceOnly;
  Eigen::MatrixXcd values;
};

/// rho(eps2, eps1) with rows indexing eps2 and columns eps1 on one shared axis.
struct DensityMatrix {
  EnergyGrid axis;
  Eigen::MatrixXcd values;
  bool hermitian = false;

  double weight() const { return axis.step(); }
  Complex trace() const { return values.trace() * weight(); }
};

/// Scale so that trace * d_eps = 1. Zero or negative trace is a degenerate input.
DensityMatrix normalize_density_matrix(const DensityMatrix& rho);

/// Complex asymmetry parameters of the reconstructed Fano profile.
struct FanoDeviation {
  Complex xi;
  Complex delta_ref;
  Complex delta_probe;
  Complex q_ref;
  Complex q_probe;
  Complex q_bar;
};

/// Spectral envelope exp(-x^2 / (2 sigma^2)).
inline double gaussian(double x, double sigma) {
  const double u = x / sigma;
  return std::exp(-0.5 * u * u);
}

/// Fano profile (eps + q) / (eps + i) for complex q.
inline Complex fano_profile(double eps, Complex q) { return (eps + q) / Complex(eps, 1.0); }

}  // namespace rktomo
