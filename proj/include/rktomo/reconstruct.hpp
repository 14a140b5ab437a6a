#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rktomo/metrics.hpp"
#include "rktomo/model.hpp"

namespace rktomo {

enum class WindowKind { Auto, None, Tukey, Gaussian };
enum class Lobe { Positive, Negative };

struct WindowSpec {
  WindowKind kind = WindowKind::Auto;  // Tukey for full-mode scans, none otherwise
  double alpha = 0.25;                 // Tukey taper fraction
  double width_fs = 100.0;             // Gaussian standard deviation
};

struct PipelineConfig {
  double zeta = 1e-3;
  WindowSpec window;
  Lobe lobe = Lobe::Positive;
  std::optional<double> sigma_eff;  // eV, bandwidth masking
  bool correction = true;           // false skips the probe modulation correction
  bool keep_full_map_artifacts = false;
  bool diagnostic_raw_metrics = false;
  double band_sigmas = 4.0;  // lobe half-width in units of 1/sigma_t
  int threads = 1;
};

void validate(const PipelineConfig& cfg, const GaussianPulse& xuv);

/// Pulses and energy reference needed to locate and undo the probe imprint.
/// energy_offset converts kinetic E_f to the photon-equivalent final energy.
struct ProbeGeometry {
  PulseSet pulses;
  double energy_offset = 0.0;
};

/// Per-column pass band in omega_tau (eV) for the selected lobe.
struct LobeBand {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> center;
};

/// Windowed DFT * dtau along tau for every energy column. Rows of the result
/// follow the centered frequency axis omega_k = (k - floor(N/2)) * 2 pi hbar / (N dtau).
FourierMap fourier_transform_scan(const Interferogram& s, const PipelineConfig& cfg);

LobeBand lobe_band(const FourierMap& map, const ProbeGeometry& geo, const PipelineConfig& cfg);

/// Zeroes everything outside the lobe band. Raises a config error when the
/// band of a column near the spectral peak extends past the Nyquist frequency.
FourierMap filter_lobe(const FourierMap& map, const ProbeGeometry& geo, const PipelineConfig& cfg);

/// Multiplies by C = G(delta_omega, sigma_target) / (|M| + zeta) * sign(M), with
/// the optional sigma_eff masking of both axes.
FourierMap correct_probe_modulation(const FourierMap& map, const ProbeGeometry& geo, const PipelineConfig& cfg);

struct Coverage {
  double eps1_min = 0.0, eps1_max = 0.0;  // columns backed by measured E_f
  double eps2_min = 0.0, eps2_max = 0.0;  // rows reachable through the band
};

/// Maps (E_f, omega_tau) to (eps2 = E_f - omega_tau, eps1 = E_f - omega_ref) on
/// target_axis by linear interpolation. Unreached entries are zero.
DensityMatrix relabel_axes(const FourierMap& map, double omega_ref, const EnergyGrid& target_axis, Lobe lobe,
                           Coverage* coverage = nullptr);

/// (rho + rho^dagger)/2, trace-normalized.
DensityMatrix hermitize(const DensityMatrix& raw);

struct PipelineArtifacts {
  FourierMap transformed;
  FourierMap filtered;
  FourierMap corrected;
  DensityMatrix raw;
};

struct PipelineResult {
  DensityMatrix rho;
  ReconstructionReport report;
  std::optional<PipelineArtifacts> artifacts;
};

/// Target axis used when none is given: the energy grid shifted down by omega_ref.
EnergyGrid default_target_axis(const EnergyGrid& e_grid, double omega_ref);

/// Feature hints for the report: the resonance whose zero should be located.
struct FeatureHint {
  FanoResonance resonance;
  double energy_offset = 0.0;  // photon-equivalent minus kinetic energy
};

PipelineResult run_pipeline(const Interferogram& s, const ProbeGeometry& geo, const PipelineConfig& cfg,
                            const std::optional<EnergyGrid>& target_axis = std::nullopt,
                            const DensityMatrix* reference = nullptr,
                            const std::optional<FeatureHint>& feature = std::nullopt);

const char* window_kind_name(WindowKind k);
const char* lobe_name(Lobe l);

}  // namespace rktomo
