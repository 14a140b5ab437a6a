#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rktomo/model.hpp"
#include "rktomo/reconstruct.hpp"

namespace rktomo {

inline constexpr const char* kScenarioSchema = "rktomo-scenario/1";

struct OutputRequest {
  std::string kind;  // interferogram, interferogram_full, fourier_map, density_matrix, theory_matrix, report, heatmap
  std::string file;  // relative to the output directory
};

struct Scenario {
  std::string name;
  std::string description;
  PulseSet pulses;
  std::vector<IonChannel> channels;
  EnergyGrid e_grid;
  DelayGrid tau_grid;
  std::optional<EnergyGrid> target_axis;
  SignalMode mode = SignalMode::InterferenceOnly;
  PipelineConfig pipeline;
  int threads = 1;
  std::vector<OutputRequest> outputs;
};

/// Parses a scenario document (JSON, comments allowed). Unknown keys, wrong
/// types and out-of-range values raise a schema error naming the field path.
Scenario parse_scenario(const std::string& text, const std::string& origin = "<string>");

/// Loads a file, or a bundled scenario when the argument reads "bundled:<name>".
Scenario load_scenario(const std::string& path_or_name);

std::string scenario_to_json(const Scenario& s);

std::vector<std::string> bundled_scenario_names();
/// Raw text of a bundled scenario; not-found error for unknown names.
const std::string& bundled_scenario_text(const std::string& name);

/// Sweepable and overridable numeric parameters:
/// sigma_xuv, sigma_ir_probe, sigma_ir_ref, omega_xuv, amplitude_ir_probe,
/// amplitude_ir_ref, zeta, sigma_eff (<= 0 clears it), band_sigmas,
/// threshold_split (shift of the second channel), threads, tau_count, energy_count.
void set_parameter(Scenario& s, const std::string& name, double value);
std::vector<std::string> parameter_names();

/// String settings: mode (interference|full), lobe (pos|neg), window
/// (auto|none|tukey|gaussian), correction (on|off).
void set_option(Scenario& s, const std::string& name, const std::string& value);

std::string get_option(const Scenario& s, const std::string& name);

/// Pulses plus the channel-weighted photon-equivalent offset of E_f.
ProbeGeometry probe_geometry(const Scenario& s);

/// First XUV resonance of the first channel that has one.
std::optional<FeatureHint> feature_hint(const Scenario& s);

/// Axis of the reconstructed matrix: explicit, or E_f shifted by omega_ref.
EnergyGrid reconstruction_axis(const Scenario& s);

}  // namespace rktomo
