#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rktomo/reconstruct.hpp"
#include "rktomo/scenario.hpp"

namespace rktomo {

Interferogram simulate(const Scenario& s, std::optional<SignalMode> mode = std::nullopt);

/// Theoretical matrix on the reconstruction axis, refined `oversample` times
/// (n -> oversample * (n - 1) + 1 over the same range).
DensityMatrix theory_matrix(const Scenario& s, int oversample = 1);

/// Runs the pipeline on a scan that must match the scenario grids (data
/// error otherwise) and scores it against the theoretical matrix.
PipelineResult reconstruct(const Scenario& s, const Interferogram& scan);

/// Stable key order, no timestamps.
std::string report_to_json(const ReconstructionReport& r, const Scenario& s);

struct SweepRow {
  double parameter = 0.0;
  double fidelity_corrected = 0.0;
  double fidelity_uncorrected = 0.0;
  double purity_corrected = 0.0;
  double purity_uncorrected = 0.0;
  double purity_theory = 0.0;
  std::string error;  // empty on success
};

/// One simulate + reconstruct (with and without correction) per value, in
/// parallel over points. Failing points are kept as error rows.
std::vector<SweepRow> run_sweep(const Scenario& s, const std::string& parameter, const std::vector<double>& values,
                                int threads);

std::string sweep_to_tsv(const std::vector<SweepRow>& rows, const std::string& parameter);

struct OracleSample {
  double energy = 0.0;  // photon-equivalent, eV
  double tau = 0.0;     // fs
  Complex closed_form;
  Complex quadrature;
  double rel_error = 0.0;
};

/// Compares amplitude_general_time with the brute-force quadrature for the
/// first channel at `points` energies across the XUV band and a few delays.
std::vector<OracleSample> oracle_check(const Scenario& s, int points);

std::string oracle_to_json(const std::vector<OracleSample>& samples);

/// Purity, trace, psd defect and (when given) fidelity as JSON.
std::string metrics_to_json(const DensityMatrix& rho, const DensityMatrix* reference);

}  // namespace rktomo
