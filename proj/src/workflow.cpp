#include "rktomo/workflow.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <limits>
#include <sstream>

#include "parallel.hpp"
#include "rktomo/error.hpp"
#include "rktomo/forward.hpp"
#include "rktomo/gridio.hpp"
#include "rktomo/metrics.hpp"
#include "rktomo/oracle.hpp"

namespace rktomo {
namespace {

using json = nlohmann::ordered_json;

void require_same_grids(const Scenario& s, const Interferogram& scan) {
  auto describe_e = [](const EnergyGrid& g) {
    std::ostringstream os;
    os << "[" << g.e_min << ", " << g.e_max << "] eV x " << g.n;
    return os.str();
  };
  auto describe_t = [](const DelayGrid& g) {
    std::ostringstream os;
    os << "[" << g.tau_min << ", " << g.tau_max << "] fs x " << g.n;
    return os.str();
  };
  if (!(scan.e_grid == s.e_grid)) {
    fail(ErrorCode::Data, "energy grid of the scan " + describe_e(scan.e_grid) + " does not match the scenario " +
                              describe_e(s.e_grid));
  }
  if (!(scan.tau_grid == s.tau_grid)) {
    fail(ErrorCode::Data, "delay grid of the scan " + describe_t(scan.tau_grid) + " does not match the scenario " +
                              describe_t(s.tau_grid));
  }
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

Interferogram simulate(const Scenario& s, std::optional<SignalMode> mode) {
  return synthesize_interferogram(s.channels, s.pulses, s.e_grid, s.tau_grid, mode.value_or(s.mode), s.threads);
}

DensityMatrix theory_matrix(const Scenario& s, int oversample) {
  if (oversample < 1) fail(ErrorCode::Config, "theory_matrix: oversample must be >= 1");
  EnergyGrid axis = reconstruction_axis(s);
  axis.n = oversample * (axis.n - 1) + 1;
  return theoretical_density_matrix(s.channels, s.pulses.xuv, axis);
}

PipelineResult reconstruct(const Scenario& s, const Interferogram& scan) {
  require_same_grids(s, scan);
  PipelineConfig cfg = s.pipeline;
  cfg.threads = s.threads;
  std::optional<DensityMatrix> reference;
  std::string reference_note;
  try {
    reference = theory_matrix(s);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Coverage) throw;
    reference_note = std::string("no fidelity: ") + e.what();
  }
  PipelineResult r = run_pipeline(scan, probe_geometry(s), cfg, reconstruction_axis(s),
                                  reference ? &*reference : nullptr, feature_hint(s));
  if (!reference_note.empty()) r.report.notes.push_back(reference_note);
  return r;
}

std::string report_to_json(const ReconstructionReport& r, const Scenario& s) {
  json j;
  j["scenario"] = s.name;
  j["fidelity"] = optional_number(r.fidelity);
  j["purity"] = r.purity;
  j["trace_error"] = r.trace_error;
  j["psd_defect"] = r.psd_defect;
  j["features"] = {{"destructive_interference_eps_ev", optional_number(r.fano_zero)},
                   {"lobe_center_ev", r.lobe_center},
                   {"band_lower_ev", r.band_lower},
                   {"band_upper_ev", r.band_upper}};
  j["coverage"] = {{"valid_eps_min_ev", r.valid_eps_min}, {"valid_eps_max_ev", r.valid_eps_max}};
  j["settings"] = {{"zeta", r.zeta},
                   {"sigma_eff_ev", optional_number(r.sigma_eff)},
                   {"lobe", r.lobe},
                   {"window", r.window},
                   {"correction", r.correction},
                   {"band_sigmas", s.pipeline.band_sigmas}};
  if (r.raw_purity) j["raw_purity"] = {{"re", r.raw_purity->real()}, {"im", r.raw_purity->imag()}};
  j["notes"] = r.notes;
  return j.dump(2) + "\n";
}

std::vector<SweepRow> run_sweep(const Scenario& base, const std::string& parameter, const std::vector<double>& values,
                                int threads) {
  if (values.empty()) fail(ErrorCode::Config, "sweep: empty parameter range");
  for (std::size_t i = 1; i < values.size(); ++i) {
    const bool up = values[1] > values[0];
    if ((up && !(values[i] > values[i - 1])) || (!up && !(values[i] < values[i - 1]))) {
      fail(ErrorCode::Config, "sweep: parameter values must be strictly monotone");
    }
  }
  const auto names = parameter_names();
  if (std::find(names.begin(), names.end(), parameter) == names.end()) {
    fail(ErrorCode::Config, "sweep: unknown parameter '" + parameter + "'");
  }
  const int n = static_cast<int>(values.size());
  const int outer = std::min(detail::resolve_threads(threads), n);
  std::vector<SweepRow> rows(n);
  detail::parallel_for(n, outer, [&](int i) {
    SweepRow& row = rows[i];
    row.parameter = values[i];
    try {
      Scenario s = base;
      set_parameter(s, parameter, values[i]);
      if (outer > 1) s.threads = 1;
      const Interferogram scan = simulate(s);
      const DensityMatrix reference = theory_matrix(s);
      PipelineConfig cfg = s.pipeline;
      cfg.threads = s.threads;
      const ProbeGeometry geo = probe_geometry(s);
      const EnergyGrid axis = reconstruction_axis(s);
      cfg.correction = true;
      const PipelineResult on = run_pipeline(scan, geo, cfg, axis, &reference);
      cfg.correction = false;
      const PipelineResult off = run_pipeline(scan, geo, cfg, axis, &reference);
      row.fidelity_corrected = *on.report.fidelity;
      row.fidelity_uncorrected = *off.report.fidelity;
      row.purity_corrected = on.report.purity;
      row.purity_uncorrected = off.report.purity;
      row.purity_theory = purity(theory_matrix(s, 4));
    } catch (const Error& e) {
      row.fidelity_corrected = row.fidelity_uncorrected = kNaN;
      row.purity_corrected = row.purity_uncorrected = row.purity_theory = kNaN;
      row.error = std::string(error_code_name(e.code())) + ": " + e.what();
    }
  });
  return rows;
}

std::string sweep_to_tsv(const std::vector<SweepRow>& rows, const std::string& parameter) {
  std::ostringstream os;
  os << parameter
     << "\tfidelity_corrected\tfidelity_uncorrected\tpurity_corrected\tpurity_uncorrected\tpurity_theory\tstatus\n";
  for (const auto& r : rows) {
    os << format_double(r.parameter);
    for (double v : {r.fidelity_corrected, r.fidelity_uncorrected, r.purity_corrected, r.purity_uncorrected,
                     r.purity_theory}) {
      os << '\t' << (std::isnan(v) ? std::string("nan") : format_double(v));
    }
    std::string status = r.error.empty() ? "ok" : "error " + r.error;
    for (char& c : status) {
      if (c == '\t' || c == '\n') c = ' ';
    }
    os << '\t' << status << '\n';
  }
  return os.str();
}

std::vector<OracleSample> oracle_check(const Scenario& s, int points) {
  if (points < 1) fail(ErrorCode::Config, "oracle: need at least one point");
  const auto& ch = s.channels.front();
  const auto& xuv = s.pulses.xuv;
  const auto& ir = s.pulses.ir_probe;
  const double centre = xuv.omega + ir.omega;
  const double sigma = std::hypot(xuv.sigma, ir.sigma);
  const double taus[] = {-10.0, 0.0, 10.0};
  std::vector<OracleSample> out;
  for (int i = 0; i < points; ++i) {
    double E = points == 1 ? centre : centre - 2.0 * sigma + 4.0 * sigma * i / (points - 1);
    E = nudge_off_poles(ch.structure, E, 1e-6);
    for (double tau : taus) {
      OracleSample o;
      o.energy = E;
      o.tau = tau;
      o.closed_form = amplitude_general_time(ch.structure, xuv, ir, E, tau);
      o.quadrature = oracle::amplitude(ch.structure, xuv, ir, E, tau);
      o.rel_error = std::abs(o.closed_form - o.quadrature) / std::abs(o.quadrature);
      out.push_back(o);
    }
  }
  return out;
}

std::string oracle_to_json(const std::vector<OracleSample>& samples) {
  json arr = json::array();
  double peak = 0.0, worst_abs = 0.0, worst_rel = 0.0;
  for (const auto& o : samples) {
    peak = std::max(peak, std::abs(o.quadrature));
    worst_abs = std::max(worst_abs, std::abs(o.closed_form - o.quadrature));
    worst_rel = std::max(worst_rel, o.rel_error);
    arr.push_back({{"energy_ev", o.energy},
                   {"tau_fs", o.tau},
                   {"closed_form", {o.closed_form.real(), o.closed_form.imag()}},
                   {"quadrature", {o.quadrature.real(), o.quadrature.imag()}},
                   {"rel_error", o.rel_error}});
  }
  json j;
  j["samples"] = arr;
  j["max_rel_error"] = worst_rel;
  j["max_error_over_peak"] = peak > 0.0 ? worst_abs / peak : 0.0;
  return j.dump(2) + "\n";
}

std::string metrics_to_json(const DensityMatrix& rho, const DensityMatrix* reference) {
  json j;
  j["n"] = rho.axis.n;
  j["trace"] = {{"re", rho.trace().real()}, {"im", rho.trace().imag()}};
  j["purity"] = purity(rho);
  j["psd_defect"] = psd_defect(rho);
  j["fidelity"] = reference ? json(fidelity(*reference, rho)) : json(nullptr);
  return j.dump(2) + "\n";
}

}  // namespace rktomo
