#include "rktomo/reconstruct.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>
#include <sstream>

#include "parallel.hpp"
#include "rktomo/error.hpp"
#include "rktomo/forward.hpp"

namespace rktomo {
namespace {

// FFTW planning is not thread-safe; execution on distinct buffers is.
std::mutex g_fftw_planner_mutex;

std::vector<double> window_weights(const DelayGrid& g, const WindowSpec& spec, SignalMode mode) {
  std::vector<double> w(g.n, 1.0);
  WindowKind kind = spec.kind;
  if (kind == WindowKind::Auto) kind = mode == SignalMode::Full ? WindowKind::Tukey : WindowKind::None;
  if (kind == WindowKind::Tukey) {
    const double a = spec.alpha;
    for (int j = 0; j < g.n; ++j) {
      const double x = static_cast<double>(j) / (g.n - 1);
      if (a > 0.0 && x < 0.5 * a) {
        w[j] = 0.5 * (1.0 - std::cos(2.0 * M_PI * x / a));
      } else if (a > 0.0 && x > 1.0 - 0.5 * a) {
        w[j] = 0.5 * (1.0 - std::cos(2.0 * M_PI * (1.0 - x) / a));
      }
    }
  } else if (kind == WindowKind::Gaussian) {
    for (int j = 0; j < g.n; ++j) {
      const double u = g.at(j) / spec.width_fs;
      w[j] = std::exp(-0.5 * u * u);
    }
  }
  return w;
}

std::string fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

double photon_energy(const FourierMap& map, const ProbeGeometry& geo, int col) {
  return map.e_grid.at(col) + geo.energy_offset;
}

double signed_omega(Lobe lobe, double omega) { return lobe == Lobe::Positive ? omega : -omega; }

}  // namespace

const char* window_kind_name(WindowKind k) {
  switch (k) {
    case WindowKind::Auto: return "auto";
    case WindowKind::None: return "none";
    case WindowKind::Tukey: return "tukey";
    case WindowKind::Gaussian: return "gaussian";
  }
  return "unknown";
}

const char* lobe_name(Lobe l) { return l == Lobe::Positive ? "positive" : "negative"; }

void validate(const PipelineConfig& cfg, const GaussianPulse& xuv) {
  if (!(cfg.zeta > 0.0)) fail(ErrorCode::Config, "pipeline: zeta must be > 0");
  if (cfg.sigma_eff) {
    if (!(*cfg.sigma_eff > 0.0)) fail(ErrorCode::Config, "pipeline: sigma_eff must be > 0");
    if (*cfg.sigma_eff > xuv.sigma) {
      fail(ErrorCode::Config, "pipeline: sigma_eff " + fmt(*cfg.sigma_eff) + " exceeds sigma_xuv " + fmt(xuv.sigma));
    }
  }
  if (cfg.window.kind == WindowKind::Tukey && !(cfg.window.alpha >= 0.0 && cfg.window.alpha <= 1.0)) {
    fail(ErrorCode::Config, "pipeline: Tukey alpha must lie in [0, 1]");
  }
  if (cfg.window.kind == WindowKind::Gaussian && !(cfg.window.width_fs > 0.0)) {
    fail(ErrorCode::Config, "pipeline: Gaussian window width must be > 0");
  }
  if (!(cfg.band_sigmas > 0.0)) fail(ErrorCode::Config, "pipeline: band half-width must be > 0");
}

FourierMap fourier_transform_scan(const Interferogram& s, const PipelineConfig& cfg) {
  validate(s.e_grid);
  validate(s.tau_grid);
  const int n = s.tau_grid.n;
  const int cols = s.e_grid.n;
  if (s.values.rows() != n || s.values.cols() != cols) {
    fail(ErrorCode::Data, "interferogram values do not match its grids");
  }
  const double dtau = s.tau_grid.step();
  if (!(dtau > 0.0) || !std::isfinite(dtau)) fail(ErrorCode::Config, "delay grid is not uniform");
  const auto w = window_weights(s.tau_grid, cfg.window, s.mode);

  FourierMap out;
  out.e_grid = s.e_grid;
  out.mode = s.mode;
  const int half = n / 2;
  out.omega_tau = {-half * 2.0 * M_PI * kHbarEvFs / (n * dtau), 2.0 * M_PI * kHbarEvFs / (n * dtau), n};
  out.values.resize(n, cols);

  auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * static_cast<std::size_t>(n) * cols));
  if (!buf) fail(ErrorCode::Internal, "fftw_malloc failed");
  fftw_plan plan;
  {
    std::lock_guard lock(g_fftw_planner_mutex);
    int len[1] = {n};
    plan = fftw_plan_many_dft(1, len, cols, buf, nullptr, 1, n, buf, nullptr, 1, n, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  for (int c = 0; c < cols; ++c) {
    for (int j = 0; j < n; ++j) {
      buf[static_cast<std::size_t>(c) * n + j][0] = s.values(j, c) * w[j];
      buf[static_cast<std::size_t>(c) * n + j][1] = 0.0;
    }
  }
  fftw_execute(plan);
  // Shift to a centered axis and restore the phase of the first delay sample.
  const double t0 = s.tau_grid.tau_min / kHbarEvFs;
  for (int k = 0; k < n; ++k) {
    const int m = ((k - half) % n + n) % n;
    const Complex phase = std::polar(dtau, -out.omega_tau.at(k) * t0);
    for (int c = 0; c < cols; ++c) {
      const auto& v = buf[static_cast<std::size_t>(c) * n + m];
      out.values(k, c) = Complex(v[0], v[1]) * phase;
    }
  }
  {
    std::lock_guard lock(g_fftw_planner_mutex);
    fftw_destroy_plan(plan);
  }
  fftw_free(buf);
  return out;
}

LobeBand lobe_band(const FourierMap& map, const ProbeGeometry& geo, const PipelineConfig& cfg) {
  const auto& xuv = geo.pulses.xuv;
  const auto& probe = geo.pulses.ir_probe;
  LobeBand band;
  const int cols = map.e_grid.n;
  band.lower.resize(cols);
  band.upper.resize(cols);
  band.center.resize(cols);
  const double nyquist = std::max(std::abs(map.omega_tau.at(0)), std::abs(map.omega_tau.at(map.omega_tau.n - 1)));
  for (int c = 0; c < cols; ++c) {
    const double E = photon_energy(map, geo, c);
    const PulseScales ps = pulse_scales(xuv, probe, E);
    const double center = probe.omega - probe.sigma * probe.sigma / (ps.sigma_quad * ps.sigma_quad) * ps.delta;
    const double half = cfg.band_sigmas / ps.sigma_t;
    double lo = std::max(center - half, 0.0);
    double hi = center + half;
    const double delta_ref = xuv.omega + geo.pulses.ir_ref.omega - E;
    if (hi > nyquist && std::abs(delta_ref) <= 2.0 * xuv.sigma) {
      std::ostringstream os;
      os << "lobe band reaches " << hi << " eV but the delay sampling only resolves +-" << nyquist
         << " eV; use a delay step below " << M_PI * kHbarEvFs / hi << " fs";
      fail(ErrorCode::Config, os.str());
    }
    hi = std::min(hi, nyquist);
    if (cfg.lobe == Lobe::Positive) {
      band.lower[c] = lo;
      band.upper[c] = hi;
      band.center[c] = center;
    } else {
      band.lower[c] = -hi;
      band.upper[c] = -lo;
      band.center[c] = -center;
    }
  }
  return band;
}

FourierMap filter_lobe(const FourierMap& map, const ProbeGeometry& geo, const PipelineConfig& cfg) {
  const LobeBand band = lobe_band(map, geo, cfg);
  FourierMap out = map;
  for (int c = 0; c < map.e_grid.n; ++c) {
    for (int k = 0; k < map.omega_tau.n; ++k) {
      const double w = map.omega_tau.at(k);
      // Strict inequality at zero keeps the delay-independent bin out of both lobes.
      const bool inside = w >= band.lower[c] && w <= band.upper[c] && w != 0.0;
      if (!inside) out.values(k, c) = 0.0;
    }
  }
  return out;
}

FourierMap correct_probe_modulation(const FourierMap& map, const ProbeGeometry& geo, const PipelineConfig& cfg) {
  const auto& xuv = geo.pulses.xuv;
  const auto& probe = geo.pulses.ir_probe;
  const double target_sigma = cfg.sigma_eff.value_or(xuv.sigma);
  FourierMap out = map;
  detail::parallel_for(map.e_grid.n, cfg.threads, [&](int c) {
    const double E = photon_energy(map, geo, c);
    double column_weight = 1.0;
    if (cfg.sigma_eff) {
      const double delta_ref = xuv.omega + geo.pulses.ir_ref.omega - E;
      column_weight = gaussian(delta_ref, *cfg.sigma_eff) / (gaussian(delta_ref, xuv.sigma) + cfg.zeta);
    }
    for (int k = 0; k < map.omega_tau.n; ++k) {
      const Complex v = map.values(k, c);
      if (v == 0.0) continue;
      const double w = signed_omega(cfg.lobe, map.omega_tau.at(k));
      const double m = modulation_plus(xuv, probe, E, w);
      const double delta_w = w + xuv.omega - E;
      const double corr = gaussian(delta_w, target_sigma) / (std::abs(m) + cfg.zeta) * (m < 0.0 ? -1.0 : 1.0);
      out.values(k, c) = v * corr * column_weight;
    }
  });
  return out;
}

DensityMatrix relabel_axes(const FourierMap& map, double omega_ref, const EnergyGrid& target, Lobe lobe,
                           Coverage* coverage) {
  validate(target);
  const auto& eg = map.e_grid;
  const auto& ax = map.omega_tau;
  const int n = target.n;

  // Reachable ranges: eps1 from the measured columns, eps2 from the nonzero band.
  double e2_lo = INFINITY, e2_hi = -INFINITY;
  for (int c = 0; c < eg.n; ++c) {
    for (int k = 0; k < ax.n; ++k) {
      if (map.values(k, c) == 0.0) continue;
      const double e2 = eg.at(c) - signed_omega(lobe, ax.at(k));
      e2_lo = std::min(e2_lo, e2);
      e2_hi = std::max(e2_hi, e2);
    }
  }
  const double e1_lo = std::max(target.e_min, eg.e_min - omega_ref);
  const double e1_hi = std::min(target.e_max, eg.e_max - omega_ref);
  const bool e1_ok = e1_lo <= e1_hi;
  const bool e2_ok = e2_lo <= e2_hi && e2_lo <= target.e_max && e2_hi >= target.e_min;
  if (!e1_ok || !e2_ok) {
    std::ostringstream os;
    os << "target axis [" << target.e_min << ", " << target.e_max << "] eV is not covered by the data: ";
    if (e2_lo <= e2_hi) {
      os << "reachable eps2 range is [" << e2_lo << ", " << e2_hi << "] eV";
    } else {
      os << "the filtered map is empty";
    }
    os << ", eps1 range is [" << eg.e_min - omega_ref << ", " << eg.e_max - omega_ref << "] eV";
    fail(ErrorCode::Coverage, os.str());
  }
  if (coverage) {
    coverage->eps1_min = e1_lo;
    coverage->eps1_max = e1_hi;
    coverage->eps2_min = std::max(e2_lo, target.e_min);
    coverage->eps2_max = std::min(e2_hi, target.e_max);
  }

  DensityMatrix out;
  out.axis = target;
  out.values = Eigen::MatrixXcd::Zero(n, n);
  const double de = eg.step();

  auto sample = [&](int c, double e2) -> Complex {
    const double w = signed_omega(lobe, eg.at(c) - e2);
    const double y = (w - ax.start) / ax.step;
    if (y < 0.0 || y > ax.n - 1) return 0.0;
    const int k0 = std::min(static_cast<int>(std::floor(y)), ax.n - 2);
    const double f = y - k0;
    const Complex v = (1.0 - f) * map.values(k0, c) + f * map.values(k0 + 1, c);
    return lobe == Lobe::Positive ? v : std::conj(v);
  };

  for (int j = 0; j < n; ++j) {
    const double x = (target.at(j) + omega_ref - eg.e_min) / de;
    if (x < -1e-9 || x > eg.n - 1 + 1e-9) continue;
    int c0 = static_cast<int>(std::floor(x + 1e-9));
    double fx = x - c0;
    if (std::abs(fx) < 1e-9) fx = 0.0;
    if (c0 >= eg.n - 1) {
      c0 = eg.n - 1;
      fx = 0.0;
    }
    for (int i = 0; i < n; ++i) {
      const double e2 = target.at(i);
      Complex v = sample(c0, e2);
      if (fx > 0.0) v = (1.0 - fx) * v + fx * sample(c0 + 1, e2);
      out.values(i, j) = v;
    }
  }
  return out;
}

DensityMatrix hermitize(const DensityMatrix& raw) {
  if (raw.values.rows() != raw.values.cols()) fail(ErrorCode::Contract, "hermitize: matrix is not square");
  DensityMatrix h;
  h.axis = raw.axis;
  h.values = 0.5 * (raw.values + raw.values.adjoint());
  for (int i = 0; i < h.values.rows(); ++i) {
    for (int j = i + 1; j < h.values.cols(); ++j) h.values(j, i) = std::conj(h.values(i, j));
    h.values(i, i) = h.values(i, i).real();
  }
  h.hermitian = true;
  return normalize_density_matrix(h);
}

EnergyGrid default_target_axis(const EnergyGrid& e_grid, double omega_ref) {
  return {e_grid.e_min - omega_ref, e_grid.e_max - omega_ref, e_grid.n};
}

PipelineResult run_pipeline(const Interferogram& s, const ProbeGeometry& geo, const PipelineConfig& cfg,
                            const std::optional<EnergyGrid>& target_axis, const DensityMatrix* reference,
                            const std::optional<FeatureHint>& feature) {
  validate(cfg, geo.pulses.xuv);
  const double omega_ref = geo.pulses.ir_ref.omega;
  const EnergyGrid target = target_axis.value_or(default_target_axis(s.e_grid, omega_ref));

  FourierMap transformed = fourier_transform_scan(s, cfg);
  FourierMap filtered = filter_lobe(transformed, geo, cfg);
  FourierMap corrected = cfg.correction ? correct_probe_modulation(filtered, geo, cfg) : filtered;
  Coverage cov;
  DensityMatrix raw = relabel_axes(corrected, omega_ref, target, cfg.lobe, &cov);
  DensityMatrix rho = hermitize(raw);

  PipelineResult result;
  ReconstructionReport& rep = result.report;
  rep.purity = purity(rho);
  rep.trace_error = std::abs(rho.trace() - 1.0);
  rep.psd_defect = psd_defect(rho);
  if (reference) rep.fidelity = fidelity(*reference, rho);
  if (cfg.diagnostic_raw_metrics) {
    const Complex tr = raw.trace();
    DensityMatrix scaled = raw;
    scaled.values /= tr;
    rep.raw_purity = raw_purity(scaled);
  }

  // Band geometry at the column closest to the XUV + reference peak.
  const double peak_ef = geo.pulses.xuv.omega + omega_ref - geo.energy_offset;
  int peak_col = static_cast<int>(std::lround((peak_ef - s.e_grid.e_min) / s.e_grid.step()));
  peak_col = std::clamp(peak_col, 0, s.e_grid.n - 1);
  const LobeBand band = lobe_band(transformed, geo, cfg);
  rep.lobe_center = band.center[peak_col];
  rep.band_lower = band.lower[peak_col];
  rep.band_upper = band.upper[peak_col];
  rep.valid_eps_min = std::max(cov.eps1_min, cov.eps2_min);
  rep.valid_eps_max = std::min(cov.eps1_max, cov.eps2_max);
  rep.zeta = cfg.zeta;
  rep.sigma_eff = cfg.sigma_eff;
  rep.lobe = lobe_name(cfg.lobe);
  WindowKind wk = cfg.window.kind;
  if (wk == WindowKind::Auto) wk = s.mode == SignalMode::Full ? WindowKind::Tukey : WindowKind::None;
  rep.window = window_kind_name(wk);
  rep.correction = cfg.correction;

  if (feature) {
    const auto& r = feature->resonance;
    try {
      rep.fano_zero = locate_fano_zero(rho, r.q_ag, r.omega_ag - feature->energy_offset, r.gamma_a);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NotFound) throw;
      rep.notes.push_back(std::string("destructive interference not located: ") + e.what());
    }
  }

  if (cfg.keep_full_map_artifacts) {
    result.artifacts = PipelineArtifacts{std::move(transformed), std::move(filtered), std::move(corrected),
                                         std::move(raw)};
  }
  result.rho = std::move(rho);
  return result;
}

}  // namespace rktomo
