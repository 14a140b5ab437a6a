#include "rktomo/forward.hpp"

#include <cmath>
#include <sstream>

#include "parallel.hpp"
#include "rktomo/error.hpp"

namespace rktomo {
namespace {

constexpr Complex kI(0.0, 1.0);
constexpr double kPoleTolerance = 1e-9;
constexpr double kDefaultHalfStep = 1e-6;

double bare_eps(const FanoResonance& r, double E) { return (E - r.omega_ag) / r.gamma_a; }

Complex complex_pole(const FanoResonance& r) { return Complex(r.omega_ag, -r.gamma_a); }

// (beta - 1/eps_Ea)(q - i): weight of the resonance pole relative to the continuum.
Complex resonance_weight(const FanoResonance& r, double E) {
  return (r.beta - 1.0 / bare_eps(r, E)) * Complex(r.q_ag, -1.0);
}

// Common factor -pi mu A_x A_ir / (4 sigma_x sigma_ir) including the field phases.
Complex f0(const LevelStructure& s, const GaussianPulse& xuv, const GaussianPulse& ir) {
  const double mag = -M_PI * s.mu_continuum * xuv.amplitude * ir.amplitude / (4.0 * xuv.sigma * ir.sigma);
  return mag * std::exp(-kI * (xuv.phase + ir.phase));
}

// exp(phi) w(z_n) for a pole at omega_n (possibly complex), t in 1/eV.
Complex pole_term(const PulseScales& ps, double t, Complex omega_n) {
  const double s2 = ps.sigma_quad * ps.sigma_quad;
  const double st = ps.sigma_t;
  const Complex phi(-ps.delta * ps.delta / (2.0 * s2) - t * t / (2.0 * st * st), -ps.delta_E * t);
  const Complex z = (st / M_SQRT2) * (ps.omega_c - omega_n - kI * (t / (st * st)));
  return exp_times_faddeeva(phi, z);
}

// Factors contributed by a final-manifold resonance |b>. Without |b> every
// factor takes its limiting value so the general forms collapse to the
// single-manifold ones.
struct Dressing {
  Complex prefactor = 1.0;  // (eps_Eb + i)/(eps_Eb - i)
  Complex b_ba = 1.0;       // (eps_Eb + q_ba)/(eps_Eb + i)
  Complex d_ba = 0.0;       // (delta_ba (q_ab - i) - xi_ba)/(eps_Eb + i)
  Complex direct = 0.0;     // (mu_b/mu_E)/(eps_Eb + i)
  std::vector<Complex> b_bn;
};

Dressing dressing(const LevelStructure& s, double E) {
  Dressing d;
  d.b_bn.assign(s.bound_levels.size(), 1.0);
  if (s.final_resonances.empty()) return d;
  const auto& b = s.final_resonances.front();
  const double eps = (E - b.omega_bg) / b.gamma_b;
  const Complex denom(eps, 1.0);
  d.prefactor = denom / Complex(eps, -1.0);
  d.b_ba = (eps + b.q_ba) / denom;
  d.d_ba = (b.delta_ba * Complex(b.q_ab, -1.0) - b.xi_ba) / denom;
  d.direct = b.dipole_ratio_b / denom;
  for (std::size_t n = 0; n < d.b_bn.size(); ++n) {
    const double q = n < b.q_bn.size() ? b.q_bn[n] : 0.0;
    d.b_bn[n] = (eps + q) / denom;
  }
  return d;
}

Complex dressed_resonance_weight(const FanoResonance& r, double E, const Dressing& d) {
  return Complex(r.q_ag, -1.0) * (r.beta * d.b_ba - 1.0 / bare_eps(r, E) + d.d_ba);
}

void check_threshold(const LevelStructure& s, double E) {
  if (!(E > s.ionization_threshold)) {
    std::ostringstream os;
    os << "final energy " << E << " eV is not above the ionization threshold " << s.ionization_threshold;
    fail(ErrorCode::Domain, os.str());
  }
}

}  // namespace

double nudge_off_poles(const LevelStructure& structure, double E, double half_step) {
  for (const auto& r : structure.xuv_resonances) {
    if (std::abs(E - r.omega_ag) < kPoleTolerance) return E + half_step;
  }
  return E;
}

Complex amplitude_time(const LevelStructure& structure, const GaussianPulse& xuv, const GaussianPulse& ir,
                       double E, double tau) {
  validate(xuv, "xuv");
  validate(ir, "ir");
  check_threshold(structure, E);
  E = nudge_off_poles(structure, E, kDefaultHalfStep);
  const PulseScales ps = pulse_scales(xuv, ir, E);
  const double t = fs_to_natural(tau);
  Complex sum = pole_term(ps, t, E);
  for (const auto& r : structure.xuv_resonances) {
    sum += resonance_weight(r, E) * pole_term(ps, t, complex_pole(r));
  }
  return f0(structure, xuv, ir) * sum;
}

Complex amplitude_general_time(const LevelStructure& structure, const GaussianPulse& xuv,
                               const GaussianPulse& ir, double E, double tau) {
  validate(xuv, "xuv");
  validate(ir, "ir");
  validate(structure);
  check_threshold(structure, E);
  E = nudge_off_poles(structure, E, kDefaultHalfStep);
  const PulseScales ps = pulse_scales(xuv, ir, E);
  const double t = fs_to_natural(tau);
  const Dressing d = dressing(structure, E);

  Complex sum = pole_term(ps, t, E);
  for (const auto& r : structure.xuv_resonances) {
    sum += dressed_resonance_weight(r, E, d) * pole_term(ps, t, complex_pole(r));
  }
  if (d.direct != 0.0) {
    // Time-local path through |b>: Gaussian overlap of the two fields.
    const double s2 = ps.sigma_quad * ps.sigma_quad;
    const Complex phi(-ps.delta * ps.delta / (2.0 * s2) - t * t / (2.0 * ps.sigma_t * ps.sigma_t), -ps.delta_E * t);
    sum += std::sqrt(2.0 / M_PI) / ps.sigma_t * d.direct * std::exp(phi);
  }
  for (std::size_t n = 0; n < structure.bound_levels.size(); ++n) {
    const auto& lvl = structure.bound_levels[n];
    if (lvl.dipole_ratio_n == 0.0) continue;
    sum += d.b_bn[n] * lvl.dipole_ratio_n * pole_term(ps, t, lvl.omega_ng);
  }
  return f0(structure, xuv, ir) * d.prefactor * sum;
}

namespace {

Complex narrowband_prefactor(const LevelStructure& s, const GaussianPulse& xuv, const GaussianPulse& ref, double E) {
  const double delta_ref = xuv.omega + ref.omega - E;
  const double mag = std::sqrt(2.0 * M_PI) * xuv.amplitude * ref.amplitude / (4.0 * xuv.sigma * ref.omega) *
                     s.mu_continuum * gaussian(delta_ref, xuv.sigma);
  return kI * mag * std::exp(-kI * (xuv.phase + ref.phase));
}

void check_narrowband(const GaussianPulse& xuv, const GaussianPulse& ref, const LevelStructure& s, double E) {
  validate(xuv, "xuv");
  validate(ref, "ir_ref");
  check_threshold(s, E);
  if (!(E > ref.omega)) {
    std::ostringstream os;
    os << "narrowband limit requires E > omega_ref (" << E << " <= " << ref.omega << ")";
    fail(ErrorCode::Domain, os.str());
  }
  if (ref.sigma > 1e-2 * xuv.sigma) {
    std::ostringstream os;
    os << "narrowband limit used with sigma_ref/sigma_xuv = " << ref.sigma / xuv.sigma << " > 1e-2";
    warn(os.str());
  }
}

}  // namespace

Complex amplitude_narrowband_fixed(const LevelStructure& structure, const GaussianPulse& xuv,
                                   const GaussianPulse& ir_ref, double E) {
  check_narrowband(xuv, ir_ref, structure, E);
  validate(structure);
  E = nudge_off_poles(structure, E, kDefaultHalfStep);
  const double w_ref = ir_ref.omega;
  const Dressing d = dressing(structure, E);
  Complex bracket = 1.0;
  for (const auto& r : structure.xuv_resonances) {
    bracket -= w_ref * dressed_resonance_weight(r, E, d) / (E - w_ref - complex_pole(r));
  }
  bracket += kI * w_ref * d.direct;
  for (std::size_t n = 0; n < structure.bound_levels.size(); ++n) {
    const auto& lvl = structure.bound_levels[n];
    bracket -= d.b_bn[n] * lvl.dipole_ratio_n * w_ref / (E - w_ref - lvl.omega_ng);
  }
  return narrowband_prefactor(structure, xuv, ir_ref, E) * d.prefactor * bracket;
}

Complex amplitude_narrowband_fano(const LevelStructure& structure, const GaussianPulse& xuv,
                                  const GaussianPulse& ir_ref, double E) {
  check_narrowband(xuv, ir_ref, structure, E);
  Complex profile = 1.0;
  for (const auto& r : structure.xuv_resonances) {
    const double eps = (E - ir_ref.omega - r.omega_ag) / r.gamma_a;
    profile += Complex(r.q_ag, -1.0) / Complex(eps, 1.0);
  }
  return narrowband_prefactor(structure, xuv, ir_ref, E) * profile;
}

double modulation_plus(const GaussianPulse& xuv, const GaussianPulse& ir_probe, double E, double omega_tau) {
  const PulseScales ps = pulse_scales(xuv, ir_probe, E);
  const double s2 = ps.sigma_quad * ps.sigma_quad;
  const double center = ir_probe.omega - ir_probe.sigma * ir_probe.sigma / s2 * ps.delta;
  const double u = ps.sigma_t * (omega_tau - center);
  return std::exp(-ps.delta * ps.delta / (2.0 * s2) - 0.5 * u * u) / omega_tau;
}

Complex amplitude_fourier_analytic(const LevelStructure& structure, const GaussianPulse& xuv,
                                   const GaussianPulse& ir_probe, double E, double omega_tau) {
  validate(xuv, "xuv");
  validate(ir_probe, "ir_probe");
  validate(structure);
  check_threshold(structure, E);
  if (omega_tau == 0.0) fail(ErrorCode::Domain, "amplitude_fourier_analytic: omega_tau = 0");
  E = nudge_off_poles(structure, E, kDefaultHalfStep);
  const Dressing d = dressing(structure, E);
  Complex bracket = 1.0 / omega_tau;
  for (const auto& r : structure.xuv_resonances) {
    bracket += dressed_resonance_weight(r, E, d) / (omega_tau - (E - complex_pole(r)));
  }
  bracket += kI * d.direct;
  for (std::size_t n = 0; n < structure.bound_levels.size(); ++n) {
    const auto& lvl = structure.bound_levels[n];
    bracket += d.b_bn[n] * lvl.dipole_ratio_n / (omega_tau - (E - lvl.omega_ng));
  }
  // M+ carries the 1/omega_tau of the continuum pole; strip it back off.
  const double envelope = modulation_plus(xuv, ir_probe, E, omega_tau) * omega_tau;
  return -2.0 * kI * f0(structure, xuv, ir_probe) * envelope * d.prefactor * bracket;
}

FanoDeviation fano_deviation(const FanoResonance& res, double E, double omega_ref, double omega_tau) {
  FanoDeviation f;
  const double eps = (E - res.omega_ag) / res.gamma_a;
  f.xi = (omega_ref / res.gamma_a) * (1.0 / eps - res.beta);
  const Complex q_minus_i(res.q_ag, -1.0);
  f.delta_ref = q_minus_i * (f.xi - 1.0);
  f.delta_probe = q_minus_i * (f.xi * omega_tau / omega_ref - 1.0);
  f.q_ref = res.q_ag + f.delta_ref;
  f.q_probe = res.q_ag + f.delta_probe;
  f.q_bar = 0.5 * (f.q_ref + f.q_probe);
  return f;
}

Interferogram synthesize_interferogram(const std::vector<IonChannel>& channels, const PulseSet& pulses,
                                       const EnergyGrid& e_grid, const DelayGrid& tau_grid, SignalMode mode,
                                       int threads) {
  validate(e_grid);
  validate(tau_grid);
  validate_channels(channels);
  validate(pulses.xuv, "xuv");
  validate(pulses.ir_ref, "ir_ref");
  validate(pulses.ir_probe, "ir_probe");
  if (pulses.ir_probe.amplitude == 0.0) warn("probe amplitude is zero; interference terms vanish");

  Interferogram out;
  out.e_grid = e_grid;
  out.tau_grid = tau_grid;
  out.mode = mode;
  out.values = Eigen::MatrixXd::Zero(tau_grid.n, e_grid.n);
  const double half_step = 0.5 * e_grid.step();

  detail::parallel_for(e_grid.n, threads, [&](int col) {
    for (const auto& ch : channels) {
      if (ch.weight == 0.0) continue;
      const auto& s = ch.structure;
      const double E = nudge_off_poles(s, e_grid.at(col) + s.ionization_threshold + ch.threshold_shift, half_step);
      const Complex a_ref = amplitude_general_time(s, pulses.xuv, pulses.ir_ref, E, 0.0);
      for (int row = 0; row < tau_grid.n; ++row) {
        const Complex a_probe = amplitude_general_time(s, pulses.xuv, pulses.ir_probe, E, tau_grid.at(row));
        const double v = mode == SignalMode::Full ? std::norm(a_probe + a_ref)
                                                  : 2.0 * (a_probe * std::conj(a_ref)).real();
        out.values(row, col) += ch.weight * v;
      }
    }
  });
  return out;
}

DensityMatrix theoretical_density_matrix(const std::vector<IonChannel>& channels, const GaussianPulse& xuv,
                                         const EnergyGrid& axis) {
  validate(axis);
  validate(xuv, "xuv");
  validate_channels(channels);
  const int n = axis.n;
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(n, n);
  Eigen::VectorXcd psi(n);
  for (const auto& ch : channels) {
    const double offset = ch.structure.ionization_threshold + ch.threshold_shift;
    const double center = xuv.omega - offset;
    if (axis.e_min > center - 3.0 * xuv.sigma || axis.e_max < center + 3.0 * xuv.sigma) {
      std::ostringstream os;
      os << "axis [" << axis.e_min << ", " << axis.e_max << "] does not cover +-3 sigma around " << center;
      fail(ErrorCode::Coverage, os.str());
    }
    if (ch.weight == 0.0) continue;
    for (int i = 0; i < n; ++i) {
      const double e = axis.at(i) + offset;
      Complex profile = 1.0;
      for (const auto& r : ch.structure.xuv_resonances) {
        profile += Complex(r.q_ag, -1.0) / Complex((e - r.omega_ag) / r.gamma_a, 1.0);
      }
      psi(i) = ch.structure.mu_continuum * gaussian(e - xuv.omega, xuv.sigma) * profile;
    }
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i <= j; ++i) {
        rho(i, j) += ch.weight * psi(i) * std::conj(psi(j));
      }
    }
  }
  for (int j = 0; j < n; ++j) {
    for (int i = j + 1; i < n; ++i) rho(i, j) = std::conj(rho(j, i));
    rho(j, j) = rho(j, j).real();
  }
  DensityMatrix out;
  out.axis = axis;
  out.values = std::move(rho);
  out.hermitian = true;
  return normalize_density_matrix(out);
}

}  // namespace rktomo
