#include "rktomo/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "rktomo/error.hpp"

namespace rktomo::oracle {
namespace {

constexpr Complex kI(0.0, 1.0);

struct Span {
  double start;
  double stop;
  double outer_start;
};

// Integration limits in natural time: the XUV source switches on at
// -span/sigma_x, the IR envelope is negligible outside tau +- span/sigma_ir.
Span time_span(const GaussianPulse& xuv, const GaussianPulse& ir, double t_tau, double span) {
  const double tx = span / xuv.sigma;
  const double tr = span / ir.sigma;
  return {-tx, t_tau + tr, t_tau - tr};
}

Complex integrate_pole(const GaussianPulse& xuv, const GaussianPulse& ir, double E, double t_tau, Complex omega_n,
                       double span, int steps) {
  const Span sp = time_span(xuv, ir, t_tau, span);
  if (sp.stop <= sp.start) return 0.0;
  const double h = (sp.stop - sp.start) / steps;
  const double tx = span / xuv.sigma;
  const double delta = xuv.omega + ir.omega - E;
  const Complex rot = std::exp(-kI * (omega_n - xuv.omega) * h);
  auto source = [&](double t) { return std::abs(t) > tx ? 0.0 : std::exp(-0.5 * xuv.sigma * xuv.sigma * t * t); };

  Complex u = 0.0;
  double s_prev = source(sp.start);
  Complex acc = 0.0;
  for (int k = 1; k <= steps; ++k) {
    const double t = sp.start + k * h;
    const double s = source(t);
    u = rot * (u + 0.5 * h * s_prev) + 0.5 * h * s;
    s_prev = s;
    if (t < sp.outer_start) continue;
    const double dt = t - t_tau;
    const double env = std::exp(-0.5 * ir.sigma * ir.sigma * dt * dt);
    acc += env * std::polar(1.0, -delta * t) * u;
  }
  return acc * h;
}

Complex integrate_overlap(const GaussianPulse& xuv, const GaussianPulse& ir, double E, double t_tau, double span,
                          int steps) {
  const double tx = span / xuv.sigma;
  const double tr = span / ir.sigma;
  const double a = std::max(-tx, t_tau - tr);
  const double b = std::min(tx, t_tau + tr);
  if (b <= a) return 0.0;
  const double h = (b - a) / steps;
  const double delta = xuv.omega + ir.omega - E;
  Complex acc = 0.0;
  for (int k = 0; k <= steps; ++k) {
    const double t = a + k * h;
    const double dt = t - t_tau;
    const double w = (k == 0 || k == steps) ? 0.5 : 1.0;
    const double env = std::exp(-0.5 * (xuv.sigma * xuv.sigma * t * t + ir.sigma * ir.sigma * dt * dt));
    acc += w * env * std::polar(1.0, -delta * t);
  }
  return acc * h;
}

int step_count(const GaussianPulse& xuv, const GaussianPulse& ir, double t_tau, const QuadratureOptions& opt) {
  if (!(opt.step > 0.0) || !(opt.span > 0.0)) fail(ErrorCode::Config, "oracle: step and span must be > 0");
  const Span sp = time_span(xuv, ir, t_tau, opt.span);
  return std::max(16, static_cast<int>(std::ceil((sp.stop - sp.start) / opt.step)));
}

// Field prefactors: each field carries A/2 and the IR carrier is referenced to its own peak.
Complex field_factor(const GaussianPulse& xuv, const GaussianPulse& ir, double t_tau) {
  return 0.25 * xuv.amplitude * ir.amplitude * std::exp(kI * (ir.omega * t_tau - xuv.phase - ir.phase));
}

}  // namespace

Complex pole_amplitude(const GaussianPulse& xuv, const GaussianPulse& ir, double E, double tau, Complex omega_n,
                       double mu, const QuadratureOptions& opt) {
  const double t_tau = fs_to_natural(tau);
  const int n = step_count(xuv, ir, t_tau, opt);
  Complex value = integrate_pole(xuv, ir, E, t_tau, omega_n, opt.span, n);
  if (opt.richardson) {
    const Complex fine = integrate_pole(xuv, ir, E, t_tau, omega_n, opt.span, 2 * n);
    value = (4.0 * fine - value) / 3.0;
  }
  return -mu * field_factor(xuv, ir, t_tau) * value;
}

Complex field_overlap(const GaussianPulse& xuv, const GaussianPulse& ir, double E, double tau,
                      const QuadratureOptions& opt) {
  const double t_tau = fs_to_natural(tau);
  const int n = step_count(xuv, ir, t_tau, opt);
  return field_factor(xuv, ir, t_tau) * integrate_overlap(xuv, ir, E, t_tau, opt.span, n);
}

Complex amplitude(const LevelStructure& s, const GaussianPulse& xuv, const GaussianPulse& ir, double E,
                  double tau, const QuadratureOptions& opt) {
  const double mu = s.mu_continuum;
  Complex pref = 1.0, b_ba = 1.0, d_ba = 0.0, direct = 0.0;
  double eps_b = 0.0;
  bool has_b = !s.final_resonances.empty();
  if (has_b) {
    const auto& b = s.final_resonances.front();
    eps_b = (E - b.omega_bg) / b.gamma_b;
    pref = Complex(eps_b, 1.0) / Complex(eps_b, -1.0);
    b_ba = (eps_b + b.q_ba) / Complex(eps_b, 1.0);
    d_ba = (b.delta_ba * Complex(b.q_ab, -1.0) - b.xi_ba) / Complex(eps_b, 1.0);
    direct = b.dipole_ratio_b / Complex(eps_b, 1.0);
  }

  Complex sum = pole_amplitude(xuv, ir, E, tau, E, mu, opt);
  for (const auto& r : s.xuv_resonances) {
    const double eps_a = (E - r.omega_ag) / r.gamma_a;
    const Complex c = Complex(r.q_ag, -1.0) * (r.beta * b_ba - 1.0 / eps_a + d_ba);
    sum += c * pole_amplitude(xuv, ir, E, tau, Complex(r.omega_ag, -r.gamma_a), mu, opt);
  }
  if (direct != 0.0) sum += -mu * direct * field_overlap(xuv, ir, E, tau, opt);
  for (std::size_t n = 0; n < s.bound_levels.size(); ++n) {
    const auto& lvl = s.bound_levels[n];
    Complex b_bn = 1.0;
    if (has_b) {
      const auto& b = s.final_resonances.front();
      const double q = n < b.q_bn.size() ? b.q_bn[n] : 0.0;
      b_bn = (eps_b + q) / Complex(eps_b, 1.0);
    }
    sum += b_bn * lvl.dipole_ratio_n * pole_amplitude(xuv, ir, E, tau, lvl.omega_ng, mu, opt);
  }
  return pref * sum;
}

}  // namespace rktomo::oracle
