#include "rktomo/model.hpp"

#include <cmath>
#include <sstream>

#include "rktomo/error.hpp"

namespace rktomo {
namespace {

bool finite(double x) { return std::isfinite(x); }

std::string num(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

}  // namespace

void validate(const GaussianPulse& p, const char* name) {
  if (!finite(p.omega) || !finite(p.sigma) || !finite(p.amplitude) || !finite(p.phase)) {
    fail(ErrorCode::Domain, std::string(name) + ": non-finite pulse parameter");
  }
  if (!(p.sigma > 0.0)) fail(ErrorCode::Domain, std::string(name) + ": sigma must be > 0, got " + num(p.sigma));
  if (p.amplitude < 0.0) fail(ErrorCode::Domain, std::string(name) + ": amplitude must be >= 0");
}

void validate(const LevelStructure& s) {
  for (const auto& r : s.xuv_resonances) {
    if (!(r.gamma_a > 0.0)) fail(ErrorCode::Domain, "xuv resonance: gamma_a must be > 0");
    if (!finite(r.omega_ag) || !finite(r.q_ag) || !finite(r.beta)) {
      fail(ErrorCode::Domain, "xuv resonance: non-finite parameter");
    }
  }
  if (s.final_resonances.size() > 1) {
    fail(ErrorCode::Config, "at most one final-manifold resonance is supported");
  }
  for (const auto& b : s.final_resonances) {
    if (!(b.gamma_b > 0.0)) fail(ErrorCode::Domain, "final resonance: gamma_b must be > 0");
    if (b.q_bn.size() > s.bound_levels.size()) {
      fail(ErrorCode::Config, "final resonance: more q_bn entries than bound levels");
    }
  }
  for (const auto& n : s.bound_levels) {
    if (!finite(n.omega_ng) || !finite(n.dipole_ratio_n)) fail(ErrorCode::Domain, "bound level: non-finite parameter");
  }
  if (!finite(s.mu_continuum) || !finite(s.ionization_threshold)) {
    fail(ErrorCode::Domain, "level structure: non-finite parameter");
  }
}

void validate_channels(const std::vector<IonChannel>& channels) {
  if (channels.empty()) fail(ErrorCode::Config, "at least one ion channel is required");
  double total = 0.0;
  for (const auto& c : channels) {
    if (!(c.weight >= 0.0)) fail(ErrorCode::Config, "channel weight must be >= 0");
    validate(c.structure);
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) fail(ErrorCode::Config, "channel weights sum to " + num(total) + ", expected 1");
}

PulseScales pulse_scales(const GaussianPulse& xuv, const GaussianPulse& ir, double E,
                         std::optional<double> omega_ag) {
  if (!(xuv.sigma > 0.0) || !(ir.sigma > 0.0)) fail(ErrorCode::Domain, "pulse_scales: widths must be > 0");
  const double sx2 = xuv.sigma * xuv.sigma;
  const double si2 = ir.sigma * ir.sigma;
  PulseScales ps;
  ps.sigma_quad = std::sqrt(sx2 + si2);
  ps.sigma_t = ps.sigma_quad / (xuv.sigma * ir.sigma);
  ps.delta = xuv.omega + ir.omega - E;
  const double s2 = sx2 + si2;
  ps.omega_c = xuv.omega - (sx2 / s2) * ps.delta;
  ps.omega_F = (si2 / s2) * ps.delta;
  ps.delta_E = ps.omega_c - E;
  ps.tau_E = ps.sigma_t * ps.sigma_t * ps.delta_E;
  if (omega_ag) {
    ps.delta_a = ps.omega_c - *omega_ag;
    ps.tau_a = ps.sigma_t * ps.sigma_t * *ps.delta_a;
  }
  return ps;
}

void validate(const EnergyGrid& g) {
  if (g.n < 16) fail(ErrorCode::Config, "energy grid: count must be >= 16, got " + std::to_string(g.n));
  if (!finite(g.e_min) || !finite(g.e_max) || !(g.e_min < g.e_max)) {
    fail(ErrorCode::Config, "energy grid: require finite e_min < e_max");
  }
}

void validate(const DelayGrid& g) {
  if (g.n < 2) fail(ErrorCode::Config, "delay grid: count must be >= 2");
  if (!finite(g.tau_min) || !finite(g.tau_max) || !(g.tau_min < g.tau_max)) {
    fail(ErrorCode::Config, "delay grid: require finite tau_min < tau_max");
  }
}

DensityMatrix normalize_density_matrix(const DensityMatrix& rho) {
  const double tr = rho.trace().real();
  if (!(tr > 0.0) || !std::isfinite(tr)) {
    fail(ErrorCode::Degenerate, "density matrix trace is " + num(tr) + "; cannot normalize");
  }
  DensityMatrix out = rho;
  out.values /= tr;
  return out;
}

}  // namespace rktomo
