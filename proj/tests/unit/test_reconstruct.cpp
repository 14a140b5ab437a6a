#include <cmath>
#include <random>

#include "doctest.h"
#include "rktomo/forward.hpp"
#include "rktomo/metrics.hpp"
#include "rktomo/reconstruct.hpp"
#include "rktomo/workflow.hpp"
#include "test_support.hpp"

using namespace rktomo;
using rktomo::test::he_scenario;

namespace {

// Second moment of |S|^2 along omega_tau in one column.
double omega_width(const FourierMap& m, int col) {
  double w0 = 0.0, w1 = 0.0, w2 = 0.0;
  for (int k = 0; k < m.omega_tau.n; ++k) {
    const double p = std::norm(m.values(k, col));
    const double w = m.omega_tau.at(k);
    w0 += p;
    w1 += p * w;
    w2 += p * w * w;
  }
  const double mean = w1 / w0;
  return std::sqrt(w2 / w0 - mean * mean);
}

double frob(const Eigen::MatrixXcd& m) { return m.norm(); }

int nearest_col(const EnergyGrid& g, double e) {
  return static_cast<int>(std::lround((e - g.e_min) / g.step()));
}

PulseSet he_pulses() { return he_scenario().pulses; }

}  // namespace

TEST_SUITE("reconstruct") {

TEST_CASE("cosine column transforms to two equal peaks") {
  const int n = 256;
  Interferogram s;
  s.e_grid = {0.0, 1.0, 16};
  s.tau_grid = {-200.0, 200.0, n};
  const double dtau = s.tau_grid.step();
  const double w0 = 20 * 2.0 * M_PI * kHbarEvFs / (n * dtau);
  s.values.resize(n, 16);
  for (int j = 0; j < n; ++j) s.values.row(j).setConstant(std::cos(w0 * s.tau_grid.at(j) / kHbarEvFs));
  const auto m = fourier_transform_scan(s, {});
  const int kp = n / 2 + 20, km = n / 2 - 20;
  CHECK(m.omega_tau.at(kp) == doctest::Approx(w0).epsilon(1e-12));
  CHECK(std::abs(m.values(kp, 3)) / std::abs(m.values(km, 3)) == doctest::Approx(1.0).epsilon(1e-6));
  Eigen::Index arg;
  m.values.col(3).cwiseAbs().maxCoeff(&arg);
  CHECK((arg == kp || arg == km));
  CHECK(std::abs(m.values(kp, 3)) == doctest::Approx(0.5 * n * dtau).epsilon(1e-9));
}

TEST_CASE("all-zero interferogram gives an all-zero map") {
  Interferogram s;
  s.e_grid = {0.0, 1.0, 16};
  s.tau_grid = {-10.0, 10.0, 64};
  s.values = Eigen::MatrixXd::Zero(64, 16);
  CHECK(fourier_transform_scan(s, {}).values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("degenerate or mismatched delay sampling is rejected") {
  Interferogram s;
  s.e_grid = {0.0, 1.0, 16};
  s.tau_grid = {5.0, 5.0, 64};
  s.values = Eigen::MatrixXd::Zero(64, 16);
  RKT_CHECK_ERROR(fourier_transform_scan(s, {}), ErrorCode::Config);
  s.tau_grid = {-5.0, 5.0, 32};
  RKT_CHECK_ERROR(fourier_transform_scan(s, {}), ErrorCode::Data);
}

TEST_CASE("helium lobes sit at the modulation center") {
  const auto sc = he_scenario();
  const auto scan = simulate(sc);
  const auto m = fourier_transform_scan(scan, sc.pipeline);
  const auto geo = probe_geometry(sc);
  const int col = nearest_col(scan.e_grid, sc.pulses.xuv.omega + sc.pulses.ir_ref.omega);
  const auto band = lobe_band(m, geo, sc.pipeline);
  Eigen::Index arg;
  m.values.col(col).cwiseAbs().maxCoeff(&arg);
  const double peak = std::abs(m.omega_tau.at(static_cast<int>(arg)));
  // The Fano factor pulls the maximum off the bare modulation center, by much less than 1/sigma_t.
  const double sigma_t = pulse_scales(sc.pulses.xuv, sc.pulses.ir_probe, sc.pulses.xuv.omega).sigma_t;
  MESSAGE("lobe peak " << peak << ", band center " << band.center[col]);
  CHECK(std::abs(peak - band.center[col]) <= 0.25 / sigma_t);
  CHECK(peak >= band.lower[col]);
  CHECK(peak <= band.upper[col]);
  // Conjugate lobe of a real signal.
  const int mirror = m.omega_tau.n - static_cast<int>(arg);
  CHECK(std::abs(m.values(mirror, col) - std::conj(m.values(arg, col))) <= 1e-9 * std::abs(m.values(arg, col)));
}

TEST_CASE("filter: pass band identity and parasitic rejection") {
  auto sc = he_scenario();
  set_option(sc, "window", "tukey");
  const auto geo = probe_geometry(sc);
  const auto sigma_p = sc.pulses.ir_probe.sigma;

  const auto full_map = fourier_transform_scan(simulate(sc, SignalMode::Full), sc.pipeline);
  const auto int_map = fourier_transform_scan(simulate(sc, SignalMode::InterferenceOnly), sc.pipeline);
  const auto full_f = filter_lobe(full_map, geo, sc.pipeline);
  const auto int_f = filter_lobe(int_map, geo, sc.pipeline);

  double low = 0.0, total = full_map.values.squaredNorm();
  for (int k = 0; k < full_f.omega_tau.n; ++k)
    if (std::abs(full_f.omega_tau.at(k)) <= sigma_p) low += full_f.values.row(k).squaredNorm();
  CHECK(low <= 1e-3 * total);

  const auto band = lobe_band(int_map, geo, sc.pipeline);
  double worst = 0.0;
  for (int c = 0; c < int_map.e_grid.n; ++c)
    for (int k = 0; k < int_map.omega_tau.n; ++k) {
      const double w = int_map.omega_tau.at(k);
      if (w > band.lower[c] && w < band.upper[c] && int_map.values(k, c) != 0.0)
        worst = std::max(worst, std::abs(int_f.values(k, c) - int_map.values(k, c)) / std::abs(int_map.values(k, c)));
    }
  CHECK(worst <= 1e-12);

  const double rel = frob(full_f.values - int_f.values) / frob(int_f.values);
  MESSAGE("full vs interference-only after filtering: " << rel);
  CHECK(rel <= 0.02);
}

TEST_CASE("filter: band beyond Nyquist asks for finer delay sampling") {
  auto sc = he_scenario();
  set_parameter(sc, "tau_count", 200);
  const auto m = fourier_transform_scan(simulate(sc), sc.pipeline);
  try {
    filter_lobe(m, probe_geometry(sc), sc.pipeline);
    FAIL("expected a config error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Config);
    CHECK(std::string(e.what()).find("delay step") != std::string::npos);
  }
}

TEST_CASE("correction: broadband probe reduces to removing 1/omega") {
  ProbeGeometry geo;
  geo.pulses = he_pulses();
  geo.pulses.ir_probe.sigma = 1e3;
  PipelineConfig cfg;
  FourierMap m;
  m.e_grid = {61.0, 63.6, 27};
  m.omega_tau = {0.5, 0.02, 150};
  m.values = Eigen::MatrixXcd::Ones(150, 27);
  const auto out = correct_probe_modulation(m, geo, cfg);
  int checked = 0;
  for (int c = 0; c < m.e_grid.n; ++c)
    for (int k = 0; k < m.omega_tau.n; ++k) {
      const double w = m.omega_tau.at(k);
      const double E = m.e_grid.at(c);
      const double g = gaussian(w + geo.pulses.xuv.omega - E, geo.pulses.xuv.sigma);
      if (g / w < 0.1) continue;
      CHECK(std::abs(out.values(k, c).real() / w - 1.0) <= 1e-2);
      ++checked;
    }
  CHECK(checked > 100);
}

TEST_CASE("correction: amplification is capped where M equals zeta") {
  ProbeGeometry geo;
  geo.pulses = he_pulses();
  PipelineConfig cfg;
  const double E = 62.3;
  // Bisect on the high-frequency tail for |M| = zeta.
  double lo = 1.6, hi = 6.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (modulation_plus(geo.pulses.xuv, geo.pulses.ir_probe, E, mid) > cfg.zeta ? lo : hi) = mid;
  }
  const double w = 0.5 * (lo + hi);
  FourierMap m;
  m.e_grid = {E, E + 1.0, 16};
  m.omega_tau = {w, 0.01, 2};
  m.values = Eigen::MatrixXcd::Ones(2, 16);
  const auto out = correct_probe_modulation(m, geo, cfg);
  const double g = gaussian(w + geo.pulses.xuv.omega - E, geo.pulses.xuv.sigma);
  CHECK(out.values(0, 0).real() == doctest::Approx(g / (2.0 * cfg.zeta)).epsilon(1e-9));
}

TEST_CASE("correction broadens the helium lobe") {
  const auto sc = he_scenario();
  const auto geo = probe_geometry(sc);
  const auto filtered = filter_lobe(fourier_transform_scan(simulate(sc), sc.pipeline), geo, sc.pipeline);
  const auto corrected = correct_probe_modulation(filtered, geo, sc.pipeline);
  const int col = nearest_col(filtered.e_grid, sc.pulses.xuv.omega + sc.pulses.ir_ref.omega);
  const double ratio = omega_width(corrected, col) / omega_width(filtered, col);
  MESSAGE("L2 width ratio " << ratio);
  CHECK(ratio > 1.0);
}

TEST_CASE("relabel: a function of E_f - omega becomes a function of eps2 alone") {
  FourierMap m;
  m.e_grid = {0.0, 4.0, 81};
  m.omega_tau = {0.5, 0.05, 60};
  m.values.resize(60, 81);
  auto f = [](double e2) { return Complex(std::exp(-e2 * e2), 0.3 * e2); };
  for (int c = 0; c < 81; ++c)
    for (int k = 0; k < 60; ++k) m.values(k, c) = f(m.e_grid.at(c) - m.omega_tau.at(k));
  const double w_ref = 1.5;
  const auto target = default_target_axis(m.e_grid, w_ref);
  const auto rho = relabel_axes(m, w_ref, target, Lobe::Positive);
  int filled = 0;
  for (int i = 0; i < target.n; ++i)
    for (int j = 0; j < target.n; ++j) {
      const double w = target.at(j) + w_ref - target.at(i);
      if (w < 0.5 + 1e-9 || w > m.omega_tau.at(59) - 1e-9) {
        if (w < 0.5 - 1e-6 || w > m.omega_tau.at(59) + 1e-6) CHECK(rho.values(i, j) == Complex(0.0));
        continue;
      }
      CHECK(std::abs(rho.values(i, j) - f(target.at(i))) <= 1e-9);
      ++filled;
    }
  CHECK(filled > 1000);
}

TEST_CASE("relabel: a tilted zero line becomes horizontal") {
  FourierMap m;
  m.e_grid = {60.0, 64.0, 161};
  m.omega_tau = {0.2, 0.0125, 240};
  m.values.resize(m.omega_tau.n, m.e_grid.n);
  const double zero = 60.2;
  for (int c = 0; c < m.e_grid.n; ++c)
    for (int k = 0; k < m.omega_tau.n; ++k) {
      const double e2 = m.e_grid.at(c) - m.omega_tau.at(k);
      m.values(k, c) = e2 - zero;
    }
  const auto rho = relabel_axes(m, 1.55, {59.5, 61.0, 121}, Lobe::Positive);
  const double w_max = m.omega_tau.start + (m.omega_tau.n - 1) * m.omega_tau.step;
  for (int j = 10; j < 110; j += 7) {
    // Rows outside the sampled band are left at zero; search only the reached ones.
    const double e_f = rho.axis.at(j) + 1.55;
    int arg = -1;
    for (int i = 0; i < rho.axis.n; ++i) {
      const double w = e_f - rho.axis.at(i);
      if (w < m.omega_tau.start || w > w_max) continue;
      if (arg < 0 || std::abs(rho.values(i, j)) < std::abs(rho.values(arg, j))) arg = i;
    }
    REQUIRE(arg >= 0);
    CHECK(std::abs(rho.axis.at(arg) - zero) <= 0.5 * rho.axis.step() + 1e-12);
  }
}

TEST_CASE("relabel: resampling onto a finer axis and back") {
  FourierMap coarse;
  coarse.e_grid = {10.0, 12.0, 41};
  coarse.omega_tau = {0.5, 0.05, 60};
  coarse.values.resize(60, 41);
  auto f = [](double e2) { return Complex(std::exp(-std::pow((e2 - 9.5) / 0.6, 2)), 0.0); };
  for (int c = 0; c < 41; ++c)
    for (int k = 0; k < 60; ++k) coarse.values(k, c) = f(coarse.e_grid.at(c) - coarse.omega_tau.at(k));
  const double w_ref = 1.5;
  const EnergyGrid target{8.9, 10.1, 25};
  const EnergyGrid fine{8.9, 10.1, 49};
  const auto direct = relabel_axes(coarse, w_ref, target, Lobe::Positive);
  const auto up = relabel_axes(coarse, w_ref, fine, Lobe::Positive);

  // Rebuild a map on a half-step omega axis from the fine matrix and bring it back.
  FourierMap back;
  back.e_grid = coarse.e_grid;
  back.omega_tau = {0.5, 0.025, 119};
  back.values = Eigen::MatrixXcd::Zero(119, 41);
  for (int c = 0; c < 41; ++c)
    for (int k = 0; k < 119; ++k) {
      const double e2 = back.e_grid.at(c) - back.omega_tau.at(k);
      const double y = (e2 - fine.e_min) / fine.step();
      const int i = static_cast<int>(std::lround(y));
      const int j = static_cast<int>(std::lround((back.e_grid.at(c) - w_ref - fine.e_min) / fine.step()));
      if (std::abs(y - i) > 1e-6 || i < 0 || i >= fine.n || j < 0 || j >= fine.n) {
        back.values(k, c) = f(e2);
      } else {
        back.values(k, c) = up.values(i, j);
      }
    }
  const auto round = relabel_axes(back, w_ref, target, Lobe::Positive);
  const double scale = direct.values.cwiseAbs().maxCoeff();
  CHECK((round.values - direct.values).cwiseAbs().maxCoeff() <= 1e-3 * scale);
}

TEST_CASE("relabel: uncovered target axis lists the reachable range") {
  FourierMap m;
  m.e_grid = {10.0, 12.0, 41};
  m.omega_tau = {0.5, 0.05, 60};
  m.values = Eigen::MatrixXcd::Ones(60, 41);
  try {
    relabel_axes(m, 1.5, {30.0, 31.0, 16}, Lobe::Positive);
    FAIL("expected a coverage error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Coverage);
    CHECK(std::string(e.what()).find("reachable eps2 range") != std::string::npos);
  }
}

TEST_CASE("hermitize") {
  std::mt19937_64 rng(9);
  const EnergyGrid axis{0.0, 1.0, 24};
  const auto h = rktomo::test::random_state(axis, 3, rng);
  DensityMatrix scaled = h;
  scaled.values *= 4.0;
  CHECK((hermitize(scaled).values - h.values).cwiseAbs().maxCoeff() <= 1e-14 * h.values.cwiseAbs().maxCoeff());

  std::normal_distribution<double> g;
  DensityMatrix raw{axis, Eigen::MatrixXcd(24, 24), false};
  for (int i = 0; i < 24; ++i)
    for (int j = 0; j < 24; ++j) raw.values(i, j) = {g(rng), g(rng)};
  raw.values.diagonal().array() += 10.0;
  const auto once = hermitize(raw);
  CHECK(once.hermitian);
  CHECK((once.values - once.values.adjoint()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((hermitize(once).values - once.values).cwiseAbs().maxCoeff() <= 1e-14 * once.values.cwiseAbs().maxCoeff());
  // Before normalization the Hermitian part keeps Re tr(rho).
  const Eigen::MatrixXcd half = 0.5 * (raw.values + raw.values.adjoint());
  CHECK(std::abs(half.trace().real() - raw.values.trace().real()) <= 1e-12 * std::abs(raw.values.trace()));
  CHECK((once.values * raw.trace().real() - half).cwiseAbs().maxCoeff() <= 1e-12 * half.cwiseAbs().maxCoeff());

  DensityMatrix anti{axis, raw.values - raw.values.adjoint(), false};
  RKT_CHECK_ERROR(hermitize(anti), ErrorCode::Degenerate);
  DensityMatrix rect{axis, Eigen::MatrixXcd::Ones(24, 23), false};
  RKT_CHECK_ERROR(hermitize(rect), ErrorCode::Contract);
}

TEST_CASE("helium pipeline: fidelity, purity and exact Hermiticity") {
  auto sc = he_scenario();
  sc.pipeline.keep_full_map_artifacts = true;
  const auto res = reconstruct(sc, simulate(sc));
  REQUIRE(res.report.fidelity.has_value());
  MESSAGE("F = " << *res.report.fidelity << ", P = " << res.report.purity);
  CHECK(*res.report.fidelity >= 0.97);
  CHECK(std::abs(res.report.purity - 1.0) <= 0.01);
  CHECK((res.rho.values - res.rho.values.adjoint()).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(res.artifacts.has_value());
  const auto h = hermitize(res.artifacts->raw);
  CHECK((h.values - h.values.adjoint()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("helium pipeline: both lobes carry the same information") {
  auto sc = he_scenario();
  const auto scan = simulate(sc);
  const auto pos = reconstruct(sc, scan);
  set_option(sc, "lobe", "neg");
  const auto neg = reconstruct(sc, scan);
  CHECK(std::abs(fidelity(pos.rho, neg.rho) - 1.0) <= 1e-6);
}

TEST_CASE("helium pipeline: correction is needed for a narrow probe") {
  auto sc = he_scenario();
  set_parameter(sc, "sigma_ir_probe", 0.1);
  const auto scan = simulate(sc);
  const double with = *reconstruct(sc, scan).report.fidelity;
  set_option(sc, "correction", "off");
  const double without = *reconstruct(sc, scan).report.fidelity;
  MESSAGE("corrected " << with << ", uncorrected " << without);
  CHECK(with > without);
}

TEST_CASE("helium pipeline: bandwidth masking recovers purity") {
  auto sc = he_scenario();
  set_parameter(sc, "sigma_ir_probe", 0.05);
  set_parameter(sc, "sigma_eff", 0.05);
  const auto res = reconstruct(sc, simulate(sc));
  MESSAGE("masked purity " << res.report.purity);
  CHECK(res.report.purity >= 0.98);
}

TEST_CASE("argon pipeline: two Gaussian blocks on the diagonal") {
  auto sc = rktomo::test::ar_resolved();
  set_parameter(sc, "sigma_xuv", 0.05);
  const auto res = reconstruct(sc, simulate(sc));
  const auto& ax = res.rho.axis;
  // The axis is the intermediate energy above each channel's threshold.
  const double c1 = sc.pulses.xuv.omega - 15.76;
  const double c2 = c1 - 0.177;
  const int i1 = nearest_col(ax, c1), i2 = nearest_col(ax, c2);
  const Eigen::VectorXd diag = res.rho.values.diagonal().real();
  // Local maxima near both channel centers, with a dip between them.
  for (int i : {i1, i2}) {
    const int lo = std::max(0, i - 3);
    Eigen::Index arg;
    diag.segment(lo, 7).maxCoeff(&arg);
    CHECK(std::abs(lo + static_cast<int>(arg) - i) <= 2);
  }
  CHECK(diag((i1 + i2) / 2) < 0.5 * std::min(diag(i1), diag(i2)));
  const double coherence = std::abs(res.rho.values(i1, i2)) / std::sqrt(diag(i1) * diag(i2));
  CHECK(coherence < 0.1);
  CHECK(res.report.purity < 0.55);
}

TEST_CASE("pipeline output does not depend on the thread count") {
  auto sc = he_scenario();
  set_parameter(sc, "energy_count", 128);
  const auto scan = simulate(sc);
  const auto one = reconstruct(sc, scan);
  set_parameter(sc, "threads", 3);
  const auto three = reconstruct(sc, scan);
  CHECK(one.rho.values == three.rho.values);
  CHECK(simulate(sc).values == scan.values);
}

}
