#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <random>
#include <string>

#include "doctest.h"
#include "rktomo/gridio.hpp"
#include "rktomo/scenario.hpp"
#include "test_support.hpp"

using namespace rktomo;

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

// std::stod rejects subnormals with ERANGE.
double parse(const std::string& s) {
  double x = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), x);
  REQUIRE(r.ec == std::errc());
  REQUIRE(r.ptr == s.data() + s.size());
  return x;
}

template <class M>
bool bit_identical(const M& a, const M& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return std::memcmp(a.data(), b.data(), sizeof(typename M::Scalar) * a.size()) == 0;
}

Interferogram awkward_interferogram() {
  Interferogram s;
  s.e_grid = {58.0, 68.0, 16};
  s.tau_grid = {-400.0, 400.0, 5};
  s.mode = SignalMode::Full;
  s.values.resize(5, 16);
  std::mt19937_64 rng(13);
  std::normal_distribution<double> g;
  for (int i = 0; i < s.values.size(); ++i) s.values.data()[i] = g(rng) * std::pow(10.0, (i % 40) - 20);
  s.values(0, 0) = -0.0;
  s.values(1, 1) = std::numeric_limits<double>::denorm_min();
  s.values(2, 2) = 1e300;
  s.values(3, 3) = 0.1;
  return s;
}

DensityMatrix complex_matrix() {
  std::mt19937_64 rng(17);
  return rktomo::test::random_state({-1.0 / 3.0, 2.0 / 7.0, 20}, 4, rng);
}

std::string error_text(const std::string& bytes) {
  try {
    decode_grid(bytes);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Data);
    return e.what();
  }
  FAIL("decode succeeded");
  return {};
}

std::string schema_error(const std::string& text) {
  try {
    parse_scenario(text, "case.json");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Schema);
    return e.what();
  }
  FAIL("parse succeeded");
  return {};
}

std::string he_text() { return bundled_scenario_text("he_2s2p"); }

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto pos = s.find(from);
  REQUIRE(pos != std::string::npos);
  return s.replace(pos, from.size(), to);
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("shortest round-trip decimal") {
  for (double x : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-310, 60.75}) {
    CHECK(same_bits(parse(format_double(x)), x));
  }
  CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("interferogram round trip is bit-exact in both formats") {
  const auto s = awkward_interferogram();
  for (auto fmt : {GridFormat::Text, GridFormat::Binary}) {
    const auto back = interferogram_from_grid(decode_grid(encode_grid(to_grid(s), fmt)));
    CHECK(bit_identical(back.values, s.values));
    CHECK(back.e_grid == s.e_grid);
    CHECK(back.tau_grid == s.tau_grid);
    CHECK(back.mode == SignalMode::Full);
  }
}

TEST_CASE("density matrix and Fourier map round trips") {
  const auto rho = complex_matrix();
  for (auto fmt : {GridFormat::Text, GridFormat::Binary}) {
    const auto back = density_matrix_from_grid(decode_grid(encode_grid(to_grid(rho), fmt)));
    CHECK(bit_identical(back.values, rho.values));
    CHECK(back.axis == rho.axis);
    CHECK(back.hermitian);
  }
  FourierMap m;
  m.e_grid = {1.0, 2.0, 16};
  m.omega_tau = {-0.7, 0.1 / 3.0, 7};
  m.values = Eigen::MatrixXcd::Random(7, 16);
  const auto back = fourier_map_from_grid(decode_grid(encode_grid(to_grid(m), GridFormat::Text)));
  CHECK(bit_identical(back.values, m.values));
  CHECK(back.omega_tau == m.omega_tau);
}

TEST_CASE("files on disk") {
  const auto dir = std::filesystem::temp_directory_path() / "rktomo_io_test";
  std::filesystem::create_directories(dir);
  const auto s = awkward_interferogram();
  write_grid((dir / "s.rkb").string(), to_grid(s), GridFormat::Binary);
  CHECK(bit_identical(interferogram_from_grid(read_grid((dir / "s.rkb").string())).values, s.values));
  RKT_CHECK_ERROR(read_grid((dir / "missing.rkg").string()), ErrorCode::Io);
  std::filesystem::remove_all(dir);
}

TEST_CASE("text header is self-describing") {
  const std::string text = encode_grid(to_grid(awkward_interferogram()), GridFormat::Text);
  CHECK(text.rfind("#RKGRID 1\n", 0) == 0);
  CHECK(text.find("kind interferogram") != std::string::npos);
  CHECK(text.find("axis tau -400 400 5 fs") != std::string::npos);
  CHECK(text.find("axis energy 58 68 16 eV") != std::string::npos);
  CHECK(text.find("meta mode full") != std::string::npos);
}

TEST_CASE("truncated input reports a byte offset") {
  const std::string text = encode_grid(to_grid(awkward_interferogram()), GridFormat::Text);
  for (size_t cut : {text.size() - 1, text.size() - 7, text.size() / 2, size_t(12)}) {
    const auto msg = error_text(text.substr(0, cut));
    CHECK_MESSAGE(msg.find("byte ") != std::string::npos, msg);
  }
  const std::string bin = encode_grid(to_grid(awkward_interferogram()), GridFormat::Binary);
  const auto msg = error_text(bin.substr(0, bin.size() - 3));
  CHECK(msg.find("byte ") != std::string::npos);
  CHECK(error_text(text + "1.0\n").find("byte ") != std::string::npos);
  CHECK(error_text("#NOTAGRID\n").find("byte ") != std::string::npos);
}

TEST_CASE("wrong grid kind is a data error") {
  const auto g = to_grid(complex_matrix());
  RKT_CHECK_ERROR(interferogram_from_grid(g), ErrorCode::Data);
}

TEST_CASE("bundled scenarios parse and re-serialize") {
  const auto names = bundled_scenario_names();
  CHECK(names.size() >= 3);
  for (const auto& n : names) {
    const auto s = load_scenario("bundled:" + n);
    CHECK(s.name == n);
    const auto again = parse_scenario(scenario_to_json(s));
    CHECK(scenario_to_json(again) == scenario_to_json(s));
  }
  RKT_CHECK_ERROR(load_scenario("bundled:nope"), ErrorCode::NotFound);
}

TEST_CASE("helium scenario carries the documented parameters") {
  const auto s = rktomo::test::he_scenario();
  CHECK(s.pulses.xuv.omega == 60.75);
  CHECK(s.pulses.xuv.sigma == 0.25);
  CHECK(s.pulses.ir_ref.sigma == 0.001);
  CHECK(s.pulses.ir_probe.sigma == 0.3);
  CHECK(s.e_grid == EnergyGrid{58.0, 68.0, 512});
  CHECK(s.tau_grid == DelayGrid{-400.0, 400.0, 1024});
  REQUIRE(s.channels.size() == 1);
  CHECK(s.channels[0].structure.xuv_resonances[0].q_ag == -2.77);
}

TEST_CASE("schema errors name the offending field") {
  CHECK(schema_error(replace(he_text(), "\"amplitude\": 1.0, \"phase_rad\": 0.0},\n    \"ir_ref\"",
                             "\"amplitude\": 1.0, \"phase_rad\": 0.0, \"bogus\": 1},\n    \"ir_ref\""))
            .find("pulses.xuv.bogus") != std::string::npos);
  CHECK(schema_error(replace(he_text(), "\"sigma_ev\": 0.25", "\"sigma_ev\": \"wide\""))
            .find("pulses.xuv.sigma_ev") != std::string::npos);
  CHECK(schema_error(replace(he_text(), "\"count\": 512", "\"count\": 4")).find("energy_grid.count") !=
        std::string::npos);
  CHECK(schema_error(replace(he_text(), "\"q\": -2.77,", "")).find("q") != std::string::npos);
  CHECK(schema_error(replace(he_text(), "\"rktomo-scenario/1\"", "\"rktomo-scenario/9\"")).find("schema") !=
        std::string::npos);
  CHECK(schema_error("{ not json").find("case.json") != std::string::npos);
  CHECK(schema_error(replace(he_text(), "he_2s2p_rho.png", "../escape.png")).find("outputs") !=
        std::string::npos);
}

TEST_CASE("channel weights must sum to one") {
  auto text = bundled_scenario_text("ar_spin_orbit_resolved");
  const auto pos = text.find("\"weight\": 0.5");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 13, "\"weight\": 0.6");
  try {
    parse_scenario(text, "weights.json");
    FAIL("parse succeeded");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Schema);
    CHECK(std::string(e.what()).find("weights sum") != std::string::npos);
  }
}

TEST_CASE("parameter and option overrides") {
  auto s = rktomo::test::he_scenario();
  set_parameter(s, "sigma_ir_probe", 0.2);
  CHECK(s.pulses.ir_probe.sigma == 0.2);
  set_parameter(s, "sigma_eff", 0.05);
  CHECK(s.pipeline.sigma_eff == 0.05);
  set_parameter(s, "sigma_eff", 0.0);
  CHECK(!s.pipeline.sigma_eff.has_value());
  set_parameter(s, "tau_count", 2048);
  CHECK(s.tau_grid.n == 2048);
  RKT_CHECK_ERROR(set_parameter(s, "no_such_knob", 1.0), ErrorCode::Config);
  RKT_CHECK_ERROR(set_parameter(s, "sigma_xuv", -1.0), ErrorCode::Config);
  set_option(s, "mode", "full");
  CHECK(get_option(s, "mode") == "full");
  RKT_CHECK_ERROR(set_option(s, "lobe", "sideways"), ErrorCode::Config);
}

TEST_CASE("probe geometry averages the channel offsets") {
  const auto s = rktomo::test::ar_resolved();
  const auto geo = probe_geometry(s);
  CHECK(geo.energy_offset == doctest::Approx(15.76 + 0.5 * 0.177).epsilon(1e-12));
  CHECK(!feature_hint(s).has_value());
  CHECK(feature_hint(rktomo::test::he_scenario()).has_value());
}

}
