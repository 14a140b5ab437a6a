// Exercises the shared library through its C header only.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <thread>
#include <vector>

#include "doctest.h"
#include "rktomo/rktomo.h"

namespace {

struct Scenario {
  rkt_scenario* h = nullptr;
  ~Scenario() { rkt_scenario_free(h); }
};

struct Grid {
  rkt_grid* h = nullptr;
  ~Grid() { rkt_grid_free(h); }
};

std::string take(char* s) {
  std::string out = s ? s : "";
  rkt_string_free(s);
  return out;
}

// He loaded from the bundle and shrunk so each call stays fast.
void small_he(Scenario& s) {
  REQUIRE(rkt_scenario_load("bundled:he_2s2p", &s.h) == RKT_OK);
  REQUIRE(rkt_scenario_set_number(s.h, "energy_count", 64) == RKT_OK);
}

std::string tmp_path(const char* name) { return std::string("/tmp/rktomo_capi_") + name; }

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::strlen(rkt_version()) > 0);
  CHECK(std::string(rkt_status_name(RKT_OK)) == "ok");
  CHECK(std::string(rkt_status_name(RKT_E_SCHEMA)) == "schema");
  CHECK(std::string(rkt_status_name(RKT_E_ARGUMENT)) == "argument");
}

TEST_CASE("null arguments are reported, not dereferenced") {
  rkt_scenario* s = nullptr;
  CHECK(rkt_scenario_load(nullptr, &s) == RKT_E_ARGUMENT);
  CHECK(rkt_scenario_load("bundled:he_2s2p", nullptr) == RKT_E_ARGUMENT);
  CHECK(rkt_simulate(nullptr, RKT_MODE_SCENARIO, nullptr) == RKT_E_ARGUMENT);
  CHECK(std::strlen(rkt_last_error()) > 0);
  double f = 0.0;
  CHECK(rkt_fidelity(nullptr, nullptr, &f) == RKT_E_ARGUMENT);
  rkt_scenario_free(nullptr);
  rkt_grid_free(nullptr);
  rkt_string_free(nullptr);
}

TEST_CASE("error codes and messages") {
  Scenario s;
  CHECK(rkt_scenario_parse("{\"schema\": \"rktomo-scenario/1\", \"nmae\": 1}", &s.h) == RKT_E_SCHEMA);
  CHECK(s.h == nullptr);
  CHECK(std::string(rkt_last_error()).find("nmae") != std::string::npos);
  CHECK(rkt_scenario_load("bundled:missing", &s.h) == RKT_E_NOT_FOUND);
  CHECK(rkt_scenario_load("/nonexistent/x.json", &s.h) == RKT_E_IO);

  small_he(s);
  CHECK(rkt_scenario_set_number(s.h, "bogus", 1.0) == RKT_E_CONFIG);
  CHECK(rkt_scenario_set_option(s.h, "lobe", "up") == RKT_E_CONFIG);
  CHECK(rkt_simulate(s.h, static_cast<rkt_mode>(7), nullptr) == RKT_E_ARGUMENT);
}

TEST_CASE("last error is per thread") {
  Scenario s;
  CHECK(rkt_scenario_load("bundled:missing", &s.h) == RKT_E_NOT_FOUND);
  const std::string mine = rkt_last_error();
  std::thread([] {
    rkt_scenario* t = nullptr;
    rkt_scenario_parse("[1,2", &t);
  }).join();
  CHECK(std::string(rkt_last_error()) == mine);
}

TEST_CASE("scenario accessors") {
  Scenario s;
  small_he(s);
  char* out = nullptr;
  REQUIRE(rkt_scenario_name(s.h, &out) == RKT_OK);
  CHECK(take(out) == "he_2s2p");
  REQUIRE(rkt_scenario_get_option(s.h, "mode", &out) == RKT_OK);
  CHECK(take(out) == "interference");
  REQUIRE(rkt_scenario_outputs(s.h, &out) == RKT_OK);
  CHECK(take(out).find("density_matrix\the_2s2p_rho.rkg") != std::string::npos);
  REQUIRE(rkt_scenario_bundled_names(&out) == RKT_OK);
  CHECK(take(out).find("ar_spin_orbit") != std::string::npos);

  REQUIRE(rkt_scenario_to_json(s.h, &out) == RKT_OK);
  const std::string json = take(out);
  Scenario copy;
  REQUIRE(rkt_scenario_parse(json.c_str(), &copy.h) == RKT_OK);
  REQUIRE(rkt_scenario_to_json(copy.h, &out) == RKT_OK);
  CHECK(take(out) == json);

  Scenario clone;
  REQUIRE(rkt_scenario_clone(s.h, &clone.h) == RKT_OK);
  REQUIRE(rkt_scenario_set_number(clone.h, "sigma_ir_probe", 0.2) == RKT_OK);
  REQUIRE(rkt_scenario_to_json(s.h, &out) == RKT_OK);
  CHECK(take(out) == json);
}

TEST_CASE("simulate, write, read and reconstruct") {
  Scenario s;
  small_he(s);
  Grid scan;
  REQUIRE(rkt_simulate(s.h, RKT_MODE_SCENARIO, &scan.h) == RKT_OK);
  rkt_grid_info info{};
  REQUIRE(rkt_grid_info_get(scan.h, &info) == RKT_OK);
  CHECK(info.kind == RKT_GRID_INTERFEROGRAM);
  CHECK(info.rows == 1024);
  CHECK(info.cols == 64);
  CHECK(info.is_complex == 0);
  CHECK(info.row_min == -400.0);

  std::vector<double> a(static_cast<size_t>(info.rows) * info.cols);
  REQUIRE(rkt_grid_copy_values(scan.h, a.data(), a.size()) == RKT_OK);
  CHECK(rkt_grid_copy_values(scan.h, a.data(), a.size() - 1) == RKT_E_ARGUMENT);

  for (int binary : {0, 1}) {
    const auto path = tmp_path(binary ? "scan.rkb" : "scan.rkg");
    REQUIRE(rkt_grid_write(scan.h, path.c_str(), binary) == RKT_OK);
    Grid back;
    REQUIRE(rkt_grid_read(path.c_str(), &back.h) == RKT_OK);
    std::vector<double> b(a.size());
    REQUIRE(rkt_grid_copy_values(back.h, b.data(), b.size()) == RKT_OK);
    CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
    std::remove(path.c_str());
  }

  Grid rho, map;
  char* report = nullptr;
  REQUIRE(rkt_reconstruct(s.h, scan.h, &rho.h, &map.h, &report) == RKT_OK);
  const std::string rep = take(report);
  CHECK(rep.find("\"fidelity\"") != std::string::npos);
  REQUIRE(rkt_grid_info_get(map.h, &info) == RKT_OK);
  CHECK(info.kind == RKT_GRID_FOURIER_MAP);
  CHECK(info.is_complex == 1);

  double p = 0.0, f = 0.0;
  REQUIRE(rkt_purity(rho.h, &p) == RKT_OK);
  CHECK(std::abs(p - 1.0) < 0.02);
  Grid theory;
  REQUIRE(rkt_theory_matrix(s.h, 1, &theory.h) == RKT_OK);
  REQUIRE(rkt_fidelity(theory.h, rho.h, &f) == RKT_OK);
  CHECK(f > 0.95);
  CHECK(rkt_fidelity(scan.h, rho.h, &f) == RKT_E_ARGUMENT);

  char* metrics = nullptr;
  REQUIRE(rkt_metrics_json(rho.h, theory.h, &metrics) == RKT_OK);
  CHECK(take(metrics).find("\"purity\"") != std::string::npos);

  const auto png = tmp_path("rho.png");
  REQUIRE(rkt_grid_write_png(rho.h, png.c_str()) == RKT_OK);
  FILE* fp = std::fopen(png.c_str(), "rb");
  REQUIRE(fp);
  unsigned char sig[8] = {};
  CHECK(std::fread(sig, 1, 8, fp) == 8);
  std::fclose(fp);
  CHECK(sig[1] == 'P');
  std::remove(png.c_str());

  // A scan from other grids is a data error.
  REQUIRE(rkt_scenario_set_number(s.h, "energy_count", 80) == RKT_OK);
  Grid rho2;
  CHECK(rkt_reconstruct(s.h, scan.h, &rho2.h, nullptr, nullptr) == RKT_E_DATA);
}

TEST_CASE("truncated grid file") {
  const auto path = tmp_path("trunc.rkg");
  FILE* fp = std::fopen(path.c_str(), "wb");
  std::fputs("#RKGRID 1\nkind interferogram\nvalue_type real\n", fp);
  std::fclose(fp);
  Grid g;
  CHECK(rkt_grid_read(path.c_str(), &g.h) == RKT_E_DATA);
  CHECK(std::string(rkt_last_error()).find("byte") != std::string::npos);
  std::remove(path.c_str());
}

TEST_CASE("warning callback and zero probe") {
  std::vector<std::string> seen;
  rkt_set_warning_callback([](const char* m, void* u) { static_cast<std::vector<std::string>*>(u)->push_back(m); },
                           &seen);
  Scenario s;
  small_he(s);
  REQUIRE(rkt_scenario_set_number(s.h, "amplitude_ir_probe", 0.0) == RKT_OK);
  Grid scan;
  REQUIRE(rkt_simulate(s.h, RKT_MODE_INTERFERENCE, &scan.h) == RKT_OK);
  rkt_set_warning_callback(nullptr, nullptr);
  CHECK(seen.size() == 1);
  std::vector<double> v(1024 * 64);
  REQUIRE(rkt_grid_copy_values(scan.h, v.data(), v.size()) == RKT_OK);
  for (double x : v) REQUIRE(x == 0.0);
}

TEST_CASE("sweep through the C interface") {
  Scenario s;
  small_he(s);
  const double values[] = {0.15, 0.3};
  char *tsv = nullptr, *svg = nullptr;
  REQUIRE(rkt_sweep(s.h, "sigma_ir_probe", values, 2, 2, &tsv, &svg) == RKT_OK);
  const std::string t = take(tsv);
  CHECK(t.find("purity_corrected") != std::string::npos);
  CHECK(take(svg).rfind("<svg", 0) != std::string::npos);
  CHECK(rkt_sweep(s.h, "sigma_ir_probe", values, 0, 1, &tsv, nullptr) == RKT_E_CONFIG);
}

TEST_CASE("oracle check") {
  Scenario s;
  small_he(s);
  double worst = 1.0;
  char* json = nullptr;
  REQUIRE(rkt_oracle_check(s.h, 3, &worst, &json) == RKT_OK);
  take(json);
  CHECK(worst <= 1e-3);
}
