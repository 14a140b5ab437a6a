// Command-line front end. Talks to the library only through rktomo.h.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "rktomo/rktomo.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;

struct Failure {
  int exit_code;
  std::string message;
};

int exit_code_for(rkt_status s) {
  switch (s) {
    case RKT_OK: return kExitOk;
    case RKT_E_SCHEMA:
    case RKT_E_CONFIG:
    case RKT_E_COVERAGE:
    case RKT_E_ARGUMENT: return kExitUsage;
    case RKT_E_DATA:
    case RKT_E_IO: return kExitData;
    default: return kExitFailure;
  }
}

void check(rkt_status s, const std::string& context) {
  if (s == RKT_OK) return;
  throw Failure{exit_code_for(s), context + ": " + rkt_status_name(s) + " error: " + rkt_last_error()};
}

struct ScenarioDeleter {
  void operator()(rkt_scenario* s) const { rkt_scenario_free(s); }
};
struct GridDeleter {
  void operator()(rkt_grid* g) const { rkt_grid_free(g); }
};
using ScenarioPtr = std::unique_ptr<rkt_scenario, ScenarioDeleter>;
using GridPtr = std::unique_ptr<rkt_grid, GridDeleter>;

// Takes ownership of a library-allocated string.
std::string take(char* s) {
  std::string out = s ? s : "";
  rkt_string_free(s);
  return out;
}

struct Common {
  std::string scenario;
  std::string out_dir;
  std::string format = "text";
  int threads = -1;
};

std::string default_out_dir() {
  const char* env = std::getenv("RKTOMO_OUT_DIR");
  return env && *env ? env : ".";
}

fs::path out_dir(const Common& c) {
  fs::path p = c.out_dir.empty() ? default_out_dir() : c.out_dir;
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw Failure{kExitData, "cannot create output directory '" + p.string() + "': " + ec.message()};
  return p;
}

ScenarioPtr load(const Common& c) {
  rkt_scenario* raw = nullptr;
  check(rkt_scenario_load(c.scenario.c_str(), &raw), "scenario '" + c.scenario + "'");
  ScenarioPtr s(raw);
  if (c.threads >= 0) check(rkt_scenario_set_number(s.get(), "threads", c.threads), "--threads");
  return s;
}

std::string scenario_name(const rkt_scenario* s) {
  char* name = nullptr;
  check(rkt_scenario_name(s, &name), "scenario name");
  return take(name);
}

// kind -> file from the scenario's output list.
std::vector<std::pair<std::string, std::string>> outputs(const rkt_scenario* s) {
  char* raw = nullptr;
  check(rkt_scenario_outputs(s, &raw), "scenario outputs");
  std::istringstream is(take(raw));
  std::vector<std::pair<std::string, std::string>> out;
  for (std::string line; std::getline(is, line);) {
    const auto tab = line.find('\t');
    if (tab != std::string::npos) out.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return out;
}

std::string output_file(const rkt_scenario* s, const std::string& kind, const std::string& fallback) {
  for (const auto& [k, f] : outputs(s)) {
    if (k == kind) return f;
  }
  return fallback;
}

bool requested(const rkt_scenario* s, const std::string& kind) {
  for (const auto& [k, f] : outputs(s)) {
    if (k == kind) return true;
  }
  return false;
}

bool binary_format(const Common& c) { return c.format == "binary"; }

fs::path grid_path(const fs::path& dir, std::string file, bool binary) {
  fs::path p = dir / file;
  if (p.extension() == ".rkg" || p.extension() == ".rkb" || p.extension().empty()) {
    p.replace_extension(binary ? ".rkb" : ".rkg");
  }
  return p;
}

void write_grid(const rkt_grid* g, const fs::path& path, bool binary) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  check(rkt_grid_write(g, path.string().c_str(), binary ? 1 : 0), "writing " + path.string());
  std::cout << "wrote " << path.string() << "\n";
}

void write_text(const std::string& body, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Failure{kExitData, "cannot open '" + path.string() + "' for writing"};
  os << body;
  if (!os) throw Failure{kExitData, "write to '" + path.string() + "' failed"};
  std::cout << "wrote " << path.string() << "\n";
}

void write_theory(const rkt_scenario* s, const fs::path& dir, const std::string& name, bool binary) {
  rkt_grid* raw = nullptr;
  check(rkt_theory_matrix(s, 1, &raw), "theoretical density matrix");
  GridPtr theory(raw);
  write_grid(theory.get(), grid_path(dir, output_file(s, "theory_matrix", name + "_theory.rkg"), binary), binary);
}

void warning_sink(const char* message, void*) { std::cerr << "warning: " << message << "\n"; }

int cmd_simulate(const Common& c, const std::string& mode) {
  ScenarioPtr s = load(c);
  const std::string name = scenario_name(s.get());
  const fs::path dir = out_dir(c);
  const bool binary = binary_format(c);
  if (!mode.empty()) check(rkt_scenario_set_option(s.get(), "mode", mode.c_str()), "--mode");

  char* current = nullptr;
  check(rkt_scenario_get_option(s.get(), "mode", &current), "mode");
  const bool full = take(current) == "full";

  rkt_grid* raw = nullptr;
  check(rkt_simulate(s.get(), RKT_MODE_SCENARIO, &raw), "simulate");
  GridPtr scan(raw);
  const std::string kind = full ? "interferogram_full" : "interferogram";
  write_grid(scan.get(), grid_path(dir, output_file(s.get(), kind, name + "_" + kind + ".rkg"), binary), binary);

  // The other variant is written when the scenario asks for it as well.
  const std::string other = full ? "interferogram" : "interferogram_full";
  if (requested(s.get(), other)) {
    check(rkt_simulate(s.get(), full ? RKT_MODE_INTERFERENCE : RKT_MODE_FULL, &raw), "simulate");
    GridPtr second(raw);
    write_grid(second.get(), grid_path(dir, output_file(s.get(), other, name + "_" + other + ".rkg"), binary), binary);
  }
  if (requested(s.get(), "theory_matrix")) write_theory(s.get(), dir, name, binary);
  return kExitOk;
}

int cmd_reconstruct(const Common& c, std::string input, const std::string& lobe, bool no_correction,
                    double sigma_eff) {
  ScenarioPtr s = load(c);
  const std::string name = scenario_name(s.get());
  const fs::path dir = out_dir(c);
  const bool binary = binary_format(c);
  if (!lobe.empty()) check(rkt_scenario_set_option(s.get(), "lobe", lobe.c_str()), "--lobe");
  if (no_correction) check(rkt_scenario_set_option(s.get(), "correction", "off"), "--no-correction");
  if (!std::isnan(sigma_eff)) check(rkt_scenario_set_number(s.get(), "sigma_eff", sigma_eff), "--sigma-eff");

  if (input.empty()) {
    // Default input: what `simulate` would have written, in either format.
    const std::string file = output_file(s.get(), "interferogram", name + "_interferogram.rkg");
    fs::path text = grid_path(dir, file, false), bin = grid_path(dir, file, true);
    input = (fs::exists(text) || !fs::exists(bin)) ? text.string() : bin.string();
  }
  rkt_grid* raw = nullptr;
  check(rkt_grid_read(input.c_str(), &raw), "reading " + input);
  GridPtr scan(raw);

  const bool want_map = requested(s.get(), "fourier_map");
  rkt_grid* rho_raw = nullptr;
  rkt_grid* map_raw = nullptr;
  char* report_raw = nullptr;
  check(rkt_reconstruct(s.get(), scan.get(), &rho_raw, want_map ? &map_raw : nullptr, &report_raw), "reconstruct");
  GridPtr rho(rho_raw), map(map_raw);
  const std::string report = take(report_raw);

  write_grid(rho.get(), grid_path(dir, output_file(s.get(), "density_matrix", name + "_rho.rkg"), binary), binary);
  if (map) {
    write_grid(map.get(), grid_path(dir, output_file(s.get(), "fourier_map", name + "_fourier.rkg"), binary), binary);
  }
  write_text(report, dir / output_file(s.get(), "report", name + "_report.json"));
  if (requested(s.get(), "heatmap")) {
    const fs::path png = dir / output_file(s.get(), "heatmap", name + "_rho.png");
    check(rkt_grid_write_png(rho.get(), png.string().c_str()), "heatmap");
    std::cout << "wrote " << png.string() << "\n";
  }
  if (requested(s.get(), "theory_matrix")) write_theory(s.get(), dir, name, binary);
  std::cout << report;
  return kExitOk;
}

std::vector<double> parse_range(const std::string& spec) {
  std::vector<double> out;
  auto number = [&](const std::string& t) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(t, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != t.size() || !std::isfinite(v)) {
      throw Failure{kExitUsage, "--range: '" + t + "' is not a number"};
    }
    return v;
  };
  if (spec.find(':') != std::string::npos) {
    // start:stop:count, inclusive of both ends
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw Failure{kExitUsage, "--range: expected start:stop:count"};
    const double a = number(parts[0]), b = number(parts[1]);
    const double n = number(parts[2]);
    if (n != std::floor(n) || n < 0) throw Failure{kExitUsage, "--range: count must be a non-negative integer"};
    const int count = static_cast<int>(n);
    for (int i = 0; i < count; ++i) out.push_back(count == 1 ? a : a + (b - a) * i / (count - 1));
  } else {
    std::stringstream ss(spec);
    for (std::string p; std::getline(ss, p, ',');) {
      if (!p.empty()) out.push_back(number(p));
    }
  }
  if (out.empty()) throw Failure{kExitUsage, "--range: empty parameter range"};
  return out;
}

int cmd_sweep(const Common& c, const std::string& param, const std::string& range) {
  const std::vector<double> values = parse_range(range);
  ScenarioPtr s = load(c);
  const std::string name = scenario_name(s.get());
  const fs::path dir = out_dir(c);
  char* table = nullptr;
  char* svg = nullptr;
  check(rkt_sweep(s.get(), param.c_str(), values.data(), values.size(), c.threads < 0 ? 0 : c.threads, &table, &svg),
        "sweep");
  const std::string t = take(table), fig = take(svg);
  write_text(t, dir / (name + "_sweep_" + param + ".tsv"));
  write_text(fig, dir / (name + "_sweep_" + param + ".svg"));
  std::cout << t;
  return t.find("\terror ") == std::string::npos ? kExitOk : kExitFailure;
}

int cmd_metrics(const Common& c, const std::string& input, const std::string& reference) {
  rkt_grid* raw = nullptr;
  check(rkt_grid_read(input.c_str(), &raw), "reading " + input);
  GridPtr rho(raw);
  GridPtr ref;
  if (!reference.empty()) {
    check(rkt_grid_read(reference.c_str(), &raw), "reading " + reference);
    ref.reset(raw);
  } else if (!c.scenario.empty()) {
    ScenarioPtr s = load(c);
    check(rkt_theory_matrix(s.get(), 1, &raw), "theoretical density matrix");
    ref.reset(raw);
  }
  char* js = nullptr;
  check(rkt_metrics_json(rho.get(), ref.get(), &js), "metrics");
  std::cout << take(js);
  return kExitOk;
}

int cmd_oracle(const Common& c, int points, double tolerance) {
  ScenarioPtr s = load(c);
  double worst = 0.0;
  char* js = nullptr;
  check(rkt_oracle_check(s.get(), points, &worst, &js), "oracle");
  std::cout << take(js);
  std::cerr << "max relative deviation " << worst << (worst <= tolerance ? " (within " : " (exceeds ") << tolerance
            << ")\n";
  return worst <= tolerance ? kExitOk : kExitFailure;
}

int cmd_scenarios(const std::string& dump) {
  if (!dump.empty()) {
    rkt_scenario* raw = nullptr;
    check(rkt_scenario_load(("bundled:" + dump).c_str(), &raw), "bundled scenario");
    ScenarioPtr s(raw);
    char* js = nullptr;
    check(rkt_scenario_to_json(s.get(), &js), "scenario");
    std::cout << take(js);
    return kExitOk;
  }
  char* names = nullptr;
  check(rkt_scenario_bundled_names(&names), "bundled scenarios");
  std::cout << take(names);
  return kExitOk;
}

void add_common(CLI::App* sub, Common& c, bool scenario_required) {
  auto* opt = sub->add_option("--scenario", c.scenario, "Scenario file, or bundled:<name>");
  if (scenario_required) opt->required();
  sub->add_option("--out", c.out_dir, "Output directory (default $RKTOMO_OUT_DIR or .)");
  sub->add_option("--threads", c.threads, "Worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
  sub->add_option("--format", c.format, "Grid file format")->check(CLI::IsMember({"text", "binary"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rktomo: rainbow-KRAKEN photoelectron density-matrix tomography"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(rkt_version()));

  Common common;
  std::string mode, input, lobe, param, range, reference, dump;
  bool no_correction = false;
  double sigma_eff = NAN;
  int points = 9;
  double tolerance = 1e-3;

  auto* sim = app.add_subcommand("simulate", "Synthesize the delay scan of a scenario");
  add_common(sim, common, true);
  sim->add_option("--mode", mode, "Signal content")->check(CLI::IsMember({"full", "interference"}));

  auto* rec = app.add_subcommand("reconstruct", "Recover the density matrix from a delay scan");
  add_common(rec, common, true);
  rec->add_option("--input", input, "Interferogram grid file (default: simulate output)");
  rec->add_option("--lobe", lobe, "Fourier lobe")->check(CLI::IsMember({"pos", "neg"}));
  rec->add_flag("--no-correction", no_correction, "Skip the probe modulation correction");
  rec->add_option("--sigma-eff", sigma_eff, "Bandwidth masking width in eV")->check(CLI::PositiveNumber);

  auto* swp = app.add_subcommand("sweep", "Simulate and reconstruct across a parameter range");
  add_common(swp, common, true);
  swp->add_option("--param", param, "Parameter, e.g. sigma_ir_probe or sigma_xuv")->required();
  swp->add_option("--range", range, "start:stop:count or a comma-separated list")->required();

  auto* met = app.add_subcommand("metrics", "Purity, trace and fidelity of a density-matrix file");
  add_common(met, common, false);
  met->add_option("--input", input, "Density-matrix grid file")->required();
  met->add_option("--reference", reference, "Reference density matrix (default: theory from --scenario)");

  auto* orc = app.add_subcommand("oracle", "Cross-check closed-form amplitudes against brute-force quadrature");
  add_common(orc, common, true);
  orc->add_option("--points", points, "Energies across the XUV band")->check(CLI::PositiveNumber);
  orc->add_option("--tolerance", tolerance, "Maximum accepted relative deviation");

  auto* scn = app.add_subcommand("scenarios", "List bundled scenarios or print one");
  scn->add_option("--dump", dump, "Name of the bundled scenario to print");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  rkt_set_warning_callback(warning_sink, nullptr);
  try {
    if (*sim) return cmd_simulate(common, mode);
    if (*rec) return cmd_reconstruct(common, input, lobe, no_correction, sigma_eff);
    if (*swp) return cmd_sweep(common, param, range);
    if (*met) return cmd_metrics(common, input, reference);
    if (*orc) return cmd_oracle(common, points, tolerance);
    if (*scn) return cmd_scenarios(dump);
  } catch (const Failure& f) {
    std::cerr << "rktomo: " << f.message << "\n";
    return f.exit_code;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "rktomo: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
