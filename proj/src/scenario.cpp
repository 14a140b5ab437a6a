#include "rktomo/scenario.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "bundled_scenarios.hpp"
#include "rktomo/error.hpp"

namespace rktomo {
namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void schema_error(const std::string& path, const std::string& msg) {
  fail(ErrorCode::Schema, (path.empty() ? std::string("<root>") : path) + ": " + msg);
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string join(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

// Every object may carry a free-form "note" string.
void check_object(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) schema_error(path, "expected an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = k == "note";
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) schema_error(join(path, k), "unknown key");
    if (k == "note" && !v.is_string()) schema_error(join(path, k), "expected a string");
  }
}

double number(const json& j, const std::string& path, const char* key, std::optional<double> def = std::nullopt) {
  const std::string p = join(path, key);
  if (!j.contains(key)) {
    if (def) return *def;
    schema_error(p, "required number is missing");
  }
  const json& v = j.at(key);
  if (!v.is_number()) schema_error(p, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) schema_error(p, "must be finite");
  return x;
}

double positive(const json& j, const std::string& path, const char* key, std::optional<double> def = std::nullopt) {
  const double x = number(j, path, key, def);
  if (!(x > 0.0)) schema_error(join(path, key), "must be > 0");
  return x;
}

int count(const json& j, const std::string& path, const char* key, int min) {
  const std::string p = join(path, key);
  if (!j.contains(key)) schema_error(p, "required integer is missing");
  const json& v = j.at(key);
  if (!v.is_number_integer()) schema_error(p, "expected an integer");
  const auto n = v.get<long long>();
  if (n < min || n > (1 << 20)) schema_error(p, "must lie in [" + std::to_string(min) + ", 1048576]");
  return static_cast<int>(n);
}

std::string text(const json& j, const std::string& path, const char* key, std::optional<std::string> def = {}) {
  const std::string p = join(path, key);
  if (!j.contains(key)) {
    if (def) return *def;
    schema_error(p, "required string is missing");
  }
  if (!j.at(key).is_string()) schema_error(p, "expected a string");
  return j.at(key).get<std::string>();
}

bool boolean(const json& j, const std::string& path, const char* key, bool def) {
  if (!j.contains(key)) return def;
  if (!j.at(key).is_boolean()) schema_error(join(path, key), "expected true or false");
  return j.at(key).get<bool>();
}

const json& array(const json& j, const std::string& path, const char* key) {
  static const json empty = json::array();
  if (!j.contains(key)) return empty;
  if (!j.at(key).is_array()) schema_error(join(path, key), "expected an array");
  return j.at(key);
}

GaussianPulse parse_pulse(const json& j, const std::string& path) {
  check_object(j, path, {"energy_ev", "sigma_ev", "amplitude", "phase_rad"});
  GaussianPulse p;
  p.omega = positive(j, path, "energy_ev");
  p.sigma = positive(j, path, "sigma_ev");
  p.amplitude = number(j, path, "amplitude", 1.0);
  if (p.amplitude < 0.0) schema_error(join(path, "amplitude"), "must be >= 0");
  p.phase = number(j, path, "phase_rad", 0.0);
  return p;
}

LevelStructure parse_structure(const json& j, const std::string& path) {
  check_object(j, path, {"ionization_threshold_ev", "mu_continuum", "xuv_resonances", "final_resonances", "bound_levels"});
  LevelStructure s;
  s.ionization_threshold = number(j, path, "ionization_threshold_ev", 0.0);
  s.mu_continuum = number(j, path, "mu_continuum", 1.0);
  const json& xr = array(j, path, "xuv_resonances");
  for (std::size_t i = 0; i < xr.size(); ++i) {
    const std::string p = join(join(path, "xuv_resonances"), i);
    check_object(xr[i], p, {"omega_ev", "gamma_ev", "q", "beta"});
    s.xuv_resonances.push_back({positive(xr[i], p, "omega_ev"), positive(xr[i], p, "gamma_ev"), number(xr[i], p, "q"),
                                number(xr[i], p, "beta", 0.0)});
  }
  const json& fr = array(j, path, "final_resonances");
  if (fr.size() > 1) schema_error(join(path, "final_resonances"), "at most one final-manifold resonance is supported");
  for (std::size_t i = 0; i < fr.size(); ++i) {
    const std::string p = join(join(path, "final_resonances"), i);
    check_object(fr[i], p,
                 {"omega_ev", "gamma_ev", "q_ba", "q_ab", "q_bn", "delta_ba", "xi_ba", "dipole_ratio_b"});
    FinalManifoldResonance b;
    b.omega_bg = positive(fr[i], p, "omega_ev");
    b.gamma_b = positive(fr[i], p, "gamma_ev");
    b.q_ba = number(fr[i], p, "q_ba", 0.0);
    b.q_ab = number(fr[i], p, "q_ab", 0.0);
    const json& qbn = array(fr[i], p, "q_bn");
    for (std::size_t k = 0; k < qbn.size(); ++k) {
      if (!qbn[k].is_number()) schema_error(join(join(p, "q_bn"), k), "expected a number");
      b.q_bn.push_back(qbn[k].get<double>());
    }
    b.delta_ba = number(fr[i], p, "delta_ba", 0.0);
    b.xi_ba = number(fr[i], p, "xi_ba", 0.0);
    b.dipole_ratio_b = number(fr[i], p, "dipole_ratio_b", 0.0);
    s.final_resonances.push_back(std::move(b));
  }
  const json& bl = array(j, path, "bound_levels");
  for (std::size_t i = 0; i < bl.size(); ++i) {
    const std::string p = join(join(path, "bound_levels"), i);
    check_object(bl[i], p, {"omega_ev", "dipole_ratio"});
    s.bound_levels.push_back({positive(bl[i], p, "omega_ev"), number(bl[i], p, "dipole_ratio")});
  }
  return s;
}

EnergyGrid parse_energy_grid(const json& j, const std::string& path) {
  check_object(j, path, {"min_ev", "max_ev", "count"});
  EnergyGrid g{number(j, path, "min_ev"), number(j, path, "max_ev"), count(j, path, "count", 16)};
  if (!(g.e_min < g.e_max)) schema_error(join(path, "max_ev"), "must exceed min_ev");
  return g;
}

DelayGrid parse_delay_grid(const json& j, const std::string& path) {
  check_object(j, path, {"min_fs", "max_fs", "count"});
  DelayGrid g{number(j, path, "min_fs"), number(j, path, "max_fs"), count(j, path, "count", 4)};
  if (!(g.tau_min < g.tau_max)) schema_error(join(path, "max_fs"), "must exceed min_fs");
  return g;
}

SignalMode parse_mode(const std::string& v, const std::string& path) {
  if (v == "interference" || v == "interference_only") return SignalMode::InterferenceOnly;
  if (v == "full") return SignalMode::Full;
  schema_error(path, "expected 'interference' or 'full', got '" + v + "'");
}

Lobe parse_lobe(const std::string& v, const std::string& path) {
  if (v == "pos" || v == "positive") return Lobe::Positive;
  if (v == "neg" || v == "negative") return Lobe::Negative;
  schema_error(path, "expected 'pos' or 'neg', got '" + v + "'");
}

WindowKind parse_window_kind(const std::string& v, const std::string& path) {
  if (v == "auto") return WindowKind::Auto;
  if (v == "none") return WindowKind::None;
  if (v == "tukey") return WindowKind::Tukey;
  if (v == "gaussian") return WindowKind::Gaussian;
  schema_error(path, "expected one of auto, none, tukey, gaussian; got '" + v + "'");
}

PipelineConfig parse_pipeline(const json& j, const std::string& path) {
  check_object(j, path,
               {"zeta", "window", "lobe", "sigma_eff_ev", "correction", "band_sigmas", "keep_full_map_artifacts",
                "diagnostic_raw_metrics"});
  PipelineConfig c;
  c.zeta = positive(j, path, "zeta", 1e-3);
  if (j.contains("window")) {
    const std::string p = join(path, "window");
    const json& w = j.at("window");
    check_object(w, p, {"kind", "alpha", "width_fs"});
    c.window.kind = parse_window_kind(text(w, p, "kind", std::string("auto")), join(p, "kind"));
    c.window.alpha = number(w, p, "alpha", 0.25);
    if (c.window.alpha < 0.0 || c.window.alpha > 1.0) schema_error(join(p, "alpha"), "must lie in [0, 1]");
    c.window.width_fs = positive(w, p, "width_fs", 100.0);
  }
  c.lobe = parse_lobe(text(j, path, "lobe", std::string("pos")), join(path, "lobe"));
  if (j.contains("sigma_eff_ev") && !j.at("sigma_eff_ev").is_null()) c.sigma_eff = positive(j, path, "sigma_eff_ev");
  c.correction = boolean(j, path, "correction", true);
  c.band_sigmas = positive(j, path, "band_sigmas", 4.0);
  c.keep_full_map_artifacts = boolean(j, path, "keep_full_map_artifacts", false);
  c.diagnostic_raw_metrics = boolean(j, path, "diagnostic_raw_metrics", false);
  return c;
}

const std::set<std::string>& output_kinds() {
  static const std::set<std::string> k{"interferogram", "interferogram_full", "fourier_map", "density_matrix",
                                       "theory_matrix", "report", "heatmap"};
  return k;
}

json pulse_json(const GaussianPulse& p) {
  return {{"energy_ev", p.omega}, {"sigma_ev", p.sigma}, {"amplitude", p.amplitude}, {"phase_rad", p.phase}};
}

json structure_json(const LevelStructure& s) {
  json j = {{"ionization_threshold_ev", s.ionization_threshold}, {"mu_continuum", s.mu_continuum}};
  json xr = json::array();
  for (const auto& r : s.xuv_resonances) {
    xr.push_back({{"omega_ev", r.omega_ag}, {"gamma_ev", r.gamma_a}, {"q", r.q_ag}, {"beta", r.beta}});
  }
  j["xuv_resonances"] = xr;
  json fr = json::array();
  for (const auto& b : s.final_resonances) {
    fr.push_back({{"omega_ev", b.omega_bg},
                  {"gamma_ev", b.gamma_b},
                  {"q_ba", b.q_ba},
                  {"q_ab", b.q_ab},
                  {"q_bn", b.q_bn},
                  {"delta_ba", b.delta_ba},
                  {"xi_ba", b.xi_ba},
                  {"dipole_ratio_b", b.dipole_ratio_b}});
  }
  j["final_resonances"] = fr;
  json bl = json::array();
  for (const auto& n : s.bound_levels) bl.push_back({{"omega_ev", n.omega_ng}, {"dipole_ratio", n.dipole_ratio_n}});
  j["bound_levels"] = bl;
  return j;
}

json energy_grid_json(const EnergyGrid& g) { return {{"min_ev", g.e_min}, {"max_ev", g.e_max}, {"count", g.n}}; }

const char* mode_key(SignalMode m) { return m == SignalMode::Full ? "full" : "interference"; }

void revalidate(const Scenario& s) {
  validate(s.pulses.xuv, "pulses.xuv");
  validate(s.pulses.ir_ref, "pulses.ir_ref");
  validate(s.pulses.ir_probe, "pulses.ir_probe");
  validate(s.e_grid);
  validate(s.tau_grid);
  validate_channels(s.channels);
  validate(s.pipeline, s.pulses.xuv);
  if (s.target_axis) validate(*s.target_axis);
}

}  // namespace

Scenario parse_scenario(const std::string& body, const std::string& origin) {
  json root;
  try {
    root = json::parse(body, nullptr, true, true);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::Schema, origin + ": not valid JSON (" + e.what() + ")");
  }
  try {
    check_object(root, "",
                 {"schema", "name", "description", "pulses", "structure", "channels", "energy_grid", "delay_grid",
                  "target_axis", "mode", "pipeline", "threads", "outputs"});
    const std::string schema = text(root, "", "schema");
    if (schema != kScenarioSchema) {
      schema_error("schema", "unsupported version '" + schema + "', expected '" + kScenarioSchema + "'");
    }
    Scenario s;
    s.name = text(root, "", "name");
    if (s.name.empty() || s.name.find_first_of(" /\\\t\n") != std::string::npos) {
      schema_error("name", "must be a non-empty identifier without spaces or slashes");
    }
    s.description = text(root, "", "description", std::string());

    if (!root.contains("pulses")) schema_error("pulses", "required object is missing");
    const json& pj = root.at("pulses");
    check_object(pj, "pulses", {"xuv", "ir_ref", "ir_probe"});
    for (const char* k : {"xuv", "ir_ref", "ir_probe"}) {
      if (!pj.contains(k)) schema_error(join("pulses", k), "required object is missing");
    }
    s.pulses.xuv = parse_pulse(pj.at("xuv"), "pulses.xuv");
    s.pulses.ir_ref = parse_pulse(pj.at("ir_ref"), "pulses.ir_ref");
    s.pulses.ir_probe = parse_pulse(pj.at("ir_probe"), "pulses.ir_probe");

    const bool has_structure = root.contains("structure");
    const bool has_channels = root.contains("channels");
    if (has_structure == has_channels) schema_error("channels", "give exactly one of 'structure' or 'channels'");
    if (has_structure) {
      s.channels.push_back({0.0, 1.0, parse_structure(root.at("structure"), "structure")});
    } else {
      const json& cj = array(root, "", "channels");
      if (cj.empty()) schema_error("channels", "must contain at least one channel");
      for (std::size_t i = 0; i < cj.size(); ++i) {
        const std::string p = join("channels", i);
        check_object(cj[i], p, {"label", "threshold_shift_ev", "weight", "structure"});
        if (cj[i].contains("label")) text(cj[i], p, "label");
        IonChannel c;
        c.threshold_shift = number(cj[i], p, "threshold_shift_ev", 0.0);
        c.weight = number(cj[i], p, "weight");
        if (c.weight < 0.0) schema_error(join(p, "weight"), "must be >= 0");
        if (!cj[i].contains("structure")) schema_error(join(p, "structure"), "required object is missing");
        c.structure = parse_structure(cj[i].at("structure"), join(p, "structure"));
        s.channels.push_back(std::move(c));
      }
      double total = 0.0;
      for (const auto& c : s.channels) total += c.weight;
      if (std::abs(total - 1.0) > 1e-9) {
        std::ostringstream os;
        os << "weights sum to " << total << ", expected 1";
        schema_error("channels", os.str());
      }
    }

    if (!root.contains("energy_grid")) schema_error("energy_grid", "required object is missing");
    s.e_grid = parse_energy_grid(root.at("energy_grid"), "energy_grid");
    if (!root.contains("delay_grid")) schema_error("delay_grid", "required object is missing");
    s.tau_grid = parse_delay_grid(root.at("delay_grid"), "delay_grid");
    if (root.contains("target_axis")) s.target_axis = parse_energy_grid(root.at("target_axis"), "target_axis");
    s.mode = parse_mode(text(root, "", "mode", std::string("interference")), "mode");
    if (root.contains("pipeline")) s.pipeline = parse_pipeline(root.at("pipeline"), "pipeline");
    if (root.contains("threads")) s.threads = count(root, "", "threads", 0);

    const json& oj = array(root, "", "outputs");
    for (std::size_t i = 0; i < oj.size(); ++i) {
      const std::string p = join("outputs", i);
      check_object(oj[i], p, {"kind", "file"});
      OutputRequest o{text(oj[i], p, "kind"), text(oj[i], p, "file")};
      if (!output_kinds().count(o.kind)) schema_error(join(p, "kind"), "unknown output kind '" + o.kind + "'");
      if (o.file.empty() || o.file.find("..") != std::string::npos || o.file.front() == '/') {
        schema_error(join(p, "file"), "must be a relative path inside the output directory");
      }
      s.outputs.push_back(std::move(o));
    }

    try {
      revalidate(s);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Schema) throw;
      schema_error("", e.what());
    }
    return s;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Schema) throw;
    fail(ErrorCode::Schema, origin + ": " + e.what());
  }
}

Scenario load_scenario(const std::string& arg) {
  constexpr std::string_view prefix = "bundled:";
  if (arg.rfind(prefix, 0) == 0) {
    const std::string name = arg.substr(prefix.size());
    return parse_scenario(bundled_scenario_text(name), arg);
  }
  std::ifstream is(arg, std::ios::binary);
  if (!is) fail(ErrorCode::Io, "cannot open scenario '" + arg + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_scenario(ss.str(), arg);
}

std::string scenario_to_json(const Scenario& s) {
  json j;
  j["schema"] = kScenarioSchema;
  j["name"] = s.name;
  if (!s.description.empty()) j["description"] = s.description;
  j["pulses"] = {{"xuv", pulse_json(s.pulses.xuv)},
                 {"ir_ref", pulse_json(s.pulses.ir_ref)},
                 {"ir_probe", pulse_json(s.pulses.ir_probe)}};
  json ch = json::array();
  for (const auto& c : s.channels) {
    ch.push_back({{"threshold_shift_ev", c.threshold_shift}, {"weight", c.weight}, {"structure", structure_json(c.structure)}});
  }
  j["channels"] = ch;
  j["energy_grid"] = energy_grid_json(s.e_grid);
  j["delay_grid"] = {{"min_fs", s.tau_grid.tau_min}, {"max_fs", s.tau_grid.tau_max}, {"count", s.tau_grid.n}};
  if (s.target_axis) j["target_axis"] = energy_grid_json(*s.target_axis);
  j["mode"] = mode_key(s.mode);
  const auto& p = s.pipeline;
  json pj = {{"zeta", p.zeta},
             {"window",
              {{"kind", window_kind_name(p.window.kind)}, {"alpha", p.window.alpha}, {"width_fs", p.window.width_fs}}},
             {"lobe", p.lobe == Lobe::Positive ? "pos" : "neg"}};
  pj["sigma_eff_ev"] = p.sigma_eff ? json(*p.sigma_eff) : json(nullptr);
  pj["correction"] = p.correction;
  pj["band_sigmas"] = p.band_sigmas;
  pj["keep_full_map_artifacts"] = p.keep_full_map_artifacts;
  pj["diagnostic_raw_metrics"] = p.diagnostic_raw_metrics;
  j["pipeline"] = pj;
  j["threads"] = s.threads;
  json oj = json::array();
  for (const auto& o : s.outputs) oj.push_back({{"kind", o.kind}, {"file", o.file}});
  j["outputs"] = oj;
  return j.dump(2) + "\n";
}

std::vector<std::string> bundled_scenario_names() {
  std::vector<std::string> out;
  for (const auto& b : detail::bundled_scenarios()) out.emplace_back(b.name);
  return out;
}

const std::string& bundled_scenario_text(const std::string& name) {
  static const auto table = [] {
    std::vector<std::pair<std::string, std::string>> t;
    for (const auto& b : detail::bundled_scenarios()) t.emplace_back(b.name, b.text);
    return t;
  }();
  for (const auto& [n, t] : table) {
    if (n == name) return t;
  }
  std::string known;
  for (const auto& [n, t] : table) known += (known.empty() ? "" : ", ") + n;
  fail(ErrorCode::NotFound, "no bundled scenario named '" + name + "' (available: " + known + ")");
}

std::vector<std::string> parameter_names() {
  return {"sigma_xuv",      "sigma_ir_probe", "sigma_ir_ref",    "omega_xuv", "amplitude_ir_probe",
          "amplitude_ir_ref", "zeta",         "sigma_eff",       "band_sigmas", "threshold_split",
          "threads",        "tau_count",      "energy_count"};
}

void set_parameter(Scenario& s, const std::string& name, double v) {
  if (!std::isfinite(v)) fail(ErrorCode::Config, "parameter '" + name + "' must be finite");
  auto integer = [&](int min) {
    if (v != std::floor(v) || v < min || v > (1 << 20)) {
      fail(ErrorCode::Config, "parameter '" + name + "' must be an integer >= " + std::to_string(min));
    }
    return static_cast<int>(v);
  };
  if (name == "sigma_xuv") {
    s.pulses.xuv.sigma = v;
  } else if (name == "sigma_ir_probe") {
    s.pulses.ir_probe.sigma = v;
  } else if (name == "sigma_ir_ref") {
    s.pulses.ir_ref.sigma = v;
  } else if (name == "omega_xuv") {
    s.pulses.xuv.omega = v;
  } else if (name == "amplitude_ir_probe") {
    s.pulses.ir_probe.amplitude = v;
  } else if (name == "amplitude_ir_ref") {
    s.pulses.ir_ref.amplitude = v;
  } else if (name == "zeta") {
    s.pipeline.zeta = v;
  } else if (name == "sigma_eff") {
    s.pipeline.sigma_eff = v > 0.0 ? std::optional<double>(v) : std::nullopt;
  } else if (name == "band_sigmas") {
    s.pipeline.band_sigmas = v;
  } else if (name == "threshold_split") {
    if (s.channels.size() < 2) fail(ErrorCode::Config, "threshold_split needs at least two channels");
    s.channels[1].threshold_shift = s.channels[0].threshold_shift + v;
  } else if (name == "threads") {
    s.threads = integer(0);
  } else if (name == "tau_count") {
    s.tau_grid.n = integer(4);
  } else if (name == "energy_count") {
    s.e_grid.n = integer(16);
    if (s.target_axis) s.target_axis->n = s.e_grid.n;
  } else {
    std::string known;
    for (const auto& n : parameter_names()) known += (known.empty() ? "" : ", ") + n;
    fail(ErrorCode::Config, "unknown parameter '" + name + "' (known: " + known + ")");
  }
  try {
    revalidate(s);
  } catch (const Error& e) {
    fail(ErrorCode::Config, "parameter '" + name + "': " + e.what());
  }
}

void set_option(Scenario& s, const std::string& name, const std::string& value) {
  try {
    if (name == "mode") {
      s.mode = parse_mode(value, name);
    } else if (name == "lobe") {
      s.pipeline.lobe = parse_lobe(value, name);
    } else if (name == "window") {
      s.pipeline.window.kind = parse_window_kind(value, name);
    } else if (name == "correction") {
      if (value != "on" && value != "off") schema_error(name, "expected 'on' or 'off'");
      s.pipeline.correction = value == "on";
    } else {
      fail(ErrorCode::Config, "unknown option '" + name + "' (known: mode, lobe, window, correction)");
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Schema) throw;
    fail(ErrorCode::Config, e.what());
  }
}

std::string get_option(const Scenario& s, const std::string& name) {
  if (name == "mode") return mode_key(s.mode);
  if (name == "lobe") return s.pipeline.lobe == Lobe::Positive ? "pos" : "neg";
  if (name == "window") return window_kind_name(s.pipeline.window.kind);
  if (name == "correction") return s.pipeline.correction ? "on" : "off";
  fail(ErrorCode::Config, "unknown option '" + name + "' (known: mode, lobe, window, correction)");
}

ProbeGeometry probe_geometry(const Scenario& s) {
  ProbeGeometry g;
  g.pulses = s.pulses;
  for (const auto& c : s.channels) g.energy_offset += c.weight * (c.structure.ionization_threshold + c.threshold_shift);
  return g;
}

std::optional<FeatureHint> feature_hint(const Scenario& s) {
  for (const auto& c : s.channels) {
    if (!c.structure.xuv_resonances.empty()) {
      return FeatureHint{c.structure.xuv_resonances.front(), c.structure.ionization_threshold + c.threshold_shift};
    }
  }
  return std::nullopt;
}

EnergyGrid reconstruction_axis(const Scenario& s) {
  return s.target_axis.value_or(default_target_axis(s.e_grid, s.pulses.ir_ref.omega));
}

}  // namespace rktomo
