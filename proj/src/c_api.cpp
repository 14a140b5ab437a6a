#include "rktomo/rktomo.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <mutex>
#include <new>
#include <stdexcept>
#include <string>
#include <variant>

#include "rktomo/error.hpp"
#include "rktomo/figures.hpp"
#include "rktomo/gridio.hpp"
#include "rktomo/metrics.hpp"
#include "rktomo/scenario.hpp"
#include "rktomo/workflow.hpp"

struct rkt_scenario {
  rktomo::Scenario value;
};

struct rkt_grid {
  std::variant<rktomo::Interferogram, rktomo::FourierMap, rktomo::DensityMatrix> value;
};

namespace {

thread_local std::string last_error;

struct Callback {
  std::mutex mutex;
  rkt_warning_fn fn = nullptr;
  void* user = nullptr;
};

Callback& callback() {
  static Callback c;
  return c;
}

rkt_status record(rkt_status status, const std::string& message) {
  last_error = message;
  return status;
}

// Runs fn and converts exceptions to status codes. Nothing escapes the C boundary.
template <class Fn>
rkt_status call(Fn&& fn) {
  last_error.clear();
  try {
    fn();
    return RKT_OK;
  } catch (const rktomo::Error& e) {
    return record(static_cast<rkt_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::invalid_argument& e) {
    return record(RKT_E_ARGUMENT, std::string("invalid argument: ") + e.what());
  } catch (const std::bad_alloc&) {
    return record(RKT_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return record(RKT_E_INTERNAL, e.what());
  } catch (...) {
    return record(RKT_E_INTERNAL, "unknown failure");
  }
}

[[noreturn]] void argument_error(const char* what) { throw std::invalid_argument(what); }

template <class T>
void require(const T* p, const char* name) {
  if (!p) argument_error(name);
}

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

rktomo::GridFile to_file(const rkt_grid& g) {
  return std::visit([](const auto& v) { return rktomo::to_grid(v); }, g.value);
}

const rktomo::DensityMatrix& density(const rkt_grid* g, const char* name) {
  require(g, name);
  const auto* rho = std::get_if<rktomo::DensityMatrix>(&g->value);
  if (!rho) throw std::invalid_argument(std::string(name) + " is not a density matrix");
  return *rho;
}

}  // namespace

extern "C" {

const char* rkt_version(void) { return "1.0.0"; }

const char* rkt_status_name(rkt_status status) {
  if (status == RKT_OK) return "ok";
  if (status == RKT_E_ARGUMENT) return "argument";
  if (status >= RKT_E_DOMAIN && status <= RKT_E_INTERNAL) {
    return rktomo::error_code_name(static_cast<rktomo::ErrorCode>(static_cast<int>(status)));
  }
  return "unknown";
}

const char* rkt_last_error(void) { return last_error.c_str(); }

void rkt_string_free(char* s) { std::free(s); }

void rkt_set_warning_callback(rkt_warning_fn fn, void* user) {
  Callback& cb = callback();
  {
    std::lock_guard lock(cb.mutex);
    cb.fn = fn;
    cb.user = user;
  }
  if (!fn) {
    rktomo::set_warning_handler(nullptr);
    return;
  }
  rktomo::set_warning_handler([](std::string_view msg) {
    Callback& c = callback();
    std::lock_guard lock(c.mutex);
    if (c.fn) {
      const std::string copy(msg);
      c.fn(copy.c_str(), c.user);
    }
  });
}

rkt_status rkt_scenario_load(const char* path, rkt_scenario** out) {
  return call([&] {
    require(path, "path");
    require(out, "out");
    *out = new rkt_scenario{rktomo::load_scenario(path)};
  });
}

rkt_status rkt_scenario_parse(const char* json_text, rkt_scenario** out) {
  return call([&] {
    require(json_text, "json_text");
    require(out, "out");
    *out = new rkt_scenario{rktomo::parse_scenario(json_text)};
  });
}

rkt_status rkt_scenario_clone(const rkt_scenario* s, rkt_scenario** out) {
  return call([&] {
    require(s, "scenario");
    require(out, "out");
    *out = new rkt_scenario{s->value};
  });
}

rkt_status rkt_scenario_bundled_names(char** out) {
  return call([&] {
    require(out, "out");
    std::string names;
    for (const auto& n : rktomo::bundled_scenario_names()) names += n + "\n";
    *out = duplicate(names);
  });
}

rkt_status rkt_scenario_set_number(rkt_scenario* s, const char* name, double value) {
  return call([&] {
    require(s, "scenario");
    require(name, "name");
    rktomo::Scenario copy = s->value;
    rktomo::set_parameter(copy, name, value);
    s->value = std::move(copy);
  });
}

rkt_status rkt_scenario_set_option(rkt_scenario* s, const char* name, const char* value) {
  return call([&] {
    require(s, "scenario");
    require(name, "name");
    require(value, "value");
    rktomo::set_option(s->value, name, value);
  });
}

rkt_status rkt_scenario_get_option(const rkt_scenario* s, const char* name, char** out) {
  return call([&] {
    require(s, "scenario");
    require(name, "name");
    require(out, "out");
    *out = duplicate(rktomo::get_option(s->value, name));
  });
}

rkt_status rkt_scenario_name(const rkt_scenario* s, char** out) {
  return call([&] {
    require(s, "scenario");
    require(out, "out");
    *out = duplicate(s->value.name);
  });
}

rkt_status rkt_scenario_to_json(const rkt_scenario* s, char** out) {
  return call([&] {
    require(s, "scenario");
    require(out, "out");
    *out = duplicate(rktomo::scenario_to_json(s->value));
  });
}

rkt_status rkt_scenario_outputs(const rkt_scenario* s, char** out) {
  return call([&] {
    require(s, "scenario");
    require(out, "out");
    std::string lines;
    for (const auto& o : s->value.outputs) lines += o.kind + "\t" + o.file + "\n";
    *out = duplicate(lines);
  });
}

void rkt_scenario_free(rkt_scenario* s) { delete s; }

rkt_status rkt_simulate(const rkt_scenario* s, rkt_mode mode, rkt_grid** out) {
  return call([&] {
    require(s, "scenario");
    require(out, "out");
    std::optional<rktomo::SignalMode> m;
    if (mode == RKT_MODE_INTERFERENCE) {
      m = rktomo::SignalMode::InterferenceOnly;
    } else if (mode == RKT_MODE_FULL) {
      m = rktomo::SignalMode::Full;
    } else if (mode != RKT_MODE_SCENARIO) {
      argument_error("mode");
    }
    *out = new rkt_grid{rktomo::simulate(s->value, m)};
  });
}

rkt_status rkt_theory_matrix(const rkt_scenario* s, int oversample, rkt_grid** out) {
  return call([&] {
    require(s, "scenario");
    require(out, "out");
    *out = new rkt_grid{rktomo::theory_matrix(s->value, oversample)};
  });
}

rkt_status rkt_reconstruct(const rkt_scenario* s, const rkt_grid* scan, rkt_grid** rho, rkt_grid** fourier_map,
                           char** report_json) {
  return call([&] {
    require(s, "scenario");
    require(scan, "interferogram");
    require(rho, "rho");
    const auto* in = std::get_if<rktomo::Interferogram>(&scan->value);
    if (!in) rktomo::fail(rktomo::ErrorCode::Data, "reconstruct: input grid is not an interferogram");
    rktomo::Scenario sc = s->value;
    if (fourier_map) sc.pipeline.keep_full_map_artifacts = true;
    rktomo::PipelineResult r = rktomo::reconstruct(sc, *in);
    std::string report = report_json ? rktomo::report_to_json(r.report, sc) : std::string();
    auto rho_handle = std::make_unique<rkt_grid>(rkt_grid{std::move(r.rho)});
    std::unique_ptr<rkt_grid> map_handle;
    if (fourier_map) map_handle = std::make_unique<rkt_grid>(rkt_grid{std::move(r.artifacts->corrected)});
    char* report_c = report_json ? duplicate(report) : nullptr;
    *rho = rho_handle.release();
    if (fourier_map) *fourier_map = map_handle.release();
    if (report_json) *report_json = report_c;
  });
}

rkt_status rkt_sweep(const rkt_scenario* s, const char* parameter, const double* values, size_t count, int threads,
                     char** table_tsv, char** figure_svg) {
  return call([&] {
    require(s, "scenario");
    require(parameter, "parameter");
    require(table_tsv, "table_tsv");
    if (count > 0) require(values, "values");
    const std::vector<double> v(values, values + count);
    const auto rows = rktomo::run_sweep(s->value, parameter, v, threads);
    char* table = duplicate(rktomo::sweep_to_tsv(rows, parameter));
    if (figure_svg) {
      try {
        *figure_svg = duplicate(rktomo::render_sweep_svg(rows, parameter));
      } catch (...) {
        std::free(table);
        throw;
      }
    }
    *table_tsv = table;
  });
}

rkt_status rkt_fidelity(const rkt_grid* a, const rkt_grid* b, double* out) {
  return call([&] {
    require(out, "out");
    *out = rktomo::fidelity(density(a, "a"), density(b, "b"));
  });
}

rkt_status rkt_purity(const rkt_grid* rho, double* out) {
  return call([&] {
    require(out, "out");
    *out = rktomo::purity(density(rho, "rho"));
  });
}

rkt_status rkt_metrics_json(const rkt_grid* rho, const rkt_grid* reference, char** out) {
  return call([&] {
    require(out, "out");
    const auto& r = density(rho, "rho");
    const rktomo::DensityMatrix* ref = reference ? &density(reference, "reference") : nullptr;
    *out = duplicate(rktomo::metrics_to_json(r, ref));
  });
}

rkt_status rkt_oracle_check(const rkt_scenario* s, int points, double* max_rel_error, char** report_json) {
  return call([&] {
    require(s, "scenario");
    const auto samples = rktomo::oracle_check(s->value, points);
    double worst = 0.0;
    for (const auto& o : samples) worst = std::max(worst, o.rel_error);
    if (max_rel_error) *max_rel_error = worst;
    if (report_json) *report_json = duplicate(rktomo::oracle_to_json(samples));
  });
}

rkt_status rkt_grid_read(const char* path, rkt_grid** out) {
  return call([&] {
    require(path, "path");
    require(out, "out");
    const rktomo::GridFile g = rktomo::read_grid(path);
    if (g.kind == "interferogram") {
      *out = new rkt_grid{rktomo::interferogram_from_grid(g)};
    } else if (g.kind == "fourier_map") {
      *out = new rkt_grid{rktomo::fourier_map_from_grid(g)};
    } else if (g.kind == "density_matrix") {
      *out = new rkt_grid{rktomo::density_matrix_from_grid(g)};
    } else {
      rktomo::fail(rktomo::ErrorCode::Data, std::string(path) + ": unknown grid kind '" + g.kind + "'");
    }
  });
}

rkt_status rkt_grid_write(const rkt_grid* g, const char* path, int binary) {
  return call([&] {
    require(g, "grid");
    require(path, "path");
    rktomo::write_grid(path, to_file(*g), binary ? rktomo::GridFormat::Binary : rktomo::GridFormat::Text);
  });
}

rkt_status rkt_grid_info_get(const rkt_grid* g, rkt_grid_info* out) {
  return call([&] {
    require(g, "grid");
    require(out, "out");
    const rktomo::GridFile f = to_file(*g);
    rkt_grid_info info{};
    info.kind = static_cast<rkt_grid_kind>(g->value.index());
    info.rows = f.rows.count;
    info.cols = f.cols.count;
    info.is_complex = f.complex_values ? 1 : 0;
    info.row_min = f.rows.min;
    info.row_max = f.rows.max;
    info.col_min = f.cols.min;
    info.col_max = f.cols.max;
    *out = info;
  });
}

rkt_status rkt_grid_copy_values(const rkt_grid* g, double* buffer, size_t count) {
  return call([&] {
    require(g, "grid");
    require(buffer, "buffer");
    const rktomo::GridFile f = to_file(*g);
    if (count != f.data.size()) {
      throw std::invalid_argument("buffer holds " + std::to_string(count) + " values, grid has " +
                                  std::to_string(f.data.size()));
    }
    std::copy(f.data.begin(), f.data.end(), buffer);
  });
}

rkt_status rkt_grid_write_png(const rkt_grid* g, const char* path) {
  return call([&] {
    require(g, "grid");
    require(path, "path");
    std::visit(
        [&](const auto& v) { rktomo::write_heatmap_png(v.values.cwiseAbs(), path); },
        g->value);
  });
}

void rkt_grid_free(rkt_grid* g) { delete g; }

}  // extern "C"
