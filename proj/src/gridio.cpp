#include "rktomo/gridio.hpp"

#include <bit>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "rktomo/error.hpp"

namespace rktomo {
namespace {

constexpr const char* kTextMagic = "#RKGRID 1";
constexpr const char* kBinaryMagic = "#RKGRIDB 1";

static_assert(sizeof(double) == 8);

[[noreturn]] void data_error(std::size_t offset, const std::string& what) {
  fail(ErrorCode::Data, "grid file, byte " + std::to_string(offset) + ": " + what);
}

// Cursor over the raw bytes that remembers where each token started.
class Reader {
 public:
  explicit Reader(const std::string& b) : b_(b) {}

  std::size_t pos() const { return pos_; }
  bool at_end() const { return pos_ >= b_.size(); }
  void skip_space() {
    while (pos_ < b_.size() && std::isspace(static_cast<unsigned char>(b_[pos_]))) ++pos_;
  }

  // Next header line without the newline; a missing newline is truncation.
  std::string line() {
    const std::size_t nl = b_.find('\n', pos_);
    if (nl == std::string::npos) data_error(b_.size(), "unexpected end of file in header");
    std::string out = b_.substr(pos_, nl - pos_);
    if (!out.empty() && out.back() == '\r') out.pop_back();
    pos_ = nl + 1;
    return out;
  }

  double number() {
    skip_space();
    if (pos_ >= b_.size()) data_error(pos_, "unexpected end of file in data section");
    double v = 0.0;
    const char* first = b_.data() + pos_;
    const char* last = b_.data() + b_.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc()) {
      // from_chars rejects "inf" spelled with a sign prefix
      if (*first == '+') {
        auto r = std::from_chars(first + 1, last, v);
        ptr = r.ptr;
        ec = r.ec;
      }
      if (ec != std::errc()) data_error(pos_, "malformed number");
    }
    pos_ += static_cast<std::size_t>(ptr - first);
    return v;
  }

  void raw(double* out, std::size_t count) {
    const std::size_t need = count * 8;
    if (b_.size() - pos_ < need) {
      data_error(b_.size(), "binary payload truncated: expected " + std::to_string(need) + " bytes after offset " +
                                std::to_string(pos_) + ", found " + std::to_string(b_.size() - pos_));
    }
    for (std::size_t i = 0; i < count; ++i) {
      std::uint64_t u = 0;
      for (int k = 7; k >= 0; --k) u = (u << 8) | static_cast<unsigned char>(b_[pos_ + i * 8 + k]);
      out[i] = std::bit_cast<double>(u);
    }
    pos_ += need;
  }

 private:
  const std::string& b_;
  std::size_t pos_ = 0;
};

std::vector<std::string> split(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string t; is >> t;) out.push_back(t);
  return out;
}

double parse_header_double(const std::string& tok, std::size_t offset) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) data_error(offset, "malformed number '" + tok + "'");
  return v;
}

int parse_header_int(const std::string& tok, std::size_t offset) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || v <= 0) {
    data_error(offset, "axis count must be a positive integer, got '" + tok + "'");
  }
  return v;
}

void write_header(std::ostream& os, const GridFile& g, bool binary) {
  os << (binary ? kBinaryMagic : kTextMagic) << '\n';
  os << "kind " << g.kind << '\n';
  os << "value_type " << (g.complex_values ? "complex" : "real") << '\n';
  for (const GridAxis* a : {&g.rows, &g.cols}) {
    os << "axis " << a->name << ' ' << format_double(a->min) << ' ' << format_double(a->max) << ' ' << a->count << ' '
       << a->unit << '\n';
  }
  for (const auto& [k, v] : g.meta) os << "meta " << k << ' ' << v << '\n';
  os << "data\n";
}

std::size_t expected_values(const GridFile& g) {
  return static_cast<std::size_t>(g.rows.count) * g.cols.count * (g.complex_values ? 2 : 1);
}

const std::string& require_meta(const GridFile& g, const std::string& key) {
  const std::string* v = g.find_meta(key);
  if (!v) fail(ErrorCode::Data, "grid file: missing meta entry '" + key + "'");
  return *v;
}

void require_kind(const GridFile& g, const char* kind, bool complex_values) {
  if (g.kind != kind) fail(ErrorCode::Data, "grid file holds '" + g.kind + "', expected '" + kind + "'");
  if (g.complex_values != complex_values) {
    fail(ErrorCode::Data, std::string("grid file value type must be ") + (complex_values ? "complex" : "real"));
  }
}

EnergyGrid energy_axis(const GridAxis& a) { return {a.min, a.max, a.count}; }
GridAxis energy_axis(const char* name, const EnergyGrid& g) { return {name, g.e_min, g.e_max, g.n, "eV"}; }

const char* mode_name(SignalMode m) { return m == SignalMode::Full ? "full" : "interference"; }

SignalMode parse_mode(const GridFile& g) {
  const std::string* m = g.find_meta("mode");
  if (!m || *m == "interference") return SignalMode::InterferenceOnly;
  if (*m == "full") return SignalMode::Full;
  fail(ErrorCode::Data, "grid file: unknown mode '" + *m + "'");
}

Eigen::MatrixXcd complex_matrix(const GridFile& g) {
  Eigen::MatrixXcd m(g.rows.count, g.cols.count);
  std::size_t k = 0;
  for (int r = 0; r < g.rows.count; ++r) {
    for (int c = 0; c < g.cols.count; ++c, k += 2) m(r, c) = Complex(g.data[k], g.data[k + 1]);
  }
  return m;
}

void put_complex(GridFile& g, const Eigen::MatrixXcd& m) {
  g.complex_values = true;
  g.data.resize(static_cast<std::size_t>(m.size()) * 2);
  std::size_t k = 0;
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) {
      g.data[k++] = m(r, c).real();
      g.data[k++] = m(r, c).imag();
    }
  }
}

}  // namespace

const std::string* GridFile::find_meta(const std::string& key) const {
  for (const auto& [k, v] : meta) {
    if (k == key) return &v;
  }
  return nullptr;
}

std::string format_double(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) fail(ErrorCode::Internal, "format_double: buffer too small");
  return std::string(buf, ptr);
}

std::string encode_grid(const GridFile& g, GridFormat format) {
  if (g.data.size() != expected_values(g)) {
    fail(ErrorCode::Contract, "encode_grid: data size does not match the axes");
  }
  std::ostringstream os;
  const bool binary = format == GridFormat::Binary;
  write_header(os, g, binary);
  if (binary) {
    std::string payload(g.data.size() * 8, '\0');
    for (std::size_t i = 0; i < g.data.size(); ++i) {
      std::uint64_t u = std::bit_cast<std::uint64_t>(g.data[i]);
      for (int k = 0; k < 8; ++k, u >>= 8) payload[i * 8 + k] = static_cast<char>(u & 0xff);
    }
    os << payload;
    return os.str();
  }
  const int per_row = g.cols.count * (g.complex_values ? 2 : 1);
  std::size_t k = 0;
  std::string line;
  for (int r = 0; r < g.rows.count; ++r) {
    line.clear();
    for (int c = 0; c < per_row; ++c) {
      if (c) line += ' ';
      line += format_double(g.data[k++]);
    }
    line += '\n';
    os << line;
  }
  return os.str();
}

GridFile decode_grid(const std::string& bytes) {
  Reader rd(bytes);
  const std::string magic = rd.line();
  bool binary = false;
  if (magic == kBinaryMagic) {
    binary = true;
  } else if (magic != kTextMagic) {
    data_error(0, "not a grid file (expected '" + std::string(kTextMagic) + "' or '" + kBinaryMagic + "')");
  }

  GridFile g;
  int axes = 0;
  bool have_kind = false, have_type = false;
  for (;;) {
    const std::size_t at = rd.pos();
    const std::string ln = rd.line();
    if (ln == "data") break;
    const auto tok = split(ln);
    if (tok.empty()) continue;
    if (tok[0] == "kind" && tok.size() == 2) {
      g.kind = tok[1];
      have_kind = true;
    } else if (tok[0] == "value_type" && tok.size() == 2) {
      if (tok[1] != "real" && tok[1] != "complex") data_error(at, "unknown value_type '" + tok[1] + "'");
      g.complex_values = tok[1] == "complex";
      have_type = true;
    } else if (tok[0] == "axis" && tok.size() == 6) {
      if (axes >= 2) data_error(at, "more than two axes");
      GridAxis& a = axes == 0 ? g.rows : g.cols;
      a.name = tok[1];
      a.min = parse_header_double(tok[2], at);
      a.max = parse_header_double(tok[3], at);
      a.count = parse_header_int(tok[4], at);
      a.unit = tok[5];
      ++axes;
    } else if (tok[0] == "meta" && tok.size() >= 2) {
      const std::size_t key_end = ln.find(tok[1]) + tok[1].size();
      std::string value = key_end < ln.size() ? ln.substr(key_end + 1) : std::string();
      g.meta.emplace_back(tok[1], value);
    } else {
      data_error(at, "unrecognized header line '" + ln + "'");
    }
  }
  if (!have_kind || !have_type || axes != 2) {
    data_error(rd.pos(), "header must define kind, value_type and two axes before 'data'");
  }

  const std::size_t n = expected_values(g);
  g.data.resize(n);
  if (binary) {
    rd.raw(g.data.data(), n);
    if (!rd.at_end()) data_error(rd.pos(), "trailing bytes after binary payload");
    return g;
  }
  for (std::size_t i = 0; i < n; ++i) g.data[i] = rd.number();
  // a cut inside the last number would otherwise parse as a shorter value
  if (bytes.back() != '\n') data_error(bytes.size(), "file truncated inside the last row");
  rd.skip_space();
  if (!rd.at_end()) data_error(rd.pos(), "more values than the axes allow");
  return g;
}

void write_grid(const std::string& path, const GridFile& g, GridFormat format) {
  const std::string bytes = encode_grid(g, format);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) fail(ErrorCode::Io, "cannot open '" + path + "' for writing");
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) fail(ErrorCode::Io, "write to '" + path + "' failed");
}

GridFile read_grid(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::Io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  try {
    return decode_grid(ss.str());
  } catch (const Error& e) {
    fail(e.code(), path + ": " + e.what());
  }
}

GridFile to_grid(const Interferogram& s) {
  GridFile g;
  g.kind = "interferogram";
  g.rows = {"tau", s.tau_grid.tau_min, s.tau_grid.tau_max, s.tau_grid.n, "fs"};
  g.cols = energy_axis("energy", s.e_grid);
  g.meta.emplace_back("mode", mode_name(s.mode));
  g.data.assign(s.values.size(), 0.0);
  std::size_t k = 0;
  for (int r = 0; r < s.values.rows(); ++r) {
    for (int c = 0; c < s.values.cols(); ++c) g.data[k++] = s.values(r, c);
  }
  return g;
}

GridFile to_grid(const FourierMap& m) {
  GridFile g;
  g.kind = "fourier_map";
  g.rows = {"omega_tau", m.omega_tau.start, m.omega_tau.at(m.omega_tau.n - 1), m.omega_tau.n, "eV"};
  g.cols = energy_axis("energy", m.e_grid);
  g.meta.emplace_back("mode", mode_name(m.mode));
  g.meta.emplace_back("omega_step", format_double(m.omega_tau.step));
  put_complex(g, m.values);
  return g;
}

GridFile to_grid(const DensityMatrix& rho) {
  GridFile g;
  g.kind = "density_matrix";
  g.rows = energy_axis("eps2", rho.axis);
  g.cols = energy_axis("eps1", rho.axis);
  g.meta.emplace_back("hermitian", rho.hermitian ? "true" : "false");
  put_complex(g, rho.values);
  return g;
}

Interferogram interferogram_from_grid(const GridFile& g) {
  require_kind(g, "interferogram", false);
  Interferogram s;
  s.tau_grid = {g.rows.min, g.rows.max, g.rows.count};
  s.e_grid = energy_axis(g.cols);
  s.mode = parse_mode(g);
  validate(s.tau_grid);
  validate(s.e_grid);
  s.values.resize(g.rows.count, g.cols.count);
  std::size_t k = 0;
  for (int r = 0; r < g.rows.count; ++r) {
    for (int c = 0; c < g.cols.count; ++c) s.values(r, c) = g.data[k++];
  }
  return s;
}

FourierMap fourier_map_from_grid(const GridFile& g) {
  require_kind(g, "fourier_map", true);
  FourierMap m;
  m.e_grid = energy_axis(g.cols);
  validate(m.e_grid);
  m.mode = parse_mode(g);
  double step = g.rows.count > 1 ? (g.rows.max - g.rows.min) / (g.rows.count - 1) : 0.0;
  if (const std::string* s = g.find_meta("omega_step")) step = parse_header_double(*s, 0);
  m.omega_tau = {g.rows.min, step, g.rows.count};
  m.values = complex_matrix(g);
  return m;
}

DensityMatrix density_matrix_from_grid(const GridFile& g) {
  require_kind(g, "density_matrix", true);
  if (!(g.rows.min == g.cols.min && g.rows.max == g.cols.max && g.rows.count == g.cols.count)) {
    fail(ErrorCode::Data, "density matrix file: eps1 and eps2 axes differ");
  }
  DensityMatrix rho;
  rho.axis = energy_axis(g.cols);
  validate(rho.axis);
  rho.values = complex_matrix(g);
  const std::string& h = require_meta(g, "hermitian");
  rho.hermitian = h == "true";
  return rho;
}

}  // namespace rktomo
