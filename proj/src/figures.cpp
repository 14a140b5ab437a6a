#include "rktomo/figures.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <memory>
#include <sstream>

#include "rktomo/error.hpp"
#include "rktomo/gridio.hpp"

namespace rktomo {
namespace {

// Dark-to-bright sequential map sampled at five stops.
std::array<unsigned char, 3> colour(double t) {
  static constexpr double stops[5][3] = {
      {0.001, 0.000, 0.014}, {0.342, 0.062, 0.429}, {0.735, 0.216, 0.330}, {0.978, 0.557, 0.035}, {0.988, 0.998, 0.645}};
  t = std::clamp(t, 0.0, 1.0) * 4.0;
  const int k = std::min(static_cast<int>(t), 3);
  const double f = t - k;
  std::array<unsigned char, 3> rgb{};
  for (int c = 0; c < 3; ++c) {
    const double v = (1.0 - f) * stops[k][c] + f * stops[k + 1][c];
    rgb[c] = static_cast<unsigned char>(std::lround(255.0 * v));
  }
  return rgb;
}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};

std::string svg_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

}  // namespace

void write_heatmap_png(const Eigen::MatrixXd& values, const std::string& path) {
  const int h = static_cast<int>(values.rows());
  const int w = static_cast<int>(values.cols());
  if (h == 0 || w == 0) fail(ErrorCode::Contract, "heatmap: empty matrix");
  const double peak = values.maxCoeff();
  std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "wb"));
  if (!fp) fail(ErrorCode::Io, "cannot open '" + path + "' for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorCode::Internal, "heatmap: libpng initialization failed");
  }
  std::vector<unsigned char> row(static_cast<std::size_t>(w) * 3);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorCode::Io, "heatmap: writing '" + path + "' failed");
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, w, h, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < h; ++y) {
    const int r = h - 1 - y;
    for (int x = 0; x < w; ++x) {
      const double v = peak > 0.0 ? values(r, x) / peak : 0.0;
      const auto c = colour(std::isfinite(v) ? v : 0.0);
      std::copy(c.begin(), c.end(), row.begin() + 3 * x);
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void write_density_heatmap(const DensityMatrix& rho, const std::string& path) {
  write_heatmap_png(rho.values.cwiseAbs(), path);
}

std::string render_sweep_svg(const std::vector<SweepRow>& rows, const std::string& parameter) {
  constexpr double W = 640, H = 420, left = 70, right = 170, top = 30, bottom = 60;
  const double pw = W - left - right, ph = H - top - bottom;
  double xmin = INFINITY, xmax = -INFINITY;
  for (const auto& r : rows) {
    xmin = std::min(xmin, r.parameter);
    xmax = std::max(xmax, r.parameter);
  }
  if (!std::isfinite(xmin)) xmin = 0.0, xmax = 1.0;
  if (xmax == xmin) xmax = xmin + 1.0;
  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return top + (1.05 - y) / 1.05 * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double y = 0.2 * k;
    os << "<line x1=\"" << left - 4 << "\" x2=\"" << left << "\" y1=\"" << svg_number(py(y)) << "\" y2=\""
       << svg_number(py(y)) << "\" stroke=\"black\"/>";
    os << "<text x=\"" << left - 8 << "\" y=\"" << svg_number(py(y) + 4) << "\" text-anchor=\"end\">"
       << svg_number(y) << "</text>\n";
    const double x = xmin + (xmax - xmin) * k / 5.0;
    os << "<line x1=\"" << svg_number(px(x)) << "\" x2=\"" << svg_number(px(x)) << "\" y1=\"" << top + ph
       << "\" y2=\"" << top + ph + 4 << "\" stroke=\"black\"/>";
    os << "<text x=\"" << svg_number(px(x)) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
       << format_double(std::round(x * 1000.0) / 1000.0) << "</text>\n";
  }
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">" << parameter
     << " (eV)</text>\n";

  struct Series {
    const char* label;
    const char* colour;
    const char* dash;
    double SweepRow::*field;
  };
  const Series series[] = {
      {"fidelity corrected", "#d95f02", "", &SweepRow::fidelity_corrected},
      {"fidelity uncorrected", "#1b9e77", "", &SweepRow::fidelity_uncorrected},
      {"purity corrected", "#d95f02", "6,3", &SweepRow::purity_corrected},
      {"purity uncorrected", "#1b9e77", "6,3", &SweepRow::purity_uncorrected},
      {"purity theory", "#444444", "2,2", &SweepRow::purity_theory},
  };
  int legend = 0;
  for (const auto& s : series) {
    std::ostringstream pts;
    auto flush = [&] {
      if (!pts.str().empty()) {
        os << "<polyline fill=\"none\" stroke=\"" << s.colour << "\" stroke-width=\"1.8\"";
        if (*s.dash) os << " stroke-dasharray=\"" << s.dash << "\"";
        os << " points=\"" << pts.str() << "\"/>\n";
      }
      pts.str("");
    };
    for (const auto& r : rows) {
      const double v = r.*s.field;
      if (!std::isfinite(v)) {
        flush();
        continue;
      }
      pts << svg_number(px(r.parameter)) << ',' << svg_number(py(v)) << ' ';
      os << "<circle cx=\"" << svg_number(px(r.parameter)) << "\" cy=\"" << svg_number(py(v))
         << "\" r=\"2.5\" fill=\"" << s.colour << "\"/>\n";
    }
    flush();
    const double ly = top + 14 + 18 * legend++;
    os << "<line x1=\"" << W - right + 12 << "\" x2=\"" << W - right + 40 << "\" y1=\"" << ly << "\" y2=\"" << ly
       << "\" stroke=\"" << s.colour << "\" stroke-width=\"1.8\"";
    if (*s.dash) os << " stroke-dasharray=\"" << s.dash << "\"";
    os << "/><text x=\"" << W - right + 46 << "\" y=\"" << ly + 4 << "\">" << s.label << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace rktomo
