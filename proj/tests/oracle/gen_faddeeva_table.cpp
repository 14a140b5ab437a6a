// Writes the 200-point reference table for w(z) used by the specfun tests.
// Usage: gen_faddeeva_table > tests/data/faddeeva_table.txt

#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "mp_faddeeva.hpp"

namespace {

struct Point {
  double x, y;
};

std::vector<Point> table_points() {
  std::vector<Point> pts;
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Real axis and just above it, where the imaginary part dominates.
  for (int i = 0; i < 20; ++i) pts.push_back({-9.5 + i, 0.0});
  for (int i = 0; i < 20; ++i) pts.push_back({-7.25 + 0.75 * i, i % 2 ? 1e-6 : 1e-3});
  // Disc |z| < 6 in the upper half plane.
  for (int i = 0; i < 60; ++i) {
    const double r = 6.0 * std::sqrt(unit(rng));
    const double a = M_PI * unit(rng);
    pts.push_back({r * std::cos(a), r * std::sin(a)});
  }
  // Band around the region boundaries, small to moderate Im z.
  for (int i = 0; i < 30; ++i) {
    pts.push_back({1.5 + 6.0 * unit(rng), std::pow(10.0, -3.0 + 3.5 * unit(rng))});
  }
  // Annulus 6 < |z| < 30.
  for (int i = 0; i < 40; ++i) {
    const double r = 6.0 + 24.0 * unit(rng);
    const double a = M_PI * unit(rng);
    pts.push_back({r * std::cos(a), r * std::sin(a)});
  }
  // Lower half plane, moderate |z| so the result stays representable.
  for (int i = 0; i < 20; ++i) {
    const double r = 5.0 * std::sqrt(unit(rng));
    const double a = -M_PI * unit(rng);
    pts.push_back({r * std::cos(a), r * std::sin(a)});
  }
  // Large |z| near both axes.
  const double big[10] = {35.0, 40.0, 45.0, 50.0, 55.0, 60.0, 36.5, 42.5, 48.5, 52.5};
  for (int i = 0; i < 10; ++i) pts.push_back({i % 2 ? -big[i] : big[i], i < 5 ? 0.5 : big[i]});
  return pts;
}

}  // namespace

int main() {
  const auto pts = table_points();
  std::printf("# x y re(w) im(w) ; Maclaurin series of erfc in MPFR, %zu points\n", pts.size());
  for (const auto& p : pts) {
    const auto r = rktomo_oracle::mp_faddeeva(p.x, p.y);
    if (r.rel_disagreement > 1e-25) {
      std::fprintf(stderr, "precision check failed at (%g, %g): %g\n", p.x, p.y, r.rel_disagreement);
      return 1;
    }
    std::printf("%.17g %.17g %.17g %.17g\n", p.x, p.y, r.value.real(), r.value.imag());
  }
  return 0;
}
