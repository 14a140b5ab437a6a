#include "rktomo/specfun.hpp"

#include <cmath>
#include <sstream>

#include "rktomo/error.hpp"

namespace rktomo {
namespace {

constexpr double kTwoOverSqrtPi = 1.12837916709551257390;
constexpr double kMaxExponent = 709.0;

void check_argument(Complex z, const char* who) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
    fail(ErrorCode::Domain, std::string(who) + ": non-finite argument");
  }
}

// w(x + iy) for x >= 0, y >= 0.
//
// Three regions in the scaled radius rho^2 = (x/6.3)^2 + (y/4.4)^2:
// Maclaurin series of erfc near the origin, Laplace continued fraction far
// out, and in between Gautschi's continued fraction with a truncated Taylor
// shift h > 0 that keeps convergence fast near the real axis.
Complex faddeeva_first_quadrant(double x, double y) {
  const double sx = x / 6.3;
  const double sy = y / 4.4;
  const double qrho = sx * sx + sy * sy;
  const Complex z(x, y);

  if (qrho < 0.085264) {
    const double rho = (1.0 - 0.85 * sy) * std::sqrt(qrho);
    const int n = static_cast<int>(std::lround(6.0 + 72.0 * rho));
    const Complex z2 = z * z;
    int j = 2 * n + 1;
    Complex sum = 1.0 / j;
    for (int i = n; i >= 1; --i) {
      j -= 2;
      sum = sum * z2 / static_cast<double>(i) + 1.0 / j;
    }
    const Complex one_minus_erf = 1.0 + Complex(0.0, kTwoOverSqrtPi) * z * sum;
    return std::exp(-z2) * one_minus_erf;
  }

  double h = 0.0;
  int kapn = 0;
  int nu = 0;
  if (qrho > 1.0) {
    nu = static_cast<int>(3.0 + 1442.0 / (26.0 * std::sqrt(qrho) + 77.0));
  } else {
    const double rho = (1.0 - sy) * std::sqrt(1.0 - qrho);
    h = 1.88 * rho;
    kapn = static_cast<int>(std::lround(7.0 + 34.0 * rho));
    nu = static_cast<int>(std::lround(16.0 + 26.0 * rho));
  }

  const Complex base(h + y, -x);  // h - i z
  Complex r = 0.0;
  Complex s = 0.0;
  const double two_h = 2.0 * h;
  double lambda = h > 0.0 ? std::pow(two_h, kapn) : 0.0;
  for (int n = nu; n >= 0; --n) {
    r = 0.5 / (base + static_cast<double>(n + 1) * r);
    if (h > 0.0 && n <= kapn) {
      s = r * (lambda + s);
      lambda /= two_h;
    }
  }
  Complex w = kTwoOverSqrtPi * (h > 0.0 ? s : r);
  if (y == 0.0) w.real(std::exp(-x * x));
  return w;
}

}  // namespace

Complex faddeeva(Complex z) {
  check_argument(z, "faddeeva");
  const double x = z.real();
  const double y = z.imag();
  const Complex w1 = faddeeva_first_quadrant(std::abs(x), std::abs(y));
  if (y >= 0.0) return x < 0.0 ? std::conj(w1) : w1;

  // w(z) = 2 exp(-z^2) - w(-z), with -z in the upper half plane.
  const Complex minus_z2 = -z * z;
  if (minus_z2.real() > kMaxExponent) {
    std::ostringstream os;
    os << "faddeeva: result overflows at z = (" << x << ", " << y << ")";
    fail(ErrorCode::Domain, os.str());
  }
  const Complex w_neg = x > 0.0 ? std::conj(w1) : w1;
  return 2.0 * std::exp(minus_z2) - w_neg;
}

Complex exp_times_faddeeva(Complex log_prefactor, Complex z) {
  check_argument(z, "exp_times_faddeeva");
  if (z.imag() >= 0.0) return std::exp(log_prefactor) * faddeeva(z);
  const Complex w_neg = faddeeva(-z);
  return 2.0 * std::exp(log_prefactor - z * z) - std::exp(log_prefactor) * w_neg;
}

Complex erf_complex(Complex z) {
  check_argument(z, "erf_complex");
  if (z.real() < 0.0) return -erf_complex(-z);
  if (std::abs(z) < 0.5) {
    // Maclaurin series; w-based evaluation cancels badly near the origin.
    const Complex z2 = z * z;
    Complex term = z;
    Complex sum = z;
    for (int n = 1; n < 40; ++n) {
      term *= -z2 / static_cast<double>(n);
      const Complex add = term / static_cast<double>(2 * n + 1);
      sum += add;
      if (std::abs(add) < 1e-17 * std::abs(sum)) break;
    }
    return kTwoOverSqrtPi * sum;
  }
  // erf(z) = 1 - exp(-z^2) w(iz); iz lies in the upper half plane here.
  const Complex minus_z2 = -z * z;
  if (minus_z2.real() > kMaxExponent) {
    std::ostringstream os;
    os << "erf_complex: result overflows at z = (" << z.real() << ", " << z.imag() << ")";
    fail(ErrorCode::Domain, os.str());
  }
  return 1.0 - exp_times_faddeeva(minus_z2, Complex(-z.imag(), z.real()));
}

}  // namespace rktomo
