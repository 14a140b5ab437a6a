#pragma once
// Arbitrary-precision reference for w(z): Maclaurin series of erf(-iz) in
// MPFR with a tracked truncation bound, evaluated at two working precisions.

#include <complex>

namespace rktomo_oracle {

struct MpResult {
  std::complex<double> value;
  double rel_disagreement;  // between the two precisions
};

MpResult mp_faddeeva(double x, double y);

}  // namespace rktomo_oracle
