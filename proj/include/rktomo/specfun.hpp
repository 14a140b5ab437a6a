#pragma once

#include <complex>

namespace rktomo {

using Complex = std::complex<double>;

/// Faddeeva function w(z) = exp(-z^2) erfc(-iz).
///
/// Accepts any finite z. In the lower half plane the result
/// grows like exp(-z^2); a domain error is raised when it would overflow.
/// Use exp_times_faddeeva() for products with a Gaussian prefactor.
Complex faddeeva(Complex z);

/// Complex error function. Raises a domain error when the result overflows.
Complex erf_complex(Complex z);

/// exp(log_prefactor) * w(z), evaluated without forming exp(-z^2) on its own
/// so that large lower-half-plane arguments stay finite when the product does.
Complex exp_times_faddeeva(Complex log_prefactor, Complex z);

}  // namespace rktomo
