#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rktomo/model.hpp"

namespace rktomo {

/// Tr sqrt(sqrt(A) B sqrt(A)) with operators A dEps and B dEps.
/// Both inputs must be Hermitian with unit trace on the same axis.
double fidelity(const DensityMatrix& a, const DensityMatrix& b);

/// Tr(rho^2) dEps^2 for a normalized Hermitian matrix.
double purity(const DensityMatrix& rho);

/// Tr(rho^2) dEps^2 without Hermiticity requirements; complex in general.
Complex raw_purity(const DensityMatrix& rho);

/// Most negative eigenvalue divided by the largest; 0 for PSD matrices.
double psd_defect(const DensityMatrix& rho);

/// Energy of the destructive-interference zero of a magnitude spectrum. The
/// search covers omega_ag - Re(q) gamma_a +- max(8 gamma_a, 4 steps) and the
/// minimum of |value|^2 is refined with a parabola. A minimum on the search
/// boundary raises a not-found error.
double locate_fano_zero(std::span<const double> spectrum, const EnergyGrid& axis, Complex q, double omega_ag,
                        double gamma_a);

/// Same on the diagonal of a density matrix.
double locate_fano_zero(const DensityMatrix& rho, Complex q, double omega_ag, double gamma_a);

struct ReconstructionReport {
  std::optional<double> fidelity;
  double purity = 0.0;
  double trace_error = 0.0;
  double psd_defect = 0.0;
  std::optional<double> fano_zero;  // eps of the destructive interference
  double lobe_center = 0.0;         // omega_tau at the spectral peak column
  double band_lower = 0.0;
  double band_upper = 0.0;
  double valid_eps_min = 0.0, valid_eps_max = 0.0;
  double zeta = 0.0;
  std::optional<double> sigma_eff;
  std::string lobe;
  std::string window;
  bool correction = true;
  std::optional<Complex> raw_purity;
  std::vector<std::string> notes;
};

}  // namespace rktomo
