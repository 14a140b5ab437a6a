#include "rktomo/metrics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "rktomo/error.hpp"

namespace rktomo {
namespace {

constexpr double kHermitianTol = 1e-12;
constexpr double kTraceTol = 1e-8;
constexpr double kClip = 1e-10;
// Eigenvalues this far below the largest are round-off; their square roots
// would otherwise add up to ~1e-6 over a few hundred directions.
constexpr double kNoise = 1e-12;

void require_square(const DensityMatrix& rho, const char* who) {
  if (rho.values.rows() != rho.values.cols() || rho.values.rows() != rho.axis.n) {
    fail(ErrorCode::Contract, std::string(who) + ": matrix shape does not match its axis");
  }
}

void require_hermitian(const DensityMatrix& rho, const char* who) {
  require_square(rho, who);
  const double scale = rho.values.cwiseAbs().maxCoeff();
  const double defect = (rho.values - rho.values.adjoint()).cwiseAbs().maxCoeff();
  if (defect > kHermitianTol * scale) {
    std::ostringstream os;
    os << who << ": matrix is not Hermitian (max |rho - rho^dagger| = " << defect << ")";
    fail(ErrorCode::Contract, os.str());
  }
}

void require_unit_trace(const DensityMatrix& rho, const char* who) {
  const Complex tr = rho.trace();
  if (std::abs(tr - 1.0) > kTraceTol) {
    std::ostringstream os;
    os << who << ": trace is " << tr.real() << (tr.imag() >= 0 ? "+" : "") << tr.imag() << "i, expected 1";
    fail(ErrorCode::Contract, os.str());
  }
}

Eigen::MatrixXcd symmetrized(const Eigen::MatrixXcd& m) { return 0.5 * (m + m.adjoint()); }

}  // namespace

double fidelity(const DensityMatrix& a, const DensityMatrix& b) {
  if (!(a.axis == b.axis)) fail(ErrorCode::Config, "fidelity: density matrices live on different axes");
  require_hermitian(a, "fidelity");
  require_hermitian(b, "fidelity");
  require_unit_trace(a, "fidelity");
  require_unit_trace(b, "fidelity");
  const double d = a.weight();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(symmetrized(a.values * d));
  Eigen::VectorXd lam = es.eigenvalues();
  const double lmax = lam.maxCoeff();
  for (int i = 0; i < lam.size(); ++i) {
    if (lam(i) < -kClip * lmax) lam(i) = 0.0;  // reported through psd_defect
    lam(i) = lam(i) <= kNoise * lmax ? 0.0 : std::sqrt(lam(i));
  }
  const Eigen::MatrixXcd& v = es.eigenvectors();
  const Eigen::MatrixXcd sqrt_a = v * lam.asDiagonal() * v.adjoint();
  const Eigen::MatrixXcd m = sqrt_a * (b.values * d) * sqrt_a;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es2(symmetrized(m), Eigen::EigenvaluesOnly);
  const double mmax = es2.eigenvalues().maxCoeff();
  double f = 0.0;
  for (int i = 0; i < es2.eigenvalues().size(); ++i) {
    const double mu = es2.eigenvalues()(i);
    if (mu > kNoise * mmax) f += std::sqrt(mu);
  }
  return std::clamp(f, 0.0, 1.0 + 1e-6);
}

double purity(const DensityMatrix& rho) {
  require_hermitian(rho, "purity");
  require_unit_trace(rho, "purity");
  const double d = rho.weight();
  return rho.values.cwiseAbs2().sum() * d * d;
}

Complex raw_purity(const DensityMatrix& rho) {
  require_square(rho, "raw_purity");
  const double d = rho.weight();
  // Tr(rho rho) = sum_ij rho_ij rho_ji
  return (rho.values.cwiseProduct(rho.values.transpose())).sum() * d * d;
}

double psd_defect(const DensityMatrix& rho) {
  require_hermitian(rho, "psd_defect");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(symmetrized(rho.values), Eigen::EigenvaluesOnly);
  const double lmax = es.eigenvalues().maxCoeff();
  const double lmin = es.eigenvalues().minCoeff();
  if (!(lmax > 0.0)) fail(ErrorCode::Degenerate, "psd_defect: no positive eigenvalue");
  return lmin < 0.0 ? lmin / lmax : 0.0;
}

double locate_fano_zero(std::span<const double> spectrum, const EnergyGrid& axis, Complex q, double omega_ag,
                        double gamma_a) {
  validate(axis);
  if (static_cast<int>(spectrum.size()) != axis.n) fail(ErrorCode::Config, "locate_fano_zero: spectrum size mismatch");
  if (!(gamma_a > 0.0)) fail(ErrorCode::Domain, "locate_fano_zero: gamma_a must be > 0");
  const double de = axis.step();
  const double expected = omega_ag - q.real() * gamma_a;
  const double half = std::max(8.0 * gamma_a, 4.0 * de);
  const int lo = std::max(0, static_cast<int>(std::ceil((expected - half - axis.e_min) / de)));
  const int hi = std::min(axis.n - 1, static_cast<int>(std::floor((expected + half - axis.e_min) / de)));
  if (hi - lo < 2) fail(ErrorCode::NotFound, "locate_fano_zero: expected zero lies outside the axis");
  int best = lo;
  for (int i = lo; i <= hi; ++i) {
    if (std::abs(spectrum[i]) < std::abs(spectrum[best])) best = i;
  }
  if (best == lo || best == hi) {
    std::ostringstream os;
    os << "locate_fano_zero: minimum sits on the search boundary at " << axis.at(best) << " eV";
    fail(ErrorCode::NotFound, os.str());
  }
  const double y0 = spectrum[best - 1] * spectrum[best - 1];
  const double y1 = spectrum[best] * spectrum[best];
  const double y2 = spectrum[best + 1] * spectrum[best + 1];
  const double denom = y0 - 2.0 * y1 + y2;
  double shift = 0.0;
  if (denom > 0.0) shift = std::clamp(0.5 * (y0 - y2) / denom, -0.5, 0.5);
  return axis.at(best) + shift * de;
}

double locate_fano_zero(const DensityMatrix& rho, Complex q, double omega_ag, double gamma_a) {
  require_square(rho, "locate_fano_zero");
  std::vector<double> diag(rho.axis.n);
  // The diagonal is already a squared magnitude.
  for (int i = 0; i < rho.axis.n; ++i) diag[i] = std::sqrt(std::abs(rho.values(i, i)));
  return locate_fano_zero(diag, rho.axis, q, omega_ag, gamma_a);
}

}  // namespace rktomo
