#pragma once

#include <vector>

#include "ccn32/common.hpp"

// Scalar special functions underlying the distance and kernel formulas:
// the psi family (Mittag-Leffler series vs trig closed forms), the Upsilon
// family on (-theta1, theta1), auxiliary phi's, mu and its inverse, the K
// family, the q factor, amplitude functions, modified Bessel I0 and the
// roots of tan r = r.
namespace ccn32::specfun {

struct SpecConfig {
  int series_terms = 200;         // truncation of the partial-fraction sums
  double crossover_delta = 0.05;  // switch distance to removable points
  std::vector<double> theta_roots;  // roots of tan r = r, cached at startup
};

// Immutable process-wide configuration (thread-safe after first use).
const SpecConfig& default_config();

// k-th positive root of tan r = r in (k pi, (k + 1/2) pi), k >= 1.
double theta_root(int k);
double theta1();  // first root, bounds the Upsilon domain

struct PsiValues {
  double psi, dpsi, ddpsi;
};

// psi(r) = (1 - r cot r)/r^2 with first two derivatives; poles at k pi.
PsiValues psi_family(double r);
PsiValues psi_family(double r, const SpecConfig& cfg);
// The two evaluation routes, exposed for cross-validation.
PsiValues psi_series(double r, const SpecConfig& cfg = default_config());
PsiValues psi_closed(double r);
double psi_third(double r);  // psi'''

struct UpsilonValues {
  double ups, dups, ddups, dddups;
};

// Upsilon(r) = r^2/(1 - r cot r) on (-theta1, theta1) with derivatives.
UpsilonValues upsilon_family(double r);
UpsilonValues upsilon_family(double r, const SpecConfig& cfg);
UpsilonValues upsilon_series(double r, const SpecConfig& cfg = default_config());
UpsilonValues upsilon_from_psi(double r);

struct AuxPhis {
  double h, phi1, phi2, phi3;
};

// h(r) = r^2 + r sin r cos r - 2 sin^2 r and the phi_1..phi_3 quotients.
AuxPhis aux_phis(double r);

// mu(rho) = (2 rho - sin 2 rho)/(2 sin^2 rho), odd diffeomorphism of
// (-pi, pi) onto R, and its inverse.
double mu(double rho);
double mu_derivative(double rho);
double mu_inverse(double gamma);

struct KValues {
  double K1, K2, K3, K;
};

// K1 = psi'(r)/r, K2 = (K1)'/r, K3 = 2 psi + K1 v2^2 and the Jacobian
// factor K, all at v = (v1, v2), r = |v|.
KValues k_family(double v1, double v2);
// K recomputed through the Upsilon form; equals k_family(...).K.
double k_via_upsilon(double v1, double v2);

// q(r) = r^2 Upsilon / (-sin r Upsilon' sqrt(-Upsilon'')), even, positive;
// removable 0/0 at r = 0 and r = pi.
double q_factor(double r);

struct Amplitudes {
  double V;         // rho / sinh rho
  double calV;      // rho^3 / (rho cosh rho - sinh rho)
  double upsTilde;  // rho^2 / (rho coth rho - 1)
};

Amplitudes amplitudes(double rho);

// upsTilde(rho) - 3 evaluated without the cancellation of the difference;
// the kernel quadratures scale this by |X|^2/4 in exponents.
double ups_tilde_minus3(double rho);

// Modified Bessel I0; the scaled variant returns e^{-|r|} I0(r).
double bessel_i0(double r);
double bessel_i0_scaled(double r);
// I0(rho; r) = (1/pi) int_0^rho e^{r cos g} dg for rho in (0, pi].
double bessel_i0_partial(double rho, double r);
double bessel_i0_partial_scaled(double rho, double r);  // e^{-r} I0(rho; r)

// Bessel J0 (used by the kernel quadratures).
double bessel_j0(double z);

}  // namespace ccn32::specfun
