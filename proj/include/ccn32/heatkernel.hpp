#pragma once

#include "ccn32/common.hpp"
#include "ccn32/distance.hpp"

// Heat kernel at time 1 by two integral representations (oscillatory
// Fourier form and positive-integrand Laplace form), the auxiliary kernel
// P, the abnormal-limit function F, the four asymptotic leading terms, the
// closed-form envelope BND and horizontal-gradient evaluation.
namespace ccn32::heatkernel {

struct QuadratureSpec {
  double radial_cutoff = 40.0;  // truncation of exponentially damped axes
  int osc_nodes = 12;           // panels per period on oscillatory axes
  double rel_tol = 1e-9;
  double abs_tol = 1e-14;
  int max_subdivisions = 4000;
};

enum class Route { FourierForm, LaplaceForm };

struct KernelResult {
  double value = 0;      // may underflow for large d; log_value stays valid
  double log_value = 0;
  double est_error = 0;  // absolute, same scale as value
  long n_evals = 0;
  Route route = Route::FourierForm;
  bool fallback_used = false;
};

// p(g) at time 1 through the oscillatory representation.
KernelResult p_fourier(const GroupPoint& g, const QuadratureSpec& q = {});

// Auxiliary kernel P(X, T); depends on |X|, |T| only.
KernelResult P_kernel(double Xnorm, double Tnorm, const QuadratureSpec& q = {});

// p(g) through the positive-integrand representation; requires the
// critical data (falls back to p_fourier close to the abnormal axis).
KernelResult p_laplace(const GroupPoint& g, const QuadratureSpec& q = {});

// p_h(x, t) = h^{-9/2} p(x / sqrt h, t / h) with the normalization C = 1.
double heat_kernel_time(double h, const GroupPoint& g,
                        const QuadratureSpec& q = {});
double log_heat_kernel_time(double h, const GroupPoint& g,
                            const QuadratureSpec& q = {});

// F(v1, v2) = int_R calV(r) exp(-upsTilde(r) v1^2 / 4) cos(v2 r) dr.
double F_abnormal(double v1, double v2, const QuadratureSpec& q = {});

// Leading term of the regime asymptotics; throws RegimeMismatchError when
// the hypotheses fail under the default thresholds.
double asymptotic_leading(const GroupPoint& g, Regime regime,
                          const QuadratureSpec& q = {},
                          const RegimeThresholds& th = {});
double log_asymptotic_leading(const GroupPoint& g, Regime regime,
                              const QuadratureSpec& q = {},
                              const RegimeThresholds& th = {});

// Closed-form envelope and the ratio p / BND.
double bnd(const GroupPoint& g);
double log_bnd(const GroupPoint& g);
double bound_ratio(const GroupPoint& g, const QuadratureSpec& q = {});

// (X1 p, X2 p, X3 p) / p by central differences of the invariant fields.
Vec3 grad_log_p(const GroupPoint& g, const QuadratureSpec& q = {});

}  // namespace ccn32::heatkernel
