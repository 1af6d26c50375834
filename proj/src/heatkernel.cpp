#include "ccn32/heatkernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ccn32/maps.hpp"
#include "ccn32/quadrature.hpp"
#include "ccn32/specfun.hpp"

namespace ccn32::heatkernel {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

using specfun::amplitudes;
using specfun::bessel_i0_scaled;
using specfun::bessel_j0;
using specfun::theta1;

double sinc(double z) {
  if (std::abs(z) < 1e-6) return 1.0 - z * z / 6.0;
  return std::sin(z) / z;
}

struct OscResult {
  quad::QuadResult q;
  double noise_floor = 0;  // roundoff scale: eps * mass of |integrand|
};

// Adaptive GK with a pre-split fine enough for `osc_nodes` function nodes
// per oscillation period.
OscResult integrate_osc(const std::function<double(double)>& f, double a,
                        double b, double freq, int osc_nodes, double rel_tol,
                        double abs_tol, int max_sub) {
  int n0 = 1 + static_cast<int>(std::abs(freq) * (b - a) * osc_nodes /
                                (30.0 * kPi));
  n0 = std::min(n0, 400);
  OscResult out;
  if (n0 == 1) {
    out.q = quad::adaptive_gk(f, a, b, rel_tol, abs_tol, max_sub);
    return out;
  }
  // Oscillation cancels the chunk magnitudes down to a total the chunks
  // know nothing about, so per-chunk relative control leaves debris far
  // above the result; iterate with absolute floors tied to the emerging
  // value until the tolerance basis is consistent.
  double coarse = 0.0, coarse_abs = 0.0;
  auto fabsf = [&](double x) { return std::abs(f(x)); };
  for (int i = 0; i < n0; ++i) {
    double lo = a + (b - a) * i / n0, hi = a + (b - a) * (i + 1) / n0;
    coarse += quad::adaptive_gk(f, lo, hi, 1e-2, 1e-280, 1).value;
    coarse_abs += quad::adaptive_gk(fabsf, lo, hi, 1e-1, 1e-280, 1).value;
  }
  out.noise_floor = 3e-14 * coarse_abs;
  double basis = std::max(std::abs(coarse), 30.0 * out.noise_floor);
  for (int pass = 0; pass < 4; ++pass) {
    out.q = quad::QuadResult{};
    const double floor_tol = std::max(abs_tol, 0.2 * rel_tol * basis) / n0;
    for (int i = 0; i < n0; ++i) {
      double lo = a + (b - a) * i / n0, hi = a + (b - a) * (i + 1) / n0;
      auto r = quad::adaptive_gk(f, lo, hi, 0.0, floor_tol,
                                 std::max(8, max_sub / n0));
      out.q.value += r.value;
      out.q.est_error += r.est_error;
      out.q.n_evals += r.n_evals;
    }
    double got = std::abs(out.q.value);
    if (got >= 0.25 * basis || basis <= 31.0 * out.noise_floor) break;
    basis = std::max(got, 30.0 * out.noise_floor);
  }
  out.q.est_error += out.noise_floor;
  return out;
}

struct Reduced {
  double value = 0;  // integral with the explicit exponential factored out
  double err = 0;
  long n_evals = 0;
};

// Fourier form, reduced: p(g) = e^{-c} I with c = |x|^2/4 and
//   I = 4 pi int_0^inf cos(c u1 l) [int_0^inf rho V e^{-c W rho^2}
//        J0(c u2 rho) drho] dl          (x != 0)
//   I = 4 pi int_0^inf rho^2 V(rho) sinc(|t| rho) drho   (x = 0).
Reduced fourier_reduced(const ReducedPoint& rp, double m_reserve,
                        const QuadratureSpec& q) {
  Reduced out;
  const double c = 0.25 * rp.xnorm * rp.xnorm;
  const double target = q.radial_cutoff + m_reserve + 2.0 * std::log1p(c);
  if (rp.xnorm == 0.0) {
    const double tn = std::hypot(rp.t_par, rp.t_perp);
    auto f = [&](double rho) {
      return rho * rho * amplitudes(rho).V * sinc(tn * rho);
    };
    auto r = integrate_osc(f, 0.0, target, tn, q.osc_nodes, q.rel_tol,
                           q.abs_tol, q.max_subdivisions);
    out.value = 4.0 * kPi * r.q.value;
    out.err = 4.0 * kPi * r.q.est_error;
    out.n_evals = r.q.n_evals;
    return out;
  }
  const double u1 = 4.0 * rp.t_par / (rp.xnorm * rp.xnorm);
  const double u2 = 4.0 * rp.t_perp / (rp.xnorm * rp.xnorm);
  const double R1 = target;
  const double R2 = std::max(3.0, (target + c) / (1.0 + c));
  double inner_err_peak = 0.0;  // absolute: relative blows up at inner zeros
  long inner_evals = 0;
  auto inner = [&](double l1) {
    auto f = [&](double rho) {
      double r = std::hypot(l1, rho);
      auto amp = amplitudes(r);
      double W = 1.0 / amp.upsTilde;
      return rho * amp.V * std::exp(-c * W * rho * rho) *
             bessel_j0(c * u2 * rho);
    };
    auto r = integrate_osc(f, 0.0, R2, c * u2, q.osc_nodes, 0.2 * q.rel_tol,
                           1e-3 * q.abs_tol, q.max_subdivisions);
    inner_evals += r.q.n_evals;
    inner_err_peak = std::max(inner_err_peak, r.q.est_error);
    return std::cos(c * u1 * l1) * r.q.value;
  };
  auto r = integrate_osc(inner, 0.0, R1, c * u1, q.osc_nodes, q.rel_tol,
                         q.abs_tol, q.max_subdivisions);
  out.value = 4.0 * kPi * r.q.value;
  out.err = 4.0 * kPi * (r.q.est_error + inner_err_peak * R1);
  out.n_evals = r.q.n_evals + inner_evals;
  return out;
}

// Auxiliary kernel, reduced: P = e^{-3 X^2/4} J with
//   J = 4 pi int_0^inf rho^2 calV(rho) e^{-(upsTilde(rho) - 3) X^2/4}
//       sinc(T rho) drho.
Reduced P_reduced(double Xn, double Tn, double m_reserve,
                  const QuadratureSpec& q) {
  const double X2 = Xn * Xn;
  const double target =
      q.radial_cutoff + m_reserve + 2.0 * std::log1p(0.25 * X2);
  const double R = std::max(3.0, (target + 0.5 * X2) / (1.0 + 0.25 * X2));
  auto f = [&](double rho) {
    return rho * rho * amplitudes(rho).calV *
           std::exp(-0.25 * specfun::ups_tilde_minus3(rho) * X2) *
           sinc(Tn * rho);
  };
  auto r = integrate_osc(f, 0.0, R, Tn, q.osc_nodes, q.rel_tol, q.abs_tol,
                         q.max_subdivisions);
  // cancellation can push the true value below the roundoff debris of the
  // |integrand| mass; report zero rather than noise
  if (!(r.q.value > 100.0 * r.noise_floor))
    return {0.0, 4.0 * kPi * r.q.est_error, r.q.n_evals};
  return {4.0 * kPi * r.q.value, 4.0 * kPi * r.q.est_error, r.q.n_evals};
}

struct EffTheta {
  bool present = false;
  double wbar = 0, u1 = 0, u2 = 0;
  double d2 = 0, xnorm = 0, m = 0;
};

EffTheta effective_theta(const GroupPoint& g) {
  EffTheta e;
  auto dres = cc_distance_squared(g);
  ReducedPoint rp = reduce(g);
  e.d2 = dres.d2;
  e.xnorm = rp.xnorm;
  e.m = 0.25 * (dres.d2 - rp.xnorm * rp.xnorm);
  if (dres.theta_effective.has_value()) {
    e.present = true;
    e.wbar = dres.theta_effective->wbar;
    e.u1 = dres.u1;
    e.u2 = dres.u2;
  }
  return e;
}

// Positive-integrand (Laplace) form in modified polar coordinates:
//   p = (x^2 b^2 / 4 pi) e^{-c} int_0^inf int_{-pi}^{pi} w P(X(w), T(w,g))
// with X = w x b, T = (x^2/4) A_p(w, gamma).
KernelResult laplace_positive(const ReducedPoint& rp, double u1, double u2,
                              double b, double m, const QuadratureSpec& q) {
  KernelResult res;
  res.route = Route::LaplaceForm;
  const double xn = rp.xnorm, x2 = xn * xn;
  const double c = 0.25 * x2;
  const double uu = u1 * u1 + u2 * u2;
  // Tolerance ladder: the inner kernel noise must sit well below what the
  // outer adaptives ask for, or their error estimates stop contracting.
  QuadratureSpec qp = q;
  qp.rel_tol = std::max(0.02 * q.rel_tol, 2e-12);
  qp.abs_tol = 0.0;
  const double gamma_rel = std::max(0.2 * q.rel_tol, 1e-10);
  const double outer_rel = std::max(q.rel_tol, 1e-8);

  // Away from the peak the inner kernel faces a growing cancellation
  // reserve, and past the point where roundoff debris beats e^{-phase} the
  // quadrature can only return noise; cut there, since the true
  // contribution is below the achievable accuracy anyway.
  const double reserve_peak = std::max(0.0, m - 0.75 * x2 * b * b);
  const double phase_cut = std::max(
      10.0, std::min(30.0 - reserve_peak, -std::log(1e-3 * outer_rel)));

  auto logPw = [&](double w, double gamma) {
    const double Xn = w * xn * b;
    const double At =
        std::sqrt(std::max(0.0, uu + 4.0 * b * b * w * w -
                                    4.0 * u2 * b * w * std::cos(gamma)));
    const double Tn = 0.25 * x2 * At;
    const double D2 = intrinsic_D_squared(Xn, Tn).D2;
    if (0.25 * (D2 - 4.0 * m) > phase_cut) {
      ++res.n_evals;
      return -kInf;
    }
    const double reserve = std::max(0.0, 0.25 * (D2 - 3.0 * Xn * Xn));
    auto P = P_reduced(Xn, Tn, reserve, qp);
    res.n_evals += P.n_evals;
    if (!(P.value > 0.0)) return -kInf;
    return -0.75 * Xn * Xn + std::log(P.value) + std::log(w);
  };

  const double L0 = logPw(1.0, 0.0);
  if (!std::isfinite(L0))
    throw ToleranceError("p_laplace: kernel vanished at the minimizer");
  const double span = q.radial_cutoff + 8.0;
  const double W =
      std::max(2.5, 1.0 + std::sqrt(4.0 * (m + span) / (3.0 * x2 * b * b)));

  // The integrand concentrates at (w, gamma) = (1, 0) with widths set by
  // the Hessian eigenvalues; probe the log-curvatures and lay panel ladders
  // so the peak cannot slip between quadrature nodes.
  auto curvature = [&](auto&& f) {
    for (double d : {1e-3, 1e-2, 1e-1}) {
      double c2 = -(f(d) - 2.0 * L0 + f(-d)) / (d * d);
      if (std::isfinite(c2) && c2 > 1.0) return c2;
    }
    return 1.0;
  };
  const double curv_w =
      curvature([&](double d) { return logPw(1.0 + d, 0.0); });
  const double curv_g =
      curvature([&](double d) { return logPw(1.0, std::abs(d)); });
  const double hw = std::min(0.9, 6.0 / std::sqrt(curv_w));
  const double hg = std::min(kPi / 2, 6.0 / std::sqrt(curv_g));

  std::vector<double> wknots{1.0 - hw, 1.0 + hw};
  for (double s = 2.0 * hw; 1.0 - s > 1e-12 || 1.0 + s < W; s *= 2.0) {
    if (1.0 - s > 1e-12) wknots.push_back(1.0 - s);
    if (1.0 + s < W) wknots.push_back(1.0 + s);
    if (s > 2.0 * W) break;
  }
  wknots.push_back(1e-12);
  wknots.push_back(W);
  std::sort(wknots.begin(), wknots.end());
  wknots.erase(std::unique(wknots.begin(), wknots.end()), wknots.end());

  std::vector<double> gknots{0.0};
  for (double s = hg; s < kPi; s *= 2.0) gknots.push_back(s);
  gknots.push_back(kPi);

  // Panel tolerances reference the peak scale: far panels are tiny and a
  // relative-only test would subdivide them to the cap for nothing.
  double gamma_err = 0.0;
  double gamma_abs_floor = 0.0;
  auto outer = [&](double w) {
    auto fg = [&](double gamma) {
      double L = logPw(w, gamma);
      return std::isfinite(L) ? std::exp(L - L0) : 0.0;
    };
    double acc = 0.0, err = 0.0;
    for (size_t i = 0; i + 1 < gknots.size(); ++i) {
      auto r = quad::adaptive_gk(fg, gknots[i], gknots[i + 1], gamma_rel,
                                 gamma_abs_floor, 8);
      acc += r.value;
      err += r.est_error;
    }
    if (std::abs(acc) > 0) gamma_err = std::max(gamma_err, err / std::abs(acc));
    return 2.0 * acc;  // even in gamma
  };
  const double G0 = outer(1.0);  // peak cross-section fixes the scale
  gamma_abs_floor = 0.1 * gamma_rel * std::max(G0, 1e-280) /
                    static_cast<double>(gknots.size());
  const double i_scale = std::max(G0, 1e-280) * 2.0 * hw;
  const double w_abs_floor =
      0.2 * outer_rel * i_scale / static_cast<double>(wknots.size());
  quad::QuadResult rw;
  for (size_t i = 0; i + 1 < wknots.size(); ++i) {
    auto r = quad::adaptive_gk(outer, wknots[i], wknots[i + 1], outer_rel,
                               w_abs_floor, 12);
    rw.value += r.value;
    rw.est_error += r.est_error;
  }
  if (!(rw.value > 0.0))
    throw ToleranceError("p_laplace: outer integral not positive");
  const double logI = L0 + std::log(rw.value);
  res.log_value = -c + std::log(x2 * b * b / (4.0 * kPi)) + logI;
  res.value = std::exp(res.log_value);
  res.est_error =
      res.value * (rw.est_error / rw.value + gamma_err + qp.rel_tol * 4.0);
  return res;
}

double require_positive(const KernelResult& r, const char* who) {
  if (!(r.value > 0.0) && !(r.log_value > -kInf))
    throw ToleranceError(std::string(who) + ": non-positive value");
  return r.value;
}

}  // namespace

KernelResult p_fourier(const GroupPoint& g, const QuadratureSpec& q) {
  KernelResult res;
  res.route = Route::FourierForm;
  ReducedPoint rp = reduce(g);
  const double c = 0.25 * rp.xnorm * rp.xnorm;
  const double m = 0.25 * (cc_distance_squared(g).d2 - rp.xnorm * rp.xnorm);
  auto red = fourier_reduced(rp, std::max(0.0, m), q);
  res.n_evals = red.n_evals;
  if (!(red.value > 0.0))
    throw ToleranceError(
        "p_fourier: cancellation exhausted the working precision (value " +
        std::to_string(red.value) + ", est_error " +
        std::to_string(red.err) + ")");
  res.log_value = -c + std::log(red.value);
  res.value = std::exp(res.log_value);
  res.est_error = std::exp(-c) * red.err;
  if (red.err > 0.3 * red.value)
    throw ToleranceError("p_fourier: error estimate " +
                         std::to_string(red.err / red.value) +
                         " of the value; best estimate " +
                         std::to_string(res.value));
  return res;
}

KernelResult P_kernel(double Xnorm, double Tnorm, const QuadratureSpec& q) {
  if (Xnorm < 0 || Tnorm < 0) throw DomainError("P_kernel: negative norms");
  KernelResult res;
  res.route = Route::FourierForm;
  const double D2 = intrinsic_D_squared(Xnorm, Tnorm).D2;
  const double reserve = std::max(0.0, 0.25 * (D2 - 3.0 * Xnorm * Xnorm));
  auto red = P_reduced(Xnorm, Tnorm, reserve, q);
  res.n_evals = red.n_evals;
  if (!(red.value > 0.0))
    throw ToleranceError("P_kernel: positivity lost to cancellation");
  res.log_value = -0.75 * Xnorm * Xnorm + std::log(red.value);
  res.value = std::exp(res.log_value);
  res.est_error = std::exp(-0.75 * Xnorm * Xnorm) * red.err;
  return res;
}

KernelResult p_laplace(const GroupPoint& g, const QuadratureSpec& q) {
  auto eff = effective_theta(g);
  ReducedPoint rp = reduce(g);
  if (!eff.present || eff.wbar * eff.xnorm < 1e-4) {
    // the change of variables degenerates near the abnormal set
    auto res = p_fourier(g, q);
    res.fallback_used = true;
    return res;
  }
  auto res = laplace_positive(rp, eff.u1, eff.u2, eff.wbar, eff.m, q);
  require_positive(res, "p_laplace");
  return res;
}

double heat_kernel_time(double h, const GroupPoint& g,
                        const QuadratureSpec& q) {
  return std::exp(log_heat_kernel_time(h, g, q));
}

double log_heat_kernel_time(double h, const GroupPoint& g,
                            const QuadratureSpec& q) {
  if (!(h > 0.0)) throw DomainError("heat_kernel_time: h <= 0");
  const GroupPoint gs = dilate(1.0 / std::sqrt(h), g);
  auto eff = effective_theta(gs);
  // route on the smaller cancellation budget
  const double fourier_budget = eff.m;
  double laplace_budget = kInf;
  if (eff.present && eff.wbar * eff.xnorm >= 1e-4)
    laplace_budget =
        eff.m - 0.75 * eff.xnorm * eff.xnorm * eff.wbar * eff.wbar;
  KernelResult res;
  // the positive-integrand route costs far more; take it only when its
  // cancellation budget is meaningfully smaller
  if (laplace_budget < fourier_budget - 3.0) {
    ReducedPoint rp = reduce(gs);
    res = laplace_positive(rp, eff.u1, eff.u2, eff.wbar, eff.m, q);
  } else {
    res = p_fourier(gs, q);
  }
  return -4.5 * std::log(h) + res.log_value;
}

double F_abnormal(double v1, double v2, const QuadratureSpec& q) {
  const double a = 0.25 * v1 * v1;
  const double R = std::max(3.0, (q.radial_cutoff + 2.0 * a) / (1.0 + a));
  auto f = [&](double r) {
    return amplitudes(r).calV *
           std::exp(-a * specfun::ups_tilde_minus3(r)) * std::cos(v2 * r);
  };
  auto r = integrate_osc(f, 0.0, R, v2, q.osc_nodes, q.rel_tol, q.abs_tol,
                         q.max_subdivisions);
  double val = 2.0 * std::exp(-3.0 * a) * r.q.value;
  if (!(val > 0.0)) throw ToleranceError("F_abnormal: positivity lost");
  return val;
}

double log_asymptotic_leading(const GroupPoint& g, Regime regime,
                              const QuadratureSpec& q,
                              const RegimeThresholds& th) {
  auto tags = classify_regime(g, th);
  if (std::find(tags.begin(), tags.end(), regime) == tags.end())
    throw RegimeMismatchError("asymptotic_leading: hypotheses fail");
  auto params = regime_params(g);
  auto dres = cc_distance_squared(g);
  const double d2 = params.d2, xn = params.xnorm, x2 = xn * xn;

  switch (regime) {
    case Regime::I: {
      const auto& td = *params.theta;
      auto k = specfun::k_family(td.theta1, td.theta2);
      const double det =
          td.theta2 * td.theta2 * k.K * k.K3 * x2 * x2 * x2;
      return 1.5 * std::log(8.0 * kPi) - 0.25 * d2 +
             std::log(td.r / std::sin(td.r)) - 0.5 * std::log(det);
    }
    case Regime::II: {
      const auto& td = *params.theta;
      const double barg =
          theta1() * x2 * td.wbar * td.wbar / (2.0 * td.epsilon);
      return std::log(16.0 * kPi * kPi * std::sqrt(kPi * theta1()) *
                      specfun::q_factor(td.r)) +
             std::log(bessel_i0_scaled(params.L2)) -
             0.5 * std::log(td.epsilon * params.L1) +
             std::log(bessel_i0_scaled(barg)) - 0.25 * d2;
    }
    case Regime::III: {
      const auto& td = *params.theta;
      const double wbar = td.wbar, u1 = dres.u1;
      const double w0 = std::pow(xn, -0.5) * std::pow(u1, 0.75) / wbar;
      const double A1 = std::sqrt(
          u1 * u1 + dres.u2 * dres.u2 + 4.0 * wbar * wbar -
          4.0 * dres.u2 * wbar);
      const double shift =
          std::sqrt(theta1() * A1) - wbar;  // sqrt(theta1 A(1)) - wbar
      const double uu = u1 * u1 + dres.u2 * dres.u2;
      auto integrand = [&](double w, double gamma) {
        const double Ap = std::sqrt(std::max(
            0.0, uu + 4.0 * wbar * wbar * w * w -
                     4.0 * dres.u2 * wbar * w * std::cos(gamma)));
        const double Up = Ap / (wbar * wbar * w * w);
        const double zeta = theta1() - maps::z_map(Up);
        const double barg = theta1() * x2 * wbar * wbar * w * w / (2.0 * zeta);
        const double quad_term = std::sqrt(theta1() * Ap) - wbar * w;
        const double expo =
            -0.25 * x2 * (quad_term * quad_term - shift * shift);
        return std::exp(expo) * bessel_i0_scaled(barg) * zeta * zeta / w;
      };
      auto outer = [&](double w) {
        auto fg = [&](double gamma) { return integrand(w, gamma); };
        return 2.0 * quad::adaptive_gk(fg, 0.0, kPi, 1e-7, 1e-16, 100).value;
      };
      auto r = quad::adaptive_gk(outer, 1e-12, w0, 1e-7, 1e-300, 200);
      if (!(r.value > 0.0))
        throw ToleranceError("asymptotic_leading(iii): integral not positive");
      return std::log(4.0 * kPi * theta1() * theta1() /
                      (-std::sin(theta1()))) -
             0.25 * d2 + std::log(r.value);
    }
    case Regime::IV: {
      const double F =
          F_abnormal(0.5 * xn * dres.u2, 0.25 * x2 * dres.u1, q);
      return -0.25 * d2 + params.m + std::log(4.0 * kPi / x2) + std::log(F);
    }
  }
  throw DomainError("asymptotic_leading: unknown regime");
}

double asymptotic_leading(const GroupPoint& g, Regime regime,
                          const QuadratureSpec& q, const RegimeThresholds& th) {
  return std::exp(log_asymptotic_leading(g, regime, q, th));
}

double log_bnd(const GroupPoint& g) {
  auto params = regime_params(g);
  const double d2 = params.d2;
  if (!params.theta.has_value()) {
    // abnormal axis (and the vertical axis, where |t| replaces |x|^2)
    ReducedPoint rp = reduce(g);
    if (rp.xnorm > 0.0) return -2.0 * std::log(rp.xnorm) - 0.25 * d2;
    double tn = std::hypot(rp.t_par, rp.t_perp);
    return -std::log(tn) - 0.25 * d2;
  }
  const double L1 = params.L1, L2 = params.L2;
  return -std::log1p(d2) + 0.5 * std::log1p(L1) -
         0.5 * std::log(1.0 + L1 + params.epsilon * params.m * L2) - 0.25 * d2;
}

double bnd(const GroupPoint& g) { return std::exp(log_bnd(g)); }

double bound_ratio(const GroupPoint& g, const QuadratureSpec& q) {
  auto eff = effective_theta(g);
  double logp;
  double laplace_budget = kInf;
  if (eff.present && eff.wbar * eff.xnorm >= 1e-4)
    laplace_budget =
        eff.m - 0.75 * eff.xnorm * eff.xnorm * eff.wbar * eff.wbar;
  if (laplace_budget < eff.m) {
    ReducedPoint rp = reduce(g);
    logp = laplace_positive(rp, eff.u1, eff.u2, eff.wbar, eff.m, q).log_value;
  } else {
    logp = p_fourier(g, q).log_value;
  }
  return std::exp(logp - log_bnd(g));
}

Vec3 grad_log_p(const GroupPoint& g, const QuadratureSpec& q) {
  auto center = p_fourier(g, q);
  const double p0 = center.value;
  const double step =
      std::max(1e-4, std::cbrt(center.est_error / std::max(p0, 1e-300)));
  double dpx[3], dpt[3];
  for (int i = 0; i < 3; ++i) {
    GroupPoint gp = g, gm = g;
    gp.x[i] += step;
    gm.x[i] -= step;
    dpx[i] = (p_fourier(gp, q).value - p_fourier(gm, q).value) / (2.0 * step);
    gp = g;
    gm = g;
    gp.t[i] += step;
    gm.t[i] -= step;
    dpt[i] = (p_fourier(gp, q).value - p_fourier(gm, q).value) / (2.0 * step);
  }
  double fd_scale = std::max({std::abs(dpx[0]), std::abs(dpx[1]),
                              std::abs(dpx[2]), std::abs(dpt[0]),
                              std::abs(dpt[1]), std::abs(dpt[2])});
  // the quadrature noise hides gradients below noise_grad; that is fine at
  // near-critical points where the gradient is genuinely tiny
  const double noise_grad = 10.0 * center.est_error / (p0 * step);
  if (fd_scale * step < 10.0 * center.est_error && noise_grad > 1e-3)
    throw NoisyGradientError("grad_log_p: FD signal below quadrature noise");
  // left-invariant fields (X1, X2, X3)
  Vec3 grad;
  grad[0] = dpx[0] - 0.5 * g.x[2] * dpt[1] + 0.5 * g.x[1] * dpt[2];
  grad[1] = dpx[1] + 0.5 * g.x[2] * dpt[0] - 0.5 * g.x[0] * dpt[2];
  grad[2] = dpx[2] - 0.5 * g.x[1] * dpt[0] + 0.5 * g.x[0] * dpt[1];
  return {grad[0] / p0, grad[1] / p0, grad[2] / p0};
}

}  // namespace ccn32::heatkernel
