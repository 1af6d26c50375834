#include "ccn32/maps.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ccn32/specfun.hpp"

namespace ccn32::maps {

namespace {

constexpr double kPi = 3.14159265358979323846;

using specfun::psi_family;
using specfun::theta1;
using specfun::upsilon_family;

// Solves the cubic a t^3 + 2 psi t = u2 for t = theta2 given r; on
// Omega_{+,1} (psi > 0) the left side is strictly increasing so the root is
// unique; on Omega_{-,4} the admissible roots are returned in ascending
// order (there may be two, the outer residual in r decides).
int cubic_roots(double a, double psi, double u2, double out[2]) {
  if (psi > 0.0) {
    // monotone: Newton from u2 / (2 psi)
    double t = u2 / (2.0 * psi);
    for (int it = 0; it < 200; ++it) {
      double f = a * t * t * t + 2.0 * psi * t - u2;
      double df = 3.0 * a * t * t + 2.0 * psi;
      double tn = t - f / df;
      if (tn < 0) tn = 0.5 * t;
      if (std::abs(tn - t) < 1e-16 * (1.0 + std::abs(t))) {
        t = tn;
        break;
      }
      t = tn;
    }
    out[0] = t;
    return 1;
  }
  // psi < 0: s (-a s^2 - 2 psi) = u2 with s = -theta2 > 0, K3 < 0 requires
  // s^2 < -2 psi / a; h(s) = -a s^3 - 2 psi s rises to its max at s_star
  // and falls back to 0 at s_K.
  const double sK = std::sqrt(-2.0 * psi / a);
  const double sstar = sK / std::sqrt(3.0);
  const double hmax = -a * sstar * sstar * sstar - 2.0 * psi * sstar;
  if (u2 > hmax) return 0;
  int count = 0;
  // root in (0, sstar]
  {
    double lo = 0.0, hi = sstar;
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      double f = -a * mid * mid * mid - 2.0 * psi * mid - u2;
      (f < 0.0 ? lo : hi) = mid;
      if (hi - lo < 1e-16 * (1.0 + hi)) break;
    }
    out[count++] = -0.5 * (lo + hi);
  }
  // root in [sstar, sK)
  {
    double lo = sstar, hi = sK;
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      double f = -a * mid * mid * mid - 2.0 * psi * mid - u2;
      (f > 0.0 ? lo : hi) = mid;
      if (hi - lo < 1e-16 * (1.0 + hi)) break;
    }
    out[count++] = -0.5 * (lo + hi);
  }
  return count;
}

struct Candidate {
  double v1, v2;
  double err;
};

// Residual of the forward map against the target u, relative; the pole
// guard band around |v| = pi counts as infinitely wrong.
double forward_error(double v1, double v2, double u1, double u2) {
  try {
    auto f = lambda_forward(v1, v2);
    double scale = std::max({std::abs(u1), std::abs(u2), 1e-300});
    return std::hypot(f[0] - u1, f[1] - u2) / scale;
  } catch (const NumericsError&) {
    return 1e300;
  }
}

// Damped Newton polish on Lambda(v) = u with the analytic Jacobian.
bool newton_polish(double& v1, double& v2, double u1, double u2, double rlo,
                   double rhi) try {
  double err = forward_error(v1, v2, u1, u2);
  for (int it = 0; it < 80; ++it) {
    if (err < 1e-13) return true;
    auto f = lambda_forward(v1, v2);
    auto J = lambda_jacobian(v1, v2);
    double det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
    if (det == 0.0) return false;
    double r0 = f[0] - u1, r1 = f[1] - u2;
    double dv1 = -(J[1][1] * r0 - J[0][1] * r1) / det;
    double dv2 = -(-J[1][0] * r0 + J[0][0] * r1) / det;
    double step = 1.0;
    for (int ls = 0; ls < 40; ++ls, step *= 0.5) {
      double w1 = v1 + step * dv1, w2 = v2 + step * dv2;
      double r = std::hypot(w1, w2);
      if (!(r > rlo && r < rhi)) continue;
      double e = forward_error(w1, w2, u1, u2);
      if (e < err) {
        v1 = w1;
        v2 = w2;
        err = e;
        break;
      }
      if (ls == 39) return err < 1e-10;
    }
  }
  return err < 1e-10;
} catch (const NumericsError&) {
  return false;  // stepped into the pole guard band
}

// 1-D slice residual: for a trial r, theta2 from the cubic, theta1 from
// r^2 = theta1^2 + theta2^2, and the mismatch in u1 is returned per branch.
struct SliceEval {
  bool feasible[2] = {false, false};
  double resid[2] = {0, 0};
  double v1[2] = {0, 0}, v2[2] = {0, 0};
};

SliceEval eval_slice(double r, double u1, double u2, bool plus_region) {
  SliceEval out;
  specfun::PsiValues p;
  try {
    p = psi_family(r);
  } catch (const PoleProximityError&) {
    return out;
  }
  (void)plus_region;  // the cubic solver branches on the sign of psi itself
  const double a = p.dpsi / r;
  double roots[2];
  int n = cubic_roots(a, p.psi, u2, roots);
  for (int i = 0; i < n; ++i) {
    double t2 = roots[i];
    double t2sq = t2 * t2;
    if (t2sq >= r * r) continue;
    double t1 = std::sqrt(r * r - t2sq);
    out.feasible[i] = true;
    out.v1[i] = t1;
    out.v2[i] = t2;
    out.resid[i] = a * t1 * t2sq - u1;
  }
  return out;
}

ThetaData finish(double v1, double v2, ThetaRegion reg) {
  ThetaData td;
  td.theta1 = v1;
  td.theta2 = v2;
  td.r = std::hypot(v1, v2);
  td.epsilon = theta1() - td.r;
  td.wbar = v2 * psi_family(td.r).psi;
  td.region = reg;
  return td;
}

}  // namespace

double z_map(double rho) {
  if (rho == 0.0) return 0.0;
  const double a = std::abs(rho);
  const double th1 = theta1();
  double lo = 0.0, hi = th1 * (1.0 - 1e-16);
  // -Upsilon'(z) ~ 0.4 z near 0 and ~ theta1/(theta1 - z)^2 near theta1
  double x = a < 1.0 ? a / 0.4 : th1 - std::sqrt(th1 / a);
  x = std::clamp(x, 1e-12, th1 - 1e-14);
  double fx = 0.0;
  for (int it = 0; it < 200; ++it) {
    auto u = upsilon_family(x);
    fx = -u.dups - a;
    if (fx > 0)
      hi = x;
    else
      lo = x;
    double xn = x + fx / u.ddups;  // Newton: d(-Ups')/dz = -Ups''
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    if (std::abs(xn - x) < 5e-17 * (1.0 + x)) {
      x = xn;
      break;
    }
    x = xn;
  }
  const double resid = std::abs(-upsilon_family(x).dups - a);
  if (resid > 1e-9 * (1.0 + a))
    throw ConvergenceError("z_map: residual " + std::to_string(resid));
  return rho > 0 ? x : -x;
}

double phi_map(double rho) {
  const double z = z_map(std::abs(rho));
  return upsilon_family(z).ups + std::abs(rho) * z;
}

std::array<double, 2> lambda_forward(double v1, double v2) {
  const double r = std::hypot(v1, v2);
  if (r <= 0.0 || r >= theta1())
    throw DomainError("lambda_forward: |v| outside (0, theta1)");
  auto p = psi_family(r);
  const double a = p.dpsi / r;
  return {a * v1 * v2 * v2, v2 * (a * v2 * v2 + 2.0 * p.psi)};
}

std::array<std::array<double, 2>, 2> lambda_jacobian(double v1, double v2) {
  const double r = std::hypot(v1, v2);
  if (r <= 0.0 || r >= theta1())
    throw DomainError("lambda_jacobian: |v| outside (0, theta1)");
  auto k = specfun::k_family(v1, v2);
  const double K1 = k.K1, K2 = k.K2;
  std::array<std::array<double, 2>, 2> J;
  J[0][0] = v2 * v2 * (K1 + K2 * v1 * v1);
  J[0][1] = v1 * v2 * (2.0 * K1 + K2 * v2 * v2);
  J[1][0] = J[0][1];
  // 2 psi + v2^2 (5 K1 + K2 v2^2), with 2 psi recovered from K3
  J[1][1] = (k.K3 - K1 * v2 * v2) + v2 * v2 * (5.0 * K1 + K2 * v2 * v2);
  return J;
}

UParam classify_region(double u1, double u2) {
  if (!(u1 > 0.0) || !(u2 > 0.0))
    throw DomainError("classify_region: u1, u2 must be positive");
  const double lhs = kPi * u2 * u2, rhs = 4.0 * u1;
  UParam u{u1, u2, Region::Boundary};
  if (std::abs(lhs - rhs) <= 1e-12 * std::max(lhs, rhs))
    u.region = Region::Boundary;
  else if (lhs > rhs)
    u.region = Region::GreaterPlus;
  else
    u.region = Region::LessPlus;
  return u;
}

ThetaData lambda_inverse(const UParam& u) {
  if (u.region == Region::Boundary)
    throw BoundaryInputError("lambda_inverse: u on the parabola");
  const bool plus = u.region == Region::GreaterPlus;
  const double th1 = theta1();
  const double rlo = plus ? 1e-9 : kPi + 1e-11;
  const double rhi = plus ? kPi - 1e-11 : th1 - 1e-11;

  // Scan r on a blended grid (uniform plus log-refined near pi, where the
  // forward map blows up), bracket sign changes of the slice residual per
  // cubic branch, then bisect and Newton-polish in 2-D.
  std::vector<double> grid;
  const int nu = 220;
  for (int i = 0; i <= nu; ++i)
    grid.push_back(rlo + (rhi - rlo) * i / double(nu));
  for (int i = 1; i <= 60; ++i) {
    double d = std::pow(10.0, -10.0 + 10.0 * i / 60.0);  // pi +- 10^{-10..0}
    double r = plus ? kPi - d : kPi + d;
    if (r > rlo && r < rhi) grid.push_back(r);
  }
  if (!plus) {
    for (int i = 1; i <= 40; ++i) {  // refine near theta1 as well
      double d = std::pow(10.0, -10.0 + 9.0 * i / 40.0);
      double r = th1 - d;
      if (r > rlo && r < rhi) grid.push_back(r);
    }
  }
  std::sort(grid.begin(), grid.end());

  std::vector<Candidate> cands;
  auto bisect_root = [&](double lo, double hi, double flo, int b) {
    double v1 = 0, v2 = 0;
    bool have = false;
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      SliceEval m = eval_slice(mid, u.u1, u.u2, plus);
      if (!m.feasible[b]) break;
      if (m.resid[b] * flo <= 0.0)
        hi = mid;
      else {
        lo = mid;
        flo = m.resid[b];
      }
      v1 = m.v1[b];
      v2 = m.v2[b];
      have = true;
      if (hi - lo < 1e-14 * (1.0 + hi)) break;
    }
    if (have) cands.push_back({v1, v2, forward_error(v1, v2, u.u1, u.u2)});
  };
  // The slice degenerates where a branch appears or disappears (theta1 -> 0
  // or cubic-root merge); residual sign changes can hide in a sliver next
  // to the boundary, so transitions get a probe ladder of their own.
  auto probe_transition = [&](double r_out, double r_in, int b,
                              const SliceEval& in_eval) {
    double lo = r_out, hi = r_in;
    for (int it = 0; it < 80; ++it) {  // feasibility boundary
      double mid = 0.5 * (lo + hi);
      SliceEval m = eval_slice(mid, u.u1, u.u2, plus);
      (m.feasible[b] ? hi : lo) = mid;
      if (std::abs(hi - lo) < 1e-15 * (1.0 + std::abs(hi))) break;
    }
    double span = r_in - hi;
    double f_far = in_eval.resid[b];
    for (double frac : {1e-12, 1e-9, 1e-6, 1e-3, 1e-1}) {
      double rp = hi + span * frac;
      SliceEval m = eval_slice(rp, u.u1, u.u2, plus);
      if (!m.feasible[b]) continue;
      if (m.resid[b] == 0.0) {
        cands.push_back({m.v1[b], m.v2[b], 0.0});
        return;
      }
      if (m.resid[b] * f_far < 0.0) {
        if (rp < r_in)
          bisect_root(rp, r_in, m.resid[b], b);
        else
          bisect_root(r_in, rp, f_far, b);
        return;
      }
    }
  };
  SliceEval prev = eval_slice(grid[0], u.u1, u.u2, plus);
  double prev_r = grid[0];
  for (size_t i = 1; i < grid.size(); ++i) {
    SliceEval cur = eval_slice(grid[i], u.u1, u.u2, plus);
    for (int b = 0; b < 2; ++b) {
      if (prev.feasible[b] && cur.feasible[b]) {
        if (prev.resid[b] == 0.0)
          cands.push_back({prev.v1[b], prev.v2[b], 0.0});
        else if (prev.resid[b] * cur.resid[b] < 0.0)
          bisect_root(prev_r, grid[i], prev.resid[b], b);
      } else if (!prev.feasible[b] && cur.feasible[b]) {
        probe_transition(prev_r, grid[i], b, cur);
      } else if (prev.feasible[b] && !cur.feasible[b]) {
        probe_transition(grid[i], prev_r, b, prev);
      }
    }
    prev = cur;
    prev_r = grid[i];
  }

  // direct 2-D seeds as a last resort
  {
    Candidate best{0, 0, 1e300};
    for (int ir = 1; ir <= 90; ++ir) {
      double r = rlo + (rhi - rlo) * ir / 91.0;
      for (int ia = 1; ia <= 60; ++ia) {
        double frac = static_cast<double>(ia) / 61.0;
        double v2 = plus ? r * frac : -r * frac;
        double v1 = std::sqrt(r * r - v2 * v2);
        if (!plus && v1 <= kPi) continue;
        double e = forward_error(v1, v2, u.u1, u.u2);
        if (e < best.err) best = {v1, v2, e};
      }
    }
    if (best.err < 1e300) cands.push_back(best);
  }
  // Inside the boundary layer the r parametrization resolves theta2/(pi-r)
  // only to ulp(pi)/distance, so the achievable forward error degrades;
  // the distance value itself stays accurate by stationarity of phi.
  const double pi_u2sq = kPi * u.u2 * u.u2, four_u1 = 4.0 * u.u1;
  const double prox =
      std::abs(pi_u2sq - four_u1) / std::max(pi_u2sq, four_u1);
  const double accept = std::max(1e-10, 2e-14 / std::max(prox, 1e-300));

  std::sort(cands.begin(), cands.end(),
            [](const Candidate& a, const Candidate& b) { return a.err < b.err; });
  for (auto& c : cands) {
    double v1 = c.v1, v2 = c.v2;
    newton_polish(v1, v2, u.u1, u.u2, plus ? 0.0 : kPi, plus ? kPi : th1);
    if (forward_error(v1, v2, u.u1, u.u2) < accept)
      return finish(v1, v2, plus ? ThetaRegion::OmegaPlus1
                                 : ThetaRegion::OmegaMinus4);
  }
  throw ConvergenceError(
      "lambda_inverse: no candidate matched u = (" + std::to_string(u.u1) +
      ", " + std::to_string(u.u2) + "), candidates " +
      std::to_string(cands.size()));
}

double solve_cut_equation(double beta) {
  if (!(beta > 0.0)) throw DomainError("solve_cut_equation: beta <= 0");
  const double th1 = theta1();
  auto lhs = [](double r) {
    auto p = psi_family(r);
    return -2.0 * p.psi * std::sqrt(r * r + 2.0 * r * p.psi / p.dpsi);
  };
  // LHS decreases from +inf (r -> pi+) to 0 (r -> theta1-); bisection on a
  // log-transformed bracket, then Newton-free refinement.
  double lo = kPi + 1e-13, hi = th1 - 1e-13;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (lhs(mid) > beta ? lo : hi) = mid;
    if (hi - lo < 5e-17 * hi) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace ccn32::maps
