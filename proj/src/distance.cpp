#include "ccn32/distance.hpp"

#include <algorithm>
#include <cmath>

#include "ccn32/specfun.hpp"

namespace ccn32 {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kBoundaryBand = 1e-10;  // relative width routed to case (ii)

using specfun::psi_family;
using specfun::theta1;

Vec3 normalized_or(const Vec3& v, const Vec3& fallback) {
  double n = norm(v);
  if (n == 0.0) return fallback;
  return (1.0 / n) * v;
}

// Effective critical data for the limit cases; wbar carries the limit of
// theta2 psi(|theta|), which stays positive on the cut locus and the
// boundary parabola.
maps::ThetaData theta_limit_cut_vertical(double beta) {
  // case (iii): theta2^2 = -2 r psi / psi', theta on Omega_{-,4} closure
  double r = maps::solve_cut_equation(beta);
  auto p = psi_family(r);
  double t2 = -std::sqrt(-2.0 * r * p.psi / p.dpsi);
  maps::ThetaData td;
  td.theta1 = std::sqrt(r * r - t2 * t2);
  td.theta2 = t2;
  td.r = r;
  td.epsilon = theta1() - r;
  td.wbar = t2 * p.psi;
  td.region = maps::ThetaRegion::OmegaMinus4;
  return td;
}

maps::ThetaData theta_limit_cut_horizontal(double gamma) {
  // case (iv): theta = (0, r) with mu(r) = gamma
  double r = specfun::mu_inverse(gamma);
  auto p = psi_family(r);
  maps::ThetaData td;
  td.theta1 = 0.0;
  td.theta2 = r;
  td.r = r;
  td.epsilon = theta1() - r;
  td.wbar = r * p.psi;
  td.region = maps::ThetaRegion::OmegaPlus1;
  return td;
}

maps::ThetaData theta_limit_boundary(double alpha) {
  // case (ii): theta -> (pi, 0) with theta2 / (pi - |theta|) -> alpha
  maps::ThetaData td;
  td.theta1 = kPi;
  td.theta2 = 0.0;
  td.r = kPi;
  td.epsilon = theta1() - kPi;
  td.wbar = alpha / kPi;  // limit of theta2 psi(|theta|)
  td.region = maps::ThetaRegion::BoundaryParabola;
  return td;
}

}  // namespace

GroupPoint group_mul(const GroupPoint& a, const GroupPoint& b) {
  return {a.x + b.x, a.t + b.t - 0.5 * cross(a.x, b.x)};
}

GroupPoint group_inverse(const GroupPoint& g) {
  return {-1.0 * g.x, -1.0 * g.t};
}

GroupPoint dilate(double h, const GroupPoint& g) {
  return {h * g.x, (h * h) * g.t};
}

ReducedPoint reduce(const GroupPoint& g) {
  ReducedPoint rp;
  rp.xnorm = norm(g.x);
  Vec3 e1{1, 0, 0}, t = g.t;
  if (rp.xnorm > 0.0) {
    e1 = (1.0 / rp.xnorm) * g.x;
  } else {
    // degenerate x = 0: align t with the first axis
    e1 = normalized_or(g.t, Vec3{1, 0, 0});
  }
  double tp = dot(t, e1);
  if (tp < 0.0) {  // t -> -t symmetry forces t_par >= 0
    t = -1.0 * t;
    tp = -tp;
    rp.t_flipped = true;
  }
  Vec3 t_perp_vec = t - tp * e1;
  double tperp = norm(t_perp_vec);
  Vec3 e2;
  if (tperp > 1e-300) {
    e2 = (1.0 / tperp) * t_perp_vec;
  } else {
    tperp = 0.0;
    Vec3 seed = std::abs(e1[0]) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    e2 = normalized_or(seed - dot(seed, e1) * e1, Vec3{0, 1, 0});
  }
  Vec3 e3 = cross(e1, e2);
  rp.t_par = tp;
  rp.t_perp = tperp;
  rp.frame = {e1, e2, e3};
  return rp;
}

GroupPoint unreduce(const ReducedPoint& rp) {
  Vec3 xr{rp.xnorm, 0, 0}, tr{rp.t_par, rp.t_perp, 0};
  GroupPoint g{mat_apply_transposed(rp.frame, xr),
               mat_apply_transposed(rp.frame, tr)};
  if (rp.t_flipped) g.t = -1.0 * g.t;
  return g;
}

DistanceResult cc_distance_squared(const GroupPoint& g) {
  DistanceResult res;
  ReducedPoint rp = reduce(g);
  const double xn = rp.xnorm, x2 = xn * xn;
  const double tnorm = std::hypot(rp.t_par, rp.t_perp);

  if (xn == 0.0 && tnorm == 0.0) {
    res.case_tag = DistanceCase::Origin;
    res.d2 = 0.0;
    return res;
  }
  if (xn == 0.0) {
    res.case_tag = DistanceCase::VerticalAxis;
    res.d2 = 4.0 * kPi * tnorm;
    return res;
  }
  if (tnorm == 0.0) {
    res.case_tag = DistanceCase::AbnormalAxis;
    res.d2 = x2;
    return res;
  }

  const double u1 = 4.0 * rp.t_par / x2, u2 = 4.0 * rp.t_perp / x2;
  res.u1 = u1;
  res.u2 = u2;

  if (u1 + u2 < 1e-9) {
    // |t| << |x|^2: d^2 = |x|^2 (1 + O(|u|)), below double resolution of
    // the generic solve; treat as the abnormal axis
    res.case_tag = DistanceCase::AbnormalAxis;
    res.d2 = x2;
    return res;
  }

  if (rp.t_perp == 0.0) {
    res.case_tag = DistanceCase::CutVertical;
    auto td = theta_limit_cut_vertical(u1);
    res.d2 = x2 * (specfun::aux_phis(td.r).phi3 * u1 + 1.0);
    res.theta_effective = td;
    return res;
  }
  if (rp.t_par == 0.0) {
    res.case_tag = DistanceCase::CutHorizontalT;
    auto td = theta_limit_cut_horizontal(u2);
    const double q = td.r / std::sin(td.r);
    res.d2 = x2 * q * q;
    res.theta_effective = td;
    return res;
  }

  const double lhs = kPi * u2 * u2, rhs = 4.0 * u1;
  if (std::abs(lhs - rhs) <= kBoundaryBand * std::max(lhs, rhs)) {
    res.case_tag = DistanceCase::BoundaryParabola;
    const double alpha = kPi * u2 / 2.0;
    res.d2 = x2 * (1.0 + alpha * alpha);
    res.theta_effective = theta_limit_boundary(alpha);
    return res;
  }

  res.case_tag = DistanceCase::Generic;
  auto u = maps::classify_region(u1, u2);
  auto td = maps::lambda_inverse(u);
  res.theta = td;
  res.theta_effective = td;
  auto p = psi_family(td.r);
  auto phis = specfun::aux_phis(td.r);
  const double sinr = std::sin(td.r);
  const double udott = u1 * td.theta1 + u2 * td.theta2;
  res.chain[0] = td.theta1 * td.theta1 / (td.r * td.r) +
                 td.theta2 * td.theta2 / (sinr * sinr);
  res.chain[1] = -td.theta2 * td.theta2 * p.psi + udott + 1.0;
  res.chain[2] = phis.phi1 * udott / td.r + 1.0;
  res.chain[3] = phis.phi2 * u1 * td.r / td.theta1 + 1.0;
  res.chain[4] =
      phis.phi3 * std::sqrt(u1 * (u1 + u2 * td.theta2 / td.theta1)) + 1.0;
  res.chain_valid = true;
  res.d2 = x2 * res.chain[1];
  return res;
}

double cc_distance_squared_between(const GroupPoint& a, const GroupPoint& b) {
  return cc_distance_squared(group_mul(group_inverse(a), b)).d2;
}

IntrinsicD intrinsic_D_squared(double Xnorm, double Tnorm) {
  if (Xnorm < 0 || Tnorm < 0)
    throw DomainError("intrinsic_D_squared: negative norms");
  IntrinsicD out;
  if (Xnorm == 0.0) {
    out.D2 = 4.0 * theta1() * Tnorm;
    return out;
  }
  const double rho = 4.0 * Tnorm / (Xnorm * Xnorm);
  out.tau_star_norm = maps::z_map(rho);
  out.D2 = maps::phi_map(rho) * Xnorm * Xnorm;
  return out;
}

HFamily h_family(double u1, double u2, double wbar, double w) {
  if (!(w > 0.0)) throw DomainError("h_family: w <= 0");
  HFamily out;
  const double u_sq = u1 * u1 + u2 * u2;
  out.A = std::sqrt(u_sq + 4.0 * wbar * wbar * w * w - 4.0 * u2 * wbar * w);
  out.U = out.A / (wbar * wbar * w * w);
  out.H = wbar * wbar * w * w * maps::phi_map(out.U);
  return out;
}

double d_curve(double u1, double u2, double wbar, double s1, double s2) {
  const double s_sq = s1 * s1 + s2 * s2;
  if (s_sq == 0.0)
    return theta1() * std::hypot(u1, u2);
  const double a_tilde = std::sqrt(u1 * u1 + u2 * u2 +
                                   4.0 * wbar * wbar * s_sq +
                                   4.0 * u2 * wbar * s1);
  const double u_tilde = a_tilde / (wbar * wbar * s_sq);
  return wbar * wbar * s_sq * maps::phi_map(u_tilde);
}

RegimeParams regime_params(const GroupPoint& g) {
  RegimeParams out;
  auto dres = cc_distance_squared(g);
  ReducedPoint rp = reduce(g);
  out.d2 = dres.d2;
  out.xnorm = rp.xnorm;
  out.m = 0.25 * (dres.d2 - rp.xnorm * rp.xnorm);
  if (!dres.theta_effective.has_value()) {
    // abnormal axis or x = 0: Hessian data degenerates, theta absent
    return out;
  }
  const auto& td = *dres.theta_effective;
  out.theta = td;
  out.epsilon = td.epsilon;
  out.wbar = td.wbar;
  const double x2 = rp.xnorm * rp.xnorm;
  const double sinr = std::sin(td.r);

  if (td.region == maps::ThetaRegion::BoundaryParabola) {
    // limits at theta -> (pi, 0): L1 = |x|^2, A(1) -> alpha^2 / pi
    auto u = specfun::upsilon_family(td.r);
    out.L1 = (kPi * kPi / (-u.dups * td.r)) * x2;
    const double alpha = td.wbar * kPi;
    const double A1 = alpha * alpha / kPi;
    out.L2 = dres.u2 * x2 * td.wbar * td.r / (2.0 * A1);
    return out;
  }

  auto u = specfun::upsilon_family(td.r);
  out.L1 = (td.theta1 * td.theta1 / (-u.dups * td.r) +
            td.theta2 * td.theta2 / (-u.ddups * sinr * sinr)) *
           x2;
  auto p = psi_family(td.r);
  const double K3 = 2.0 * p.psi + (p.dpsi / td.r) * td.theta2 * td.theta2;
  out.L2 = (p.psi * td.r / (2.0 * p.dpsi)) * K3 * x2;
  return out;
}

std::vector<Regime> classify_regime(const GroupPoint& g,
                                    const RegimeThresholds& th) {
  std::vector<Regime> tags;
  auto params = regime_params(g);
  const bool has_theta = params.theta.has_value();
  if (has_theta) {
    const auto& td = *params.theta;
    if (td.r <= th.alpha0 && td.theta2 * params.xnorm >= th.t2x_min)
      tags.push_back(Regime::I);
    if (td.r >= th.theta_min_ii && params.m >= th.m_min &&
        params.L1 >= th.L1_min)
      tags.push_back(Regime::II);
    if (params.L1 <= th.L1_max && params.m >= th.m_min)
      tags.push_back(Regime::III);
  }
  if (params.m <= th.m_max && params.d2 >= th.d2_min)
    tags.push_back(Regime::IV);
  return tags;
}

}  // namespace ccn32
