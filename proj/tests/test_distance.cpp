#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "ccn32/distance.hpp"
#include "ccn32/specfun.hpp"

using namespace ccn32;

namespace {
constexpr double kPi = 3.14159265358979323846;

std::mt19937_64 rng_global(91);

Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0, 1);
  Vec3 v{g(rng), g(rng), g(rng)};
  return (1.0 / norm(v)) * v;
}

Mat3 random_rotation(std::mt19937_64& rng) {
  Vec3 a = random_unit(rng);
  Vec3 b0 = random_unit(rng);
  Vec3 b = b0 - dot(b0, a) * a;
  b = (1.0 / norm(b)) * b;
  Vec3 c = cross(a, b);
  return {a, b, c};
}

GroupPoint random_generic(std::mt19937_64& rng, double xscale = 2.0,
                          double tscale = 1.5) {
  std::uniform_real_distribution<double> ur(0.1, 1.0);
  GroupPoint g;
  g.x = (xscale * ur(rng)) * random_unit(rng);
  g.t = (tscale * ur(rng)) * random_unit(rng);
  return g;
}

// reference function phi(g_u; tau) of the reduced point, for FD Hessians
double phi_ref(double u1, double u2, const Vec3& tau) {
  double r = norm(tau);
  double psi = specfun::psi_family(r).psi;
  return 1.0 - psi * (tau[1] * tau[1] + tau[2] * tau[2]) + u1 * tau[0] +
         u2 * tau[1];
}
}  // namespace

TEST_CASE("group law and reduction") {
  GroupPoint a{{1, 2, 3}, {0.1, 0.2, 0.3}}, b{{-2, 1, 0}, {1, 0, -1}};
  auto ab = group_mul(a, b);
  auto id = group_mul(group_inverse(a), a);
  CHECK(norm(id.x) < 1e-15);
  CHECK(norm(id.t) < 1e-15);
  CHECK(ab.x[0] == doctest::Approx(-1.0));

  // aligned case
  auto rp = reduce(GroupPoint{{1, 0, 0}, {0, 1, 0}});
  CHECK(rp.xnorm == doctest::Approx(1.0));
  CHECK(rp.t_par == doctest::Approx(0.0));
  CHECK(rp.t_perp == doctest::Approx(1.0));

  // collinear with flip
  auto rp2 = reduce(GroupPoint{{0, 0, 2}, {0, 0, -3}});
  CHECK(rp2.xnorm == doctest::Approx(2.0));
  CHECK(rp2.t_par == doctest::Approx(3.0));
  CHECK(rp2.t_perp == doctest::Approx(0.0));
  CHECK(rp2.t_flipped);

  // random points: norms preserved, reconstruction exact
  for (int i = 0; i < 50; ++i) {
    GroupPoint g = random_generic(rng_global);
    auto rp3 = reduce(g);
    CHECK(rp3.xnorm == doctest::Approx(norm(g.x)).epsilon(1e-14));
    CHECK(std::hypot(rp3.t_par, rp3.t_perp) ==
          doctest::Approx(norm(g.t)).epsilon(1e-14));
    auto gr = unreduce(rp3);
    CHECK(norm(gr.x - g.x) < 1e-13 * (1.0 + norm(g.x)));
    CHECK(norm(gr.t - g.t) < 1e-13 * (1.0 + norm(g.t)));
  }
}

TEST_CASE("known distance values") {
  // d((0,t))^2 = 4 pi |t|
  auto r1 = cc_distance_squared(GroupPoint{{0, 0, 0}, {1, 0, 0}});
  CHECK(r1.case_tag == DistanceCase::VerticalAxis);
  CHECK(r1.d2 == doctest::Approx(4.0 * kPi).epsilon(1e-14));
  auto r1b = cc_distance_squared(GroupPoint{{0, 0, 0}, {0.3, -0.4, 1.2}});
  CHECK(r1b.d2 == doctest::Approx(4.0 * kPi * 1.3).epsilon(1e-14));

  // abnormal axis
  auto r2 = cc_distance_squared(GroupPoint{{1, 0, 0}, {0, 0, 0}});
  CHECK(r2.case_tag == DistanceCase::AbnormalAxis);
  CHECK(r2.d2 == doctest::Approx(1.0));

  // boundary parabola: g_alpha = (e1, (alpha^2/pi, 2 alpha/pi, 0)/4)
  for (double alpha : {0.5, 1.0, 2.0}) {
    GroupPoint g{{1, 0, 0},
                 {alpha * alpha / (4.0 * kPi), alpha / (2.0 * kPi), 0}};
    auto r3 = cc_distance_squared(g);
    CHECK(r3.case_tag == DistanceCase::BoundaryParabola);
    CHECK(r3.d2 == doctest::Approx(1.0 + alpha * alpha).epsilon(1e-9));
  }

  // case (iv): t orthogonal to x
  GroupPoint g4{{1, 0, 0}, {0, 0.5, 0}};
  auto r4 = cc_distance_squared(g4);
  CHECK(r4.case_tag == DistanceCase::CutHorizontalT);
  double rr = specfun::mu_inverse(2.0);
  CHECK(r4.d2 ==
        doctest::Approx(std::pow(rr / std::sin(rr), 2)).epsilon(1e-12));

  // case (iii): t parallel to x, d^2 = |x|^2 (phi3(r) beta + 1)
  GroupPoint g5{{1, 0, 0}, {0.5, 0, 0}};
  auto r5 = cc_distance_squared(g5);
  CHECK(r5.case_tag == DistanceCase::CutVertical);
  CHECK(r5.d2 > 1.0);
  double rc = maps::solve_cut_equation(2.0);
  CHECK(r5.d2 ==
        doctest::Approx(specfun::aux_phis(rc).phi3 * 2.0 + 1.0).epsilon(1e-12));
}

TEST_CASE("identity chain on generic points") {
  int n = 0;
  while (n < 200) {
    GroupPoint g = random_generic(rng_global);
    auto res = cc_distance_squared(g);
    if (res.case_tag != DistanceCase::Generic) continue;
    ++n;
    REQUIRE(res.chain_valid);
    for (int i = 1; i < 5; ++i)
      CHECK(res.chain[i] == doctest::Approx(res.chain[0]).epsilon(1e-9));
  }
}

TEST_CASE("symmetry and scaling") {
  for (int i = 0; i < 25; ++i) {
    GroupPoint g = random_generic(rng_global);
    double d2 = cc_distance_squared(g).d2;
    Mat3 O = random_rotation(rng_global);
    GroupPoint gr{mat_apply(O, g.x), mat_apply(O, g.t)};
    CHECK(cc_distance_squared(gr).d2 == doctest::Approx(d2).epsilon(1e-10));
    GroupPoint gm{g.x, -1.0 * g.t};
    CHECK(cc_distance_squared(gm).d2 == doctest::Approx(d2).epsilon(1e-10));
    for (double h : {0.1, 3.0}) {
      CHECK(cc_distance_squared(dilate(h, g)).d2 ==
            doctest::Approx(h * h * d2).epsilon(1e-10));
    }
  }
}

TEST_CASE("norm equivalence d^2 ~ |x|^2 + |t|") {
  double lo = 1e30, hi = 0.0;
  for (int i = 0; i < 200; ++i) {
    GroupPoint g = random_generic(rng_global, 4.0, 6.0);
    double d2 = cc_distance_squared(g).d2;
    double hom = dot(g.x, g.x) + norm(g.t);
    double q = d2 / hom;
    lo = std::min(lo, q);
    hi = std::max(hi, q);
  }
  CHECK(lo > 0.0);
  CHECK(std::isfinite(hi));
  CHECK(hi / lo < 50.0);  // observed spread stays modest
}

TEST_CASE("continuity across the boundary parabola") {
  const double alpha = 1.0;
  const double u1 = alpha * alpha / kPi;
  const double u2b = 2.0 * alpha / kPi;
  const double exact = 1.0 + alpha * alpha;
  for (double eps : {1e-8, -1e-8}) {
    GroupPoint g{{1, 0, 0}, {0.25 * u1, 0.25 * (u2b + eps * u2b), 0}};
    auto res = cc_distance_squared(g);
    CHECK(res.d2 == doctest::Approx(exact).epsilon(1e-6));
  }
}

TEST_CASE("intrinsic distance D") {
  const double th1 = specfun::theta1();
  CHECK(intrinsic_D_squared(0.0, 1.0).D2 ==
        doctest::Approx(4.0 * th1).epsilon(1e-13));
  CHECK(!intrinsic_D_squared(0.0, 1.0).tau_star_norm.has_value());
  CHECK(intrinsic_D_squared(1.5, 0.0).D2 ==
        doctest::Approx(3.0 * 2.25).epsilon(1e-13));
  // scaling identity at h = 0.37
  std::uniform_real_distribution<double> ur(0.2, 2.0);
  for (int i = 0; i < 20; ++i) {
    double X = ur(rng_global), T = ur(rng_global);
    double h = 0.37;
    CHECK(intrinsic_D_squared(X / std::sqrt(h), T / h).D2 ==
          doctest::Approx(intrinsic_D_squared(X, T).D2 / h).epsilon(1e-12));
  }
}

TEST_CASE("H family identities at the minimizer") {
  int n = 0;
  while (n < 20) {
    GroupPoint g = random_generic(rng_global);
    auto res = cc_distance_squared(g);
    if (res.case_tag != DistanceCase::Generic) continue;
    ++n;
    const auto& td = *res.theta;
    auto p = specfun::psi_family(td.r);
    auto hf = h_family(res.u1, res.u2, td.wbar, 1.0);
    // A(1) = theta2^2 psi'(|theta|)
    CHECK(hf.A ==
          doctest::Approx(td.theta2 * td.theta2 * p.dpsi).epsilon(1e-10));
    // U(1) = -Upsilon'(|theta|)
    CHECK(hf.U ==
          doctest::Approx(-specfun::upsilon_family(td.r).dups).epsilon(1e-9));
    // H(1) = D(u; sbar) = d^2/|x|^2 - 1
    double x2 = dot(g.x, g.x);
    CHECK(hf.H == doctest::Approx(res.d2 / x2 - 1.0).epsilon(1e-9));
    CHECK(hf.H == doctest::Approx(
                      d_curve(res.u1, res.u2, td.wbar, -1.0, 0.0))
                      .epsilon(1e-12));
    // H'(1) = 0 via central FD
    double h = 1e-5;
    double fd = (h_family(res.u1, res.u2, td.wbar, 1.0 + h).H -
                 h_family(res.u1, res.u2, td.wbar, 1.0 - h).H) /
                (2.0 * h);
    CHECK(std::abs(fd) < 1e-6 * (1.0 + hf.H));
    // the five closed forms of D(u; sbar)
    auto phis = specfun::aux_phis(td.r);
    double udott = res.u1 * td.theta1 + res.u2 * td.theta2;
    double sinr = std::sin(td.r);
    double e1 = -td.theta2 * td.theta2 * p.psi + udott;
    double e2 = td.theta2 * td.theta2 / (td.r * td.r) *
                (std::pow(td.r / sinr, 2) - 1.0);
    double e3 = phis.phi1 / td.r * udott;
    double e4 = phis.phi2 * res.u1 * td.r / td.theta1;
    double e5 = phis.phi3 *
                std::sqrt(res.u1 * (res.u1 + res.u2 * td.theta2 / td.theta1));
    for (double e : {e2, e3, e4, e5})
      CHECK(e == doctest::Approx(e1).epsilon(1e-9));
    CHECK(hf.H == doctest::Approx(e1).epsilon(1e-9));
  }
}

TEST_CASE("minimizer: D(u; s) > D(u; sbar) at random s") {
  int n = 0;
  std::uniform_real_distribution<double> us(-4.0, 4.0);
  while (n < 5) {
    GroupPoint g = random_generic(rng_global);
    auto res = cc_distance_squared(g);
    if (res.case_tag != DistanceCase::Generic) continue;
    ++n;
    const auto& td = *res.theta;
    double dmin = d_curve(res.u1, res.u2, td.wbar, -1.0, 0.0);
    for (int k = 0; k < 500; ++k) {
      double s1 = us(rng_global), s2 = us(rng_global);
      if (std::abs(s1 + 1.0) < 1e-6 && std::abs(s2) < 1e-6) continue;
      CHECK(d_curve(res.u1, res.u2, td.wbar, s1, s2) > dmin);
    }
  }
}

TEST_CASE("H monotone on (0,1) and (1,inf); D_p nondecreasing in |gamma|") {
  int n = 0;
  while (n < 5) {
    GroupPoint g = random_generic(rng_global);
    auto res = cc_distance_squared(g);
    if (res.case_tag != DistanceCase::Generic) continue;
    ++n;
    const auto& td = *res.theta;
    double prev = 1e300;
    for (int i = 1; i <= 40; ++i) {
      double w = i / 41.0;
      double v = h_family(res.u1, res.u2, td.wbar, w).H;
      CHECK(v < prev);
      prev = v;
    }
    prev = h_family(res.u1, res.u2, td.wbar, 1.0).H;
    for (int i = 1; i <= 40; ++i) {
      double w = 1.0 + 3.0 * i / 40.0;
      double v = h_family(res.u1, res.u2, td.wbar, w).H;
      CHECK(v > prev);
      prev = v;
    }
    // gamma-monotonicity at fixed w
    for (double w : {0.5, 1.0, 2.0}) {
      prev = -1.0;
      for (int i = 0; i <= 30; ++i) {
        double gam = kPi * i / 31.0;
        double v = d_curve(res.u1, res.u2, td.wbar, -w * std::cos(gam),
                           -w * std::sin(gam));
        CHECK(v >= prev - 1e-12);
        prev = v;
      }
    }
  }
}

TEST_CASE("Hessian identity: FD of -phi matches blockdiag(J, K3)") {
  int n = 0;
  while (n < 10) {
    GroupPoint g = random_generic(rng_global);
    auto res = cc_distance_squared(g);
    if (res.case_tag != DistanceCase::Generic) continue;
    ++n;
    const auto& td = *res.theta;
    Vec3 th{td.theta1, td.theta2, 0.0};
    const double h = 1e-5;
    double H[3][3];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        Vec3 pp = th, pm = th, mp = th, mm = th;
        pp[i] += h;
        pp[j] += h;
        pm[i] += h;
        pm[j] -= h;
        mp[i] -= h;
        mp[j] += h;
        mm[i] -= h;
        mm[j] -= h;
        H[i][j] = -(phi_ref(res.u1, res.u2, pp) - phi_ref(res.u1, res.u2, pm) -
                    phi_ref(res.u1, res.u2, mp) +
                    phi_ref(res.u1, res.u2, mm)) /
                  (4.0 * h * h);
      }
    auto J = maps::lambda_jacobian(td.theta1, td.theta2);
    auto k = specfun::k_family(td.theta1, td.theta2);
    double scale =
        std::max({std::abs(J[0][0]), std::abs(J[1][1]), std::abs(k.K3), 1.0});
    CHECK(std::abs(H[0][0] - J[0][0]) < 1e-5 * scale);
    CHECK(std::abs(H[0][1] - J[0][1]) < 1e-5 * scale);
    CHECK(std::abs(H[1][1] - J[1][1]) < 1e-5 * scale);
    CHECK(std::abs(H[2][2] - k.K3) < 1e-5 * scale);
    CHECK(std::abs(H[0][2]) < 1e-5 * scale);
    CHECK(std::abs(H[1][2]) < 1e-5 * scale);
    // det(-Hess phi(g; theta)) = theta2^2 K K3 |x|^6
    double x2 = dot(g.x, g.x);
    double det3 = H[0][0] * (H[1][1] * H[2][2] - H[1][2] * H[2][1]) -
                  H[0][1] * (H[1][0] * H[2][2] - H[1][2] * H[2][0]) +
                  H[0][2] * (H[1][0] * H[2][1] - H[1][1] * H[2][0]);
    det3 *= x2 * x2 * x2;  // Hess phi(g) = |x|^2 Hess phi(g_u)
    double closed = td.theta2 * td.theta2 * k.K * k.K3 * x2 * x2 * x2;
    CHECK(det3 == doctest::Approx(closed).epsilon(1e-4));
  }
}

TEST_CASE("regime params: positivity and FD Hessian diagonal") {
  int n = 0;
  while (n < 50) {
    GroupPoint g = random_generic(rng_global);
    auto res = cc_distance_squared(g);
    if (res.case_tag != DistanceCase::Generic) continue;
    ++n;
    auto params = regime_params(g);
    CHECK(params.L1 > 0.0);
    CHECK(params.L2 > 0.0);
    CHECK(params.d2 ==
          doctest::Approx(params.xnorm * params.xnorm + 4.0 * params.m)
              .epsilon(1e-12));
    if (n > 10) continue;  // FD checks on a subsample
    const auto& td = *params.theta;
    const double x2 = params.xnorm * params.xnorm;
    const double h = 1e-5;
    auto Dq = [&](double s1, double s2) {
      return 0.25 * x2 * d_curve(res.u1, res.u2, td.wbar, s1, s2);
    };
    double H11 = (Dq(-1 + h, 0) - 2 * Dq(-1, 0) + Dq(-1 - h, 0)) / (h * h);
    double H22 = (Dq(-1, h) - 2 * Dq(-1, 0) + Dq(-1, -h)) / (h * h);
    double H12 =
        (Dq(-1 + h, h) - Dq(-1 + h, -h) - Dq(-1 - h, h) + Dq(-1 - h, -h)) /
        (4 * h * h);
    CHECK(H11 == doctest::Approx(params.L1).epsilon(1e-4));
    CHECK(H22 == doctest::Approx(params.L2).epsilon(1e-4));
    CHECK(std::abs(H12) < 1e-4 * std::max(params.L1, params.L2));
    // L1 = |x|^2 H''(1) / 4 cross-check by FD of H
    double fdH = (h_family(res.u1, res.u2, td.wbar, 1 + h).H -
                  2 * h_family(res.u1, res.u2, td.wbar, 1.0).H +
                  h_family(res.u1, res.u2, td.wbar, 1 - h).H) /
                 (h * h);
    CHECK(params.L1 == doctest::Approx(0.25 * x2 * fdH).epsilon(1e-4));
  }
}

TEST_CASE("regime classification") {
  // |theta| moderate with theta2 |x| large: regime I
  {
    auto u = maps::lambda_forward(1.5, 1.2);
    GroupPoint g{{70, 0, 0}, {0.25 * u[0] * 4900, 0.25 * u[1] * 4900, 0}};
    auto tags = classify_regime(g);
    CHECK(std::find(tags.begin(), tags.end(), Regime::I) != tags.end());
  }
  // abnormal axis far out: regime IV
  {
    GroupPoint g{{12, 0, 0}, {0, 0, 0}};
    auto tags = classify_regime(g);
    CHECK(std::find(tags.begin(), tags.end(), Regime::IV) != tags.end());
  }
  // |theta| > 1 with m, L1 large: regime II
  {
    auto u = maps::lambda_forward(2.8, 1.2);
    double x2 = 400.0;
    GroupPoint g{{20, 0, 0}, {0.25 * u[0] * x2, 0.25 * u[1] * x2, 0}};
    auto params = regime_params(g);
    CHECK(params.m > 30.0);
    CHECK(params.L1 > 30.0);
    auto tags = classify_regime(g);
    CHECK(std::find(tags.begin(), tags.end(), Regime::II) != tags.end());
  }
}

TEST_CASE("two-point distance wrapper") {
  GroupPoint a{{0.5, -0.2, 0.1}, {0.05, 0.1, -0.02}};
  GroupPoint b{{1.0, 0.3, -0.4}, {0.2, -0.1, 0.15}};
  double direct = cc_distance_squared(group_mul(group_inverse(a), b)).d2;
  CHECK(cc_distance_squared_between(a, b) == doctest::Approx(direct));
  CHECK(cc_distance_squared_between(a, a) == doctest::Approx(0.0));
}
