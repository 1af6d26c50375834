#pragma once

#include <optional>
#include <vector>

#include "ccn32/common.hpp"
#include "ccn32/maps.hpp"

// Exact Carnot-Caratheodory distance on the free step-two group with three
// generators, the intrinsic distance D of the auxiliary kernel, the H / D
// curve family and the regime parameters m, L1, L2.
namespace ccn32 {

struct GroupPoint {
  Vec3 x{0, 0, 0};  // horizontal
  Vec3 t{0, 0, 0};  // vertical
};

// Group law (x,t)(x',t') = (x + x', t + t' - x x x' / 2).
GroupPoint group_mul(const GroupPoint& a, const GroupPoint& b);
GroupPoint group_inverse(const GroupPoint& g);
// Dilation delta_h (x, t) = (h x, h^2 t).
GroupPoint dilate(double h, const GroupPoint& g);

struct ReducedPoint {
  double xnorm = 0;
  double t_par = 0;   // component of t along x, sign-normalized
  double t_perp = 0;  // remaining vertical magnitude
  Mat3 frame;         // rows e1, e2, e3: frame * x = (xnorm, 0, 0)
  bool t_flipped = false;
};

ReducedPoint reduce(const GroupPoint& g);
GroupPoint unreduce(const ReducedPoint& rp);  // exact reconstruction

enum class DistanceCase {
  Origin,
  VerticalAxis,      // x = 0: d^2 = 4 pi |t|
  AbnormalAxis,      // t = 0: d^2 = |x|^2
  CutVertical,       // t_perp = 0, t_par > 0 (case iii)
  CutHorizontalT,    // t_par = 0, t_perp > 0 (case iv)
  BoundaryParabola,  // pi u2^2 = 4 u1 (case ii)
  Generic,
};

struct DistanceResult {
  double d2 = 0;
  DistanceCase case_tag = DistanceCase::Origin;
  std::optional<maps::ThetaData> theta;  // populated for Generic only
  // Effective critical data (theta, wbar) for every non-abnormal case; the
  // cut and boundary cases carry the limit values of the open-region data.
  std::optional<maps::ThetaData> theta_effective;
  std::array<double, 5> chain{};  // the five equivalent expressions
  bool chain_valid = false;
  double u1 = 0, u2 = 0;  // 4 t_par / |x|^2, 4 t_perp / |x|^2 (xnorm > 0)
};

DistanceResult cc_distance_squared(const GroupPoint& g);
// Left-invariant two-point distance d(a, b)^2 = d(a^{-1} b)^2.
double cc_distance_squared_between(const GroupPoint& a, const GroupPoint& b);

struct IntrinsicD {
  double D2 = 0;
  std::optional<double> tau_star_norm;  // absent when X = 0
};

IntrinsicD intrinsic_D_squared(double Xnorm, double Tnorm);

struct HFamily {
  double A, U, H;
};

// A(w), U(w), H(w) = wbar^2 w^2 Phi(U(w)) for the curve through u.
HFamily h_family(double u1, double u2, double wbar, double w);
// D(u; s) = wbar^2 |s|^2 Phi(Atilde / (wbar^2 |s|^2)); s = 0 gives theta1|u|.
double d_curve(double u1, double u2, double wbar, double s1, double s2);

struct RegimeParams {
  double m = 0;        // (d^2 - |x|^2) / 4
  double L1 = 0;       // |x|^2 H''(1) / 4
  double L2 = 0;       // |x|^2 d^2/ds2^2 D / 4
  double epsilon = 0;  // theta1 - |theta|
  double wbar = 0;
  double d2 = 0;
  double xnorm = 0;
  std::optional<maps::ThetaData> theta;
};

RegimeParams regime_params(const GroupPoint& g);

enum class Regime { I, II, III, IV };

struct RegimeThresholds {
  double alpha0 = 3.0;        // |theta| cap for regime I
  double t2x_min = 30.0;      // theta2 |x| floor for regime I
  double theta_min_ii = 1.0;  // |theta| floor for regime II
  double m_min = 30.0;        // m floor for regimes II and III
  double L1_min = 30.0;       // L1 floor for regime II
  double L1_max = 5.0;        // L1 cap for regime III
  double m_max = 5.0;         // m cap for regime IV
  double d2_min = 30.0;       // d^2 floor for regime IV
};

std::vector<Regime> classify_regime(const GroupPoint& g,
                                    const RegimeThresholds& th = {});

}  // namespace ccn32
