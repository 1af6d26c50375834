#pragma once

#include <array>

#include "ccn32/common.hpp"

// Inverse-function layer: Z (inverse of -Upsilon'), Phi, the diffeomorphism
// Lambda with region classification and numerical inverse, and the scalar
// cut-equation solver.
namespace ccn32::maps {

enum class Region { GreaterPlus, LessPlus, Boundary };
enum class ThetaRegion { OmegaPlus1, OmegaMinus4, BoundaryParabola };

struct UParam {
  double u1, u2;
  Region region;
};

struct ThetaData {
  double theta1, theta2;
  double r;        // |theta|
  double epsilon;  // theta1_root - r
  double wbar;     // theta2 * psi(r), positive on both regions
  ThetaRegion region;
};

// Z(rho): the unique z in [0, theta1) with -Upsilon'(z) = rho, odd in rho.
double z_map(double rho);

// Phi(rho) = Upsilon(Z(rho)) + rho Z(rho); Phi(0) = 3, Phi' = Z.
double phi_map(double rho);

// Lambda(v) = grad_v [v2^2 psi(|v|)].
std::array<double, 2> lambda_forward(double v1, double v2);

// Analytic Jacobian of Lambda at v (symmetric 2x2).
std::array<std::array<double, 2>, 2> lambda_jacobian(double v1, double v2);

// Tag u = (u1, u2) by comparing pi u2^2 with 4 u1 (relative 1e-12 band).
UParam classify_region(double u1, double u2);

// Invert Lambda on the region of u; rejects Boundary inputs.
ThetaData lambda_inverse(const UParam& u);

// Solve -2 psi(r) sqrt(r^2 + 2 r psi/psi') = beta on (pi, theta1).
double solve_cut_equation(double beta);

}  // namespace ccn32::maps
