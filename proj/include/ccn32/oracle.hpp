#pragma once

#include <vector>

#include "ccn32/common.hpp"
#include "ccn32/distance.hpp"
#include "ccn32/heatkernel.hpp"

// Independent ground truth: a direct-transcription path optimizer giving a
// certified upper bound for d^2, and a Richardson-refined reference kernel.
namespace ccn32::oracle {

struct PathProblem {
  GroupPoint target;
  int segments = 64;        // M, piecewise-linear horizontal pieces
  int restarts = 8;
  std::vector<double> penalty_schedule = {1e1, 1e2, 1e4, 1e6};
  unsigned long long seed = 0;
};

struct PathResult {
  double d2_upper = 0;        // certified: discrete energy + endpoint slack
  double energy = 0;          // raw discrete energy M sum |dx_k|^2
  double constraint_resid = 0;  // |t(1) - t_target|
  std::vector<Vec3> path;     // x_0 .. x_M
};

PathResult oracle_distance_squared(const PathProblem& pb);

// High-precision reference kernel value (two tolerance levels plus
// extrapolation); practical for d(g) <= 8.
double reference_p(const GroupPoint& g);

}  // namespace ccn32::oracle
