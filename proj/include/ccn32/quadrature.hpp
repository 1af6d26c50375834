#pragma once

#include <functional>

#include "ccn32/common.hpp"

namespace ccn32::quad {

struct QuadResult {
  double value = 0;
  double est_error = 0;
  long n_evals = 0;
};

// Globally adaptive Gauss-Kronrod 7/15 on [a, b]; splits the worst interval
// until est_error < max(abs_tol, rel_tol * |value|) or the subdivision
// budget runs out. Deterministic for fixed inputs.
QuadResult adaptive_gk(const std::function<double(double)>& f, double a,
                       double b, double rel_tol, double abs_tol,
                       int max_subdivisions = 2000);

}  // namespace ccn32::quad
