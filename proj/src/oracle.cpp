#include "ccn32/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace ccn32::oracle {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Objective for fixed penalty mu and multiplier lam:
//   E(X) + mu |c(X)|^2 + lam . c(X),
// where X = (x_1 .. x_{M-1}), E = M sum |x_k - x_{k-1}|^2 and
// c(X) = -1/2 sum x_{k-1} x x_k - t_target (the midpoint vertical lift).
struct Objective {
  const GroupPoint& target;
  int M;
  double mu = 0;
  Vec3 lam{0, 0, 0};

  int dim() const { return 3 * (M - 1); }

  Vec3 node(const std::vector<double>& X, int k) const {
    if (k == 0) return {0, 0, 0};
    if (k == M) return target.x;
    return {X[3 * (k - 1)], X[3 * (k - 1) + 1], X[3 * (k - 1) + 2]};
  }

  Vec3 constraint(const std::vector<double>& X) const {
    Vec3 acc{0, 0, 0};
    for (int k = 1; k <= M; ++k)
      acc = acc - 0.5 * cross(node(X, k - 1), node(X, k));
    return acc - target.t;
  }

  double energy(const std::vector<double>& X) const {
    double e = 0;
    for (int k = 1; k <= M; ++k) {
      Vec3 d = node(X, k) - node(X, k - 1);
      e += dot(d, d);
    }
    return M * e;
  }

  double value(const std::vector<double>& X) const {
    Vec3 c = constraint(X);
    return energy(X) + mu * dot(c, c) + dot(lam, c);
  }

  void gradient(const std::vector<double>& X, std::vector<double>& grad) const {
    Vec3 c = constraint(X);
    Vec3 w = 2.0 * mu * c + lam;
    for (int j = 1; j < M; ++j) {
      Vec3 gE = 2.0 * M *
                (2.0 * node(X, j) - node(X, j - 1) - node(X, j + 1));
      // d c . delta = -1/2 (x_{j-1} - x_{j+1}) x delta
      Vec3 a = node(X, j - 1) - node(X, j + 1);
      Vec3 gC = -0.5 * cross(w, a);
      grad[3 * (j - 1)] = gE[0] + gC[0];
      grad[3 * (j - 1) + 1] = gE[1] + gC[1];
      grad[3 * (j - 1) + 2] = gE[2] + gC[2];
    }
  }
};

// Compact L-BFGS (two-loop recursion) with backtracking Armijo search.
double lbfgs_minimize(const Objective& obj, std::vector<double>& x,
                      int max_iters, double gtol) {
  const int n = static_cast<int>(x.size());
  const int mem = 8;
  std::vector<std::vector<double>> s_hist, y_hist;
  std::vector<double> rho_hist;
  std::vector<double> g(n), gn(n), d(n), xn(n);
  obj.gradient(x, g);
  double f = obj.value(x);
  for (int it = 0; it < max_iters; ++it) {
    double gnorm = 0;
    for (double v : g) gnorm += v * v;
    gnorm = std::sqrt(gnorm);
    if (gnorm < gtol * (1.0 + std::abs(f))) break;

    // two-loop
    d = g;
    std::vector<double> alpha(s_hist.size());
    for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
      double a = 0;
      for (int j = 0; j < n; ++j) a += s_hist[i][j] * d[j];
      a *= rho_hist[i];
      alpha[i] = a;
      for (int j = 0; j < n; ++j) d[j] -= a * y_hist[i][j];
    }
    if (!s_hist.empty()) {
      double sy = 1.0 / rho_hist.back(), yy = 0;
      for (int j = 0; j < n; ++j) yy += y_hist.back()[j] * y_hist.back()[j];
      double scale = sy / yy;
      for (int j = 0; j < n; ++j) d[j] *= scale;
    } else {
      for (int j = 0; j < n; ++j) d[j] *= 1.0 / (1.0 + gnorm);
    }
    for (int i = 0; i < static_cast<int>(s_hist.size()); ++i) {
      double b = 0;
      for (int j = 0; j < n; ++j) b += y_hist[i][j] * d[j];
      b *= rho_hist[i];
      for (int j = 0; j < n; ++j) d[j] += s_hist[i][j] * (alpha[i] - b);
    }
    for (int j = 0; j < n; ++j) d[j] = -d[j];

    double dg = 0;
    for (int j = 0; j < n; ++j) dg += d[j] * g[j];
    if (dg >= 0) {  // restart on a bad direction
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      for (int j = 0; j < n; ++j) d[j] = -g[j] / (1.0 + gnorm);
      dg = 0;
      for (int j = 0; j < n; ++j) dg += d[j] * g[j];
    }

    double step = 1.0, fn = f;
    for (int ls = 0; ls < 50; ++ls, step *= 0.5) {
      for (int j = 0; j < n; ++j) xn[j] = x[j] + step * d[j];
      fn = obj.value(xn);
      if (fn <= f + 1e-4 * step * dg) break;
    }
    if (fn >= f) break;  // stalled
    obj.gradient(xn, gn);
    std::vector<double> s(n), y(n);
    double sy = 0;
    for (int j = 0; j < n; ++j) {
      s[j] = xn[j] - x[j];
      y[j] = gn[j] - g[j];
      sy += s[j] * y[j];
    }
    if (sy > 1e-12) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > mem) {
        s_hist.erase(s_hist.begin());
        y_hist.erase(y_hist.begin());
        rho_hist.erase(rho_hist.begin());
      }
    }
    x.swap(xn);
    g.swap(gn);
    f = fn;
  }
  return f;
}

std::vector<double> seed_path(const GroupPoint& target, int M,
                              std::mt19937_64& rng, int which) {
  // straight chord plus a helical bump whose axis and amplitude vary by
  // restart; the vertical target orients the bump plane.
  std::vector<double> X(3 * (M - 1));
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec3 tdir = target.t;
  double tn = norm(tdir);
  if (tn > 0)
    tdir = (1.0 / tn) * tdir;
  else
    tdir = {0, 0, 1};
  Vec3 a{gauss(rng), gauss(rng), gauss(rng)};
  Vec3 e1 = a - dot(a, tdir) * tdir;
  double e1n = norm(e1);
  e1 = e1n > 1e-12 ? (1.0 / e1n) * e1 : Vec3{1, 0, 0};
  Vec3 e2 = cross(tdir, e1);
  double amp = (which == 0) ? 0.0
                            : std::sqrt(tn) * (0.5 + 0.45 * gauss(rng));
  double turns = 1.0 + (which % 3);
  for (int k = 1; k < M; ++k) {
    double s = static_cast<double>(k) / M;
    Vec3 base = s * target.x;
    double ang = 2.0 * kPi * turns * s;
    Vec3 bump = (amp * std::sin(kPi * s)) *
                Vec3{std::cos(ang) * e1[0] + std::sin(ang) * e2[0],
                     std::cos(ang) * e1[1] + std::sin(ang) * e2[1],
                     std::cos(ang) * e1[2] + std::sin(ang) * e2[2]};
    if (which > 0) base = base + bump;
    X[3 * (k - 1)] = base[0];
    X[3 * (k - 1) + 1] = base[1];
    X[3 * (k - 1) + 2] = base[2];
  }
  return X;
}

}  // namespace

PathResult oracle_distance_squared(const PathProblem& pb) {
  if (pb.segments < 8) throw DomainError("oracle: segments < 8");
  for (size_t i = 1; i < pb.penalty_schedule.size(); ++i)
    if (pb.penalty_schedule[i] <= pb.penalty_schedule[i - 1])
      throw DomainError("oracle: penalty_schedule must increase");
  const int M = pb.segments;
  std::mt19937_64 rng(pb.seed);

  PathResult best;
  best.energy = std::numeric_limits<double>::infinity();
  best.d2_upper = std::numeric_limits<double>::infinity();
  bool best_feasible = false;
  const double tscale = 1.0 + norm(pb.target.t);
  const double feas_tol = 1e-8 * tscale;

  for (int rs = 0; rs < std::max(1, pb.restarts); ++rs) {
    Objective obj{pb.target, M};
    std::vector<double> X = seed_path(pb.target, M, rng, rs);
    // penalty continuation with a multiplier update at each stage
    for (double mu : pb.penalty_schedule) {
      obj.mu = mu;
      lbfgs_minimize(obj, X, 600, 1e-10);
      Vec3 c = obj.constraint(X);
      obj.lam = obj.lam + (2.0 * mu) * c;
    }
    // final multiplier-only polish at top penalty
    lbfgs_minimize(obj, X, 600, 1e-12);
    Vec3 c = obj.constraint(X);
    double resid = norm(c);
    double energy = obj.energy(X);
    // certified upper bound: the path reaches (x, t - c); closing the
    // vertical gap costs 4 pi |c| in squared distance
    double cert = energy + 2.0 * std::sqrt(energy * 4.0 * kPi * resid) +
                  4.0 * kPi * resid;
    bool feasible = resid <= feas_tol;
    // a feasible solve always beats an infeasible certificate
    bool better = best_feasible == feasible ? cert < best.d2_upper : feasible;
    if (better) {
      best_feasible = feasible;
      best.d2_upper = cert;
      best.energy = energy;
      best.constraint_resid = resid;
      best.path.clear();
      best.path.reserve(M + 1);
      for (int k = 0; k <= M; ++k) best.path.push_back(obj.node(X, k));
    }
  }
  if (!best_feasible)
    throw ConstraintError("oracle: endpoint residual " +
                          std::to_string(best.constraint_resid));
  return best;
}

double reference_p(const GroupPoint& g) {
  heatkernel::QuadratureSpec q1;
  q1.rel_tol = 3e-10;
  q1.abs_tol = 1e-16;
  q1.osc_nodes = 16;
  heatkernel::QuadratureSpec q2 = q1;
  q2.rel_tol = 3e-12;
  q2.osc_nodes = 24;
  auto r1 = heatkernel::p_fourier(g, q1);
  auto r2 = heatkernel::p_fourier(g, q2);
  double gap = std::abs(r1.value - r2.value);
  if (gap > 1e-8 * std::abs(r2.value))
    throw ToleranceError("reference_p: refinement gap " + std::to_string(gap));
  return r2.value;
}

}  // namespace ccn32::oracle
