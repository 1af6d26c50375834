#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ccn32/oracle.hpp"

using namespace ccn32;
using namespace ccn32::oracle;

namespace {
constexpr double kPi = 3.14159265358979323846;

std::mt19937_64 rng_global(77);

GroupPoint random_target(std::mt19937_64& rng, double d2_lo, double d2_hi) {
  std::normal_distribution<double> g(0, 1);
  for (;;) {
    GroupPoint t{{1.2 * g(rng), 1.2 * g(rng), 1.2 * g(rng)},
                 {0.4 * g(rng), 0.4 * g(rng), 0.4 * g(rng)}};
    double d2 = cc_distance_squared(t).d2;
    if (d2 >= d2_lo && d2 <= d2_hi) return t;
  }
}
}  // namespace

TEST_CASE("straight abnormal segment is exact") {
  PathProblem pb;
  pb.target = {{1, 0, 0}, {0, 0, 0}};
  pb.segments = 16;
  pb.restarts = 2;
  auto r = oracle_distance_squared(pb);
  CHECK(r.d2_upper == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.constraint_resid < 1e-8);
  CHECK(static_cast<int>(r.path.size()) == 17);
}

TEST_CASE("vertical target reproduces 4 pi within 1%") {
  PathProblem pb;
  pb.target = {{0, 0, 0}, {1, 0, 0}};
  pb.segments = 64;
  pb.restarts = 8;
  auto r = oracle_distance_squared(pb);
  CHECK(r.d2_upper > 4.0 * kPi - 1e-9);
  CHECK(r.d2_upper < 4.0 * kPi * 1.01);
}

TEST_CASE("random generic targets stay within +0.5% of the closed form") {
  for (int i = 0; i < 6; ++i) {
    GroupPoint t = random_target(rng_global, 1.0, 36.0);
    double ref = cc_distance_squared(t).d2;
    PathProblem pb;
    pb.target = t;
    pb.segments = 96;
    pb.restarts = 8;
    pb.seed = 100 + i;
    auto r = oracle_distance_squared(pb);
    CHECK(r.d2_upper >= ref - 1e-9);  // upper-bound property
    CHECK(r.d2_upper <= ref * 1.005);
  }
}

TEST_CASE("refinement monotonicity as M doubles") {
  GroupPoint t = random_target(rng_global, 2.0, 16.0);
  double prev = 1e300;
  for (int M : {24, 48, 96}) {
    PathProblem pb;
    pb.target = t;
    pb.segments = M;
    pb.restarts = 4;
    pb.seed = 5;
    auto r = oracle_distance_squared(pb);
    CHECK(r.d2_upper <= prev + 1e-10);
    prev = r.d2_upper;
  }
}

TEST_CASE("determinism for a fixed seed") {
  GroupPoint t{{0.8, -0.5, 0.2}, {0.1, 0.2, -0.05}};
  PathProblem pb;
  pb.target = t;
  pb.segments = 48;
  pb.restarts = 4;
  pb.seed = 7;
  auto a = oracle_distance_squared(pb);
  auto b = oracle_distance_squared(pb);
  CHECK(a.d2_upper == b.d2_upper);
  CHECK(a.energy == b.energy);
}

TEST_CASE("invalid configurations are rejected") {
  PathProblem pb;
  pb.target = {{1, 0, 0}, {0, 0, 0}};
  pb.segments = 4;
  CHECK_THROWS_AS(oracle_distance_squared(pb), DomainError);
  pb.segments = 16;
  pb.penalty_schedule = {10.0, 10.0};
  CHECK_THROWS_AS(oracle_distance_squared(pb), DomainError);
}

TEST_CASE("reference kernel value") {
  // matches the radial constant at the origin
  double ref = reference_p(GroupPoint{});
  CHECK(ref == doctest::Approx(std::pow(kPi, 5) / 2.0).epsilon(1e-9));
  // invariance under the rotation (x1,x2,x3) -> (x2,x1,-x3)
  GroupPoint g{{1.0, 0.2, -0.3}, {0.15, 0.05, 0.2}};
  GroupPoint grot{{g.x[1], g.x[0], -g.x[2]}, {g.t[1], g.t[0], -g.t[2]}};
  CHECK(reference_p(grot) == doctest::Approx(reference_p(g)).epsilon(1e-9));
  // cross-route gap against the positive-integrand form
  auto pl = heatkernel::p_laplace(g);
  CHECK(std::abs(pl.value - reference_p(g)) / pl.value < 1e-6);
}
