// Command-line surface: exact distance, kernel evaluation, regime
// classification, verification suites and grid sweeps with JSON/CSV output.
#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "ccn32/distance.hpp"
#include "ccn32/heatkernel.hpp"
#include "ccn32/maps.hpp"
#include "ccn32/oracle.hpp"
#include "ccn32/specfun.hpp"

using json = nlohmann::ordered_json;
using namespace ccn32;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr const char* kSchema = "cc-n32/1";

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CC_N32_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

// index-ordered fan-out: results land by job index, so the aggregate is
// independent of scheduling
void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  threads = std::min(std::max(1, threads), n > 0 ? n : 1);
  if (threads == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
    });
  for (auto& th : pool) th.join();
}

json vec_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

Vec3 parse_vec3(const std::string& s) {
  Vec3 v{0, 0, 0};
  std::stringstream ss(s);
  std::string tok;
  int i = 0;
  while (std::getline(ss, tok, ',') && i < 3) v[i++] = std::stod(tok);
  if (i != 3)
    throw CLI::ValidationError("point", "expected three comma-separated reals");
  return v;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void emit(const json& j, const std::string& format,
          const std::string& output_path) {
  std::string text;
  if (format == "csv" && j.contains("rows")) {
    std::ostringstream os;
    const auto& cols = j["columns"];
    for (size_t i = 0; i < cols.size(); ++i)
      os << (i ? "," : "") << cols[i].get<std::string>();
    os << "\n";
    for (const auto& row : j["rows"]) {
      for (size_t i = 0; i < row.size(); ++i) {
        os << (i ? "," : "");
        if (row[i].is_number())
          os << fmt(row[i].get<double>());
        else
          os << row[i].get<std::string>();
      }
      os << "\n";
    }
    text = os.str();
  } else if (format == "csv") {
    std::ostringstream head, line;
    bool first = true;
    for (auto& [k, v] : j.items()) {
      if (k == "schema" || v.is_structured()) continue;
      head << (first ? "" : ",") << k;
      line << (first ? "" : ",")
           << (v.is_number() ? fmt(v.get<double>()) : v.dump());
      first = false;
    }
    text = head.str() + "\n" + line.str() + "\n";
  } else {
    text = j.dump(2) + "\n";
  }
  if (!output_path.empty())
    std::ofstream(output_path) << text;
  else
    std::cout << text;
}

const char* case_name(DistanceCase c) {
  switch (c) {
    case DistanceCase::Origin: return "origin";
    case DistanceCase::VerticalAxis: return "vertical_axis";
    case DistanceCase::AbnormalAxis: return "abnormal";
    case DistanceCase::CutVertical: return "cut_t_parallel";
    case DistanceCase::CutHorizontalT: return "cut_t_perpendicular";
    case DistanceCase::BoundaryParabola: return "boundary_parabola";
    case DistanceCase::Generic: return "generic";
  }
  return "?";
}

json theta_json(const maps::ThetaData& td) {
  json t;
  t["theta1"] = td.theta1;
  t["theta2"] = td.theta2;
  t["r"] = td.r;
  t["epsilon"] = td.epsilon;
  t["wbar"] = td.wbar;
  t["region"] = td.region == maps::ThetaRegion::OmegaPlus1    ? "omega_plus_1"
                : td.region == maps::ThetaRegion::OmegaMinus4 ? "omega_minus_4"
                                                              : "boundary";
  return t;
}

json regime_json(const RegimeParams& params) {
  json r;
  r["m"] = params.m;
  r["L1"] = params.L1;
  r["L2"] = params.L2;
  r["epsilon"] = params.epsilon;
  r["wbar"] = params.wbar;
  r["d2"] = params.d2;
  r["xnorm"] = params.xnorm;
  r["theta_present"] = params.theta.has_value();
  return r;
}

struct SuiteRow {
  std::string name;
  double observed;
  double tolerance;
  bool pass;
};

struct SuiteContext {
  unsigned long long seed = 2024;
  int threads = 1;
  heatkernel::QuadratureSpec quad;
};

Vec3 rand_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0, 1);
  Vec3 v{g(rng), g(rng), g(rng)};
  return (1.0 / norm(v)) * v;
}

GroupPoint rand_generic(std::mt19937_64& rng, double xs, double ts) {
  std::uniform_real_distribution<double> ur(0.1, 1.0);
  return {xs * ur(rng) * rand_unit(rng), ts * ur(rng) * rand_unit(rng)};
}

std::vector<SuiteRow> suite_identities(const SuiteContext& cx) {
  std::mt19937_64 rng(cx.seed);
  double worst = 0.0;
  int n = 0;
  while (n < 60) {
    GroupPoint g = rand_generic(rng, 2.0, 1.5);
    auto res = cc_distance_squared(g);
    if (res.case_tag != DistanceCase::Generic) continue;
    ++n;
    for (int i = 1; i < 5; ++i)
      worst = std::max(worst, std::abs(res.chain[i] / res.chain[0] - 1.0));
  }
  return {{"distance identity chain (60 pts)", worst, 1e-9, worst < 1e-9}};
}

std::vector<SuiteRow> suite_roundtrip(const SuiteContext& cx) {
  std::mt19937_64 rng(cx.seed);
  std::uniform_real_distribution<double> ur(0.0, 1.0);
  double worst = 0.0;
  int bad_sign = 0;
  for (int i = 0; i < 120; ++i) {
    bool plus = i % 2 == 0;
    double v1 = 0, v2 = 0;
    const double th1 = specfun::theta1();
    for (;;) {
      if (plus) {
        double r = 0.05 + (kPi - 0.1) * ur(rng), a = 0.05 + 1.47 * ur(rng);
        v1 = r * std::cos(a);
        v2 = r * std::sin(a);
        break;
      }
      double r = kPi + 0.02 + (th1 - kPi - 0.04) * ur(rng);
      double a = 0.35 * ur(rng) * kPi / 2;
      v1 = r * std::cos(a);
      v2 = -r * std::sin(a);
      if (v1 > kPi && specfun::k_family(v1, v2).K3 < 0.0) break;
    }
    auto u = maps::lambda_forward(v1, v2);
    auto td = maps::lambda_inverse(maps::classify_region(u[0], u[1]));
    worst =
        std::max({worst, std::abs(td.theta1 - v1), std::abs(td.theta2 - v2)});
    auto J = maps::lambda_jacobian(v1, v2);
    double det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
    if (plus != (det > 0)) ++bad_sign;
  }
  return {{"lambda round trip (120 pts)", worst, 1e-10, worst < 1e-10},
          {"jacobian sign law violations", double(bad_sign), 0.5,
           bad_sign == 0}};
}

std::vector<SuiteRow> suite_crossroute(const SuiteContext& cx) {
  std::mt19937_64 rng(cx.seed);
  std::vector<GroupPoint> pts;
  while (pts.size() < 10) {
    GroupPoint g = rand_generic(rng, 2.0, 1.0);
    if (cc_distance_squared(g).d2 <= 49.0) pts.push_back(g);
  }
  std::vector<double> gaps(pts.size());
  parallel_for(static_cast<int>(pts.size()), cx.threads, [&](int i) {
    auto f = heatkernel::p_fourier(pts[i], cx.quad);
    auto l = heatkernel::p_laplace(pts[i], cx.quad);
    gaps[i] = std::abs(f.value - l.value) / f.value;
  });
  double worst = *std::max_element(gaps.begin(), gaps.end());
  return {{"fourier/laplace gap (10 pts)", worst, 1e-5, worst < 1e-5}};
}

std::vector<SuiteRow> suite_bounds(const SuiteContext& cx) {
  std::mt19937_64 rng(cx.seed);
  std::vector<GroupPoint> pts;
  while (pts.size() < 24) {
    GroupPoint g = rand_generic(rng, 3.5, 1.2);
    double d2 = cc_distance_squared(g).d2;
    if (d2 >= 0.25 && d2 <= 100.0) pts.push_back(g);
  }
  std::vector<double> ratios(pts.size());
  parallel_for(static_cast<int>(pts.size()), cx.threads, [&](int i) {
    ratios[i] = heatkernel::bound_ratio(pts[i], cx.quad);
  });
  double lo = 1e300, hi = 0.0;
  bool pos = true;
  for (double r : ratios) {
    pos = pos && r > 0.0 && std::isfinite(r);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  return {{"bound ratio positive (24 pts)", pos ? 1.0 : 0.0, 0.5, pos},
          {"bound ratio spread max/min", hi / lo, 1e3, hi / lo < 1e3}};
}

std::vector<SuiteRow> suite_varadhan(const SuiteContext& cx) {
  GroupPoint pts[3] = {{{3.2, 0, 0}, {0.010, 0.015, 0}},
                       {{3.4, 0.2, 0}, {0.012, 0.008, 0.004}},
                       {{3.5, 0, 0}, {0.015, 0.012, 0.006}}};
  heatkernel::QuadratureSpec q = cx.quad;
  q.rel_tol = std::min(q.rel_tol, 1e-10);
  q.osc_nodes = std::max(q.osc_nodes, 16);
  double worst_final = 0.0;
  bool decreasing = true;
  for (auto& g : pts) {
    double d2 = cc_distance_squared(g).d2;
    double prev = 1e9;
    for (double h : {0.02, 0.01, 0.005}) {
      double err =
          std::abs(-4.0 * h * heatkernel::log_heat_kernel_time(h, g, q) - d2) /
          d2;
      if (err >= prev) decreasing = false;
      prev = err;
    }
    worst_final = std::max(worst_final, prev);
  }
  return {
      {"varadhan final error (3 pts)", worst_final, 0.05, worst_final < 0.05},
      {"varadhan error decreasing", decreasing ? 1.0 : 0.0, 0.5, decreasing}};
}

std::vector<SuiteRow> suite_asymptotics(const SuiteContext& cx) {
  std::vector<SuiteRow> rows;
  {
    auto u = maps::lambda_forward(0.14, 0.14);
    double xn = 50.0 / 0.14, x2 = xn * xn;
    GroupPoint g{{xn, 0, 0}, {0.25 * u[0] * x2, 0.25 * u[1] * x2, 0}};
    double lead = heatkernel::log_asymptotic_leading(g, Regime::I, cx.quad);
    auto pl = heatkernel::p_laplace(g, cx.quad);
    double ratio = std::exp(pl.log_value - lead);
    rows.push_back({"regime I ratio", ratio, 0.1, ratio > 0.9 && ratio < 1.1});
  }
  {
    heatkernel::QuadratureSpec q = cx.quad;
    q.rel_tol = std::min(q.rel_tol, 1e-10);
    q.osc_nodes = std::max(q.osc_nodes, 16);
    GroupPoint g{{10, 0, 0}, {0, 0, 0}};
    auto pf = heatkernel::p_fourier(g, q);
    double lead = heatkernel::log_asymptotic_leading(g, Regime::IV, q);
    double ratio = std::exp(pf.log_value - lead);
    rows.push_back({"regime IV ratio", ratio, 0.1, ratio > 0.9 && ratio < 1.1});
  }
  return rows;
}

std::vector<SuiteRow> suite_oracle(const SuiteContext& cx) {
  std::mt19937_64 rng(cx.seed);
  std::vector<GroupPoint> pts;
  while (pts.size() < 5) {
    GroupPoint g = rand_generic(rng, 1.6, 0.7);
    double d2 = cc_distance_squared(g).d2;
    if (d2 >= 1.0 && d2 <= 36.0) pts.push_back(g);
  }
  std::vector<double> gaps(pts.size());
  parallel_for(static_cast<int>(pts.size()), cx.threads, [&](int i) {
    oracle::PathProblem pb;
    pb.target = pts[i];
    pb.segments = 96;
    pb.restarts = 8;
    pb.seed = cx.seed + i;
    auto r = oracle::oracle_distance_squared(pb);
    gaps[i] = r.d2_upper / cc_distance_squared(pts[i]).d2 - 1.0;
  });
  double worst = *std::max_element(gaps.begin(), gaps.end());
  double least = *std::min_element(gaps.begin(), gaps.end());
  return {{"oracle gap above closed form (5 pts)", worst, 5e-3, worst < 5e-3},
          {"oracle stays an upper bound", least, 0.0, least > -1e-9}};
}

int run_verify(const std::string& suite, const SuiteContext& cx,
               const std::string& format, const std::string& output_path) {
  std::vector<
      std::pair<std::string,
                std::function<std::vector<SuiteRow>(const SuiteContext&)>>>
      all = {{"identities", suite_identities},
             {"roundtrip", suite_roundtrip},
             {"crossroute", suite_crossroute},
             {"bounds", suite_bounds},
             {"varadhan", suite_varadhan},
             {"asymptotics", suite_asymptotics},
             {"oracle", suite_oracle}};
  std::vector<SuiteRow> rows;
  for (auto& [name, fn] : all) {
    if (suite != "all" && suite != name) continue;
    auto part = fn(cx);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  bool ok = true;
  json out;
  out["schema"] = kSchema;
  out["suite"] = suite;
  out["seed"] = cx.seed;
  json checks = json::array();
  for (auto& r : rows) {
    ok = ok && r.pass;
    json c;
    c["name"] = r.name;
    c["observed"] = r.observed;
    c["tolerance"] = r.tolerance;
    c["pass"] = r.pass;
    checks.push_back(c);
  }
  out["checks"] = checks;
  out["pass"] = ok;
  if (format == "human") {
    std::ostringstream os;
    for (auto& r : rows) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "[%s] %-42s observed %.6g  tol %.3g\n",
                    r.pass ? "PASS" : "FAIL", r.name.c_str(), r.observed,
                    r.tolerance);
      os << buf;
    }
    os << (ok ? "all checks passed\n" : "FAILURES present\n");
    if (!output_path.empty())
      std::ofstream(output_path) << os.str();
    else
      std::cout << os.str();
  } else {
    emit(out, format, output_path);
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "exact sub-Riemannian distance and heat kernel on the free step-two "
      "group with three generators"};
  app.require_subcommand(1);

  std::string xs = "0,0,0", ts = "0,0,0";
  std::string format = "human", output_path;
  double hval = 1.0;
  std::string route = "auto";
  bool best_effort = false;
  std::string suite = "all";
  int threads = 0;
  unsigned long long seed = 2024;
  heatkernel::QuadratureSpec quad;

  auto add_common = [&](CLI::App* cmd, bool with_point) {
    if (with_point) {
      cmd->add_option("--x", xs, "horizontal part x1,x2,x3");
      cmd->add_option("--t", ts, "vertical part t1,t2,t3");
    }
    cmd->add_option("--format", format, "json|csv|human")
        ->check(CLI::IsMember({"json", "csv", "human"}));
    cmd->add_option("--output", output_path,
                    "write to file instead of stdout");
    cmd->add_option("--rel-tol", quad.rel_tol,
                    "quadrature relative tolerance");
    cmd->add_option("--abs-tol", quad.abs_tol,
                    "quadrature absolute tolerance");
    cmd->add_option("--osc-nodes", quad.osc_nodes,
                    "nodes per oscillation period");
    cmd->add_option("--radial-cutoff", quad.radial_cutoff,
                    "base truncation radius");
    cmd->add_option("--threads", threads,
                    "worker threads (CC_N32_THREADS fallback)");
    cmd->add_option("--seed", seed, "seed for sampled suites");
  };

  auto* cd = app.add_subcommand("distance", "exact squared distance d(g)^2");
  add_common(cd, true);
  bool json_flag = false;
  cd->add_flag("--json", json_flag, "shorthand for --format json");

  auto* ch = app.add_subcommand("heatkernel", "heat kernel p_h(g)");
  ch->set_help_flag("--help", "print help");  // frees -h for the time flag
  add_common(ch, true);
  ch->add_option("--h,--time", hval, "time parameter (default 1)");
  ch->add_option("--route", route, "fourier|laplace|both|auto")
      ->check(CLI::IsMember({"fourier", "laplace", "both", "auto"}));
  ch->add_flag("--best-effort", best_effort,
               "report the best estimate instead of failing on tolerance");

  auto* cr = app.add_subcommand("regime", "regime parameters and tags");
  add_common(cr, true);

  auto* cv = app.add_subcommand("verify", "run verification suites");
  add_common(cv, false);
  cv->add_option("--suite", suite,
                 "identities|roundtrip|crossroute|bounds|varadhan|"
                 "asymptotics|oracle|all")
      ->check(CLI::IsMember({"identities", "roundtrip", "crossroute", "bounds",
                             "varadhan", "asymptotics", "oracle", "all"}));

  auto* cs = app.add_subcommand("sweep", "grid sweeps of observables");
  add_common(cs, true);
  std::string observable = "H";
  std::string var = "w";
  double from = 0.2, to = 3.0;
  int count = 50;
  bool log_grid = false;
  cs->add_option("--observable", observable,
                 "H|D_curve|mu|distance|kernel|bound_ratio")
      ->check(CLI::IsMember(
          {"H", "D_curve", "mu", "distance", "kernel", "bound_ratio"}));
  cs->add_option("--var", var, "name of the sweep variable column");
  cs->add_option("--from", from, "grid start");
  cs->add_option("--to", to, "grid end");
  cs->add_option("--count", count, "number of grid points")
      ->check(CLI::PositiveNumber);
  cs->add_flag("--log", log_grid, "logarithmic grid");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const int nthreads = resolve_threads(threads);
  if (json_flag) format = "json";

  try {
    if (cd->parsed()) {
      GroupPoint g{parse_vec3(xs), parse_vec3(ts)};
      auto res = cc_distance_squared(g);
      json out;
      out["schema"] = kSchema;
      out["x"] = vec_json(g.x);
      out["t"] = vec_json(g.t);
      out["d2"] = res.d2;
      out["d"] = std::sqrt(res.d2);
      out["case_tag"] = case_name(res.case_tag);
      if (res.theta) out["theta"] = theta_json(*res.theta);
      if (res.chain_valid) {
        json chain = json::array();
        for (double v : res.chain) chain.push_back(v);
        out["chain"] = chain;
      }
      out["regime_params"] = regime_json(regime_params(g));
      emit(out, format, output_path);
      return 0;
    }

    if (ch->parsed()) {
      GroupPoint g{parse_vec3(xs), parse_vec3(ts)};
      json out;
      out["schema"] = kSchema;
      out["x"] = vec_json(g.x);
      out["t"] = vec_json(g.t);
      out["h"] = hval;
      try {
        GroupPoint gs = dilate(1.0 / std::sqrt(hval), g);
        const double scale = std::pow(hval, -4.5);
        if (route == "both") {
          auto f = heatkernel::p_fourier(gs, quad);
          auto l = heatkernel::p_laplace(gs, quad);
          out["value"] = scale * f.value;
          out["value_fourier"] = scale * f.value;
          out["value_laplace"] = scale * l.value;
          out["route_gap"] = std::abs(f.value - l.value) / f.value;
          out["est_error"] = scale * f.est_error;
          out["route"] = "both";
        } else if (route == "auto") {
          double lv = heatkernel::log_heat_kernel_time(hval, g, quad);
          out["value"] = std::exp(lv);
          out["log_value"] = lv;
          out["route"] = "auto";
        } else {
          auto r = route == "fourier" ? heatkernel::p_fourier(gs, quad)
                                      : heatkernel::p_laplace(gs, quad);
          out["value"] = scale * r.value;
          out["log_value"] = std::log(scale) + r.log_value;
          out["est_error"] = scale * r.est_error;
          out["route"] = route;
          out["fallback_used"] = r.fallback_used;
        }
      } catch (const ToleranceError& e) {
        if (!best_effort) throw;
        out["best_effort"] = true;
        out["error"] = e.what();
      }
      auto params = regime_params(g);
      out["d2"] = params.d2;
      if (hval == 1.0) {
        double b = heatkernel::bnd(g);
        out["bnd"] = b;
        if (out.contains("value") && b > 0)
          out["bound_ratio"] = out["value"].get<double>() / b;
      }
      emit(out, format, output_path);
      return 0;
    }

    if (cr->parsed()) {
      GroupPoint g{parse_vec3(xs), parse_vec3(ts)};
      auto params = regime_params(g);
      auto tags = classify_regime(g);
      json out;
      out["schema"] = kSchema;
      out["x"] = vec_json(g.x);
      out["t"] = vec_json(g.t);
      out["regime_params"] = regime_json(params);
      json tj = json::array();
      for (auto t : tags)
        tj.push_back(t == Regime::I     ? "I"
                     : t == Regime::II  ? "II"
                     : t == Regime::III ? "III"
                                        : "IV");
      out["regimes"] = tj;
      if (params.theta) out["theta"] = theta_json(*params.theta);
      emit(out, format, output_path);
      return 0;
    }

    if (cv->parsed()) {
      SuiteContext cx;
      cx.seed = seed;
      cx.threads = nthreads;
      cx.quad = quad;
      return run_verify(suite, cx, format, output_path);
    }

    if (cs->parsed()) {
      if (!(to > from) || count < 1) {
        std::cerr << "sweep: malformed grid\n";
        return 2;
      }
      GroupPoint g{parse_vec3(xs), parse_vec3(ts)};
      json out;
      out["schema"] = kSchema;
      out["observable"] = observable;
      std::vector<double> grid(count);
      for (int i = 0; i < count; ++i) {
        double s = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
        grid[i] =
            log_grid ? from * std::pow(to / from, s) : from + (to - from) * s;
      }
      std::vector<double> vals(count);
      std::optional<maps::ThetaData> td;
      double u1 = 0, u2 = 0;
      if (observable == "H" || observable == "D_curve") {
        auto res = cc_distance_squared(g);
        if (!res.theta_effective)
          throw DomainError("sweep: point has no critical data");
        td = res.theta_effective;
        u1 = res.u1;
        u2 = res.u2;
      }
      parallel_for(count, nthreads, [&](int i) {
        double w = grid[i];
        if (observable == "H")
          vals[i] = h_family(u1, u2, td->wbar, w).H;
        else if (observable == "D_curve")
          vals[i] = d_curve(u1, u2, td->wbar, -w, 0.0);
        else if (observable == "mu")
          vals[i] = specfun::mu(w);
        else if (observable == "distance")
          vals[i] = cc_distance_squared(dilate(w, g)).d2;
        else if (observable == "kernel")
          vals[i] = heatkernel::log_heat_kernel_time(w, g, quad);
        else
          vals[i] = heatkernel::bound_ratio(dilate(w, g), quad);
      });
      json rows = json::array();
      for (int i = 0; i < count; ++i)
        rows.push_back(json::array({grid[i], vals[i]}));
      out["columns"] = json::array({var, observable});
      out["rows"] = rows;
      if (format == "human") format = "csv";
      emit(out, format, output_path);
      return 0;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const NumericsError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
