#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "fso/cli.hpp"
#include "fso/errors.hpp"
#include "fso/specfun.hpp"

namespace fso::cli {

namespace {

constexpr std::array<double, 9> kGridV = {0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 32.5, 50.0, 100.0};
constexpr std::array<double, 6> kGridZ = {0.3, 0.5, 1.0, 2.0, 3.0, 5.0};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

// Each check returns an empty string on success, otherwise what went wrong.
using Check = std::function<std::string()>;

std::string check_gamma_complement() {
  for (double a : {0.5, 1.0, 2.5, 5.0, 10.0}) {
    for (double x : {0.1, 1.0, 5.0, 20.0}) {
      const double sum = specfun::gamma_upper(a, x) + specfun::gamma_lower(a, x);
      if (rel(sum, specfun::gamma(a)) > 1e-12) return fmt("a=%g x=%g rel=%.3g", a, x, rel(sum, specfun::gamma(a)));
    }
  }
  return {};
}

std::string check_gamma_recurrence() {
  for (double a : {0.5, 1.0, 2.5, 5.0, 10.0}) {
    for (double x : {0.1, 1.0, 5.0, 20.0}) {
      const double lhs = specfun::gamma_upper(a + 1.0, x);
      const double rhs = a * specfun::gamma_upper(a, x) + std::pow(x, a) * std::exp(-x);
      if (rel(lhs, rhs) > 1e-11) return fmt("a=%g x=%g rel=%.3g", a, x, rel(lhs, rhs));
    }
  }
  return {};
}

std::string check_closed_vs_quadrature() {
  for (double v : kGridV) {
    for (double z : kGridZ) {
      const double c = ber::ber_closed({v, z}).value;
      const double q = ber::ber_quadrature({v, z}).value;
      if (rel(c, q) > 1e-8) return fmt("v=%g z=%g rel=%.3g", v, z, rel(c, q));
    }
  }
  return {};
}

std::string check_derivative() {
  for (double v : kGridV) {
    for (double z : kGridZ) {
      const double c = ber::dber_dz_closed({v, z}).value;
      const double q = ber::dber_dz_quadrature({v, z}).value;
      if (std::abs(q) > 1e-30 && rel(c, q) > 1e-5) return fmt("v=%g z=%g rel=%.3g", v, z, rel(c, q));
    }
  }
  return {};
}

std::string check_bounds_and_monotonicity() {
  const opt::Evaluator eval(opt::Method::closed);
  if (eval.ber(0.0, 1.0).value != 0.5) return "v = 0 does not give 0.5";
  for (double z : kGridZ) {
    double prev = 0.5;
    for (double v : kGridV) {
      const double p = eval.ber(v, z).value;
      if (!(p > 0.0 && p <= 0.5)) return fmt("v=%g z=%g P=%.3g out of (0, 0.5]", v, z, p);
      if (!(p < prev)) return fmt("P not decreasing at v=%g z=%g", v, z);
      prev = p;
    }
  }
  return {};
}

std::string check_model2() {
  const opt::Evaluator eval(opt::Method::closed);
  for (double v : {5.0, 10.0, 32.5, 100.0}) {
    const opt::Model2Solution s = opt::solve_model2(v);
    if (!(s.derivative_residual < 1e-10 * s.derivative_scale)) return fmt("v=%g residual %.3g", v, s.derivative_residual);
    for (double probe : {s.z_star * (1.0 - 1e-3), s.z_star * (1.0 + 1e-3)}) {
      if (eval.ber(v, probe).log10_value < s.log10_ber_min) return fmt("v=%g z*=%g is not a minimum", v, s.z_star);
    }
  }
  return {};
}

std::string check_model1() {
  for (double c1 : {1e-6, 1e-9}) {
    const opt::Model1Solution s = opt::solve_model1(c1);
    if (s.constraint_residual > 1e-8 * c1) return fmt("c1=%g constraint residual %.3g", c1, s.constraint_residual);
    if (!(s.derivative_residual < 1e-10 * s.derivative_scale)) {
      return fmt("c1=%g stationarity residual %.3g", c1, s.derivative_residual);
    }
  }
  return {};
}

std::string check_round_trips() {
  const link::LinkBudget lb = link::LinkBudget::defaults();
  const link::NormalizedPoint p = link::normalize(lb);
  const double pt = link::pt_min(p.v, lb, lb.lambda);
  const double lambda = link::lambda_opt(p.z, lb.d_t, lb.sigma);
  if (rel(pt, lb.p_t) > 1e-12) return fmt("p_t round trip rel %.3g", rel(pt, lb.p_t));
  if (rel(lambda, lb.lambda) > 1e-12) return fmt("lambda round trip rel %.3g", rel(lambda, lb.lambda));
  return {};
}

std::string check_config_round_trip() {
  const ConfigRecord rec = parse_config(default_config_text());
  const link::NormalizedPoint a = link::normalize(rec.budget);
  const link::NormalizedPoint b = link::normalize(link::LinkBudget::defaults());
  if (a.v != b.v || a.z != b.z) return "default config text does not reproduce the defaults";
  return {};
}

std::string check_sweep_determinism() {
  const std::array<double, 2> vs = {10.0, 32.5};
  const std::array<opt::SweepMode, 2> modes = {opt::SweepMode::exact, opt::SweepMode::asymptotic};
  const ber::QuadratureSpec q = ber::QuadratureSpec::asymptotic_default();
  const std::string first = opt::sweep(vs, modes, q).to_csv();
  const std::string second = opt::sweep(vs, modes, q).to_csv();
  if (first != second) return "two sweeps differ";
  return {};
}

}  // namespace

std::vector<SelftestCheck> run_selftest() {
  const std::vector<std::pair<const char*, Check>> checks = {
      {"gamma_complement", check_gamma_complement},
      {"gamma_recurrence", check_gamma_recurrence},
      {"closed_vs_quadrature", check_closed_vs_quadrature},
      {"derivative_vs_quadrature", check_derivative},
      {"bounds_and_monotonicity", check_bounds_and_monotonicity},
      {"model2_optimality", check_model2},
      {"model1_consistency", check_model1},
      {"physical_round_trips", check_round_trips},
      {"config_round_trip", check_config_round_trip},
      {"sweep_determinism", check_sweep_determinism},
  };
  std::vector<SelftestCheck> out;
  for (const auto& [name, fn] : checks) {
    std::string detail;
    try {
      detail = fn();
    } catch (const std::exception& e) {
      detail = std::string("threw: ") + e.what();
    }
    out.push_back({name, detail.empty(), detail});
  }
  return out;
}

}  // namespace fso::cli
