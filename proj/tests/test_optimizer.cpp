#include <doctest.h>

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "fso/errors.hpp"
#include "fso/optimizer.hpp"

using namespace fso;
using namespace fso::opt;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Tolerance-free integral oracle: abs_tol far below any BER of interest.
ber::QuadratureSpec oracle_spec() {
  ber::QuadratureSpec q;
  q.abs_tol = 1e-300;
  q.rel_tol = 1e-13;
  q.max_subdivisions = 20000;
  return q;
}

double oracle_log10_ber(double v, double z) {
  return std::log10(ber::ber_quadrature({v, z}, oracle_spec()).value);
}

template <typename F>
double golden_min(F f, double lo, double hi, int iters = 120) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - r * (b - a);
  double d = a + r * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int i = 0; i < iters; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// Brute-force minimizer of P(v, .) on a log grid, refined by golden section
// in log z. Works on the integral, never on the closed form.
double brute_force_z_star(double v, std::size_t n) {
  const std::vector<double> zs = log_space(link::kZMin, link::kZMax, n);
  std::size_t best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < zs.size(); ++i) {
    const double val = oracle_log10_ber(v, zs[i]);
    if (val < best_val) {
      best_val = val;
      best = i;
    }
  }
  const double lo = std::log(zs[best > 0 ? best - 1 : 0]);
  const double hi = std::log(zs[std::min(best + 1, zs.size() - 1)]);
  return std::exp(golden_min([&](double lz) { return oracle_log10_ber(v, std::exp(lz)); }, lo, hi));
}

}  // namespace

TEST_CASE("model 2 at v = 32.5 against the brute-force oracle") {
  const Model2Solution s = solve_model2(32.5);
  CHECK(rel(s.z_star, brute_force_z_star(32.5, 10000)) < 1e-6);
  CHECK(s.bracket.lo < s.z_star);
  CHECK(s.z_star < s.bracket.hi);
  CHECK(s.ber_min > 0.0);
  CHECK(s.ber_min < 0.5);
  CHECK(s.derivative_residual < 1e-10 * s.derivative_scale);
  CHECK(s.method_tag == Method::closed);
  // Recorded operating point of the resolution report.
  CHECK(s.log10_ber_min == doctest::Approx(-8.7132844100886722).epsilon(1e-9));
  CHECK(rel(s.z_star, 0.15927673703772635) < 1e-9);
}

TEST_CASE("model 2 optimality and cross-method agreement") {
  const Evaluator closed(Method::closed);
  for (double v : {5.0, 10.0, 100.0}) {
    const Model2Solution s = solve_model2(v);
    CHECK(s.derivative_residual < 1e-10 * s.derivative_scale);
    CHECK(closed.ber(v, s.z_star * (1.0 - 1e-3)).log10_value >= s.log10_ber_min);
    CHECK(closed.ber(v, s.z_star * (1.0 + 1e-3)).log10_value >= s.log10_ber_min);
    CHECK(s.others.empty());
  }

  Model2Options quad;
  quad.method = Method::quadrature;
  const Model2Solution q = solve_model2(10.0, quad);
  CHECK(q.method_tag == Method::quadrature);
  CHECK(rel(q.z_star, solve_model2(10.0).z_star) < 1e-6);

  Model2Options finer = quad;
  finer.quad.abs_tol /= 10.0;
  finer.quad.rel_tol /= 10.0;
  CHECK(rel(solve_model2(10.0, finer).z_star, q.z_star) < 1e-6);
}

TEST_CASE("model 2 errors") {
  Model2Options o;
  o.z_bracket = {1.0, 5.0};
  try {
    solve_model2(10.0, o);
    FAIL("expected SolverError");
  } catch (const SolverError& e) {
    CHECK(std::string(e.what()).find("no interior optimum") != std::string::npos);
  }
  o = {};
  o.tol = 1e-2;
  CHECK_THROWS_AS(solve_model2(10.0, o), DomainError);
  o = {};
  o.z_bracket = {0.01, 1.0};
  CHECK_THROWS_AS(solve_model2(10.0, o), DomainError);
  CHECK_THROWS_AS(solve_model2(0.0), DomainError);
}

TEST_CASE("v_for_target") {
  const Evaluator eval(Method::closed);
  const double v = v_for_target(1e-6, 0.2, eval, {1e-3, 1e6});
  CHECK(rel(eval.ber(v, 0.2).value, 1e-6) < 1e-12);
  // The bracket is widened when it does not straddle the target.
  CHECK(rel(v_for_target(1e-6, 0.2, eval, {1e-3, 2.0}), v) < 1e-12);
  try {
    v_for_target(1e-9, 50.0, eval, {1e-3, 1e6});
    FAIL("expected SolverError");
  } catch (const SolverError& e) {
    CHECK(std::string(e.what()).find("z = 50") != std::string::npos);
  }
}

TEST_CASE("model 1 self-consistency with model 2") {
  const Model2Solution m2 = solve_model2(10.0);
  const double c1 = Evaluator(Method::closed).ber(10.0, m2.z_star).value;
  const Model1Solution s = solve_model1(c1);
  CHECK(rel(s.v_star, 10.0) < 1e-6);
  CHECK(rel(s.z_star, m2.z_star) < 1e-4);
  CHECK(s.constraint_residual <= 1e-8 * c1);
  CHECK(s.derivative_residual < 1e-10 * s.derivative_scale);
  CHECK(s.warnings.empty());
  CHECK_FALSE(s.lambda_opt.has_value());
}

TEST_CASE("model 1 near the plateau and with a link budget") {
  const Model1Solution plateau = solve_model1(0.49);
  CHECK(plateau.v_star > 0.0);
  CHECK(plateau.v_star < 0.2);
  CHECK(plateau.constraint_residual <= 1e-8 * 0.49);

  const link::LinkBudget lb = link::LinkBudget::defaults();
  const Model1Solution s = solve_model1(1e-6, {}, lb);
  REQUIRE(s.lambda_opt.has_value());
  REQUIRE(s.pt_min.has_value());
  CHECK(rel(*s.lambda_opt, link::lambda_opt(s.z_star, lb.d_t, lb.sigma)) < 1e-15);
  CHECK(rel(*s.pt_min * link::power_coefficient(lb, *s.lambda_opt), s.v_star) < 1e-12);

  CHECK_THROWS_AS(solve_model1(0.5), DomainError);
  CHECK_THROWS_AS(solve_model1(0.0), DomainError);
  Model1Options bad;
  bad.v_bracket = {10.0, 1.0};
  CHECK_THROWS_AS(solve_model1(1e-6, bad), DomainError);
}

TEST_CASE("model 1 at 1e-9 against a nested brute-force oracle") {
  // For each z on a grid, v(z) by bisection on the integral; then golden
  // section over z around the best grid point.
  const double c1 = 1e-9;
  auto v_of = [&](double z) {
    double lo = std::log(1e-3);
    double hi = std::log(1e6);
    if (oracle_log10_ber(std::exp(hi), z) > std::log10(c1)) return std::numeric_limits<double>::infinity();
    for (int i = 0; i < 80; ++i) {
      const double mid = 0.5 * (lo + hi);
      (oracle_log10_ber(std::exp(mid), z) > std::log10(c1) ? lo : hi) = mid;
    }
    return std::exp(0.5 * (lo + hi));
  };
  const std::vector<double> zs = log_space(0.05, 50.0, 60);
  std::size_t best = 0;
  for (std::size_t i = 1; i < zs.size(); ++i) {
    if (v_of(zs[i]) < v_of(zs[best])) best = i;
  }
  const double z_oracle =
      std::exp(golden_min([&](double lz) { return v_of(std::exp(lz)); }, std::log(zs[best - 1]),
                          std::log(zs[best + 1]), 60));
  const double v_oracle = v_of(z_oracle);

  const Model1Solution s = solve_model1(c1);
  CHECK(rel(s.v_star, v_oracle) < 1e-4);
  CHECK(rel(s.z_star, z_oracle) < 1e-4);
  CHECK(s.constraint_residual <= 1e-8 * c1);
}

TEST_CASE("sweep") {
  const std::array<double, 1> one = {32.5};
  const std::array<SweepMode, 1> exact = {SweepMode::exact};
  const SweepTable t = sweep(one, exact, ber::QuadratureSpec::asymptotic_default());
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0].z_star == solve_model2(32.5).z_star);
  CHECK(t.rows[0].error.empty());

  const std::vector<double> vs = log_space(1.0, 100.0, 20);
  const SweepTable mono = sweep(vs, exact, ber::QuadratureSpec::asymptotic_default());
  for (std::size_t i = 1; i < mono.rows.size(); ++i) {
    CHECK(mono.rows[i].log10_ber < mono.rows[i - 1].log10_ber);
  }
  // Sampled against the brute-force oracle.
  for (std::size_t i : {0u, 9u, 19u}) {
    CHECK(rel(mono.rows[i].z_star, brute_force_z_star(vs[i], 400)) < 1e-5);
  }

  const std::array<SweepMode, 2> both = {SweepMode::asymptotic, SweepMode::exact};
  const std::array<double, 3> three = {5.0, 10.0, 32.5};
  const SweepTable b = sweep(three, both, ber::QuadratureSpec::asymptotic_default());
  REQUIRE(b.rows.size() == 6);
  for (std::size_t i = 0; i < 3; ++i) CHECK(b.rows[i].mode == SweepMode::exact);
  for (std::size_t i = 3; i < 6; ++i) CHECK(b.rows[i].mode == SweepMode::asymptotic);
  CHECK(b.rows[2].log10_ber != b.rows[5].log10_ber);

  const std::string csv = b.to_csv();
  CHECK(csv.rfind("v,mode,z_star,log10_ber,deriv_residual\n", 0) == 0);
  CHECK(csv.back() == '\n');
  CHECK(csv.find("32.5,exact,") != std::string::npos);
  CHECK(csv == sweep(three, both, ber::QuadratureSpec::asymptotic_default()).to_csv());

  // A failing solve becomes a row-level diagnostic.
  Model2Options narrow;
  narrow.z_bracket = {1.0, 5.0};
  const SweepTable f = sweep(one, exact, ber::QuadratureSpec::asymptotic_default(), narrow);
  REQUIRE(f.rows.size() == 1);
  CHECK_FALSE(f.rows[0].error.empty());
  CHECK(std::isnan(f.rows[0].z_star));

  const std::array<double, 2> unsorted = {10.0, 5.0};
  CHECK_THROWS_AS(sweep(unsorted, exact, ber::QuadratureSpec::asymptotic_default()), DomainError);
  CHECK_THROWS_AS(sweep(std::span<const double>{}, exact, ber::QuadratureSpec::asymptotic_default()),
                  DomainError);
}

TEST_CASE("resolution study") {
  const std::array<std::size_t, 4> ns = {50, 200, 1000, 5000};
  const ResolutionStudy r = resolution_study(32.5, ns);
  REQUIRE(r.rows.size() == 4);
  CHECK(r.gap_shrinks_monotonically);
  for (const ResolutionRow& row : r.rows) CHECK(row.gap > 0.0);
  CHECK(r.upper_form_value < 0.0);
  CHECK(std::abs(r.upper_form_value) < 1e-12);
}

TEST_CASE("log_space") {
  const std::vector<double> xs = log_space(1.0, 100.0, 3);
  REQUIRE(xs.size() == 3);
  CHECK(xs[0] == 1.0);
  CHECK(xs[1] == doctest::Approx(10.0).epsilon(1e-15));
  CHECK(xs[2] == 100.0);
  CHECK(log_space(2.0, 3.0, 1) == std::vector<double>{2.0});
}
