#include "fso/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>

#include "fso/errors.hpp"

namespace fso::opt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kMinimalityStep = 1e-3;
constexpr double kVExpansionLimit = 1e12;

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

// Brent's bracketed root finder (bisection, secant and inverse quadratic
// interpolation). Requires f(a) and f(b) of opposite sign or one of them zero.
// Stops when |f(x)| <= ftol or the bracket is narrower than xtol.
template <typename F>
double brent_root(F&& f, double a, double b, double fa, double fb, double ftol, double xtol) {
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  double c = a;
  double fc = fa;
  double d = b - a;
  double e = d;
  for (int iter = 0; iter < 300; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = b - a;
      e = d;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol1 = 2.0 * kEps * std::abs(b) + 0.5 * xtol;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || std::abs(fb) <= ftol) return b;
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      const double s = fb / fa;
      double p;
      double q;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        const double qq = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
        q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      const double min1 = 3.0 * xm * q - std::abs(tol1 * q);
      const double min2 = std::abs(e * q);
      if (2.0 * p < std::min(min1, min2)) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol1 ? d : (xm > 0.0 ? tol1 : -tol1);
    fb = f(b);
  }
  return b;
}

// Golden-section minimization of f on [a, b]; f may return +inf.
template <typename F>
double golden_section(F&& f, double a, double b, double rel_tol, int max_iter = 200) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int i = 0; i < max_iter && (b - a) > rel_tol * (std::abs(a) + std::abs(b)); ++i) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  return f1 <= f2 ? x1 : x2;
}

void check_bracket(const Bracket& b, const char* what) {
  if (!(b.lo >= link::kZMin && b.lo < b.hi && b.hi <= link::kZMax)) {
    throw DomainError(std::string(what) + ": z bracket must satisfy " + fmt(link::kZMin) +
                      " <= lo < hi <= " + fmt(link::kZMax) + ", got (" + fmt(b.lo) + ", " +
                      fmt(b.hi) + ")");
  }
}

void check_tol(double tol, const char* what) {
  if (!(tol > 0.0 && tol < 1e-3)) throw DomainError(std::string(what) + ": tol must be in (0, 1e-3)");
}

bool opposite_signs(double a, double b) { return (a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0); }

Evaluator evaluator_for(Method method, const ber::QuadratureSpec& quad,
                        const specfun::SeriesControl& series) {
  return Evaluator(method, quad, series);
}

}  // namespace

std::string_view to_string(Method m) { return m == Method::closed ? "closed" : "quadrature"; }

std::string_view to_string(SweepMode m) { return m == SweepMode::exact ? "exact" : "asymptotic"; }

Evaluator::Evaluator(Method method, ber::QuadratureSpec quad, specfun::SeriesControl series)
    : method_(method), quad_(quad), series_(series) {
  quad_.validate();
  series_.validate();
}

ber::BerResult Evaluator::ber(double v, double z) const {
  const link::NormalizedPoint p{v, z};
  if (method_ == Method::closed) {
    if (v == 0.0) return ber::ber_quadrature(p, quad_);
    return ber::ber_closed(p, ber::ClosedForm::lower_incomplete, series_);
  }
  return ber::ber_quadrature(p, quad_);
}

double Evaluator::dber_dz(double v, double z) const {
  const link::NormalizedPoint p{v, z};
  if (method_ == Method::closed) return ber::dber_dz_closed(p, series_).value;
  return ber::dber_dz_quadrature(p, quad_).value;
}

std::vector<double> log_space(double lo, double hi, std::size_t n) {
  if (n == 0) return {};
  if (n == 1) return {lo};
  std::vector<double> out(n);
  const double llo = std::log(lo);
  const double step = (std::log(hi) - llo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(llo + step * static_cast<double>(i));
  out.front() = lo;
  out.back() = hi;
  return out;
}

Model2Solution solve_model2(double c2, const Model2Options& opts) {
  if (!(c2 > 0.0) || !std::isfinite(c2)) throw DomainError("solve_model2: v must be finite and > 0");
  check_bracket(opts.z_bracket, "solve_model2");
  check_tol(opts.tol, "solve_model2");
  if (opts.scan_points < 3) throw DomainError("solve_model2: scan_points must be >= 3");

  const Evaluator eval = evaluator_for(opts.method, opts.quad, opts.series);
  const std::vector<double> zs = log_space(opts.z_bracket.lo, opts.z_bracket.hi, opts.scan_points);
  std::vector<double> ds(zs.size());
  for (std::size_t i = 0; i < zs.size(); ++i) ds[i] = eval.dber_dz(c2, zs[i]);

  double scale = std::max(std::abs(ds.front()), std::abs(ds.back()));
  if (scale == 0.0) {
    for (double d : ds) scale = std::max(scale, std::abs(d));
  }
  const double ftol = opts.tol * scale;

  auto log10_ber = [&](double z) { return eval.ber(c2, z).log10_value; };
  auto is_minimum = [&](double z, double centre) {
    const double step = kMinimalityStep * z;
    for (double probe : {z - step, z + step}) {
      if (probe < link::kZMin || probe > link::kZMax) continue;
      if (log10_ber(probe) < centre) return false;
    }
    return true;
  };

  std::vector<StationaryPoint> found;
  for (std::size_t i = 0; i + 1 < zs.size(); ++i) {
    if (ds[i] == 0.0 && i > 0) {
      if (opposite_signs(ds[i - 1], ds[i + 1])) {
        const double lv = log10_ber(zs[i]);
        found.push_back({{zs[i - 1], zs[i + 1]}, zs[i], lv, is_minimum(zs[i], lv)});
      }
      continue;
    }
    if (!opposite_signs(ds[i], ds[i + 1])) continue;
    // Refine to bracket width, not to ftol: near a deep minimum |dP/dz| can be
    // many decades below tol * scale across the whole scan cell.
    const double z = brent_root([&](double zz) { return eval.dber_dz(c2, zz); }, zs[i], zs[i + 1],
                                ds[i], ds[i + 1], 0.0, 4.0 * kEps * zs[i]);
    const double lv = log10_ber(z);
    found.push_back({{zs[i], zs[i + 1]}, z, lv, is_minimum(z, lv)});
  }

  if (found.empty()) {
    const ber::BerResult lo = eval.ber(c2, zs.front());
    const ber::BerResult hi = eval.ber(c2, zs.back());
    throw SolverError("solve_model2: no interior optimum; dP/dz keeps one sign on [" +
                      fmt(zs.front()) + ", " + fmt(zs.back()) + "] (P(z_lo) = " + fmt(lo.value) +
                      ", P(z_hi) = " + fmt(hi.value) + ", dP/dz(z_lo) = " + fmt(ds.front()) +
                      ", dP/dz(z_hi) = " + fmt(ds.back()) + ")");
  }

  auto best = found.end();
  for (auto it = found.begin(); it != found.end(); ++it) {
    if (it->minimum && (best == found.end() || it->log10_ber < best->log10_ber)) best = it;
  }
  if (best == found.end()) {
    std::string where;
    for (const auto& s : found) where += " " + fmt(s.z);
    std::string hint;
    if (opts.method == Method::quadrature && opts.quad.mode == ber::QuadratureMode::adaptive &&
        eval.ber(c2, found.front().z).value < opts.quad.abs_tol) {
      hint = "; BER there is below quadrature abs_tol, so the check is unresolved";
    }
    throw SolverError("solve_model2: stationary point(s) at z =" + where +
                      " fail the minimality check (saddle or maximum)" + hint);
  }

  Model2Solution out;
  out.v = c2;
  out.z_star = best->z;
  const ber::BerResult at = eval.ber(c2, best->z);
  out.ber_min = at.value;
  out.log10_ber_min = at.log10_value;
  out.derivative_residual = std::abs(eval.dber_dz(c2, best->z));
  out.derivative_scale = scale;
  out.bracket = best->bracket;
  out.method_tag = opts.method;
  for (auto it = found.begin(); it != found.end(); ++it) {
    if (it != best) out.others.push_back(*it);
  }
  if (!(out.derivative_residual < ftol)) {
    throw SolverError("solve_model2: refinement stalled at z = " + fmt(out.z_star) +
                      " with |dP/dz| = " + fmt(out.derivative_residual) + " above " + fmt(ftol));
  }
  return out;
}

double v_for_target(double c1, double z, const Evaluator& eval, Bracket v_bracket) {
  const double target = std::log10(c1);
  auto g = [&](double log_v) { return eval.ber(std::exp(log_v), z).log10_value - target; };

  double lo = v_bracket.lo;
  double hi = v_bracket.hi;
  double g_lo = g(std::log(lo));
  while (g_lo <= 0.0 && lo > 1.0 / kVExpansionLimit) {
    lo /= 10.0;
    g_lo = g(std::log(lo));
  }
  double g_hi = g(std::log(hi));
  while (g_hi >= 0.0 && hi < kVExpansionLimit) {
    hi *= 10.0;
    g_hi = g(std::log(hi));
  }
  if (g_lo < 0.0 || g_hi > 0.0) {
    throw SolverError("target BER " + fmt(c1) + " is unreachable at z = " + fmt(z) +
                      " for v in [" + fmt(lo) + ", " + fmt(hi) + "]");
  }
  const double log_v = brent_root(g, std::log(lo), std::log(hi), g_lo, g_hi, 1e-14, 1e-15);
  return std::exp(log_v);
}

Model1Solution solve_model1(double c1, const Model1Options& opts,
                            const std::optional<link::LinkBudget>& budget) {
  if (!(c1 > 0.0 && c1 < 0.5)) throw DomainError("solve_model1: target BER must lie in (0, 0.5)");
  check_bracket(opts.z_bracket, "solve_model1");
  check_tol(opts.tol, "solve_model1");
  if (!(opts.v_bracket.lo > 0.0 && opts.v_bracket.lo < opts.v_bracket.hi)) {
    throw DomainError("solve_model1: v bracket must satisfy 0 < lo < hi");
  }
  if (!(opts.constraint_tol > 0.0 && opts.constraint_tol < 1.0)) {
    throw DomainError("solve_model1: constraint_tol must be in (0, 1)");
  }
  if (opts.scan_points < 3) throw DomainError("solve_model1: scan_points must be >= 3");
  if (budget) budget->validate();

  const Evaluator eval = evaluator_for(opts.method, opts.quad, opts.series);
  Model1Solution out;
  out.target_ber = c1;

  auto v_of = [&](double z) {
    try {
      return v_for_target(c1, z, eval, opts.v_bracket);
    } catch (const SolverError&) {
      return kInf;
    }
  };

  const std::vector<double> zs = log_space(opts.z_bracket.lo, opts.z_bracket.hi, opts.scan_points);
  std::vector<double> vs(zs.size());
  for (std::size_t i = 0; i < zs.size(); ++i) vs[i] = v_of(zs[i]);

  const auto best_it = std::min_element(vs.begin(), vs.end());
  if (!std::isfinite(*best_it)) {
    // Re-run one point to surface the solver's own message.
    v_for_target(c1, zs.front(), eval, opts.v_bracket);
    throw SolverError("solve_model1: target BER " + fmt(c1) + " unreachable at every scanned z");
  }
  const std::size_t ib = static_cast<std::size_t>(best_it - vs.begin());

  std::size_t local_minima = 0;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (!std::isfinite(vs[i])) continue;
    const bool left_ok = i == 0 || vs[i] <= vs[i - 1];
    const bool right_ok = i + 1 == vs.size() || vs[i] <= vs[i + 1];
    if (left_ok && right_ok) ++local_minima;
  }
  if (local_minima > 1) {
    out.warnings.push_back("v(z) has " + std::to_string(local_minima) +
                           " local minima on the scan grid; returning the best");
  }
  if (ib == 0 || ib + 1 == zs.size()) {
    out.warnings.push_back("minimum of v(z) lies on the z bracket boundary");
  }

  const double z_a = zs[ib == 0 ? 0 : ib - 1];
  const double z_b = zs[std::min(ib + 1, zs.size() - 1)];
  const double log_z = golden_section(
      [&](double lz) { return std::log(v_of(std::exp(lz))); }, std::log(z_a), std::log(z_b), 1e-10);
  double z_star = std::exp(log_z);

  // dv/dz = 0 exactly where dP/dz(v(z), z) = 0; polish on that.
  auto h = [&](double z) {
    const double v = v_of(z);
    return std::isfinite(v) ? eval.dber_dz(v, z) : kNaN;
  };
  const double v_golden = v_of(z_star);
  const double scale = std::max(std::abs(eval.dber_dz(v_golden, opts.z_bracket.lo)),
                                std::abs(eval.dber_dz(v_golden, opts.z_bracket.hi)));
  const double ftol = opts.tol * scale;
  if (h(z_star) != 0.0) {
    for (double w = 1e-7; w < 0.5; w *= 4.0) {
      const double lo = std::max(opts.z_bracket.lo, z_star * (1.0 - w));
      const double hi = std::min(opts.z_bracket.hi, z_star * (1.0 + w));
      const double h_lo = h(lo);
      const double h_hi = h(hi);
      if (opposite_signs(h_lo, h_hi)) {
        z_star = brent_root(h, lo, hi, h_lo, h_hi, 0.0, 4.0 * kEps * z_star);
        break;
      }
    }
  }

  out.z_star = z_star;
  out.v_star = v_of(z_star);
  out.constraint_residual = std::abs(eval.ber(out.v_star, z_star).value - c1);
  out.derivative_residual = std::abs(eval.dber_dz(out.v_star, z_star));
  out.derivative_scale = scale;
  if (out.constraint_residual > opts.constraint_tol * c1) {
    out.warnings.push_back("constraint residual " + fmt(out.constraint_residual) +
                           " exceeds the tolerance");
  }
  if (out.derivative_residual > ftol) {
    out.warnings.push_back("stationarity residual " + fmt(out.derivative_residual) +
                           " exceeds tol * scale = " + fmt(ftol));
  }
  if (budget) {
    out.lambda_opt = link::lambda_opt(z_star, budget->d_t, budget->sigma);
    out.pt_min = link::pt_min(out.v_star, *budget, *out.lambda_opt);
  }
  return out;
}

std::string SweepTable::to_csv() const {
  std::string out = "v,mode,z_star,log10_ber,deriv_residual\n";
  char buf[256];
  for (const SweepRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%s,%.17g,%.17g,%.17g\n", r.v,
                  std::string(to_string(r.mode)).c_str(), r.z_star, r.log10_ber, r.deriv_residual);
    out += buf;
  }
  return out;
}

SweepTable sweep(std::span<const double> v_values, std::span<const SweepMode> modes,
                 const ber::QuadratureSpec& asymptotic_quad, const Model2Options& base) {
  if (v_values.empty()) throw DomainError("sweep: v_values must be non-empty");
  for (std::size_t i = 0; i < v_values.size(); ++i) {
    if (!(v_values[i] > 0.0) || !std::isfinite(v_values[i])) {
      throw DomainError("sweep: every v must be finite and > 0");
    }
    if (i > 0 && !(v_values[i] > v_values[i - 1])) {
      throw DomainError("sweep: v_values must be strictly ascending");
    }
  }
  if (modes.empty()) throw DomainError("sweep: at least one mode is required");
  asymptotic_quad.validate();

  SweepTable table;
  for (SweepMode mode : {SweepMode::exact, SweepMode::asymptotic}) {
    if (std::find(modes.begin(), modes.end(), mode) == modes.end()) continue;
    Model2Options opts = base;
    if (mode == SweepMode::exact) {
      opts.method = Method::closed;
    } else {
      opts.method = Method::quadrature;
      opts.quad = asymptotic_quad;
    }
    for (double v : v_values) {
      SweepRow row;
      row.v = v;
      row.mode = mode;
      try {
        const Model2Solution s = solve_model2(v, opts);
        row.z_star = s.z_star;
        row.log10_ber = s.log10_ber_min;
        row.deriv_residual = s.derivative_residual;
      } catch (const Error& e) {
        row.z_star = kNaN;
        row.log10_ber = kNaN;
        row.deriv_residual = kNaN;
        row.error = e.what();
      }
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

ResolutionStudy resolution_study(double v, std::span<const std::size_t> fixed_ns) {
  ResolutionStudy study;
  study.v = v;
  study.exact = solve_model2(v);
  const ber::BerResult upper = ber::ber_closed({v, study.exact.z_star},
                                               ber::ClosedForm::upper_incomplete);
  study.upper_form_value = upper.value;
  study.upper_form_log10_ber = upper.log10_value;

  for (std::size_t n : fixed_ns) {
    Model2Options opts;
    opts.method = Method::quadrature;
    opts.quad = ber::QuadratureSpec::asymptotic_default();
    opts.quad.fixed_n = n;
    const Model2Solution s = solve_model2(v, opts);
    study.rows.push_back({n, s.z_star, s.log10_ber_min, study.exact.log10_ber_min - s.log10_ber_min});
  }

  study.gap_shrinks_monotonically = true;
  for (std::size_t i = 1; i < study.rows.size(); ++i) {
    if (!(std::abs(study.rows[i].gap) < std::abs(study.rows[i - 1].gap))) {
      study.gap_shrinks_monotonically = false;
    }
  }
  return study;
}

}  // namespace fso::opt
