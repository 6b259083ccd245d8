#include "fso/ber_core.hpp"

#include <algorithm>
#include <array>
#include <cfloat>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "fso/errors.hpp"
#include "fso/quadrature.hpp"

namespace fso::ber {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLn10 = std::numbers::ln10;
const double kLog2SqrtPi = std::log(2.0 * std::sqrt(std::numbers::pi));

double log_add_exp(double x, double y) {
  if (x == -kInf) return y;
  if (y == -kInf) return x;
  const double hi = std::max(x, y);
  return hi + std::log1p(std::exp(std::min(x, y) - hi));
}

// erfc(c u^p) falls from ~1 to ~0 where c u^p crosses O(1). For large c and
// small p that happens at u ~ c^(-1/p), far below the first Kronrod node of
// [0, 1], so the adaptive partition is seeded with those crossings. The tail
// beyond the last crossing can still carry mass that no node of a single
// wide panel sees, so the range above the first crossing is also cut into
// decades.
constexpr std::array<double, 6> kErfcLevels = {0.0625, 0.25, 1.0, 2.0, 4.0, 6.0};

std::vector<double> u_breakpoints(double c, double power) {
  std::vector<double> pts{0.0, 1.0};
  for (double s : kErfcLevels) {
    const double u = std::exp((std::log(s) - std::log(c)) / power);
    if (u < 1.0 && u > DBL_MIN) pts.push_back(u);
  }
  if (pts.size() > 2) {
    const double first = *std::min_element(pts.begin() + 2, pts.end());
    for (double u = first * 10.0; u < 1.0; u *= 10.0) pts.push_back(u);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

// Same crossings for c e^(-rate x), which decreases in x, plus a cut every
// decade of e^-x.
std::vector<double> x_breakpoints(double c, double rate, double x_max) {
  std::vector<double> pts{0.0, x_max};
  for (double s : kErfcLevels) {
    const double x = (std::log(c) - std::log(s)) / rate;
    if (x > 0.0 && x < x_max) pts.push_back(x);
  }
  for (double x = std::numbers::ln10; x < x_max; x += std::numbers::ln10) pts.push_back(x);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

quad::QuadResult integrate(const quad::Integrand& f, const std::vector<double>& points,
                           const QuadratureSpec& q, const char* what) {
  if (q.mode == QuadratureMode::fixed_grid) {
    return quad::integrate_midpoint(f, points.front(), points.back(), q.fixed_n);
  }
  quad::QuadResult r = quad::integrate_adaptive(f, points, q.abs_tol, q.rel_tol, q.max_subdivisions);
  if (!r.converged) {
    throw AccuracyError(std::string(what) + ": adaptive quadrature did not reach tolerance after " +
                            std::to_string(r.subdivisions) + " subdivisions",
                        r.value, r.error);
  }
  return r;
}

BerResult from_quadrature(const quad::QuadResult& r, BerMethod method) {
  BerResult out;
  out.value = r.value;
  out.method = method;
  out.error_estimate = r.error;
  out.diagnostics.subdivisions = r.subdivisions;
  out.diagnostics.converged = r.converged;
  out.diagnostics.underflow = r.value < DBL_MIN;
  out.log10_value = r.value > 0.0 ? std::log10(r.value) : -kInf;
  return out;
}

BerResult exact_half(BerMethod method) {
  BerResult out;
  out.value = 0.5;
  out.log10_value = std::log10(0.5);
  out.method = method;
  return out;
}

}  // namespace

void QuadratureSpec::validate() const {
  if (!(abs_tol > 0.0 && abs_tol < 1.0)) throw DomainError("QuadratureSpec: abs_tol must be in (0, 1)");
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw DomainError("QuadratureSpec: rel_tol must be in (0, 1)");
  if (max_subdivisions < 1) throw DomainError("QuadratureSpec: max_subdivisions must be >= 1");
  if (fixed_n < 2) throw DomainError("QuadratureSpec: fixed_n must be >= 2");
  if (!(x_max >= 0.0) || !std::isfinite(x_max)) {
    throw DomainError("QuadratureSpec: x_max must be finite and >= 0");
  }
}

QuadratureSpec QuadratureSpec::asymptotic_default() {
  QuadratureSpec q;
  q.mode = QuadratureMode::fixed_grid;
  q.fixed_n = 200;
  q.x_max = 10.0;
  return q;
}

std::string_view to_string(BerMethod m) {
  switch (m) {
    case BerMethod::closed:
      return "closed";
    case BerMethod::quadrature:
      return "quadrature";
    case BerMethod::semiinfinite_quadrature:
      return "semiinfinite_quadrature";
  }
  return "unknown";
}

BerResult ber_quadrature(const NormalizedPoint& p, const QuadratureSpec& q) {
  p.validate();
  q.validate();
  if (p.v == 0.0) return exact_half(BerMethod::quadrature);

  // t = u^2 removes the t^(-1/2) endpoint singularity.
  const double c = p.v * p.z;
  const double power = 2.0 * p.z * p.z;
  auto f = [c, power](double u) { return 0.5 * std::erfc(c * std::exp(power * std::log(u))); };
  return from_quadrature(integrate(f, u_breakpoints(c, power), q, "ber_quadrature"),
                         BerMethod::quadrature);
}

BerResult ber_quadrature_semiinfinite(const NormalizedPoint& p, const QuadratureSpec& q) {
  p.validate();
  q.validate();
  if (p.v == 0.0) return exact_half(BerMethod::semiinfinite_quadrature);

  const double tail = 0.5 * std::exp(-q.x_max);
  if (q.x_max == 0.0) {
    BerResult out = from_quadrature({0.0, tail, 0, 0, true}, BerMethod::semiinfinite_quadrature);
    out.diagnostics.truncated = true;
    return out;
  }

  const double c = p.v * p.z;
  const double rate = 2.0 * p.z * p.z;
  auto f = [c, rate](double x) { return 0.5 * std::erfc(c * std::exp(-rate * x)) * std::exp(-x); };
  BerResult out = from_quadrature(integrate(f, x_breakpoints(c, rate, q.x_max), q, "ber_quadrature_semiinfinite"),
                                  BerMethod::semiinfinite_quadrature);
  out.error_estimate += tail;
  out.diagnostics.truncated = tail > std::max(q.abs_tol, q.rel_tol * std::abs(out.value));
  return out;
}

BerResult ber_closed(const NormalizedPoint& p, ClosedForm form, const specfun::SeriesControl& ctl) {
  p.validate();
  ctl.validate();
  if (p.v == 0.0) {
    throw BoundaryError("ber_closed: v = 0 is the analytic boundary; P_e = 0.5 there", 0.5);
  }

  const double c = p.v * p.z;
  const double a = p.exponent();
  const double x = c * c;
  const double log_envelope = -std::log(c) / (2.0 * p.z * p.z);
  const double log_erfc_term = specfun::log_erfc(c) - std::numbers::ln2;

  BerResult out;
  out.method = BerMethod::closed;

  if (form == ClosedForm::upper_incomplete) {
    const double gamma_term =
        std::exp(log_envelope + specfun::log_gamma_upper(a, x) - kLog2SqrtPi);
    out.value = std::exp(log_erfc_term) - gamma_term;
    out.log10_value = out.value > 0.0 ? std::log10(out.value) : std::numeric_limits<double>::quiet_NaN();
    out.error_estimate = 64.0 * kEps * (std::exp(log_erfc_term) + gamma_term);
    return out;
  }

  const double log_gamma_term = log_envelope + specfun::log_gamma_lower(a, x) - kLog2SqrtPi;
  const double log_p = log_add_exp(log_erfc_term, log_gamma_term);
  out.log10_value = log_p / kLn10;
  out.value = std::min(std::exp(log_p), 0.5);
  out.diagnostics.underflow = out.value < DBL_MIN;
  if (out.diagnostics.underflow) out.value = 0.0;
  // Rounding bound of the log-domain assembly.
  out.error_estimate = (64.0 + std::abs(log_gamma_term)) * kEps * out.value;
  return out;
}

Derivative dber_dz_quadrature(const NormalizedPoint& p, const QuadratureSpec& q) {
  p.validate();
  q.validate();
  if (p.v == 0.0) return {};

  const double c2 = (p.v * p.z) * (p.v * p.z);
  const double power = 2.0 * p.z * p.z;
  auto f = [c2, power](double u) {
    const double lu = std::log(u);
    const double tp = power * lu;
    return std::exp(tp - c2 * std::exp(2.0 * tp)) * (1.0 + 2.0 * tp);
  };
  const quad::QuadResult r =
      integrate(f, u_breakpoints(std::sqrt(c2), power), q, "dber_dz_quadrature");
  const double scale = p.v / std::sqrt(std::numbers::pi);
  return {-scale * r.value, scale * r.error, false};
}

Derivative dber_dz_closed(const NormalizedPoint& p, const specfun::SeriesControl& ctl) {
  p.validate();
  ctl.validate();
  if (p.v == 0.0) throw DomainError("dber_dz_closed: v must be > 0");

  // With P = erfc(c)/2 + E(z) gamma(a(z), x(z)) / (2 sqrt(pi)), c = v z,
  // E = c^(-1/(2 z^2)), x = c^2, a = 1/2 + 1/(4 z^2):
  //   d/dz erfc(c)/2           = -(v / sqrt(pi)) e^(-c^2)
  //   E dgamma/dx dx/dz / (2 sqrt(pi)) = +(v / sqrt(pi)) e^(-c^2)
  // so the two cancel identically and are omitted. What remains is
  //   (E gamma / (4 sqrt(pi) z^3)) (2 ln c - 1 - d ln gamma / da)
  // using dE/dz = E (2 ln c - 1) / (2 z^3) and da/dz = -1 / (2 z^3).
  const double c = p.v * p.z;
  const double a = p.exponent();
  const double x = c * c;
  const specfun::Evaluation dlog = specfun::dlog_gamma_lower_da(a, x, ctl);
  const double bracket = 2.0 * std::log(c) - 1.0 - dlog.value;
  const double log_prefactor = -std::log(c) / (2.0 * p.z * p.z) + specfun::log_gamma_lower(a, x) -
                               kLog2SqrtPi - std::log(2.0) - 3.0 * std::log(p.z);
  const double prefactor = std::exp(log_prefactor);

  Derivative out;
  out.value = prefactor * bracket;
  out.error_estimate =
      prefactor * 64.0 * kEps * (2.0 * std::abs(std::log(c)) + 1.0 + std::abs(dlog.value)) +
      64.0 * kEps * std::abs(out.value);
  out.quadrature_fallback = dlog.quadrature_fallback;
  return out;
}

}  // namespace fso::ber
