#ifndef FSO_BER_CORE_HPP
#define FSO_BER_CORE_HPP

#include <cstddef>
#include <string_view>

#include "fso/link_model.hpp"
#include "fso/specfun.hpp"

namespace fso::ber {

using link::NormalizedPoint;

enum class QuadratureMode { adaptive, fixed_grid };

/// Configuration of the integral evaluations.
///
/// In `adaptive` mode the tolerances drive a 21-point Gauss-Kronrod
/// bisection. In `fixed_grid` mode `fixed_n` equal midpoint panels are used
/// with no error control; this is the coarse "asymptotic" emulation.
/// `x_max` truncates the semi-infinite representation only.
struct QuadratureSpec {
  double abs_tol = 1e-14;
  double rel_tol = 1e-12;
  std::size_t max_subdivisions = 2000;
  QuadratureMode mode = QuadratureMode::adaptive;
  std::size_t fixed_n = 200;
  double x_max = 60.0;

  void validate() const;

  static QuadratureSpec adaptive_default() { return {}; }
  /// fixed_grid, 200 panels.
  static QuadratureSpec asymptotic_default();
};

enum class BerMethod { closed, quadrature, semiinfinite_quadrature };

std::string_view to_string(BerMethod m);

struct BerDiagnostics {
  bool underflow = false;            // value below DBL_MIN, reported as 0
  bool quadrature_fallback = false;  // a special-function series was replaced by quadrature
  bool truncated = false;            // semi-infinite integral cut at x_max
  bool converged = true;             // adaptive quadrature met its tolerance
  std::size_t subdivisions = 0;
};

struct BerResult {
  double value = 0.0;
  double log10_value = 0.0;  // computed in the log domain; -inf only when unknown
  BerMethod method = BerMethod::closed;
  double error_estimate = 0.0;
  BerDiagnostics diagnostics;
};

struct Derivative {
  double value = 0.0;
  double error_estimate = 0.0;
  bool quadrature_fallback = false;
};

/// Which incomplete-gamma closed form to evaluate.
///
/// `lower_incomplete` is P = erfc(c)/2 + c^(-1/(2z^2)) gamma(a, c^2) / (2 sqrt(pi))
/// with c = v z, obtained by integrating the finite-interval form by parts.
/// `upper_incomplete` replaces + gamma(a, .) by - Gamma(a, .), which drops the
/// completion term c^(-1/(2z^2)) Gamma(a) / (2 sqrt(pi)); it does not satisfy
/// the v -> 0 limit and can be negative. It is kept only so that the two can
/// be compared side by side.
enum class ClosedForm { lower_incomplete, upper_incomplete };

/// P_e = 1/2 int_0^1 erfc(v z u^(2 z^2)) du. v = 0 returns exactly 1/2.
/// Throws AccuracyError (carrying the best estimate) when adaptive
/// subdivision runs out of panels before meeting its tolerance.
BerResult ber_quadrature(const NormalizedPoint& p, const QuadratureSpec& q = {});

/// P_e = 1/2 int_0^x_max erfc(v z e^(-2 x z^2)) e^(-x) dx. The neglected tail
/// is at most e^(-x_max)/2 and is added to the error estimate.
BerResult ber_quadrature_semiinfinite(const NormalizedPoint& p, const QuadratureSpec& q = {});

/// Closed form, evaluated in the log domain. Throws BoundaryError for v = 0.
BerResult ber_closed(const NormalizedPoint& p, ClosedForm form = ClosedForm::lower_incomplete,
                     const specfun::SeriesControl& ctl = {});

/// dP_e/dz = -(v / sqrt(pi)) int_0^1 u^(2z^2) (1 + 4 z^2 ln u) exp(-v^2 z^2 u^(4 z^2)) du.
Derivative dber_dz_quadrature(const NormalizedPoint& p, const QuadratureSpec& q = {});

/// dP_e/dz of the lower_incomplete closed form.
Derivative dber_dz_closed(const NormalizedPoint& p, const specfun::SeriesControl& ctl = {});

}  // namespace fso::ber

#endif  // FSO_BER_CORE_HPP
