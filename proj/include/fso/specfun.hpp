#ifndef FSO_SPECFUN_HPP
#define FSO_SPECFUN_HPP

#include <cstddef>

namespace fso::specfun {

/// Controls for the hypergeometric series and the routes that depend on it.
///
/// `cancel_guard` bounds how many digits an alternating series may lose
/// relative to a clean double-precision result: the series is rejected when
/// its estimated relative error exceeds cancel_guard * DBL_EPSILON.
/// `series_x_max` is the largest |x| for which parameter derivatives of the
/// incomplete gamma function are taken from the series identity; beyond it
/// they come from quadrature.
struct SeriesControl {
  std::size_t max_terms = 10000;
  double rel_tol = 1e-15;
  double cancel_guard = 1e8;
  double series_x_max = 30.0;

  /// Throws DomainError when an invariant is violated.
  void validate() const;
};

/// Result of a routine that may switch to a quadrature fallback.
struct Evaluation {
  double value = 0.0;
  bool quadrature_fallback = false;
};

// --- error function -------------------------------------------------------

double erfc(double x);

/// log(erfc(x)), finite for every finite x; uses the asymptotic expansion
/// of erfcx once erfc itself underflows.
double log_erfc(double x);

// --- complete gamma -------------------------------------------------------

/// Euler gamma for a > 0.
double gamma(double a);

/// log Gamma(a) for a > 0.
double log_gamma(double a);

/// psi(a) = Gamma'(a)/Gamma(a) for a > 0.
double digamma(double a);

// --- incomplete gamma -----------------------------------------------------
//
// The unregularized functions
//   Gamma(a, x) = int_x^inf t^(a-1) e^-t dt,  gamma(a, x) = int_0^x ...
// for a > 0, x >= 0. The log_ variants never under- or overflow and are what
// the BER code uses; the plain versions are exp() of them.

double gamma_upper(double a, double x);
double gamma_lower(double a, double x);
double log_gamma_upper(double a, double x);
double log_gamma_lower(double a, double x);

// --- 2F2 ------------------------------------------------------------------

/// Generalized hypergeometric 2F2(a1, a2; b1, b2; x) by direct summation of
/// its power series in extended working precision.
///
/// Throws DomainError if b1 or b2 is zero or a negative integer, and
/// PrecisionLossError when alternating-series cancellation (the ratio of
/// the largest partial sum to the result) costs more digits than
/// `ctl.cancel_guard` allows.
double hyp2f2(double a1, double a2, double b1, double b2, double x,
              const SeriesControl& ctl = {});

// --- parameter derivatives of the incomplete gamma functions ----------------

/// dGamma(a, x)/da for a > 0, x > 0.
///
/// For x <= ctl.series_x_max this is Gamma(a) psi(a) - dgamma(a, x)/da with
///   dgamma(a, x)/da = gamma(a, x) ln x - x^a / a^2 * 2F2(a, a; a+1, a+1; -x).
/// When the series is rejected, when the subtraction cancels beyond
/// `cancel_guard`, or when x > series_x_max, the value is
/// int_x^inf t^(a-1) ln(t) e^-t dt by adaptive quadrature and the fallback
/// is flagged.
Evaluation gamma_upper_da(double a, double x, const SeriesControl& ctl = {});

/// d ln gamma(a, x) / da for a > 0, x > 0, i.e. (dgamma(a,x)/da) / gamma(a,x).
///
/// Stays finite when gamma(a, x) itself underflows. Uses the same series
/// identity as gamma_upper_da, falling back to quadrature of whichever of
/// int_0^x or int_x^inf avoids cancellation. The int_x^inf quadrature is
/// skipped when a bound on it is below rounding of the result.
Evaluation dlog_gamma_lower_da(double a, double x, const SeriesControl& ctl = {});

}  // namespace fso::specfun

#endif  // FSO_SPECFUN_HPP
