#ifndef FSO_QUADRATURE_HPP
#define FSO_QUADRATURE_HPP

#include <cstddef>
#include <functional>
#include <span>

namespace fso::quad {

using Integrand = std::function<double(double)>;

struct QuadResult {
  double value = 0.0;
  double error = 0.0;            // estimated absolute error
  std::size_t subdivisions = 0;  // panels in the final partition
  std::size_t evaluations = 0;
  bool converged = true;
};

/// One 21-point Gauss-Kronrod panel on [a, b]. The error is the QUADPACK
/// estimate built from the embedded 10-point Gauss rule.
QuadResult gauss_kronrod21(const Integrand& f, double a, double b);

/// Globally adaptive bisection with the 21-point Gauss-Kronrod rule.
///
/// The panel with the largest error estimate is split until the summed error
/// falls below max(abs_tol, rel_tol * |I|), the panel budget is exhausted, or
/// no panel can be split further in floating point. `converged` reports
/// which. Endpoints are never evaluated, so integrable endpoint
/// singularities are allowed.
QuadResult integrate_adaptive(const Integrand& f, double a, double b, double abs_tol,
                              double rel_tol, std::size_t max_subdivisions);

/// As above, but starting from the partition given by `points` (ascending,
/// endpoints included). Use this when the location of a sharp feature is
/// known in advance and might otherwise fall between the first nodes.
QuadResult integrate_adaptive(const Integrand& f, std::span<const double> points, double abs_tol,
                              double rel_tol, std::size_t max_subdivisions);

/// Composite midpoint rule with n equal panels. The error estimate is
/// |M(n) - M(n/2)| / 3, which assumes the h^2 behaviour of a smooth integrand.
QuadResult integrate_midpoint(const Integrand& f, double a, double b, std::size_t n);

}  // namespace fso::quad

#endif  // FSO_QUADRATURE_HPP
