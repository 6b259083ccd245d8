#ifndef FSO_OPTIMIZER_HPP
#define FSO_OPTIMIZER_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fso/ber_core.hpp"
#include "fso/link_model.hpp"

namespace fso::opt {

enum class Method { closed, quadrature };

std::string_view to_string(Method m);

/// BER and dBER/dz at a point, dispatched on Method. The quadrature path uses
/// `quad` (adaptive or fixed-grid); the closed path uses `series`.
class Evaluator {
 public:
  explicit Evaluator(Method method, ber::QuadratureSpec quad = {},
                     specfun::SeriesControl series = {});

  ber::BerResult ber(double v, double z) const;
  double dber_dz(double v, double z) const;

  Method method() const { return method_; }
  const ber::QuadratureSpec& quadrature() const { return quad_; }

 private:
  Method method_;
  ber::QuadratureSpec quad_;
  specfun::SeriesControl series_;
};

struct Bracket {
  double lo;
  double hi;
};

struct StationaryPoint {
  Bracket bracket;  // scan cell that contained the sign change
  double z;
  double log10_ber;
  bool minimum;     // passed the +/- delta check
};

// --- minimum BER at fixed power ----------------------------------------------

struct Model2Options {
  Bracket z_bracket{link::kZMin, link::kZMax};
  Method method = Method::closed;
  /// Stop once |dP/dz| < tol * scale, scale = max |dP/dz| at the bracket ends.
  double tol = 1e-10;
  std::size_t scan_points = 64;
  ber::QuadratureSpec quad{};
  specfun::SeriesControl series{};
};

struct Model2Solution {
  double v = 0.0;
  double z_star = 0.0;
  double ber_min = 0.0;
  double log10_ber_min = 0.0;
  double derivative_residual = 0.0;  // |dP/dz| at z_star
  double derivative_scale = 0.0;
  Bracket bracket{};                 // scan cell refined to z_star
  Method method_tag = Method::closed;
  std::vector<StationaryPoint> others;  // further sign changes found by the scan
};

/// Minimizes P_e(c2, z) over z.
///
/// Scans a log-spaced grid for sign changes of dP/dz, refines each by a
/// bracketed bisection/secant root finder, and checks local minimality with
/// P(z*(1 +/- 1e-3)) >= P(z*). When several minima exist the one with the
/// smallest BER is returned and the rest are listed in `others`.
/// Throws SolverError when there is no sign change in the bracket or when no
/// stationary point is a minimum.
Model2Solution solve_model2(double c2, const Model2Options& opts = {});

// --- minimum power at fixed BER ----------------------------------------------

struct Model1Options {
  Bracket z_bracket{link::kZMin, link::kZMax};
  Bracket v_bracket{1e-3, 1e6};
  Method method = Method::closed;
  double tol = 1e-10;             // stationarity, relative to the bracket-end scale
  double constraint_tol = 1e-8;   // |P - c1| <= constraint_tol * c1
  std::size_t scan_points = 64;
  ber::QuadratureSpec quad{};
  specfun::SeriesControl series{};
};

struct Model1Solution {
  double target_ber = 0.0;
  double v_star = 0.0;
  double z_star = 0.0;
  double constraint_residual = 0.0;  // |P(v*, z*) - c1|
  double derivative_residual = 0.0;  // |dP/dz (v*, z*)|
  double derivative_scale = 0.0;
  std::optional<double> lambda_opt;  // [m], when a LinkBudget is supplied
  std::optional<double> pt_min;      // [W]
  std::vector<std::string> warnings;
};

/// For fixed z, v(z) solves P(v, z) = c1 (P is strictly decreasing in v).
/// Returns v(z); throws SolverError when c1 is not reachable for v in the
/// bracket after geometric expansion up to 1e12.
double v_for_target(double c1, double z, const Evaluator& eval, Bracket v_bracket);

/// Minimizes v subject to P(v, z) = c1.
///
/// v(z) is minimized by a log-spaced scan followed by golden-section search;
/// the minimizer is then polished on dP/dz(v(z), z) = 0, which is equivalent
/// to dv/dz = 0. z values where c1 is unreachable are treated as v = +inf;
/// SolverError is raised only when no scanned z is feasible. Several local
/// minima of v(z) produce a warning and the best is returned.
Model1Solution solve_model1(double c1, const Model1Options& opts = {},
                            const std::optional<link::LinkBudget>& budget = std::nullopt);

// --- sweeps ------------------------------------------------------------------

enum class SweepMode { exact, asymptotic };

std::string_view to_string(SweepMode m);

struct SweepRow {
  double v = 0.0;
  SweepMode mode = SweepMode::exact;
  double z_star = 0.0;
  double log10_ber = 0.0;
  double deriv_residual = 0.0;
  std::string error;  // empty on success; the numeric fields are NaN otherwise
};

struct SweepTable {
  std::vector<SweepRow> rows;

  /// CSV with header `v,mode,z_star,log10_ber,deriv_residual`, numbers in
  /// %.17g, final row newline-terminated.
  std::string to_csv() const;
};

/// Runs solve_model2 for every v in every requested mode. Exact rows use the
/// closed forms; asymptotic rows use `asymptotic_quad` (normally fixed-grid).
/// Rows are grouped by mode (exact first) and ascending in v. A failed solve
/// produces a row with `error` set instead of aborting the sweep.
SweepTable sweep(std::span<const double> v_values, std::span<const SweepMode> modes,
                 const ber::QuadratureSpec& asymptotic_quad,
                 const Model2Options& base = {});

/// n log-spaced values from lo to hi inclusive.
std::vector<double> log_space(double lo, double hi, std::size_t n);

// --- exact-versus-coarse comparison --------------------------------------------

struct ResolutionRow {
  std::size_t fixed_n;
  double z_star;
  double log10_ber;
  double gap;  // log10_ber(exact) - log10_ber(this row)
};

struct ResolutionStudy {
  double v;
  Model2Solution exact;
  double upper_form_log10_ber;  // upper_incomplete closed form at the exact z*
  double upper_form_value;
  std::vector<ResolutionRow> rows;
  bool gap_shrinks_monotonically;
};

/// Solves model 2 at `v` exactly and with fixed-grid quadrature at each
/// panel count, reporting how the coarse optimum approaches the exact one.
ResolutionStudy resolution_study(double v, std::span<const std::size_t> fixed_ns);

}  // namespace fso::opt

#endif  // FSO_OPTIMIZER_HPP
