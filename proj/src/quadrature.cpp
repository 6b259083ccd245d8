#include "fso/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

namespace fso::quad {

namespace {

// QUADPACK qk21 abscissae and weights. xgk[1], xgk[3], ... are the 10-point
// Gauss nodes; wg holds their Gauss weights.
constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};

constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077958109831074, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};

constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = std::numeric_limits<double>::min();

struct Panel {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

}  // namespace

QuadResult gauss_kronrod21(const Integrand& f, double a, double b) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double abs_half = std::abs(half);

  std::array<double, 10> fv1{};
  std::array<double, 10> fv2{};

  // The centre is a Kronrod-only node of the 21-point rule.
  const double fc = f(centre);
  double res_g = 0.0;
  double res_k = kWgk[10] * fc;
  double res_abs = std::abs(res_k);

  for (std::size_t j = 0; j < 5; ++j) {
    const std::size_t jtw = 2 * j + 1;
    const double dx = half * kXgk[jtw];
    const double f1 = f(centre - dx);
    const double f2 = f(centre + dx);
    fv1[jtw] = f1;
    fv2[jtw] = f2;
    res_g += kWg[j] * (f1 + f2);
    res_k += kWgk[jtw] * (f1 + f2);
    res_abs += kWgk[jtw] * (std::abs(f1) + std::abs(f2));
  }
  for (std::size_t j = 0; j < 5; ++j) {
    const std::size_t jtwm1 = 2 * j;
    const double dx = half * kXgk[jtwm1];
    const double f1 = f(centre - dx);
    const double f2 = f(centre + dx);
    fv1[jtwm1] = f1;
    fv2[jtwm1] = f2;
    res_k += kWgk[jtwm1] * (f1 + f2);
    res_abs += kWgk[jtwm1] * (std::abs(f1) + std::abs(f2));
  }

  const double res_kh = 0.5 * res_k;
  double res_asc = kWgk[10] * std::abs(fc - res_kh);
  for (std::size_t j = 0; j < 10; ++j) {
    res_asc += kWgk[j] * (std::abs(fv1[j] - res_kh) + std::abs(fv2[j] - res_kh));
  }

  QuadResult out;
  out.value = res_k * half;
  res_abs *= abs_half;
  res_asc *= abs_half;
  double err = std::abs((res_k - res_g) * half);
  if (res_asc != 0.0 && err != 0.0) {
    err = res_asc * std::min(1.0, std::pow(200.0 * err / res_asc, 1.5));
  }
  if (res_abs > kTiny / (50.0 * kEps)) {
    err = std::max(50.0 * kEps * res_abs, err);
  }
  out.error = err;
  out.subdivisions = 1;
  out.evaluations = 21;
  return out;
}

QuadResult integrate_adaptive(const Integrand& f, double a, double b, double abs_tol,
                              double rel_tol, std::size_t max_subdivisions) {
  const std::array<double, 2> points = {a, b};
  return integrate_adaptive(f, points, abs_tol, rel_tol, max_subdivisions);
}

QuadResult integrate_adaptive(const Integrand& f, std::span<const double> points, double abs_tol,
                              double rel_tol, std::size_t max_subdivisions) {
  std::size_t evaluations = 0;
  std::priority_queue<Panel> panels;
  double total = 0.0;
  double total_err = 0.0;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    if (!(points[i + 1] > points[i])) continue;
    const QuadResult r = gauss_kronrod21(f, points[i], points[i + 1]);
    evaluations += r.evaluations;
    total += r.value;
    total_err += r.error;
    panels.push({points[i], points[i + 1], r.value, r.error});
  }

  auto target = [&] { return std::max(abs_tol, rel_tol * std::abs(total)); };

  while (total_err > target() && panels.size() < max_subdivisions) {
    const Panel worst = panels.top();
    const double mid = 0.5 * (worst.a + worst.b);
    // Splitting further would produce panels narrower than the spacing of
    // representable numbers around the midpoint.
    if (std::abs(worst.b - worst.a) <= 1000.0 * kEps * std::max(std::abs(mid), kTiny)) {
      break;
    }
    panels.pop();
    const QuadResult left = gauss_kronrod21(f, worst.a, mid);
    const QuadResult right = gauss_kronrod21(f, mid, worst.b);
    evaluations += left.evaluations + right.evaluations;
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    panels.push({worst.a, mid, left.value, left.error});
    panels.push({mid, worst.b, right.value, right.error});
  }

  // Re-sum from scratch so the running updates do not accumulate rounding.
  // Summing in ascending order of interval start keeps the result
  // independent of heap layout.
  std::vector<Panel> all;
  all.reserve(panels.size());
  while (!panels.empty()) {
    all.push_back(panels.top());
    panels.pop();
  }
  std::sort(all.begin(), all.end(), [](const Panel& l, const Panel& r) { return l.a < r.a; });
  total = 0.0;
  total_err = 0.0;
  for (const Panel& p : all) {
    total += p.value;
    total_err += p.error;
  }

  QuadResult out;
  out.value = total;
  out.error = total_err;
  out.subdivisions = all.size();
  out.evaluations = evaluations;
  out.converged = total_err <= std::max(abs_tol, rel_tol * std::abs(total));
  return out;
}

QuadResult integrate_midpoint(const Integrand& f, double a, double b, std::size_t n) {
  const double h = (b - a) / static_cast<double>(n);
  double fine = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    fine += f(a + (static_cast<double>(i) + 0.5) * h);
  }
  fine *= h;

  QuadResult out;
  out.value = fine;
  out.subdivisions = n;
  out.evaluations = n;
  if (n >= 2) {
    const std::size_t m = n / 2;
    const double hc = (b - a) / static_cast<double>(m);
    double coarse = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      coarse += f(a + (static_cast<double>(i) + 0.5) * hc);
    }
    coarse *= hc;
    out.error = std::abs(fine - coarse) / 3.0;
    out.evaluations += m;
  } else {
    out.error = std::abs(fine);
  }
  return out;
}

}  // namespace fso::quad
