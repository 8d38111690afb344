#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "translab/coeffs.hpp"
#include "translab/errors.hpp"
#include "translab/kernel.hpp"
#include "translab/quadrature.hpp"
#include "translab/specfun.hpp"

namespace translab {

// Tabulated function of x_n. Inside the node range it is a C^1 cubic Hermite
// interpolant with slopes from centered differences, done separately on each
// side of 0 when 0 is a node (the cusp at the interface is not smoothed).
// Outside the range the tails are used.
struct GridFunction1D {
  std::vector<double> nodes;
  std::vector<double> values;
  std::function<double(double)> left_tail;
  std::function<double(double)> right_tail;
  double tail_growth = 0.0;
  std::vector<double> slopes;

  GridFunction1D() = default;
  GridFunction1D(std::vector<double> x, std::vector<double> v, std::function<double(double)> lt,
                 std::function<double(double)> rt, double growth = 0.0)
      : nodes(std::move(x)), values(std::move(v)), left_tail(std::move(lt)), right_tail(std::move(rt)),
        tail_growth(growth) {
    validate();
    build_slopes();
  }

  void validate() const {
    require(nodes.size() >= 3, "GridFunction1D: need at least 3 nodes");
    require(nodes.size() == values.size(), "GridFunction1D: nodes/values size mismatch");
    for (std::size_t i = 1; i < nodes.size(); ++i)
      require(nodes[i] > nodes[i - 1], "GridFunction1D: nodes must be strictly increasing");
    require(bool(left_tail) && bool(right_tail), "GridFunction1D: tails are required");
  }

  void build_slopes() {
    const std::size_t m = nodes.size();
    slopes.assign(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const bool l = i > 0 && nodes[i - 1] != 0.0;
      const bool r = i + 1 < m && nodes[i + 1] != 0.0;
      if (l && r) {
        const double h0 = nodes[i] - nodes[i - 1], h1 = nodes[i + 1] - nodes[i];
        const double d0 = (values[i] - values[i - 1]) / h0, d1 = (values[i + 1] - values[i]) / h1;
        slopes[i] = (h1 * d0 + h0 * d1) / (h0 + h1);
      } else if (r) {
        slopes[i] = (values[i + 1] - values[i]) / (nodes[i + 1] - nodes[i]);
      } else if (l) {
        slopes[i] = (values[i] - values[i - 1]) / (nodes[i] - nodes[i - 1]);
      } else if (i + 1 < m) {
        slopes[i] = (values[i + 1] - values[i]) / (nodes[i + 1] - nodes[i]);
      }
    }
  }

  double operator()(double x) const {
    if (x < nodes.front()) return left_tail(x);
    if (x > nodes.back()) return right_tail(x);
    auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
    std::size_t i = it == nodes.end() ? nodes.size() - 2 : std::size_t(it - nodes.begin()) - 1;
    const double h = nodes[i + 1] - nodes[i];
    const double t = (x - nodes[i]) / h;
    const double y0 = values[i], y1 = values[i + 1];
    double m0 = slopes[i], m1 = slopes[i + 1];
    // a cusp node at 0 gets the secant of the adjacent cell
    const double sec = (y1 - y0) / h;
    if (nodes[i] == 0.0) m0 = sec;
    if (nodes[i + 1] == 0.0) m1 = sec;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * m0 + (-2 * t3 + 3 * t2) * y1 +
           (t3 - t2) * h * m1;
  }

  std::vector<double> breakpoints() const { return nodes; }
};

// PV int_R (rho_a(x) - rho_a(r)) |x-r|^{-1-2s} dr times A(n,s)
inline double homogeneous_action(double alpha, double s, double x_n, int n, const QuadratureConfig& cfg = {}) {
  check_order(s);
  require(alpha > 0 && alpha < 2 * s, "homogeneous_action: alpha must lie in (0,2s)");
  require(x_n > 0, "homogeneous_action: x_n must be positive");
  const double ux = std::pow(x_n, alpha);
  const auto f = [&](double r) { return ux - rho(alpha, r); };
  const double br[] = {0.0};
  return a_ns(n, s, cfg) * pv_line_integral(f, x_n, -std::numeric_limits<double>::infinity(),
                                            std::numeric_limits<double>::infinity(), 1 + 2 * s, cfg, br, ux);
}

// int_{y_n<0} |y_n|^beta |x-y|^{-n-2s} dy = A(n,s) x_n^{beta-2s} beta_tail(beta,s)
inline double halfspace_source(double beta, double s, double x_n, int n, const QuadratureConfig& cfg = {}) {
  check_order(s);
  require(x_n > 0, "halfspace_source: x_n must be positive");
  if (beta <= -1 || beta >= 2 * s) throw DivergentIntegral("halfspace_source: requires -1 < beta < 2s");
  return a_ns(n, s, cfg) * std::pow(x_n, beta - 2 * s) * beta_tail(beta, s, cfg);
}

namespace detail {

inline std::vector<double> side_breaks(std::span<const double> breaks, double lo, double hi) {
  std::vector<double> out;
  for (double b : breaks)
    if (b > lo && b < hi) out.push_back(b);
  return out;
}

}  // namespace detail

// Omega2 operator of the 1D-reduced problem at x > 0:
// 2 A_{s,1} PV int_0^inf (u(x)-u(r)) k dr + A_{s,2} int_{-inf}^0 (u(x)-u(r)) k dr
// which is the same as 2 A1 int_R - (2 A1 - A2) int_{Omega1}.
template <class U>
double apply_OR_reduced(const U& u, double A_s1, double A_s2, double s, double x, const QuadratureConfig& cfg,
                        std::span<const double> breaks = {}) {
  check_order(s);
  if (x == 0) throw DomainError("apply_OR: evaluation point on the interface");
  require(x > 0, "apply_OR: evaluation point must lie in Omega2 (x_n > 0)");
  const double p = 1 + 2 * s;
  const double ux = u(x);
  const auto diff = [&](double r) { return ux - u(r); };
  const double inf = std::numeric_limits<double>::infinity();
  const auto bp = detail::side_breaks(breaks, 0.0, inf);
  const double pv = pv_line_integral(diff, x, 0.0, inf, p, cfg, bp, std::abs(ux));
  const auto bm = detail::side_breaks(breaks, -inf, 0.0);
  const double cross = integrate_piecewise([&](double r) { return diff(r) * std::pow(x - r, -p); }, -inf, 0.0,
                                           bm, cfg);
  return 2 * A_s1 * pv + A_s2 * cross;
}

// Omega1 nonlocal source A_{s,2} int_0^inf (u(x)-u(r)) |x-r|^{-1-2s} dr at x < 0
template <class U>
double apply_OL_reduced(const U& u, double A_s2, double s, double x, const QuadratureConfig& cfg,
                        std::span<const double> breaks = {}) {
  check_order(s);
  if (x == 0) throw DomainError("apply_OL_nonlocal: evaluation point on the interface");
  require(x < 0, "apply_OL_nonlocal: evaluation point must lie in Omega1 (x_n < 0)");
  const double p = 1 + 2 * s;
  const double ux = u(x);
  const double inf = std::numeric_limits<double>::infinity();
  const auto bp = detail::side_breaks(breaks, 0.0, inf);
  return A_s2 * integrate_piecewise([&](double r) { return (ux - u(r)) * std::pow(r - x, -p); }, 0.0, inf, bp,
                                    cfg);
}

inline std::pair<double, double> reduced_weights(const KernelSpec& k, int n, double s, const QuadratureConfig& cfg) {
  if (k.mode == KernelMode::ConstantPair) {
    const double An = a_ns(n, s, cfg);
    return {k.a1 * An, k.nu * An};
  }
  const ChartFn c1 = [&](const Point& y) { return k.chart1(y, n); };
  const ChartFn c2 = [&](const Point& y) { return k.chart2(y, n); };
  return {spherical_average(c1, n, s, cfg), spherical_average(c2, n, s, cfg)};
}

// nu overrides the cross weight of a constant-pair kernel
inline double apply_OR(const GridFunction1D& u, const KernelSpec& kernel, double s, double nu, double x, int n = 1,
                       const QuadratureConfig& cfg = {}) {
  KernelSpec k = kernel;
  if (k.mode == KernelMode::ConstantPair) k.nu = nu;
  const auto [A1, A2] = reduced_weights(k, n, s, cfg);
  const auto b = u.breakpoints();
  return apply_OR_reduced(u, A1, A2, s, x, cfg, b);
}

inline double apply_OL_nonlocal(const GridFunction1D& u, double s, double nu, double x, int n = 1,
                                const QuadratureConfig& cfg = {}) {
  const auto b = u.breakpoints();
  return apply_OL_reduced(u, nu * a_ns(n, s, cfg), s, x, cfg, b);
}

}  // namespace translab
