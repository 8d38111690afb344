#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "translab/errors.hpp"

namespace translab {

struct QuadratureConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int max_subdivisions = 60;
  double grading_strength = 0.5;

  void validate() const {
    require(abs_tol >= 0 && rel_tol >= 0, "quadrature: negative tolerance");
    require(abs_tol + rel_tol > 0, "quadrature: abs_tol + rel_tol must be positive");
    require(max_subdivisions >= 1, "quadrature: max_subdivisions must be >= 1");
    require(grading_strength > 0 && grading_strength < 1,
            "quadrature: grading_strength must lie in (0,1)");
  }
};

namespace detail {

inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

// QUADPACK qk15 with its error heuristic
template <class F>
Segment gk15(const F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double resg = fc * kWg[3];
  double resk = fc * kWgk[7];
  double resabs = std::abs(resk);
  std::array<double, 7> f1{}, f2{};
  for (int j = 0; j < 7; ++j) {
    const double x = h * kXgk[j];
    f1[j] = f(c - x);
    f2[j] = f(c + x);
    resk += kWgk[j] * (f1[j] + f2[j]);
    resabs += kWgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
    if (j % 2 == 1) resg += kWg[j / 2] * (f1[j] + f2[j]);
  }
  const double reskh = 0.5 * resk;
  double resasc = kWgk[7] * std::abs(fc - reskh);
  for (int j = 0; j < 7; ++j)
    resasc += kWgk[j] * (std::abs(f1[j] - reskh) + std::abs(f2[j] - reskh));
  const double result = resk * h;
  resasc *= std::abs(h);
  resabs *= std::abs(h);
  double err = std::abs((resk - resg) * h);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  const double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50 * eps))
    err = std::max(50 * eps * resabs, err);
  return {a, b, result, err};
}

inline std::string gk_message(double a, double b, double total, double err) {
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "integrate_gk: tolerance not met within max_subdivisions on [%.6g, %.6g] (value %.6g, err %.3g)", a, b,
                total, err);
  return buf;
}

}  // namespace detail

// adaptive Gauss-Kronrod on a finite interval with a smooth-ish integrand
template <class F>
double integrate_gk(const F& f, double a, double b, const QuadratureConfig& cfg) {
  if (a == b) return 0.0;
  std::priority_queue<detail::Segment> heap;
  auto s = detail::gk15(f, a, b);
  if (!std::isfinite(s.value)) throw QuadratureError("integrate_gk: non-finite integrand");
  double total = s.value, err = s.error;
  heap.push(s);
  int pieces = 1;
  while (err > std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total))) {
    if (pieces >= cfg.max_subdivisions)
      throw QuadratureError(detail::gk_message(a, b, total, err));
    auto top = heap.top();
    heap.pop();
    const double m = 0.5 * (top.a + top.b);
    auto l = detail::gk15(f, top.a, m);
    auto r = detail::gk15(f, m, top.b);
    if (!std::isfinite(l.value) || !std::isfinite(r.value))
      throw QuadratureError("integrate_gk: non-finite integrand");
    total += l.value + r.value - top.value;
    err += l.error + r.error - top.error;
    heap.push(l);
    heap.push(r);
    ++pieces;
  }
  return total;
}

// int_0^H f(u) du for f possibly singular like u^gamma (gamma > -1) at u = 0.
// f is called with the exact offset u so callers can avoid cancellation.
// Geometric cells toward 0, closed by the power-law tail f(a) a / (gamma + 1).
template <class F>
double integrate_graded0(const F& f, double H, const QuadratureConfig& cfg,
                         double known_exponent = std::numeric_limits<double>::quiet_NaN()) {
  if (H <= 0) return 0.0;
  const double r = cfg.grading_strength;
  QuadratureConfig cell = cfg;
  cell.abs_tol = cfg.abs_tol / 16;
  double sum = 0.0;
  double prev_total = std::numeric_limits<double>::quiet_NaN();
  double hi = H;
  for (int k = 0; k < 400; ++k) {
    const double lo = hi * r;
    sum += integrate_gk(f, lo, hi, cell);
    hi = lo;
    const double fa = f(hi);
    double closure = 0.0;
    double gamma = known_exponent;
    if (std::isnan(gamma)) {
      const double fb = f(hi * r);
      if (fa != 0.0 && fb != 0.0 && (fa > 0) == (fb > 0))
        gamma = std::log(fb / fa) / std::log(r);
      else
        gamma = 0.0;
    }
    if (fa != 0.0) {
      if (gamma <= -1.0) {
        if (hi < H * 1e-12)
          throw DivergentIntegral("integrate_graded0: integrand not integrable at the endpoint");
        prev_total = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      closure = fa * hi / (gamma + 1.0);
    }
    const double total = sum + closure;
    if (k >= 2 && std::isfinite(prev_total) &&
        std::abs(total - prev_total) <= 0.1 * std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total)))
      return total;
    if (fa == 0.0 && k >= 2) return total;
    prev_total = total;
    if (hi < H * 1e-15 || hi < std::numeric_limits<double>::min() * 1e10) return total;
  }
  throw QuadratureError("integrate_graded0: endpoint closure did not settle");
}

// int_a^b f with grading toward both ends
template <class F>
double integrate_graded(const F& f, double a, double b, const QuadratureConfig& cfg) {
  if (a == b) return 0.0;
  if (a > b) return -integrate_graded(f, b, a, cfg);
  const double m = 0.5 * (a + b);
  const double left = integrate_graded0([&](double u) { return f(a + u); }, m - a, cfg);
  const double right = integrate_graded0([&](double u) { return f(b - u); }, b - m, cfg);
  return left + right;
}

// int_a^inf f for f decaying at least like r^{-1-eps}
template <class F>
double integrate_to_infinity(const F& f, double a, const QuadratureConfig& cfg) {
  if (a < 1.0) return integrate_graded(f, a, 1.0, cfg) + integrate_to_infinity(f, 1.0, cfg);
  const double X = std::max(1.0, std::abs(a));
  const double near = integrate_graded(f, a, a + X, cfg);
  const double b = a + X;
  // r = b / v, v in (0,1]
  const double far = integrate_graded0(
      [&](double v) {
        const double rr = b / v;
        return f(rr) * b / (v * v);
      },
      1.0, cfg);
  return near + far;
}

template <class F>
double integrate_line(const F& f, double lo, double hi, const QuadratureConfig& cfg) {
  const bool li = std::isinf(lo), hi_inf = std::isinf(hi);
  if (!li && !hi_inf) return integrate_graded(f, lo, hi, cfg);
  if (!li) return integrate_to_infinity(f, lo, cfg);
  if (!hi_inf) return integrate_to_infinity([&](double y) { return f(-y); }, -hi, cfg);
  return integrate_to_infinity(f, 0.0, cfg) +
         integrate_to_infinity([&](double y) { return f(-y); }, 0.0, cfg);
}

// Integrates f over [lo,hi] (ends may be infinite) split at breakpoints.
template <class F>
double integrate_piecewise(const F& f, double lo, double hi, std::span<const double> breaks,
                           const QuadratureConfig& cfg) {
  std::vector<double> pts;
  pts.push_back(lo);
  for (double b : breaks)
    if (b > lo && b < hi) pts.push_back(b);
  pts.push_back(hi);
  std::sort(pts.begin() + 1, pts.end() - 1);
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) total += integrate_line(f, pts[i], pts[i + 1], cfg);
  return total;
}

// PV int f(r) |r - x|^{-order} dr over [lo,hi]. Near x the symmetric pair
// f(x+t) + f(x-t) is integrated on graded cells down to t_min and the rest
// [0,t_min] is closed with the leading even Taylor term (~ t^{2-order}).
// value_scale is the size of the terms whose difference forms f, if larger than f.
template <class F>
double pv_line_integral(const F& f, double x, double lo, double hi, double order,
                        const QuadratureConfig& cfg, std::span<const double> breaks = {},
                        double value_scale = 0.0) {
  cfg.validate();
  require(lo < x && x < hi, "pv_line_integral: singularity must lie inside the interval");
  require(order > 0 && order < 3, "pv_line_integral: kernel order must lie in (0,3)");
  double h = std::min(x - lo, hi - x);
  for (double b : breaks)
    if (b != x) h = std::min(h, std::abs(b - x));
  if (std::isinf(h)) h = std::max(1.0, std::abs(x));
  h = std::min(h, std::max(1.0, std::abs(x)));
  h *= 0.5;

  const auto pair = [&](double t) { return (f(x + t) + f(x - t)) * std::pow(t, -order); };
  const double t_min = h * 1e-3;
  QuadratureConfig cell = cfg;
  cell.abs_tol = cfg.abs_tol / 16;
  double inner = 0.0;
  for (double hi_c = h; hi_c > t_min * 1.0000001;) {
    const double lo_c = std::max(hi_c * cfg.grading_strength, t_min);
    // the pair sum cancels to O(t^2), so rounding in f sets a floor on the cell error
    const double mag = std::abs(f(x + lo_c)) + std::abs(f(x - lo_c)) + 4 * value_scale;
    QuadratureConfig c = cell;
    c.abs_tol = std::max(cell.abs_tol, 64 * std::numeric_limits<double>::epsilon() * mag *
                                           std::pow(lo_c, -order) * (hi_c - lo_c));
    inner += integrate_gk(pair, lo_c, hi_c, c);
    hi_c = lo_c;
  }
  // G(t) = f(x+t) + f(x-t) ~ c2 t^2 + c4 t^4
  const double g1 = f(x + t_min) + f(x - t_min);
  const double g2 = f(x + 2 * t_min) + f(x - 2 * t_min);
  const double c4 = (g2 - 4 * g1) / 12.0;
  const double c2 = g1 - c4;
  inner += std::pow(t_min, 1.0 - order) * (c2 / (3.0 - order) + c4 / (5.0 - order));

  const auto kern = [&](double r) { return f(r) * std::pow(std::abs(r - x), -order); };
  std::vector<double> bl, br;
  for (double b : breaks) {
    if (b < x - h) bl.push_back(b);
    if (b > x + h) br.push_back(b);
  }
  const double outer = integrate_piecewise(kern, lo, x - h, bl, cfg) +
                       integrate_piecewise(kern, x + h, hi, br, cfg);
  return inner + outer;
}

// Gauss-Legendre rule on [-1,1]
struct GaussRule {
  std::vector<double> x, w;
};

namespace detail {
inline GaussRule make_gauss(int n) {
  GaussRule g;
  g.x.resize(n);
  g.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1, p1 = z;
      dp = n * (z * p1 - p0) / (z * z - 1);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    double p0 = 1, p1 = z;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (z * p1 - p0) / (z * z - 1);
    g.x[i] = -z;
    g.x[n - 1 - i] = z;
    g.w[i] = g.w[n - 1 - i] = 2.0 / ((1 - z * z) * dp * dp);
  }
  if (n % 2 == 1) g.x[n / 2] = 0.0;
  return g;
}
}  // namespace detail

inline const GaussRule& gauss_legendre(int n) {
  static const std::vector<GaussRule> rules = [] {
    std::vector<GaussRule> r(65);
    r[1] = {{0.0}, {2.0}};
    for (int k = 2; k <= 64; ++k) r[k] = detail::make_gauss(k);
    return r;
  }();
  require(n >= 1 && n <= 64, "gauss_legendre: order must be in [1,64]");
  return rules[n];
}

}  // namespace translab
