#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "translab/errors.hpp"
#include "translab/kernel.hpp"
#include "translab/quadrature.hpp"
#include "translab/specfun.hpp"

namespace translab {

struct TransmissionConstants {
  int n = 2;
  double A_s1 = 0, A_s2 = 0;
  Eigen::VectorXd M_s1, M_s2, nu1, nu2;
  double alpha0 = std::numeric_limits<double>::quiet_NaN();
  double M0 = std::numeric_limits<double>::quiet_NaN();
  bool compatible = false;
  bool nu2_degenerate = false;   // denominator vanished, nu2 forced to 0
  bool alpha0_near_one = false;  // secondary compatibility may be needed
};

namespace detail {

inline void check_sphere_dim(int n) {
  require(n >= 1, "sphere integrals: dimension must be >= 1");
  if (n > 3) throw DomainError("sphere integrals: only n <= 3 is supported");
}

// int_{R^{n-1}} F(y') (1+|y'|^2)^{-(n+2s)/2} dy' (optionally restricted to |y'| < R)
template <class F>
double chart_integral(const F& fn, int n, double s, const QuadratureConfig& cfg,
                      double R = std::numeric_limits<double>::infinity()) {
  check_sphere_dim(n);
  check_order(s);
  const double p = (n + 2 * s) / 2;
  if (n == 1) return fn(Point{0, 0, 0});
  if (n == 2) {
    const auto g = [&](double y) { return fn(Point{y, 0, 0}) * std::pow(1 + y * y, -p); };
    if (std::isinf(R)) return integrate_line(g, -R, R, cfg);
    return integrate_graded(g, -R, 0.0, cfg) + integrate_graded(g, 0.0, R, cfg);
  }
  // n == 3, polar chart
  const auto radial = [&](double th) {
    const double c = std::cos(th), sn = std::sin(th);
    const auto g = [&](double r) { return fn(Point{r * c, r * sn, 0}) * r * std::pow(1 + r * r, -p); };
    return std::isinf(R) ? integrate_to_infinity(g, 0.0, cfg) : integrate_graded(g, 0.0, R, cfg);
  };
  QuadratureConfig outer = cfg;
  outer.max_subdivisions = std::max(cfg.max_subdivisions, 200);
  double total = 0;
  for (int q = 0; q < 4; ++q) total += integrate_gk(radial, q * M_PI / 2, (q + 1) * M_PI / 2, outer);
  return total;
}

}  // namespace detail

// A_{s,i} = int a0(y',1) / (1+|y'|^2)^{(n+2s)/2} dy'
inline double spherical_average(const ChartFn& a0, int n, double s, const QuadratureConfig& cfg = {}) {
  return detail::chart_integral([&](const Point& y) { return a0(y); }, n, s, cfg);
}

// M_{s,i} = int a0(y',1) y' / (1+|y'|^2)^{(n+2s)/2} dy'
inline Eigen::VectorXd spherical_moment(const ChartFn& a0, int n, double s, const QuadratureConfig& cfg = {}) {
  detail::check_sphere_dim(n);
  Eigen::VectorXd m(n - 1);
  for (int i = 0; i + 1 < n; ++i)
    m[i] = detail::chart_integral([&](const Point& y) { return a0(y) * y[i]; }, n, s, cfg);
  return m;
}

// nu1 = (A e_n)' / <e_n, A e_n>
inline Eigen::VectorXd conormal_ratio(const Eigen::MatrixXd& A) {
  require(A.rows() == A.cols() && A.rows() >= 1, "conormal_ratio: A must be square");
  require((A - A.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, A.cwiseAbs().maxCoeff()),
          "conormal_ratio: A must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success) throw DomainError("conormal_ratio: A is not positive-definite");
  const int n = A.rows();
  return A.col(n - 1).head(n - 1) / A(n - 1, n - 1);
}

enum class Nu2Variant {
  Definition,    // numerator nu1 A_{s,1}/(2s) + M_{s,2} - 2 M_{s,1}
  Cancellation,  // numerator M_{s,2} - 2 M_{s,1} - nu1 A_{s,2}/(2s), kills I1/(2s-1) + I2/(2s)
};

struct Nu2Result {
  Eigen::VectorXd nu2;
  bool degenerate = false;
};

inline Nu2Result effective_conormal_ex(const TransmissionConstants& tc, double s,
                                       Nu2Variant variant = Nu2Variant::Definition) {
  check_order(s);
  const int m = tc.n - 1;
  Nu2Result r{Eigen::VectorXd::Zero(m), false};
  if (s <= 0.5) return r;
  const double den = 2 * tc.A_s1 - (2 * s - 1) / (2 * s) * tc.A_s2;
  if (std::abs(den) <= 1e-14 * std::max(1.0, std::abs(tc.A_s1) + std::abs(tc.A_s2))) {
    r.degenerate = true;
    return r;
  }
  if (variant == Nu2Variant::Definition)
    r.nu2 = (tc.nu1 * tc.A_s1 / (2 * s) + tc.M_s2 - 2 * tc.M_s1) / den;
  else
    r.nu2 = (tc.M_s2 - 2 * tc.M_s1 - tc.nu1 * tc.A_s2 / (2 * s)) / den;
  return r;
}

inline Eigen::VectorXd effective_conormal(const TransmissionConstants& tc, double s,
                                          Nu2Variant variant = Nu2Variant::Definition) {
  return effective_conormal_ex(tc, s, variant).nu2;
}

// left side of the alpha0 equation, drift term folded in when s = 1/2
inline double alpha0_equation(double alpha, double A_s1, double A_s2, double s, double drift_normal,
                              const QuadratureConfig& cfg = {}) {
  double v = 2 * (q_value(s, alpha, cfg) - 1 / (2 * s)) * A_s1 + A_s2 / (2 * s);
  if (s == 0.5) v += alpha * drift_normal;
  return v;
}

struct Alpha0Bracket {
  double lo, hi, f_lo, f_hi;
};

inline Alpha0Bracket alpha0_bracket(double A_s1, double A_s2, double s, double drift_normal, double tol,
                                    const QuadratureConfig& cfg = {}) {
  const double lo = std::max(2 * s - 1, 0.0) + tol;
  const double hi = 2 * s - tol;
  return {lo, hi, alpha0_equation(lo, A_s1, A_s2, s, drift_normal, cfg),
          alpha0_equation(hi, A_s1, A_s2, s, drift_normal, cfg)};
}

inline double solve_alpha0(const TransmissionConstants& tc, double s, double drift_normal = 0.0,
                           double tol = 1e-10, const QuadratureConfig& cfg = {}) {
  check_order(s);
  require(tc.A_s1 > 0 && tc.A_s2 > 0, "solve_alpha0: spherical averages must be positive");
  require(tol > 0 && tol < s, "solve_alpha0: bad tolerance");
  auto b = alpha0_bracket(tc.A_s1, tc.A_s2, s, drift_normal, tol, cfg);
  if (b.f_lo == 0) return b.lo;
  if (b.f_hi == 0) return b.hi;
  if ((b.f_lo > 0) == (b.f_hi > 0))
    throw NoRootError("solve_alpha0: no sign change on ((2s-1)_+, 2s); f(lo)=" + std::to_string(b.f_lo) +
                      " f(hi)=" + std::to_string(b.f_hi));
  double lo = b.lo, hi = b.hi;
  const bool neg_lo = b.f_lo < 0;
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = alpha0_equation(mid, tc.A_s1, tc.A_s2, s, drift_normal, cfg);
    if (fm == 0) return mid;
    if ((fm < 0) == neg_lo)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// constant-pair shortcut: q(s,alpha0) = (1 - nu/2)/(2s)
inline double solve_alpha0_simple(double s, double nu, double tol = 1e-10, const QuadratureConfig& cfg = {}) {
  check_order(s);
  require(nu > 0, "solve_alpha0_simple: nu must be positive");
  const double target = (1 - nu / 2) / (2 * s);
  double lo = std::max(2 * s - 1, 0.0) + tol, hi = 2 * s - tol;
  double flo = q_value(s, lo, cfg) - target, fhi = q_value(s, hi, cfg) - target;
  if ((flo > 0) == (fhi > 0)) throw NoRootError("solve_alpha0_simple: no sign change");
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = q_value(s, mid, cfg) - target;
    if ((fm > 0) == (flo > 0))
      lo = mid, flo = fm;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// M0 = -nu'/((2+a-2s)(1+a-2s)) A(n,s) int_0^inf t^a/(1+t)^{1+2s} dt; nu' defaults to nu
inline double transmission_constant_M0(double alpha0, double nu, int n, double s,
                                       const QuadratureConfig& cfg = {},
                                       double nu_prime = std::numeric_limits<double>::quiet_NaN()) {
  check_order(s);
  require(nu > 0, "transmission_constant_M0: nu must be positive");
  require(alpha0 > std::max(2 * s - 1, 0.0) && alpha0 < 2 * s,
          "transmission_constant_M0: alpha0 outside ((2s-1)_+, 2s)");
  const double w = std::isnan(nu_prime) ? nu : nu_prime;
  const double d = (2 + alpha0 - 2 * s) * (1 + alpha0 - 2 * s);
  if (d == 0) throw DomainError("transmission_constant_M0: 1 + alpha0 - 2s vanishes");
  return -w / d * a_ns(n, s, cfg) * beta_tail(alpha0, s, cfg);
}

// I1(R), I2(R) over the ball |y'| < R of the chart (R may be infinite)
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> truncated_moments(const TransmissionConstants& tc,
                                                                     const KernelSpec& k, double R, double s,
                                                                     const QuadratureConfig& cfg = {}) {
  require(R > 0, "truncated_moments: R must be positive");
  const int n = tc.n;
  const int m = n - 1;
  Eigen::VectorXd I1(m), I2(m);
  for (int i = 0; i < m; ++i) {
    I1[i] = detail::chart_integral(
        [&](const Point& y) {
          return 2 * k.chart1(y, n) * (-y[i] - tc.nu2[i]) + k.chart2(y, n) * (y[i] - tc.nu1[i]);
        },
        n, s, cfg, R);
    I2[i] = detail::chart_integral([&](const Point& y) { return k.chart2(y, n) * (tc.nu2[i] + tc.nu1[i]); },
                                   n, s, cfg, R);
  }
  return {I1, I2};
}

inline Eigen::VectorXd compatibility_residual(const TransmissionConstants& tc, double s) {
  return tc.nu2 * tc.A_s2 / (2 * s) - (2 * s - 1) / (2 * s) * tc.nu1 * tc.A_s2 + tc.M_s2;
}

inline bool is_compatible(const TransmissionConstants& tc, double s, double tol = 1e-10) {
  const Eigen::VectorXd r = compatibility_residual(tc, s);
  return r.size() == 0 || r.cwiseAbs().maxCoeff() < tol;
}

// everything at once for a frozen kernel and local matrix
inline TransmissionConstants compute_constants(const KernelSpec& k, const Eigen::MatrixXd& A, double s,
                                               double drift_normal = 0.0, const QuadratureConfig& cfg = {},
                                               Nu2Variant variant = Nu2Variant::Definition) {
  k.validate();
  check_order(s);
  TransmissionConstants tc;
  tc.n = A.rows();
  const int n = tc.n;
  detail::check_sphere_dim(n);
  const ChartFn c1 = [&](const Point& y) { return k.chart1(y, n); };
  const ChartFn c2 = [&](const Point& y) { return k.chart2(y, n); };
  if (k.mode == KernelMode::ConstantPair) {
    const double An = a_ns(n, s, cfg);
    tc.A_s1 = k.a1 * An;
    tc.A_s2 = k.nu * An;
    tc.M_s1 = Eigen::VectorXd::Zero(n - 1);
    tc.M_s2 = Eigen::VectorXd::Zero(n - 1);
  } else {
    tc.A_s1 = spherical_average(c1, n, s, cfg);
    tc.A_s2 = spherical_average(c2, n, s, cfg);
    tc.M_s1 = spherical_moment(c1, n, s, cfg);
    tc.M_s2 = spherical_moment(c2, n, s, cfg);
  }
  const double floor = a_ns(n, s, cfg) * k.lambda;
  if (tc.A_s1 < floor * (1 - 1e-8) || tc.A_s2 < floor * (1 - 1e-8))
    throw DomainError("compute_constants: spherical average below A(n,s) lambda");
  tc.nu1 = n > 1 ? conormal_ratio(A) : Eigen::VectorXd(0);
  auto r = effective_conormal_ex(tc, s, variant);
  tc.nu2 = r.nu2;
  tc.nu2_degenerate = r.degenerate;
  tc.alpha0 = solve_alpha0(tc, s, drift_normal, 1e-10, cfg);
  tc.alpha0_near_one = std::abs(tc.alpha0 - 1) < 1e-3;
  const double Ann = A(n - 1, n - 1);
  const double d = (2 + tc.alpha0 - 2 * s) * (1 + tc.alpha0 - 2 * s);
  const double w2 = k.mode == KernelMode::ConstantPair ? k.nu_left() * a_ns(n, s, cfg) : tc.A_s2;
  tc.M0 = -w2 / (Ann * d) * beta_tail(tc.alpha0, s, cfg);
  tc.compatible = is_compatible(tc, s);
  return tc;
}

}  // namespace translab
