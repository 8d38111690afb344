#pragma once

#include <cmath>
#include <span>

#include "translab/errors.hpp"
#include "translab/quadrature.hpp"

namespace translab {

struct ExponentPair {
  double s = 0.5;
  double alpha = 0.5;

  void validate() const {
    require(s > 0 && s < 1, "order s must lie in (0,1)");
    require(alpha > 0 && alpha < 2 * s, "exponent alpha must lie in (0,2s)");
  }
};

inline void check_order(double s) { require(s > 0 && s < 1, "order s must lie in (0,1)"); }

// one-sided power 1_{t>=0} t^alpha
inline double rho(double alpha, double t) { return t > 0 ? std::pow(t, alpha) : 0.0; }

namespace detail {

// q for 0 < a < 2s + 1, a != 2s. On [0,1/2] the singular part t^b - t^{2s-1} + p t^{b+1}
// (b = 2s-1-a, p = 1+2s) is integrated in closed form; the closed forms are the analytic
// continuation when b <= -1.
inline double q_core(double s, double a, const QuadratureConfig& cfg) {
  const double b = 2 * s - 1 - a;
  const double p = 1 + 2 * s;
  const auto near0 = [&](double t) {
    const double lt = std::log(t);
    const double wm1 = std::expm1(-p * std::log1p(-t));
    const double sing = std::exp(b * lt) - std::exp((2 * s - 1) * lt);
    return std::expm1(a * lt) * (1 + wm1) + sing * wm1 - p * std::exp((b + 1) * lt);
  };
  const auto near1 = [&](double u) {
    const double lt = std::log1p(-u);
    return std::expm1(a * lt) * (-std::expm1(b * lt)) / std::pow(u, p);
  };
  const double closed = std::pow(0.5, b + 1) / (b + 1) - std::pow(0.5, 2 * s) / (2 * s) +
                        p * std::pow(0.5, b + 2) / (b + 2);
  const double I = integrate_graded0(near0, 0.5, cfg) + closed + integrate_graded0(near1, 0.5, cfg, 1 - 2 * s);
  return 1.0 / (2 * s) - I;
}

}  // namespace detail

// q(s,a) = 1/(2s) - int_0^1 (t^a - 1)(1 - t^{2s-1-a}) / (1-t)^{1+2s} dt
inline double q_value(const ExponentPair& p, const QuadratureConfig& cfg = {}) {
  p.validate();
  cfg.validate();
  return detail::q_core(p.s, p.alpha, cfg);
}

// Same symbol continued analytically to 0 < alpha < 2s+1 (pole at alpha = 2s).
inline double q_value_extended(double s, double alpha, const QuadratureConfig& cfg = {}) {
  check_order(s);
  cfg.validate();
  require(alpha > 0 && alpha < 2 * s + 1, "q_value_extended: alpha must lie in (0,2s+1)");
  if (std::abs(alpha - 2 * s) < 1e-12) throw DivergentIntegral("q_value_extended: pole at alpha = 2s");
  return detail::q_core(s, alpha, cfg);
}

inline double q_value(double s, double alpha, const QuadratureConfig& cfg = {}) {
  return q_value(ExponentPair{s, alpha}, cfg);
}

// |S^{m}| surface measure of the unit sphere in R^{m+1}
inline double sphere_measure(int m) {
  return 2.0 * std::pow(M_PI, (m + 1) / 2.0) / std::tgamma((m + 1) / 2.0);
}

// A(n,s) = int_{R^{n-1}} (1+|y|^2)^{-(n+2s)/2} dy by its radial reduction
// |S^{n-2}| int_0^{pi/2} sin^{n-2} cos^{2s}
inline double a_ns(int n, double s, const QuadratureConfig& cfg = {}) {
  require(n >= 1, "a_ns: dimension must be >= 1");
  check_order(s);
  if (n == 1) return 1.0;
  const double m = n - 2;
  const double quarter = M_PI / 4;
  const auto lower = [&](double th) { return std::pow(std::sin(th), m) * std::pow(std::cos(th), 2 * s); };
  // theta = pi/2 - u
  const auto upper = [&](double u) { return std::pow(std::cos(u), m) * std::pow(std::sin(u), 2 * s); };
  const double I = integrate_graded(lower, 0.0, quarter, cfg) +
                   integrate_graded0(upper, quarter, cfg, 2 * s);
  return sphere_measure(n - 2) * I;
}

inline double a_ns_closed(int n, double s) {
  require(n >= 1, "a_ns: dimension must be >= 1");
  check_order(s);
  return std::pow(M_PI, (n - 1) / 2.0) * std::exp(std::lgamma(s + 0.5) - std::lgamma((n + 2 * s) / 2.0));
}

// int_0^inf t^a (1+t)^{-1-2s} dt; with t = u/(1-u) this is the Beta integral
// int_0^1 u^a (1-u)^{2s-a-1} du
inline double beta_tail(double alpha, double s, const QuadratureConfig& cfg = {}) {
  check_order(s);
  cfg.validate();
  if (alpha >= 2 * s || alpha <= -1)
    throw DivergentIntegral("beta_tail: requires -1 < alpha < 2s");
  const double c = 2 * s - alpha - 1;
  const auto left = [&](double u) { return std::pow(u, alpha) * std::exp(c * std::log1p(-u)); };
  const auto right = [&](double v) { return std::exp(alpha * std::log1p(-v)) * std::pow(v, c); };
  return integrate_graded0(left, 0.5, cfg, alpha) + integrate_graded0(right, 0.5, cfg, c);
}

inline double beta_function(double a, double b) {
  return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

}  // namespace translab
