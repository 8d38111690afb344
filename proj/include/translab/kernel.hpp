#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "translab/errors.hpp"

namespace translab {

using Point = std::array<double, 3>;

// Omega1 is the local side x_n < g(x'), Omega2 the nonlocal side
enum class Side { Omega1, Omega2, Gamma };

enum class KernelMode { ConstantPair, HomogeneousLimit, Decomposed };

enum KernelClass : unsigned {
  kClassL1 = 1u << 0,
  kClassL2 = 1u << 1,
  kClassL1Star = 1u << 2,
  kClassA = 1u << 3,
};

using DirectionFn = std::function<double(const Point& z)>;
using ChartFn = std::function<double(const Point& yprime)>;
using PairFn = std::function<double(const Point& x, const Point& z)>;

// Nonlocal weight. Index 1 is the Omega2 x Omega2 weight, index 2 the cross
// weight between Omega2 and Omega1. z is always (Omega2 point) - (other point).
struct KernelSpec {
  KernelMode mode = KernelMode::ConstantPair;
  double a1 = 1.0;
  double nu = 1.0;
  // weight seen by the Omega1 equation; NaN means equal to nu
  double nu_prime = std::numeric_limits<double>::quiet_NaN();
  double lambda = 0.0;
  double Lambda = 0.0;
  unsigned tags = kClassL1 | kClassL2 | kClassL1Star;
  DirectionFn h1, h2;
  PairFn s1, s2, anti1, anti2;
  std::function<double(double)> omega;

  static KernelSpec constant_pair(double nu, double a1 = 1.0) {
    KernelSpec k;
    k.a1 = a1;
    k.nu = nu;
    k.lambda = std::min(a1, nu);
    k.Lambda = std::max(a1, nu);
    return k;
  }

  static KernelSpec homogeneous(DirectionFn d1, DirectionFn d2, double lambda, double Lambda) {
    KernelSpec k;
    k.mode = KernelMode::HomogeneousLimit;
    k.h1 = std::move(d1);
    k.h2 = std::move(d2);
    k.lambda = lambda;
    k.Lambda = Lambda;
    return k;
  }

  // chart y' -> a(y',1), extended evenly to the lower hemisphere
  static DirectionFn from_chart(ChartFn c, int n) {
    return [c = std::move(c), n](const Point& z) {
      const double zn = z[n - 1];
      Point y{0, 0, 0};
      if (std::abs(zn) < 1e-300) {
        for (int i = 0; i + 1 < n; ++i) y[i] = z[i] * 1e150;
      } else {
        for (int i = 0; i + 1 < n; ++i) y[i] = z[i] / zn;
      }
      return c(y);
    };
  }

  double nu_left() const { return std::isnan(nu_prime) ? nu : nu_prime; }
  bool variational() const { return mode != KernelMode::ConstantPair || nu_left() == nu; }
  bool direction_only() const { return mode != KernelMode::Decomposed; }

  double w1(const Point& x, const Point& z) const {
    switch (mode) {
      case KernelMode::ConstantPair: return a1;
      case KernelMode::HomogeneousLimit: return h1(z);
      case KernelMode::Decomposed: return s1(x, z) + (anti1 ? anti1(x, z) : 0.0);
    }
    return 0.0;
  }
  double w2(const Point& x, const Point& z) const {
    switch (mode) {
      case KernelMode::ConstantPair: return nu;
      case KernelMode::HomogeneousLimit: return h2(z);
      case KernelMode::Decomposed: return s2(x, z) + (anti2 ? anti2(x, z) : 0.0);
    }
    return 0.0;
  }

  // homogeneous part evaluated in the chart (y',1)
  double chart1(const Point& yp, int n) const { return w1(Point{0, 0, 0}, lift(yp, n)); }
  double chart2(const Point& yp, int n) const { return w2(Point{0, 0, 0}, lift(yp, n)); }

  static Point lift(const Point& yp, int n) {
    Point z{0, 0, 0};
    for (int i = 0; i + 1 < n; ++i) z[i] = yp[i];
    z[n - 1] = 1.0;
    return z;
  }

  void validate() const {
    require(lambda > 0 && lambda <= Lambda, "kernel: need 0 < lambda <= Lambda");
    if (mode == KernelMode::ConstantPair) {
      require(a1 >= lambda && nu >= lambda, "kernel: constant-pair weights below lambda");
      require(a1 <= Lambda && nu <= Lambda, "kernel: constant-pair weights above Lambda");
      require(nu_left() >= 0, "kernel: nu_prime must be nonnegative");
    } else if (mode == KernelMode::HomogeneousLimit) {
      require(bool(h1) && bool(h2), "kernel: homogeneous mode needs both direction functions");
    } else {
      require(bool(s1) && bool(s2), "kernel: decomposed mode needs a_{s,1} and a_{s,2}");
    }
  }
};

}  // namespace translab
