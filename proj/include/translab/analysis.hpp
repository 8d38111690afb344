#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "translab/errors.hpp"
#include "translab/mesh.hpp"

namespace translab {

struct Sample {
  double t = 0;
  double value = 0;
};

struct ExponentFit {
  double exponent = 0;
  double rms = 0;
};

// least-squares slope of log|value| against log t over the samples inside the window
inline ExponentFit fit_exponent(const std::vector<Sample>& samples, std::pair<double, double> window) {
  require(window.first > 0 && window.first < window.second, "fit_exponent: window must satisfy 0 < t_min < t_max");
  std::vector<double> X, Y;
  int sign = 0;
  for (const auto& p : samples) {
    if (p.t < window.first || p.t > window.second) continue;
    if (p.value == 0) throw FitError("fit_exponent: zero value in the window");
    const int sg = p.value > 0 ? 1 : -1;
    if (sign != 0 && sg != sign) throw FitError("fit_exponent: values change sign in the window");
    sign = sg;
    X.push_back(std::log(p.t));
    Y.push_back(std::log(std::abs(p.value)));
  }
  if (X.size() < 4) throw FitError("fit_exponent: fewer than 4 samples in the window");
  const int m = int(X.size());
  double mx = 0, my = 0;
  for (int i = 0; i < m; ++i) mx += X[i] / m, my += Y[i] / m;
  double sxx = 0, sxy = 0;
  for (int i = 0; i < m; ++i) sxx += (X[i] - mx) * (X[i] - mx), sxy += (X[i] - mx) * (Y[i] - my);
  if (!(sxx > 0)) throw FitError("fit_exponent: samples share one abscissa");
  ExponentFit f;
  f.exponent = sxy / sxx;
  double r2 = 0;
  for (int i = 0; i < m; ++i) {
    const double r = Y[i] - (my + f.exponent * (X[i] - mx));
    r2 += r * r;
  }
  f.rms = std::sqrt(r2 / m);
  return f;
}

// t_k geometric in [t_min, t_max], with value u(x', g + sign t) - u(x', g)
template <class U>
std::vector<Sample> trace_samples(const U& u, double x_prime, double g_value, int n, int sign,
                                  std::pair<double, double> window, int count = 16) {
  require(count >= 2, "trace_samples: need at least 2 samples");
  const auto at = [&](double xn) {
    return n == 1 ? Point{xn, 0, 0} : Point{x_prime, xn, 0};
  };
  const double u0 = u(at(g_value));
  std::vector<Sample> out;
  for (int k = 0; k < count; ++k) {
    const double t = window.first * std::pow(window.second / window.first, double(k) / (count - 1));
    out.push_back({t, u(at(g_value + sign * t)) - u0});
  }
  return out;
}

// Coefficient c0 of (u(0) - u(sign t)) / t^beta = c0 + c1 t^gamma + ..., from a
// least-squares fit over geometric samples in the window (Richardson in the window).
template <class U>
double one_sided_coefficient(const U& u, double x_prime, double g_value, int n, int sign, double beta, double gamma,
                             std::pair<double, double> window, int count = 16) {
  const auto smp = trace_samples(u, x_prime, g_value, n, sign, window, count);
  Eigen::MatrixXd M(count, 2);
  Eigen::VectorXd y(count);
  for (int k = 0; k < count; ++k) {
    M(k, 0) = 1;
    M(k, 1) = std::pow(smp[k].t, gamma);
    y[k] = -smp[k].value / std::pow(smp[k].t, beta);
  }
  const Eigen::Vector2d c = M.colPivHouseholderQr().solve(y);
  return c[0];
}

// Ratio of the Omega1 coefficient (exponent alpha0 + 2 - 2s) to the Omega2 one (exponent alpha0)
template <class U>
double transmission_ratio(const U& u, double x_prime, double g_value, int n, double alpha0, double s,
                          std::pair<double, double> window, double noise_floor = 1e-12) {
  require(window.first > 0 && window.first < window.second, "transmission_ratio: bad window");
  const double gamma = 2 - 2 * s;
  const double cr = one_sided_coefficient(u, x_prime, g_value, n, +1, alpha0, gamma, window);
  const double cl = one_sided_coefficient(u, x_prime, g_value, n, -1, alpha0 + gamma, gamma, window);
  if (std::abs(cr) < noise_floor && std::abs(cl) < noise_floor)
    throw FitError("transmission_ratio: both one-sided limits are below the noise floor");
  if (std::abs(cr) < noise_floor) throw FitError("transmission_ratio: the Omega2 limit vanishes");
  return cl / cr;
}

struct OscillationDecay {
  std::vector<double> radii;
  std::vector<double> oscillation;
  double factor = 0;  // fitted geometric decay per step
};

// osc of the nodal values over the boxes |x - center|_inf < r^k, k = 0..k_max
inline OscillationDecay oscillation_decay(const DiscreteField& u, const Point& center, double r, int k_max,
                                          int min_nodes = 5) {
  require(r > 0 && r < 1, "oscillation_decay: ratio must lie in (0,1)");
  require(k_max >= 1, "oscillation_decay: k_max must be >= 1");
  const Mesh& m = *u.mesh;
  OscillationDecay out;
  for (int k = 0; k <= k_max; ++k) {
    const double rho = std::pow(r, k);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    int count = 0;
    for (int i = 0; i < m.vertex_count(); ++i) {
      double d = 0;
      for (int c = 0; c < m.dim; ++c) d = std::max(d, std::abs(m.vertices[i][c] - center[c]));
      if (d < rho) {
        lo = std::min(lo, u.values[i]);
        hi = std::max(hi, u.values[i]);
        ++count;
      }
    }
    if (count < min_nodes)
      throw NumericalError("oscillation_decay: scale " + std::to_string(k) + " is under-resolved");
    out.radii.push_back(rho);
    out.oscillation.push_back(hi - lo);
  }
  // slope of log osc against k over the positive entries
  std::vector<Sample> pts;
  for (int k = 0; k <= k_max; ++k)
    if (out.oscillation[k] > 0) pts.push_back({out.radii[k], out.oscillation[k]});
  if (pts.size() >= 4) out.factor = std::pow(r, fit_exponent(pts, {pts.back().t * 0.999, 1.001}).exponent);
  return out;
}

struct ExponentReport {
  double alpha_hat_omega2 = 0;
  double alpha_hat_omega1 = 0;
  double ratio_hat = 0;
  double rms_omega2 = 0;
  double rms_omega1 = 0;
  std::pair<double, double> sample_window{0, 0};
};

template <class U>
ExponentReport analyze_interface(const U& u, double x_prime, double g_value, int n, double alpha0, double s,
                                 std::pair<double, double> window, int count = 16) {
  ExponentReport r;
  r.sample_window = window;
  const auto right = trace_samples(u, x_prime, g_value, n, +1, window, count);
  const auto left = trace_samples(u, x_prime, g_value, n, -1, window, count);
  const auto f2 = fit_exponent(right, window);
  const auto f1 = fit_exponent(left, window);
  r.alpha_hat_omega2 = f2.exponent;
  r.alpha_hat_omega1 = f1.exponent;
  r.rms_omega2 = f2.rms;
  r.rms_omega1 = f1.rms;
  r.ratio_hat = transmission_ratio(u, x_prime, g_value, n, alpha0, s, window);
  return r;
}

struct CsvRow {
  std::string quantity;
  double scale = 0;
  double value = 0;
  double predicted = std::numeric_limits<double>::quiet_NaN();
};

inline std::string csv_number(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline void write_csv(std::ostream& os, const std::vector<CsvRow>& rows) {
  os << "quantity,scale,value,predicted,rel_error\n";
  for (const auto& r : rows) {
    double rel = std::numeric_limits<double>::quiet_NaN();
    if (!std::isnan(r.predicted))
      rel = std::abs(r.value - r.predicted) / (r.predicted != 0 ? std::abs(r.predicted) : 1.0);
    os << r.quantity << "," << csv_number(r.scale) << "," << csv_number(r.value) << "," << csv_number(r.predicted)
       << "," << csv_number(rel) << "\n";
  }
}

}  // namespace translab
