#pragma once

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "translab/coeffs.hpp"
#include "translab/errors.hpp"
#include "translab/fracops.hpp"
#include "translab/specfun.hpp"

namespace translab {

// C^2 quintic bump: 1 on [-r_in, r_in], 0 outside [-r_out, r_out]
struct Cutoff {
  double r_in = 1.0;
  double r_out = 2.0;
  int smoothness = 2;

  double operator()(double t) const { return eval(t, 0); }

  // derivative of order d = 0, 1, 2
  double eval(double t, int d) const {
    const double a = std::abs(t);
    if (a <= r_in) return d == 0 ? 1.0 : 0.0;
    if (a >= r_out) return 0.0;
    const double w = r_out - r_in;
    const double u = (a - r_in) / w;
    const double sg = t < 0 ? -1.0 : 1.0;
    // near r_out the complement form avoids cancellation
    const double v = (r_out - a) / w;
    switch (d) {
      case 0: return u < 0.5 ? 1 - u * u * u * (10 - 15 * u + 6 * u * u) : v * v * v * (10 - 15 * v + 6 * v * v);
      case 1: return -sg * 30 * u * u * (1 - u) * (1 - u) / w;
      default: return -60 * u * (1 - u) * (1 - 2 * u) / (w * w);
    }
  }
};

struct ProfileSample {
  double x_n = 0;
  double value = 0;
  Side side = Side::Gamma;
};

struct HomogeneousProfile {
  double s = 0.5;
  double nu = 1.0;
  double nu_prime = std::numeric_limits<double>::quiet_NaN();
  int n = 1;
  double alpha0 = 0;
  double M0 = 0;
  std::vector<double> L;  // L[0] = 1
  std::vector<double> M;  // M[0] = M0
  int k_star = 0;
  Cutoff cutoff;

  double step() const { return 2 - 2 * s; }
  double exponent(int k) const { return alpha0 + k * step(); }
  int terms() const { return int(L.size()); }
};

inline int profile_k_star(double alpha0, double s) {
  int k = 0;
  while (alpha0 - 2 * s + (k + 1) * (2 - 2 * s) < 0) ++k;
  return k;
}

// max_terms < 0 keeps k = 0..k_star; otherwise keeps k = 0..max_terms-1
inline HomogeneousProfile build_profile(double s, double nu, int n, const QuadratureConfig& cfg = {},
                                        int max_terms = -1,
                                        double nu_prime = std::numeric_limits<double>::quiet_NaN()) {
  check_order(s);
  require(nu > 0, "build_profile: nu must be positive");
  require(n >= 1, "build_profile: n must be >= 1");
  HomogeneousProfile p;
  p.s = s;
  p.nu = nu;
  p.nu_prime = nu_prime;
  p.n = n;
  p.alpha0 = solve_alpha0_simple(s, nu, 1e-12, cfg);
  p.k_star = profile_k_star(p.alpha0, s);
  const int terms = max_terms < 0 ? p.k_star + 1 : std::min(max_terms, p.k_star + 1);
  const double K = a_ns(n, s, cfg);
  const double target = (1 - nu / 2) / (2 * s);
  const double wl = std::isnan(nu_prime) ? nu : nu_prime;
  double prevM = 0.0;
  for (int k = 0; k < terms; ++k) {
    const double ak = p.exponent(k);
    double Lk = 1.0;
    if (k > 0) {
      const double D = q_value(s, ak, cfg) - target;
      if (!(D < 0)) throw NumericalError("build_profile: coefficient divisor is not negative");
      Lk = 0.5 * nu * prevM * beta_tail(ak, s, cfg) / D;
    }
    const double an = p.exponent(k + 1);
    if (std::abs(an - 1) < 1e-8 || std::abs(an) < 1e-8)
      throw ResonanceError("build_profile: exponent collision alpha0 + k(2-2s) = 1");
    const double Mk = (wl * K * prevM / (2 * s) - wl * K * Lk * beta_tail(ak, s, cfg)) / (an * (an - 1));
    p.L.push_back(Lk);
    p.M.push_back(Mk);
    prevM = Mk;
  }
  p.M0 = p.M.front();
  return p;
}

// Phi(x_n) = chi(x_n) sum_k [L_k rho_{a_k}(x_n) + M_k rho_{a_{k+1}}(-x_n)]; d-th derivative, d <= 2
inline double eval_profile(const HomogeneousProfile& p, double x, int d = 0) {
  if (x == 0 && d == 0) return 0.0;
  const double t = std::abs(x);
  double g[3] = {0, 0, 0};  // series and its first two derivatives in x
  for (int k = 0; k < p.terms(); ++k) {
    const double a = x > 0 ? p.exponent(k) : p.exponent(k + 1);
    const double c = x > 0 ? p.L[k] : p.M[k];
    const double sg = x > 0 ? 1.0 : -1.0;
    g[0] += c * std::pow(t, a);
    g[1] += sg * c * a * std::pow(t, a - 1);
    g[2] += c * a * (a - 1) * std::pow(t, a - 2);
  }
  const double c0 = p.cutoff.eval(x, 0);
  if (d == 0) return c0 * g[0];
  const double c1 = p.cutoff.eval(x, 1);
  if (d == 1) return c1 * g[0] + c0 * g[1];
  const double c2 = p.cutoff.eval(x, 2);
  return c2 * g[0] + 2 * c1 * g[1] + c0 * g[2];
}

inline ProfileSample sample_profile(const HomogeneousProfile& p, double x) {
  return {x, eval_profile(p, x), x > 0 ? Side::Omega2 : (x < 0 ? Side::Omega1 : Side::Gamma)};
}

struct ResidualPoint {
  double x_n = 0;
  Side side = Side::Gamma;
  double residual = 0;
};

// residual of the Omega2 equation (x > 0) or Omega1 equation (x < 0) for any callable u
template <class U>
double transmission_residual(const U& u, double d2u_at_x, double s, double nu, double nu_prime, int n, double x,
                             const QuadratureConfig& cfg, std::span<const double> breaks) {
  const double K = a_ns(n, s, cfg);
  if (x > 0) return apply_OR_reduced(u, K, nu * K, s, x, cfg, breaks);
  const double wl = std::isnan(nu_prime) ? nu : nu_prime;
  return -d2u_at_x + apply_OL_reduced(u, wl * K, s, x, cfg, breaks);
}

inline std::vector<ResidualPoint> residual_check(const HomogeneousProfile& p, std::span<const double> points,
                                                 const QuadratureConfig& cfg = {}) {
  const double br[] = {-p.cutoff.r_out, -p.cutoff.r_in, 0.0, p.cutoff.r_in, p.cutoff.r_out};
  const auto phi = [&](double r) { return eval_profile(p, r); };
  std::vector<ResidualPoint> out;
  for (double x : points) {
    if (x == 0) throw DomainError("residual_check: points must avoid the interface");
    const double r = transmission_residual(phi, x < 0 ? eval_profile(p, x, 2) : 0.0, p.s, p.nu, p.nu_prime, p.n, x,
                                           cfg, br);
    out.push_back({x, x > 0 ? Side::Omega2 : Side::Omega1, r});
  }
  return out;
}

inline std::string serialize_profile(const HomogeneousProfile& p) {
  std::ostringstream os;
  char buf[64];
  const auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  const auto list = [&](const std::vector<double>& v) {
    std::string r;
    for (std::size_t i = 0; i < v.size(); ++i) r += (i ? "," : "") + num(v[i]);
    return r;
  };
  os << "s=" << num(p.s) << "\n"
     << "nu=" << num(p.nu) << "\n"
     << "nu_prime=" << num(p.nu_prime) << "\n"
     << "n=" << p.n << "\n"
     << "alpha0=" << num(p.alpha0) << "\n"
     << "M0=" << num(p.M0) << "\n"
     << "L=" << list(p.L) << "\n"
     << "M=" << list(p.M) << "\n"
     << "k_star=" << p.k_star << "\n"
     << "cutoff=" << num(p.cutoff.r_in) << "," << num(p.cutoff.r_out) << "," << p.cutoff.smoothness << "\n";
  return os.str();
}

inline HomogeneousProfile parse_profile(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  const auto get = [&](const char* k) {
    auto it = kv.find(k);
    if (it == kv.end()) throw DomainError(std::string("parse_profile: missing key ") + k);
    return it->second;
  };
  const auto list = [](const std::string& v) {
    std::vector<double> out;
    std::istringstream ss(v);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
  };
  HomogeneousProfile p;
  p.s = std::stod(get("s"));
  p.nu = std::stod(get("nu"));
  p.nu_prime = std::stod(get("nu_prime"));
  p.n = std::stoi(get("n"));
  p.alpha0 = std::stod(get("alpha0"));
  p.M0 = std::stod(get("M0"));
  p.L = list(get("L"));
  p.M = list(get("M"));
  p.k_star = std::stoi(get("k_star"));
  const auto c = list(get("cutoff"));
  require(c.size() == 3, "parse_profile: cutoff needs three fields");
  p.cutoff = {c[0], c[1], int(c[2])};
  require(p.L.size() == p.M.size() && !p.L.empty(), "parse_profile: coefficient lists malformed");
  return p;
}

}  // namespace translab
