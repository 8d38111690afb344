#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <vector>

#include "translab/errors.hpp"
#include "translab/kernel.hpp"
#include "translab/mesh.hpp"
#include "translab/problem.hpp"
#include "translab/quadrature.hpp"

namespace translab {

struct AssemblyOptions {
  int angles = 64;       // ray directions per quadrature point (2D)
  int gauss_1d = 8;      // Gauss points per 1D element
  int x_refine = 0;      // uniform subdivision levels of the 2D outer quadrature
  QuadratureConfig cfg;  // exterior-data integrals
};

// Parts of the discrete system over all mesh vertices (Dirichlet rows included).
// system = local + delta viscous + eps drift + eps^{2(1-s)} (nonlocal + exterior)
// rhs    = eps^2 load_f + eps^{2(1-s)} load_exterior
struct Assembly {
  Eigen::MatrixXd local, viscous, drift, nonlocal, exterior;
  Eigen::VectorXd load_f, load_exterior;
  double delta = 0, drift_weight = 1, nonlocal_weight = 1, load_weight = 1;

  Eigen::MatrixXd system() const {
    return local + delta * viscous + drift_weight * drift + nonlocal_weight * (nonlocal + exterior);
  }
  Eigen::VectorXd rhs() const { return load_weight * load_f + nonlocal_weight * load_exterior; }
};

namespace detail {

inline Point sub(const Point& a, const Point& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Point neg(const Point& a) { return {-a[0], -a[1], -a[2]}; }

// Weights of the pair (x, y) in the nonlocal form: wx multiplies the test
// function at x, wy at y. Omega2 x Omega2 uses the symmetric part of a_1;
// a cross pair carries half of a_2, with the Omega1 side using nu' in
// constant-pair mode.
struct PairWeights {
  double wx = 0, wy = 0;
};

inline PairWeights pair_weights(const KernelSpec& k, const Point& x, Side sx, const Point& y, Side sy) {
  if (sx == Side::Omega1 && sy == Side::Omega1) return {};
  if (sx == Side::Omega2 && sy == Side::Omega2) {
    const double w = 0.5 * (k.w1(x, sub(x, y)) + k.w1(y, sub(y, x)));
    return {w, w};
  }
  const bool x2 = sx == Side::Omega2;
  const Point& p2 = x2 ? x : y;
  const Point& p1 = x2 ? y : x;
  const double c2 = 0.5 * k.w2(p2, sub(p2, p1));
  const double c1 = k.mode == KernelMode::ConstantPair ? 0.5 * k.nu_left() : c2;
  return x2 ? PairWeights{c2, c1} : PairWeights{c1, c2};
}

inline double factorial(int k) { return k <= 1 ? 1.0 : k * factorial(k - 1); }

// mu_ij = int_0^h int_0^hp xi^i eta^j (gap + xi + eta)^{-p} for i + j <= 2,
// order (00, 10, 01, 20, 11, 02). With gap = 0 the 00 moment is not formed.
inline std::array<double, 6> pair_moments_1d(double gap, double h, double hp, double p) {
  static const int I[6] = {0, 1, 0, 2, 1, 0};
  static const int J[6] = {0, 0, 1, 0, 1, 2};
  std::array<double, 6> mu{};
  const double m1 = std::min(h, hp), m2 = std::max(h, hp), L = h + hp;
  const auto& gl2 = gauss_legendre(2);
  const auto& gl8 = gauss_legendre(8);
  const auto Q = [&](double sigma, int i, int j) {
    const double lo = std::max(0.0, sigma - hp), hi = std::min(h, sigma);
    if (hi <= lo) return 0.0;
    const double c = 0.5 * (lo + hi), r = 0.5 * (hi - lo);
    double v = 0;
    for (int q = 0; q < 2; ++q) {
      const double xi = c + r * gl2.x[q];
      v += gl2.w[q] * std::pow(xi, i) * std::pow(sigma - xi, j);
    }
    return v * r;
  };
  // cells where (gap + sigma) grows by at most 1.5
  const auto numeric = [&](double a, double b) {
    double lo = a;
    while (lo < b) {
      double hi = gap + lo > 0 ? std::min(b, 1.5 * (gap + lo) - gap) : b;
      if (hi <= lo) hi = b;
      const double c = 0.5 * (lo + hi), r = 0.5 * (hi - lo);
      for (int q = 0; q < 8; ++q) {
        const double sg = c + r * gl8.x[q];
        const double k = gl8.w[q] * r * std::pow(gap + sg, -p);
        for (int m = 0; m < 6; ++m) mu[m] += k * Q(sg, I[m], J[m]);
      }
      lo = hi;
    }
  };
  if (gap > 0) {
    numeric(0.0, m1);
  } else {
    for (int m = 1; m < 6; ++m) {
      const int d = I[m] + J[m];
      const double c = factorial(I[m]) * factorial(J[m]) / factorial(d + 1);
      mu[m] += c * std::pow(m1, d + 2 - p) / (d + 2 - p);
    }
    mu[0] = std::numeric_limits<double>::quiet_NaN();
  }
  if (m2 > m1) numeric(m1, m2);
  numeric(m2, L);
  return mu;
}

// int_a^b G(v) dv on geometric cells toward v = a (8-point Gauss per cell).
// With a = 0 the substitution v = b t^6 absorbs power growth of G at 0.
template <class G>
double graded_unit_integral(const G& fn, double a, double b, int cells = 14) {
  const auto& gl = gauss_legendre(8);
  const auto run = [&](const auto& h, double lo0, double hi0) {
    double total = 0, hi = hi0;
    for (int c = 0; c < cells && hi > lo0; ++c) {
      const double lo = c + 1 == cells ? lo0 : std::max(lo0, lo0 + 0.5 * (hi - lo0));
      const double m = 0.5 * (lo + hi), r = 0.5 * (hi - lo);
      for (int q = 0; q < 8; ++q) total += gl.w[q] * r * h(m + r * gl.x[q]);
      hi = lo;
    }
    return total;
  };
  if (a > 0) return run(fn, a, b);
  return run([&](double t) { return fn(b * std::pow(t, 6)) * 6 * b * std::pow(t, 5); }, 0.0, 1.0);
}

// Dunavant rule composed over 4^levels congruent subtriangles
inline std::vector<std::pair<std::array<double, 3>, double>> composite_triangle_rule(int levels);

// Dunavant degree-4 rule on the reference triangle (barycentrics, weights sum to 1)
inline const std::vector<std::pair<std::array<double, 3>, double>>& triangle_rule() {
  static const std::vector<std::pair<std::array<double, 3>, double>> r = [] {
    std::vector<std::pair<std::array<double, 3>, double>> v;
    const double a1 = 0.445948490915965, w1 = 0.223381589678011;
    const double a2 = 0.091576213509771, w2 = 0.109951743655322;
    for (auto [a, w] : {std::pair{a1, w1}, std::pair{a2, w2}}) {
      v.push_back({{1 - 2 * a, a, a}, w});
      v.push_back({{a, 1 - 2 * a, a}, w});
      v.push_back({{a, a, 1 - 2 * a}, w});
    }
    return v;
  }();
  return r;
}

inline std::vector<std::pair<std::array<double, 3>, double>> composite_triangle_rule(int levels) {
  using Tri = std::array<std::array<double, 3>, 3>;
  std::vector<Tri> tris{Tri{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}};
  for (int l = 0; l < levels; ++l) {
    std::vector<Tri> next;
    for (const auto& t : tris) {
      std::array<double, 3> m01, m12, m20;
      for (int k = 0; k < 3; ++k) {
        m01[k] = 0.5 * (t[0][k] + t[1][k]);
        m12[k] = 0.5 * (t[1][k] + t[2][k]);
        m20[k] = 0.5 * (t[2][k] + t[0][k]);
      }
      next.push_back({t[0], m01, m20});
      next.push_back({m01, t[1], m12});
      next.push_back({m20, m12, t[2]});
      next.push_back({m01, m12, m20});
    }
    tris = std::move(next);
  }
  std::vector<std::pair<std::array<double, 3>, double>> out;
  const double scale = 1.0 / double(tris.size());
  for (const auto& t : tris)
    for (const auto& [l, w] : triangle_rule()) {
      std::array<double, 3> b{};
      for (int v = 0; v < 3; ++v)
        for (int k = 0; k < 3; ++k) b[k] += l[v] * t[v][k];
      out.push_back({b, w * scale});
    }
  return out;
}

inline void assemble_local(const ProblemSpec& spec, const Mesh& m, Assembly& as) {
  const int nv = m.vertex_count();
  const int npe = m.verts_per_element();
  for (int e = 0; e < m.element_count(); ++e) {
    const auto gr = m.gradients(e);
    const double area = m.measure(e);
    Point c{0, 0, 0};
    for (int k = 0; k < npe; ++k)
      for (int d = 0; d < 3; ++d) c[d] += m.vertices[m.elements[e][k]][d] / npe;
    const Eigen::MatrixXd A = spec.A(c);
    for (int a = 0; a < npe; ++a)
      for (int b = 0; b < npe; ++b) {
        const int i = m.elements[e][a], j = m.elements[e][b];
        Eigen::Vector2d ga(gr[a][0], gr[a][1]), gb(gr[b][0], gr[b][1]);
        const double gg = ga.head(spec.n).dot(gb.head(spec.n));
        as.viscous(i, j) += area * gg;
        if (m.side[e] == Side::Omega1) as.local(i, j) += area * ga.head(spec.n).dot(A * gb.head(spec.n));
        // -(phi_j b . grad phi_i), int_T phi_j = area / npe
        as.drift(i, j) -= area / npe * spec.b.dot(ga.head(spec.n));
      }
  }
  (void)nv;
}

inline void assemble_load_f(const ProblemSpec& spec, const Mesh& m, const AssemblyOptions& opt, Assembly& as) {
  if (m.dim == 1) {
    const auto& gl = gauss_legendre(opt.gauss_1d);
    for (int e = 0; e < m.element_count(); ++e) {
      const int i0 = m.elements[e][0], i1 = m.elements[e][1];
      const double a = m.vertices[i0][0], b = m.vertices[i1][0];
      const double c = 0.5 * (a + b), r = 0.5 * (b - a);
      for (int q = 0; q < opt.gauss_1d; ++q) {
        const double x = c + r * gl.x[q];
        const double fv = spec.f(Point{x, 0, 0}) * gl.w[q] * r;
        as.load_f[i0] += fv * (b - x) / (b - a);
        as.load_f[i1] += fv * (x - a) / (b - a);
      }
    }
    return;
  }
  for (int e = 0; e < m.element_count(); ++e) {
    const double area = m.measure(e);
    for (const auto& [l, w] : triangle_rule()) {
      Point x{0, 0, 0};
      for (int k = 0; k < 3; ++k)
        for (int d = 0; d < 2; ++d) x[d] += l[k] * m.vertices[m.elements[e][k]][d];
      const double fv = spec.f(x) * w * area;
      for (int k = 0; k < 3; ++k) as.load_f[m.elements[e][k]] += fv * l[k];
    }
  }
}

// Omega x Omega part of the nonlocal form in 1D, exact in the radial variable
inline void assemble_nonlocal_1d(const ProblemSpec& spec, const Mesh& m, Assembly& as) {
  const double s = spec.s, p = 1 + 2 * s;
  const int ne = m.element_count();
  const auto X = [&](int i) { return m.vertices[i][0]; };
  for (int e = 0; e < ne; ++e) {
    const int e0 = m.elements[e][0], e1 = m.elements[e][1];
    const double h = X(e1) - X(e0);
    const Point me{0.5 * (X(e0) + X(e1)), 0, 0};
    // same element: phi_a(x) - phi_a(y) = phi_a' (x - y)
    if (m.side[e] == Side::Omega2) {
      const auto w = pair_weights(spec.kernel, me, Side::Omega2, me, Side::Omega2);
      const double I = 2 * std::pow(h, 3 - 2 * s) / ((2 - 2 * s) * (3 - 2 * s));
      const double sl[2] = {-1 / h, 1 / h};
      const int id[2] = {e0, e1};
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) as.nonlocal(id[a], id[b]) += w.wx * sl[a] * sl[b] * I;
    }
    for (int f = e + 1; f < ne; ++f) {
      if (m.side[e] == Side::Omega1 && m.side[f] == Side::Omega1) continue;
      const int f0 = m.elements[f][0], f1 = m.elements[f][1];
      const double hp = X(f1) - X(f0);
      const double gap = X(f0) - X(e1);
      const Point mf{0.5 * (X(f0) + X(f1)), 0, 0};
      const auto w = pair_weights(spec.kernel, me, m.side[e], mf, m.side[f]);
      const auto mu = pair_moments_1d(gap, h, hp, p);
      // xi = x_{e1} - x on T, eta = y - x_{f0} on T'
      struct Dof {
        int id;
        double A0, A1, B0, B1;
      };
      std::vector<Dof> dofs;
      const auto add = [&](int id, double A0, double A1, double B0, double B1) {
        for (auto& d : dofs)
          if (d.id == id) {
            d.A0 += A0, d.A1 += A1, d.B0 += B0, d.B1 += B1;
            return;
          }
        dofs.push_back({id, A0, A1, B0, B1});
      };
      add(e0, 0, 1 / h, 0, 0);
      add(e1, 1, -1 / h, 0, 0);
      add(f0, 0, 0, 1, -1 / hp);
      add(f1, 0, 0, 0, 1 / hp);
      for (const auto& da : dofs) {
        const double G0 = w.wx * da.A0 - w.wy * da.B0, Gx = w.wx * da.A1, Gy = -w.wy * da.B1;
        for (const auto& db : dofs) {
          const double F0 = db.A0 - db.B0, Fx = db.A1, Fy = -db.B1;
          double v = (G0 * Fx + Gx * F0) * mu[1] + (G0 * Fy + Gy * F0) * mu[2] + Gx * Fx * mu[3] +
                     (Gx * Fy + Gy * Fx) * mu[4] + Gy * Fy * mu[5];
          if (gap > 0) v += G0 * F0 * mu[0];
          as.nonlocal(da.id, db.id) += 2 * v;
        }
      }
    }
  }
}

// int_0^1 u0(y(v)) dv where y runs from the boundary point outward
template <class U>
double exterior_average(const U& u0v, const QuadratureConfig& cfg) {
  QuadratureConfig c = cfg;
  c.abs_tol = std::max(cfg.abs_tol, 1e-13);
  return integrate_graded0(u0v, 1.0, c);
}

// Omega x complement part in 1D: kappa terms and exterior-data load
inline void assemble_exterior_1d(const ProblemSpec& spec, const Mesh& m, const AssemblyOptions& opt,
                                 Assembly& as) {
  const double s = spec.s, R = m.radius;
  const auto& gl = gauss_legendre(opt.gauss_1d);
  const auto& gv = gauss_legendre(16);
  for (int e = 0; e < m.element_count(); ++e) {
    const int i0 = m.elements[e][0], i1 = m.elements[e][1];
    const double a = m.vertices[i0][0], b = m.vertices[i1][0], h = b - a;
    for (int dir : {1, -1}) {
      const Side sy = dir > 0 ? Side::Omega2 : Side::Omega1;
      const Point mx{0.5 * (a + b), 0, 0};
      const Point yr{dir * (R + 1), 0, 0};
      const double wx = pair_weights(spec.kernel, mx, m.side[e], yr, sy).wx;
      if (wx == 0) continue;
      // tau = distance to the boundary point dir * R
      const auto U = [&](double tau) {
        return exterior_average(
            [&](double v) {
              const double y = dir * (R + tau * (std::pow(v, -1 / (2 * s)) - 1));
              return spec.exterior_data(Point{y, 0, 0});
            },
            opt.cfg);
      };
      const bool touches = dir > 0 ? b == R : a == -R;
      if (touches) {
        const int I = dir > 0 ? i0 : i1, B = dir > 0 ? i1 : i0;
        // phi_I = tau / h, phi_B = 1 - tau / h, kappa = tau^{-2s} / (2s)
        const double c = 2 * wx / (2 * s);
        const double m1 = std::pow(h, 2 - 2 * s) / (2 - 2 * s), m2 = std::pow(h, 3 - 2 * s) / (3 - 2 * s);
        as.exterior(I, I) += c * m2 / (h * h);
        as.exterior(I, B) += c * (m1 / h - m2 / (h * h));
        as.exterior(B, I) += c * (m1 / h - m2 / (h * h));
        // int_0^h tau^{1-2s} G(tau) with tau = h v^{1/(2-2s)}
        double load = 0;
        for (int q = 0; q < 16; ++q) {
          const double v = 0.5 * (1 + gv.x[q]);
          const double tau = h * std::pow(v, 1 / (2 - 2 * s));
          load += 0.5 * gv.w[q] * U(tau) / h;
        }
        as.load_exterior[I] += c * m1 * load;
        continue;
      }
      const double cc = 0.5 * (a + b), r = 0.5 * h;
      for (int q = 0; q < opt.gauss_1d; ++q) {
        const double x = cc + r * gl.x[q];
        const double tau = dir > 0 ? R - x : x + R;
        const double kap = std::pow(tau, -2 * s) / (2 * s);
        const double wq = gl.w[q] * r * 2 * wx;
        const double p0 = (b - x) / h, p1 = (x - a) / h;
        as.exterior(i0, i0) += wq * p0 * p0 * kap;
        as.exterior(i0, i1) += wq * p0 * p1 * kap;
        as.exterior(i1, i0) += wq * p1 * p0 * kap;
        as.exterior(i1, i1) += wq * p1 * p1 * kap;
        const double Uv = U(tau);
        as.load_exterior[i0] += wq * p0 * kap * Uv;
        as.load_exterior[i1] += wq * p1 * kap * Uv;
      }
    }
  }
}

// rho values in (rho_e, inf) where the ray x - rho d crosses the interface graph
inline std::vector<double> exterior_crossings(const ProblemSpec& spec, const Point& x, const Point& d, double rho_e) {
  std::vector<double> out;
  const auto h = [&](double rho) {
    const Point y{x[0] - rho * d[0], x[1] - rho * d[1], 0};
    return spec.normal_offset(y);
  };
  double r0 = rho_e, h0 = h(r0);
  for (int j = 1; j <= 80; ++j) {
    const double r1 = rho_e * std::pow(1.25, j);
    const double h1 = h(r1);
    if ((h0 > 0) != (h1 > 0)) {
      double lo = r0, hi = r1;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((h(mid) > 0) == (h0 > 0)) lo = mid;
        else hi = mid;
      }
      out.push_back(0.5 * (lo + hi));
    }
    r0 = r1;
    h0 = h1;
  }
  return out;
}

// Walks the ray x - rho d from element e through the mesh. For every element
// crossed, seg(c, r0, r1, lc, rate) gets the barycentrics lc of c at x and
// their rates d lambda / d rho. Returns the exit radius.
template <class Seg>
double trace_ray(const Mesh& m, const std::vector<std::array<std::array<double, 2>, 3>>& grads, int e,
                 const Point& x, const Point& d, const Seg& seg) {
  const double step0 = 1e-10 * 2 * m.radius;
  int c = e;
  double r0 = 0;
  int guard = 0;
  while (c >= 0) {
    if (++guard > 100000) throw NumericalError("assemble: ray traversal did not terminate");
    const auto lc = m.barycentric(c, x);
    std::array<double, 3> rate{};
    double r1 = std::numeric_limits<double>::infinity();
    int kexit = -1;
    for (int k = 0; k < 3; ++k) {
      rate[k] = -(grads[c][k][0] * d[0] + grads[c][k][1] * d[1]);
      if (rate[k] < 0) {
        const double r = -lc[k] / rate[k];
        if (r < r1) r1 = r, kexit = k;
      }
    }
    if (kexit < 0) throw NumericalError("assemble: ray left an element without an exit");
    if (r1 < r0) r1 = r0;
    if (r1 > r0) seg(c, r0, r1, lc, rate);
    int nb = m.neighbors[c][(kexit + 1) % 3];
    double step = step0;
    for (int attempt = 0; attempt < 6; ++attempt, step *= 10) {
      const Point ahead{x[0] - (r1 + step) * d[0], x[1] - (r1 + step) * d[1], 0};
      if (nb >= 0) {
        const auto l = m.barycentric(nb, ahead);
        if (l[0] >= -1e-9 && l[1] >= -1e-9 && l[2] >= -1e-9) break;
      }
      nb = m.locate(ahead, c);
      if (nb != c) break;
    }
    if (nb == c) throw NumericalError("assemble: ray traversal stalled at a vertex");
    r0 = r1;
    c = nb;
  }
  return r0;
}

inline std::vector<Point> ray_directions(int na) {
  std::vector<Point> dirs(na);
  for (int k = 0; k < na; ++k) {
    const double th = 2 * M_PI * (k + 0.5) / na;
    dirs[k] = {std::cos(th), std::sin(th), 0};
  }
  return dirs;
}

inline std::vector<std::array<std::array<double, 2>, 3>> all_gradients(const Mesh& m) {
  std::vector<std::array<std::array<double, 2>, 3>> g(m.element_count());
  for (int e = 0; e < m.element_count(); ++e) g[e] = m.gradients(e);
  return g;
}

// Splits the exterior ray (re, inf) in v = (re/rho)^{2s} at interface crossings
// and calls piece(vlo, vhi, wx) with the x-side weight of each piece.
template <class Piece>
void exterior_pieces(const ProblemSpec& spec, const Point& x, Side sx, const Point& d, double re,
                     const Piece& piece) {
  const double s = spec.s;
  const auto cross = exterior_crossings(spec, x, d, re);
  std::vector<double> vb{1.0};
  for (double rc : cross) vb.push_back(std::pow(re / rc, 2 * s));
  vb.push_back(0.0);
  for (std::size_t k = 0; k + 1 < vb.size(); ++k) {
    const double vhi = vb[k], vlo = vb[k + 1];
    const double rm = re * std::pow(0.5 * (vhi + vlo), -1 / (2 * s));
    const Point ym{x[0] - rm * d[0], x[1] - rm * d[1], 0};
    const double wx = pair_weights(spec.kernel, x, sx, ym, spec.side_of(ym)).wx;
    if (wx != 0) piece(vlo, vhi, wx);
  }
}

// 2D nonlocal form by rays from triangle quadrature points; also the exterior terms
inline void assemble_nonlocal_2d(const ProblemSpec& spec, const Mesh& m, const AssemblyOptions& opt, Assembly& as) {
  const double s = spec.s;
  const double dth = 2 * M_PI / opt.angles;
  const auto dirs = ray_directions(opt.angles);
  const auto grads = all_gradients(m);
  struct Dof {
    int id;
    double X, Y0, Y1;
  };
  std::vector<Dof> dofs;
  dofs.reserve(6);
  const auto rule = composite_triangle_rule(opt.x_refine);
  for (int e = 0; e < m.element_count(); ++e) {
    const double area = m.measure(e);
    const Side sx = m.side[e];
    for (const auto& [lq, wq] : rule) {
      Point x{0, 0, 0};
      for (int k = 0; k < 3; ++k)
        for (int dd = 0; dd < 2; ++dd) x[dd] += lq[k] * m.vertices[m.elements[e][k]][dd];
      const double W = area * wq * dth;
      for (const auto& d : dirs) {
        const auto seg = [&](int c, double r0, double r1, const std::array<double, 3>& lc,
                             const std::array<double, 3>& rate) {
          const Point ymid{x[0] - 0.5 * (r0 + r1) * d[0], x[1] - 0.5 * (r0 + r1) * d[1], 0};
          const auto w = pair_weights(spec.kernel, x, sx, ymid, m.side[c]);
          if (w.wx == 0 && w.wy == 0) return;
          dofs.clear();
          for (int k = 0; k < 3; ++k) dofs.push_back({m.elements[e][k], lq[k], 0, 0});
          for (int k = 0; k < 3; ++k) {
            const int id = m.elements[c][k];
            bool found = false;
            for (auto& q : dofs)
              if (q.id == id) q.Y0 = lc[k], q.Y1 = rate[k], found = true;
            if (!found) dofs.push_back({id, 0, lc[k], rate[k]});
          }
          // radial moments int rho^{k-1-2s}, k = 0, 1, 2
          const bool first = r0 == 0;
          const double M2 = (std::pow(r1, 2 - 2 * s) - std::pow(r0, 2 - 2 * s)) / (2 - 2 * s);
          double M0 = 0, M1 = 0;
          if (!first) {
            M0 = (std::pow(r0, -2 * s) - std::pow(r1, -2 * s)) / (2 * s);
            M1 = std::abs(s - 0.5) < 1e-14 ? std::log(r1 / r0)
                                           : (std::pow(r1, 1 - 2 * s) - std::pow(r0, 1 - 2 * s)) / (1 - 2 * s);
          }
          for (const auto& da : dofs) {
            const double G0 = w.wx * da.X - w.wy * da.Y0, G1 = -w.wy * da.Y1;
            for (const auto& db : dofs) {
              const double F0 = db.X - db.Y0, F1 = -db.Y1;
              double v = G1 * F1 * M2;
              if (!first) v += G0 * F0 * M0 + (G0 * F1 + G1 * F0) * M1;
              as.nonlocal(da.id, db.id) += W * v;
            }
          }
        };
        const double re = trace_ray(m, grads, e, x, d, seg);
        const double pref = std::pow(re, -2 * s) / (2 * s);
        double kap = 0, load = 0;
        exterior_pieces(spec, x, sx, d, re, [&](double vlo, double vhi, double wx) {
          kap += wx * (vhi - vlo);
          load += wx * graded_unit_integral(
                           [&](double v) {
                             const double r = re * std::pow(v, -1 / (2 * s));
                             return spec.exterior_data(Point{x[0] - r * d[0], x[1] - r * d[1], 0});
                           },
                           vlo, vhi);
        });
        for (int a = 0; a < 3; ++a) {
          const int i = m.elements[e][a];
          as.load_exterior[i] += 2 * W * pref * lq[a] * load;
          for (int b = 0; b < 3; ++b) as.exterior(i, m.elements[e][b]) += 2 * W * pref * lq[a] * lq[b] * kap;
        }
      }
    }
  }
}

}  // namespace detail

inline Assembly assemble(const ProblemSpec& spec, const Mesh& mesh, const AssemblyOptions& opt = {}) {
  spec.validate();
  require(mesh.dim == spec.n, "assemble: mesh dimension differs from the problem");
  require(mesh.interface_conforming, "assemble: mesh must be interface-conforming");
  const int nv = mesh.vertex_count();
  Assembly as;
  for (auto* M : {&as.local, &as.viscous, &as.drift, &as.nonlocal, &as.exterior}) M->setZero(nv, nv);
  as.load_f.setZero(nv);
  as.load_exterior.setZero(nv);
  as.delta = spec.delta;
  as.drift_weight = spec.epsilon;
  as.nonlocal_weight = std::pow(spec.epsilon, 2 * (1 - spec.s));
  as.load_weight = spec.epsilon * spec.epsilon;
  detail::assemble_local(spec, mesh, as);
  detail::assemble_load_f(spec, mesh, opt, as);
  if (spec.n == 1) {
    detail::assemble_nonlocal_1d(spec, mesh, as);
    detail::assemble_exterior_1d(spec, mesh, opt, as);
  } else {
    detail::assemble_nonlocal_2d(spec, mesh, opt, as);
  }
  return as;
}

}  // namespace translab
