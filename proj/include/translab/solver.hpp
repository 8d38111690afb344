#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include "translab/assemble.hpp"
#include "translab/errors.hpp"
#include "translab/homog.hpp"
#include "translab/kernel.hpp"
#include "translab/mesh.hpp"
#include "translab/problem.hpp"
#include "translab/quadrature.hpp"

namespace translab {

struct SolveOptions {
  AssemblyOptions assembly;
  double rcond_min = 1e-14;
  double residual_tol = 1e-10;
};

struct Solution {
  DiscreteField field;
  Assembly assembly;
  double residual = 0;  // max-norm residual of the interior equations, relative to the rhs scale
  double rcond = 0;
};

// Galerkin solve with Dirichlet nodes set to the exterior data
inline Solution solve_full(const ProblemSpec& spec, std::shared_ptr<const Mesh> mesh, const SolveOptions& opt = {}) {
  require(bool(mesh), "solve: mesh is null");
  Solution out;
  out.assembly = assemble(spec, *mesh, opt.assembly);
  const Eigen::MatrixXd K = out.assembly.system();
  const Eigen::VectorXd r = out.assembly.rhs();
  const int nv = mesh->vertex_count();
  std::vector<int> I, B;
  for (int i = 0; i < nv; ++i) (mesh->on_boundary[i] ? B : I).push_back(i);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(nv);
  for (int b : B) u[b] = spec.exterior_data(mesh->vertices[b]);
  const int ni = int(I.size());
  Eigen::MatrixXd KII(ni, ni);
  Eigen::VectorXd rhs(ni);
  for (int a = 0; a < ni; ++a) {
    double v = r[I[a]];
    for (int b : B) v -= K(I[a], b) * u[b];
    rhs[a] = v;
    for (int c = 0; c < ni; ++c) KII(a, c) = K(I[a], I[c]);
  }
  if (ni > 0) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(KII);
    out.rcond = lu.rcond();
    if (!(out.rcond > opt.rcond_min)) {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(KII);
      throw SingularSystemError("solve: system matrix is numerically singular", svd.singularValues().minCoeff());
    }
    Eigen::VectorXd x = lu.solve(rhs);
    x += lu.solve(rhs - KII * x);  // one step of iterative refinement
    const double scale = std::max({1.0, rhs.cwiseAbs().maxCoeff(), (KII * x).cwiseAbs().maxCoeff()});
    out.residual = (KII * x - rhs).cwiseAbs().maxCoeff() / scale;
    if (out.residual > opt.residual_tol)
      throw NumericalError("solve: residual " + std::to_string(out.residual) + " above tolerance");
    for (int a = 0; a < ni; ++a) u[I[a]] = x[a];
  } else {
    out.rcond = 1;
  }
  out.field = DiscreteField{std::move(mesh), std::move(u), spec.exterior_data};
  return out;
}

inline DiscreteField solve_dirichlet(const ProblemSpec& spec, const Mesh& mesh, const SolveOptions& opt = {}) {
  return solve_full(spec, std::make_shared<const Mesh>(mesh), opt).field;
}

namespace detail {

// 2 int_Omega int_{complement} w_x (u(x) - u0(y))^2 K, same rules as the assembly
inline double exterior_energy_1d(const ProblemSpec& spec, const Mesh& m, const Eigen::VectorXd& u,
                                 const AssemblyOptions& opt) {
  const double s = spec.s, R = m.radius;
  const auto& gl = gauss_legendre(opt.gauss_1d);
  const auto& gv = gauss_legendre(16);
  double total = 0;
  for (int e = 0; e < m.element_count(); ++e) {
    const int i0 = m.elements[e][0], i1 = m.elements[e][1];
    const double a = m.vertices[i0][0], b = m.vertices[i1][0], h = b - a;
    for (int dir : {1, -1}) {
      const Point mx{0.5 * (a + b), 0, 0};
      const Point yr{dir * (R + 1), 0, 0};
      const double wx = pair_weights(spec.kernel, mx, m.side[e], yr, dir > 0 ? Side::Omega2 : Side::Omega1).wx;
      if (wx == 0) continue;
      const auto avg = [&](double tau, double ux) {
        return exterior_average(
            [&](double v) {
              const double y = dir * (R + tau * (std::pow(v, -1 / (2 * s)) - 1));
              const double d = ux - spec.exterior_data(Point{y, 0, 0});
              return d * d;
            },
            opt.cfg);
      };
      const auto uh = [&](double x) { return (u[i0] * (b - x) + u[i1] * (x - a)) / h; };
      const bool touches = dir > 0 ? b == R : a == -R;
      if (touches) {
        // int_0^h tau^{-2s} V(tau) / (2s) with tau = h v^{1/(3-2s)}, V = O(tau^2)
        double acc = 0;
        for (int q = 0; q < 16; ++q) {
          const double v = 0.5 * (1 + gv.x[q]);
          const double tau = h * std::pow(v, 1 / (3 - 2 * s));
          const double x = dir > 0 ? R - tau : tau - R;
          acc += 0.5 * gv.w[q] * avg(tau, uh(x)) / (tau * tau);
        }
        total += 2 * wx / (2 * s) * std::pow(h, 3 - 2 * s) / (3 - 2 * s) * acc;
        continue;
      }
      const double cc = 0.5 * (a + b), r = 0.5 * h;
      for (int q = 0; q < opt.gauss_1d; ++q) {
        const double x = cc + r * gl.x[q];
        const double tau = dir > 0 ? R - x : x + R;
        total += gl.w[q] * r * 2 * wx * std::pow(tau, -2 * s) / (2 * s) * avg(tau, uh(x));
      }
    }
  }
  return total;
}

inline double exterior_energy_2d(const ProblemSpec& spec, const Mesh& m, const Eigen::VectorXd& u,
                                 const AssemblyOptions& opt) {
  const double s = spec.s;
  const double dth = 2 * M_PI / opt.angles;
  const auto dirs = ray_directions(opt.angles);
  const auto grads = all_gradients(m);
  const auto rule = composite_triangle_rule(opt.x_refine);
  const auto none = [](int, double, double, const std::array<double, 3>&, const std::array<double, 3>&) {};
  double total = 0;
  for (int e = 0; e < m.element_count(); ++e) {
    const double area = m.measure(e);
    for (const auto& [lq, wq] : rule) {
      Point x{0, 0, 0};
      double ux = 0;
      for (int k = 0; k < 3; ++k) {
        for (int dd = 0; dd < 2; ++dd) x[dd] += lq[k] * m.vertices[m.elements[e][k]][dd];
        ux += lq[k] * u[m.elements[e][k]];
      }
      const double W = area * wq * dth;
      for (const auto& d : dirs) {
        const double re = trace_ray(m, grads, e, x, d, none);
        const double pref = std::pow(re, -2 * s) / (2 * s);
        double acc = 0;
        exterior_pieces(spec, x, m.side[e], d, re, [&](double vlo, double vhi, double wx) {
          acc += wx * graded_unit_integral(
                          [&](double v) {
                            const double r = re * std::pow(v, -1 / (2 * s));
                            const double dv = ux - spec.exterior_data(Point{x[0] - r * d[0], x[1] - r * d[1], 0});
                            return dv * dv;
                          },
                          vlo, vhi);
        });
        total += 2 * W * pref * acc;
      }
    }
  }
  return total;
}

}  // namespace detail

// Quadratic form of the operator without exterior data: v^T (B_L + delta V + eps^{2(1-s)} (B_N + kappa)) v
inline double quadratic_energy(const Assembly& as, const Eigen::VectorXd& v) {
  return v.dot((as.local + as.delta * as.viscous + as.nonlocal_weight * (as.nonlocal + as.exterior)) * v);
}

// E[u] = B_L(u,u) + eps^{2(1-s)} B_N(u,u) + delta |grad u|^2, with the exterior
// closure entering B_N through the pairs (Omega, complement). Pairs with both
// points outside the domain are a constant and left out.
inline double energy(const DiscreteField& u, const ProblemSpec& spec, const Assembly& as,
                     const AssemblyOptions& opt = {}) {
  if (!spec.kernel.variational())
    throw DomainError("energy: the kernel is non-variational (nu' differs from nu), no energy exists");
  const Mesh& m = *u.mesh;
  const Eigen::VectorXd& v = u.values;
  const double inner = v.dot((as.local + as.delta * as.viscous + as.nonlocal_weight * as.nonlocal) * v);
  const double ext = spec.n == 1 ? detail::exterior_energy_1d(spec, m, v, opt) : detail::exterior_energy_2d(spec, m, v, opt);
  return inner + as.nonlocal_weight * ext;
}

inline double energy(const DiscreteField& u, const ProblemSpec& spec, const AssemblyOptions& opt = {}) {
  if (!spec.kernel.variational())
    throw DomainError("energy: the kernel is non-variational (nu' differs from nu), no energy exists");
  return energy(u, spec, assemble(spec, *u.mesh, opt), opt);
}

// Spec of the problem solved by x -> u(eps x) when u solves spec
inline ProblemSpec rescale(const ProblemSpec& spec, double eps) {
  require(eps > 0, "rescale: eps must be positive");
  if (eps == 1) return spec;
  ProblemSpec r = spec;
  const auto sc = [eps](const Point& x) { return Point{eps * x[0], eps * x[1], eps * x[2]}; };
  r.A = [A = spec.A, sc](const Point& x) { return A(sc(x)); };
  r.f = [f = spec.f, sc](const Point& x) { return f(sc(x)); };
  r.exterior_data = [u0 = spec.exterior_data, sc](const Point& x) { return u0(sc(x)); };
  r.g = [g = spec.g, eps](double xp) { return g(eps * xp) / eps; };
  if (spec.kernel.mode == KernelMode::Decomposed) {
    const auto wrap = [sc](const PairFn& p) -> PairFn {
      if (!p) return p;
      return [p, sc](const Point& x, const Point& z) { return p(sc(x), sc(z)); };
    };
    r.kernel.s1 = wrap(spec.kernel.s1);
    r.kernel.s2 = wrap(spec.kernel.s2);
    r.kernel.anti1 = wrap(spec.kernel.anti1);
    r.kernel.anti2 = wrap(spec.kernel.anti2);
  }
  r.epsilon = spec.epsilon * eps;
  r.domain_radius = spec.domain_radius / eps;
  r.truncation_radius = spec.truncation_radius / eps;
  return r;
}

// ---------------------------------------------------------------------------
// Reflection across the interface graph

// Submesh made of the elements on one side (vertex numbering compacted, order kept)
inline Mesh restrict_mesh(const Mesh& m, Side keep) {
  Mesh r;
  r.dim = m.dim;
  r.radius = m.radius;
  r.grading = m.grading;
  std::vector<int> map(m.vertex_count(), -1);
  std::vector<int> used;
  for (int e = 0; e < m.element_count(); ++e)
    if (m.side[e] == keep)
      for (int k = 0; k < m.verts_per_element(); ++k) map[m.elements[e][k]] = 1;
  for (int i = 0; i < m.vertex_count(); ++i)
    if (map[i] > 0) {
      map[i] = r.vertex_count();
      r.vertices.push_back(m.vertices[i]);
    }
  for (int e = 0; e < m.element_count(); ++e)
    if (m.side[e] == keep) {
      std::array<int, 3> el{-1, -1, -1};
      for (int k = 0; k < m.verts_per_element(); ++k) el[k] = map[m.elements[e][k]];
      r.elements.push_back(el);
      r.side.push_back(keep);
    }
  r.build_topology();
  r.h_min = m.h_min;
  r.h_max = m.h_max;
  return r;
}

// Extension Tv(x', x_n) = v(x', 4 g(x') - 3 x_n) below the graph of v given on
// {x_n >= g} within the unit cylinder. The result lives on the source mesh
// plus its image under x_n -> (4 g - x_n) / 3; both copies share nodal values,
// so Tv is exact at nodes and exact everywhere for affine g.
inline DiscreteField reflect(const DiscreteField& v, const std::function<double(double)>& g, double tol = 1e-10) {
  require(bool(v.mesh), "reflect: field has no mesh");
  const Mesh& src = *v.mesh;
  for (int e = 0; e < src.element_count(); ++e)
    if (src.side[e] != Side::Omega2) throw DomainError("reflect: source mesh must lie on the side x_n >= g");
  const int n = src.dim;
  const auto gx = [&](const Point& p) { return n == 1 ? 0.0 : g(p[0]); };
  // the field must vanish on the outer boundary of its region (not on the graph)
  for (int i = 0; i < src.vertex_count(); ++i) {
    const auto& p = src.vertices[i];
    const bool on_graph = std::abs(p[n - 1] - gx(p)) < 1e-12;
    if (src.on_boundary[i] && !on_graph && std::abs(v.values[i]) > tol)
      throw DomainError("reflect: field does not vanish on the boundary of its region");
  }
  auto m = std::make_shared<Mesh>();
  m->dim = n;
  m->radius = src.radius;
  m->grading = src.grading;
  std::vector<double> vals;
  const auto image = [&](const Point& p) {
    Point q = p;
    q[n - 1] = (4 * gx(p) - p[n - 1]) / 3;
    return q;
  };
  if (n == 1) {
    // sorted nodes: images of source nodes in reverse, the shared node at g = 0, the source
    for (int i = src.vertex_count() - 1; i >= 1; --i) {
      m->vertices.push_back(image(src.vertices[i]));
      vals.push_back(v.values[i]);
    }
    for (int i = 0; i < src.vertex_count(); ++i) {
      m->vertices.push_back(src.vertices[i]);
      vals.push_back(v.values[i]);
    }
    require(std::abs(src.vertices[0][0]) < 1e-12, "reflect: 1D source mesh must start at the interface");
    for (int i = 0; i + 1 < m->vertex_count(); ++i) {
      m->elements.push_back({i, i + 1, -1});
      m->side.push_back(m->vertices[i + 1][0] <= 0 ? Side::Omega1 : Side::Omega2);
    }
  } else {
    const int nv = src.vertex_count();
    m->vertices = src.vertices;
    vals.assign(v.values.data(), v.values.data() + nv);
    for (int i = 0; i < nv; ++i) {
      m->vertices.push_back(image(src.vertices[i]));
      vals.push_back(v.values[i]);
    }
    m->elements = src.elements;
    m->side = src.side;
    for (const auto& el : src.elements) {
      // the image reverses orientation; swap two vertices to stay counterclockwise
      m->elements.push_back({el[0] + nv, el[2] + nv, el[1] + nv});
      m->side.push_back(Side::Omega1);
    }
  }
  m->build_topology();
  Eigen::VectorXd values = Eigen::Map<Eigen::VectorXd>(vals.data(), Eigen::Index(vals.size()));
  return DiscreteField{m, values, [](const Point&) { return 0.0; }};
}

namespace detail {

// measure of {P1 > l} on one element, by exact clipping
inline double element_superlevel_measure(const Mesh& m, int e, const Eigen::VectorXd& v, double l) {
  const auto& el = m.elements[e];
  if (m.dim == 1) {
    const double a = v[el[0]] - l, b = v[el[1]] - l, h = m.measure(e);
    if (a > 0 && b > 0) return h;
    if (a <= 0 && b <= 0) return 0;
    return h * (a > 0 ? a : b) / std::abs(a - b);
  }
  std::vector<std::array<double, 3>> poly;  // (x, y, value - l)
  for (int k = 0; k < 3; ++k) {
    const auto& p = m.vertices[el[k]];
    poly.push_back({p[0], p[1], v[el[k]] - l});
  }
  std::vector<std::array<double, 2>> out;
  for (int k = 0; k < 3; ++k) {
    const auto& P = poly[k];
    const auto& Q = poly[(k + 1) % 3];
    if (P[2] > 0) out.push_back({P[0], P[1]});
    if ((P[2] > 0) != (Q[2] > 0)) {
      const double t = P[2] / (P[2] - Q[2]);
      out.push_back({P[0] + t * (Q[0] - P[0]), P[1] + t * (Q[1] - P[1])});
    }
  }
  double a2 = 0;
  for (std::size_t k = 0; k < out.size(); ++k) {
    const auto& P = out[k];
    const auto& Q = out[(k + 1) % out.size()];
    a2 += P[0] * Q[1] - Q[0] * P[1];
  }
  return 0.5 * std::abs(a2);
}

}  // namespace detail

// |{u > l}| over the mesh elements (optionally only one side)
inline double level_set_measure(const DiscreteField& u, double l, const Side* only = nullptr) {
  const Mesh& m = *u.mesh;
  double total = 0;
  for (int e = 0; e < m.element_count(); ++e)
    if (!only || m.side[e] == *only) total += detail::element_superlevel_measure(m, e, u.values, l);
  return total;
}

// ---------------------------------------------------------------------------
// Flattening x -> x - g(x') e_n

struct Flattening {
  ProblemSpec flat;
  std::function<Point(const Point&)> Q, Qinv;
  std::function<Eigen::MatrixXd(const Point&)> jacobian;  // DQ at an original point
};

inline Flattening flatten(const ProblemSpec& spec) {
  spec.validate();
  Flattening out;
  const int n = spec.n;
  const auto g = spec.g;
  const auto gx = [n, g](const Point& p) { return n == 1 ? 0.0 : g(p[0]); };
  out.Q = [n, gx](const Point& x) {
    Point y = x;
    y[n - 1] -= gx(x);
    return y;
  };
  out.Qinv = [n, gx](const Point& y) {
    Point x = y;
    x[n - 1] += gx(y);
    return x;
  };
  // central-difference slope of g; exact for affine g
  const auto slope = [g](double xp) {
    const double h = 1e-6 * std::max(1.0, std::abs(xp));
    return (g(xp + h) - g(xp - h)) / (2 * h);
  };
  out.jacobian = [n, slope](const Point& x) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Identity(n, n);
    if (n == 2) J(1, 0) = -slope(x[0]);
    return J;
  };
  const double L = n == 1 ? 0.0 : spec.g_lipschitz;
  // affine test on samples over the domain
  bool affine = true;
  if (n == 2) {
    const double R = spec.domain_radius, c = slope(0.0);
    for (int i = 0; i <= 40; ++i) {
      const double xp = -R + 2 * R * i / 40;
      if (std::abs(g(xp) - g(0.0) - c * xp) > 1e-12 * std::max(1.0, std::abs(g(0.0)) + R)) affine = false;
    }
  }
  ProblemSpec& f = out.flat;
  f = spec;
  if (n == 1 || L == 0) {
    f.g = [](double) { return 0.0; };
    if (n == 2) {
      f.f = [fo = spec.f, Qi = out.Qinv](const Point& y) { return fo(Qi(y)); };
      f.exterior_data = [u0 = spec.exterior_data, Qi = out.Qinv](const Point& y) { return u0(Qi(y)); };
    }
    return out;
  }
  if (spec.b.norm() > 0 && !affine)
    throw DomainError("flatten: a constant drift stays constant only for an affine interface");
  if (!spec.kernel.variational())
    throw DomainError("flatten: non-variational constant-pair kernels are not supported");
  const auto Qinv = out.Qinv;
  const auto J = out.jacobian;
  f.g = [](double) { return 0.0; };
  f.g_lipschitz = 0;
  f.A = [A = spec.A, Qinv, J](const Point& y) {
    const Point x = Qinv(y);
    const Eigen::MatrixXd D = J(x);
    return Eigen::MatrixXd(D * A(x) * D.transpose());
  };
  f.b = J(Point{0, 0, 0}) * spec.b;
  f.f = [fo = spec.f, Qinv](const Point& y) { return fo(Qinv(y)); };
  f.exterior_data = [u0 = spec.exterior_data, Qinv](const Point& y) { return u0(Qinv(y)); };
  // kernel: a(Q^{-1}x, Q^{-1}y) (|x - y| / |Q^{-1}x - Q^{-1}y|)^{n+2s}
  const double p = n + 2 * spec.s;
  const KernelSpec k0 = spec.kernel;
  const auto zorig = [g](const Point& x, const Point& z) {
    return Point{z[0], z[1] + g(x[0]) - g(x[0] - z[0]), 0};
  };
  const auto ratio = [p](const Point& z, const Point& zo) {
    const double a = std::hypot(z[0], z[1]), b = std::hypot(zo[0], zo[1]);
    return std::pow(a / b, p);
  };
  const double stretch = std::pow(1 + L, std::max(2.0, p));
  if (affine) {
    const auto zo_dir = [zorig](const Point& z) { return zorig(Point{0, 0, 0}, z); };
    const auto h1 = [k0, zo_dir, ratio](const Point& z) {
      const Point zo = zo_dir(z);
      return k0.w1(Point{0, 0, 0}, zo) * ratio(z, zo);
    };
    const auto h2 = [k0, zo_dir, ratio](const Point& z) {
      const Point zo = zo_dir(z);
      return k0.w2(Point{0, 0, 0}, zo) * ratio(z, zo);
    };
    if (k0.mode == KernelMode::Decomposed) {
      f.kernel = k0;
      f.kernel.s1 = [k0, Qinv, zorig, ratio](const Point& x, const Point& z) {
        const Point xo = Qinv(x), zo = zorig(x, z);
        return k0.w1(xo, zo) * ratio(z, zo);
      };
      f.kernel.s2 = [k0, Qinv, zorig, ratio](const Point& x, const Point& z) {
        const Point xo = Qinv(x), zo = zorig(x, z);
        return k0.w2(xo, zo) * ratio(z, zo);
      };
      f.kernel.anti1 = f.kernel.anti2 = nullptr;
    } else {
      f.kernel = KernelSpec::homogeneous(h1, h2, k0.lambda, k0.Lambda);
    }
  } else {
    f.kernel = k0;
    f.kernel.mode = KernelMode::Decomposed;
    f.kernel.s1 = [k0, Qinv, zorig, ratio](const Point& x, const Point& z) {
      const Point xo = Qinv(x), zo = zorig(x, z);
      return k0.w1(xo, zo) * ratio(z, zo);
    };
    f.kernel.s2 = [k0, Qinv, zorig, ratio](const Point& x, const Point& z) {
      const Point xo = Qinv(x), zo = zorig(x, z);
      return k0.w2(xo, zo) * ratio(z, zo);
    };
    f.kernel.anti1 = f.kernel.anti2 = nullptr;
  }
  f.kernel.tags = k0.tags;
  f.kernel.lambda = k0.lambda / stretch;
  f.kernel.Lambda = k0.Lambda * stretch;
  return out;
}

// ---------------------------------------------------------------------------
// Localization by a cutoff

struct Localized {
  DiscreteField field;  // eta u at the nodes, eta u0 outside
  ScalarField f1;       // source correction, valid where eta = 1
  Cutoff cutoff;
};

// cylinder norm max(|x'|, |x_n - g(x')|)
inline double cylinder_norm(const ProblemSpec& spec, const Point& x) {
  const double t = std::abs(spec.normal_offset(x));
  return spec.n == 1 ? t : std::max(std::abs(x[0]), t);
}

// eta(y) = cutoff(|y|_cyl). The field eta u solves the same equation with f
// replaced by f + f1, f1(x) = eps^{-2s} 2 int w_x(x,y) (1 - eta(y)) u(y) K(x-y) dy.
inline Localized localize(const DiscreteField& u, const ProblemSpec& spec, double r_in, double r_out,
                          const QuadratureConfig& cfg = {1e-8, 1e-8, 60, 0.5}) {
  require(r_in > 0 && r_out > r_in, "localize: need 0 < r_in < r_out");
  const Cutoff eta{r_in, r_out, 2};
  const Mesh& m = *u.mesh;
  Eigen::VectorXd vals = u.values;
  for (int i = 0; i < m.vertex_count(); ++i) vals[i] *= eta(cylinder_norm(spec, m.vertices[i]));
  Localized out;
  out.cutoff = eta;
  auto sp = std::make_shared<const ProblemSpec>(spec);
  out.field = DiscreteField{u.mesh, vals, [sp, eta](const Point& y) {
                              return eta(cylinder_norm(*sp, y)) * sp->exterior_data(y);
                            }};
  const double s = spec.s;
  const double scale = 2 * std::pow(spec.epsilon, -2 * s);
  const auto field = std::make_shared<const DiscreteField>(u);
  out.f1 = [sp, field, eta, r_in, scale, s, cfg](const Point& x) {
    const ProblemSpec& sp_ = *sp;
    if (!(cylinder_norm(sp_, x) < r_in)) throw DomainError("localize: f1 is evaluated only where the cutoff is 1");
    const Side sx = sp_.side_of(x);
    const auto tail = [&](const Point& y) { return (1 - eta(cylinder_norm(sp_, y))) * (*field)(y); };
    if (sp_.n == 1) {
      std::vector<double> br;
      for (const auto& p : field->mesh->vertices) br.push_back(p[0]);
      for (double b : {eta.r_out, sp_.domain_radius}) br.push_back(b), br.push_back(-b);
      const auto integrand = [&](double y) {
        const Point py{y, 0, 0};
        const double w = detail::pair_weights(sp_.kernel, x, sx, py, sp_.side_of(py)).wx;
        return w == 0 ? 0.0 : w * tail(py) * std::pow(std::abs(x[0] - y), -1 - 2 * s);
      };
      const double v = integrate_piecewise(integrand, -std::numeric_limits<double>::infinity(), -r_in, br, cfg) +
                       integrate_piecewise(integrand, r_in, std::numeric_limits<double>::infinity(), br, cfg);
      return scale * v;
    }
    // polar coordinates around x; the ray starts where it leaves {|y|_cyl < r_in}
    const auto exit_radius = [&](double th) {
      const double c = std::cos(th), sn = std::sin(th);
      double lo = 0, hi = 1;
      while (cylinder_norm(sp_, Point{x[0] + hi * c, x[1] + hi * sn, 0}) < r_in) hi *= 2;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (cylinder_norm(sp_, Point{x[0] + mid * c, x[1] + mid * sn, 0}) < r_in ? lo : hi) = mid;
      }
      return hi;
    };
    const auto radial = [&](double th) {
      const double c = std::cos(th), sn = std::sin(th);
      const double r0 = exit_radius(th);
      const auto integrand = [&](double r) {
        const Point py{x[0] + r * c, x[1] + r * sn, 0};
        const double w = detail::pair_weights(sp_.kernel, x, sx, py, sp_.side_of(py)).wx;
        return w == 0 ? 0.0 : w * tail(py) * std::pow(r, -1 - 2 * s);
      };
      std::vector<double> br;
      for (double f : {1.0, 1.5, 2.0, 3.0, 4.0}) br.push_back(r0 * f);
      return integrate_piecewise(integrand, r0, std::numeric_limits<double>::infinity(), br, cfg);
    };
    // angular integral over cells; fixed 16-point Gauss per cell
    const auto& gl = gauss_legendre(16);
    const int cells = 32;
    double v = 0;
    for (int k = 0; k < cells; ++k) {
      const double a = 2 * M_PI * k / cells, b = 2 * M_PI * (k + 1) / cells;
      const double mc = 0.5 * (a + b), r = 0.5 * (b - a);
      for (int q = 0; q < 16; ++q) v += gl.w[q] * r * radial(mc + r * gl.x[q]);
    }
    return scale * v;
  };
  return out;
}

// 2 Lambda int_{|y|_cyl > r} |y|^{-n-2s} dy for a flat interface
inline double localize_bound(int n, double s, double Lambda, double r, const QuadratureConfig& cfg = {}) {
  require(n == 1 || n == 2, "localize_bound: n must be 1 or 2");
  if (n == 1) return 2 * Lambda * 2 * std::pow(r, -2 * s) / (2 * s);
  const double I = integrate_gk([&](double th) { return std::pow(std::cos(th), 2 * s); }, 0.0, M_PI / 4, cfg);
  return 2 * Lambda * 8 * std::pow(r, -2 * s) / (2 * s) * I;
}

}  // namespace translab
