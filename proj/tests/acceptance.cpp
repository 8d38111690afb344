// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "translab/analysis.hpp"
#include "translab/coeffs.hpp"
#include "translab/fracops.hpp"
#include "translab/homog.hpp"
#include "translab/solver.hpp"

using namespace translab;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

std::string num(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3g", v);
  return b;
}

const double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------

void q_identities(Outcome& o) {
  double worst = 0;
  for (double s : {0.6, 0.75, 0.9}) worst = std::max(worst, std::abs(q_value(s, 2 * s - 1) - 1 / (2 * s)));
  for (double s : {0.25, 0.75})
    worst = std::max(worst, std::abs(q_value_extended(s, 1.0) - (1 / (2 * s) + 1 / (1 - 2 * s))));
  for (double s : {0.6, 0.9}) {
    const double lo = 2 * s - 1;
    for (int i = 1; i <= 20; ++i) {
      const double a = i * lo / 21;
      worst = std::max(worst, std::abs(q_value(s, a) - q_value(s, lo - a)));
    }
  }
  o.detail << "max deviation " << num(worst) << " ";
  o.check(worst < 1e-8, "tolerance 1e-8");
}

void homogeneous_action_check(Outcome& o) {
  double worst = 0;
  for (auto [n, s, a] : {std::tuple{1, 0.5, 0.3}, {2, 0.75, 1.0}})
    for (double x : {0.25, 1.0, 4.0}) {
      const double expect = q_value(s, a) * a_ns(n, s) * std::pow(x, a - 2 * s);
      worst = std::max(worst, std::abs(homogeneous_action(a, s, x, n) / expect - 1));
    }
  o.detail << "max relative error " << num(worst) << " ";
  o.check(worst < 1e-4, "relative 1e-4");
}

void alpha0_consistency(Outcome& o) {
  double worst = 0;
  for (double s : {0.2, 0.35, 0.5, 0.65, 0.8})
    for (double nu : {0.1, 0.5, 1.0, 2.0, 3.0}) {
      const auto tc = compute_constants(KernelSpec::constant_pair(nu), Eigen::MatrixXd::Identity(1, 1), s);
      worst = std::max(worst, std::abs(tc.alpha0 - solve_alpha0_simple(s, nu, 1e-13)));
    }
  o.detail << "max root difference " << num(worst) << " on 25 cases ";
  o.check(worst < 1e-9, "tolerance 1e-9");
}

void profile_residual(Outcome& o) {
  std::vector<double> pts;
  for (int k = 1; k <= 8; ++k) pts.push_back(std::ldexp(1.0, -k)), pts.push_back(-std::ldexp(1.0, -k));
  for (auto [s, nu] : {std::pair{0.5, 1.0}, {0.75, 2.0}}) {
    const auto P = build_profile(s, nu, 1);
    const auto r = residual_check(P, pts, QuadratureConfig{1e-9, 1e-9, 60, 0.5});
    for (Side side : {Side::Omega2, Side::Omega1}) {
      double first = 0, worst = 0;
      for (const auto& x : r)
        if (x.side == side) {
          if (first == 0) first = std::abs(x.residual);
          worst = std::max(worst, std::abs(x.residual));
        }
      const std::string tag = "(" + num(s) + "," + num(nu) + ") " + (side == Side::Omega2 ? "Omega2" : "Omega1");
      o.detail << tag << " growth " << num(worst / first) << " ";
      o.check(worst <= 2 * first, tag + " growth <= 2");
    }
  }
}

// 1D solve with exterior data and load of the exact profile
struct ProfileSolve {
  std::shared_ptr<const HomogeneousProfile> P;
  ProblemSpec spec;
};

ProfileSolve profile_problem(double s, double nu) {
  ProfileSolve ps;
  ps.P = std::make_shared<const HomogeneousProfile>(build_profile(s, nu, 1));
  auto P = ps.P;
  ps.spec = ProblemSpec::make(1, s, KernelSpec::constant_pair(nu));
  ps.spec.exterior_data = [P](const Point& x) { return eval_profile(*P, x[0]); };
  ps.spec.f = [P](const Point& x) {
    const double t = x[0];
    if (t == 0) return 0.0;
    const double br[] = {-P->cutoff.r_out, -P->cutoff.r_in, 0.0, P->cutoff.r_in, P->cutoff.r_out};
    return transmission_residual([&](double r) { return eval_profile(*P, r); }, t < 0 ? eval_profile(*P, t, 2) : 0.0,
                                 P->s, P->nu, P->nu_prime, 1, t, QuadratureConfig{1e-8, 1e-8, 60, 0.5}, br);
  };
  ps.spec.domain_radius = P->cutoff.r_out;
  ps.spec.truncation_radius = ps.spec.domain_radius + 1;
  return ps;
}

struct InterfaceRun {
  double ratio = 0, alpha2 = 0, alpha1 = 0;
};

InterfaceRun solve_and_fit(const ProfileSolve& ps, int depth) {
  const auto m = std::make_shared<const Mesh>(build_mesh(ps.spec, 0.05, 0.85, depth));
  const auto u = solve_full(ps.spec, m).field;
  const std::pair<double, double> w{4 * m->h_min, 0.01};
  const auto rep = analyze_interface(u, 0, 0, 1, ps.P->alpha0, ps.spec.s, w);
  return {rep.ratio_hat, rep.alpha_hat_omega2, rep.alpha_hat_omega1};
}

void transmission_condition(Outcome& o) {
  for (auto [s, nu] : {std::pair{0.5, 1.0}, {0.75, 2.0}}) {
    const auto ps = profile_problem(s, nu);
    const double M0 = ps.P->M0;
    const auto phi = [&](const Point& x) { return eval_profile(*ps.P, x[0]); };
    const double exact = std::abs(transmission_ratio(phi, 0, 0, 1, ps.P->alpha0, s, {1e-5, 1e-2}) / M0 - 1);
    const double coarse = std::abs(solve_and_fit(ps, 45).ratio / M0 - 1);
    const double fine = std::abs(solve_and_fit(ps, 65).ratio / M0 - 1);
    const std::string tag = "(" + num(s) + "," + num(nu) + ")";
    o.detail << tag << " profile " << num(exact) << " solved " << num(coarse) << " -> " << num(fine) << " ";
    o.check(exact < 0.01, tag + " profile ratio 1%");
    o.check(fine < 0.15, tag + " solved ratio 15%");
    o.check(fine < coarse, tag + " decrease under refinement");
  }
}

void exponent_recovery(Outcome& o) {
  for (auto [s, nu] : {std::pair{0.5, 1.0}, {0.75, 2.0}}) {
    const auto ps = profile_problem(s, nu);
    const auto r = solve_and_fit(ps, 65);
    const double a0 = ps.P->alpha0, a1 = a0 + 2 - 2 * s;
    const double e2 = std::abs(r.alpha2 / a0 - 1), e1 = std::abs(r.alpha1 / a1 - 1);
    const std::string tag = "(" + num(s) + "," + num(nu) + ")";
    o.detail << tag << " Omega2 " << num(e2) << " Omega1 " << num(e1) << " ";
    o.check(e2 < 0.1, tag + " Omega2 10%");
    o.check(e1 < 0.1, tag + " Omega1 10%");
  }
}

KernelSpec sanity_kernel() {
  auto k = KernelSpec::constant_pair(1.5, 1.2);
  k.lambda = 1;
  return k;
}

void solver_sanity(Outcome& o) {
  // constants
  double cerr = 0;
  for (int n : {1, 2})
    for (double s : {0.25, 0.75}) {
      auto sp = ProblemSpec::make(n, s, sanity_kernel());
      sp.exterior_data = [](const Point&) { return 1.0; };
      const auto m = std::make_shared<const Mesh>(build_mesh(sp, n == 1 ? 0.1 : 0.25));
      cerr = std::max(cerr, (solve_full(sp, m).field.values.array() - 1).abs().maxCoeff());
    }
  o.detail << "constants " << num(cerr) << " ";
  o.check(cerr < 1e-10, "constants 1e-10");
  // tangential ramp, flat interface
  std::vector<double> rerr;
  for (int N : {8, 16}) {
    auto sp = ProblemSpec::make(2, 0.75, sanity_kernel());
    sp.exterior_data = [](const Point& x) { return x[0]; };
    const auto m = std::make_shared<const Mesh>(build_mesh(sp, 2.0 / N));
    const auto u = solve_full(sp, m).field;
    double e = 0;
    for (int i = 0; i < m->vertex_count(); ++i) e = std::max(e, std::abs(u.values[i] - m->vertices[i][0]));
    rerr.push_back(e);
  }
  o.detail << "ramp " << num(rerr[0]) << " -> " << num(rerr[1]) << " ";
  o.check(rerr[1] <= 0.55 * rerr[0], "ramp error halves");
  // symmetry
  double asym = 0;
  for (int n : {1, 2}) {
    const auto sp = ProblemSpec::make(n, 0.6, sanity_kernel());
    const auto K = assemble(sp, build_mesh(sp, n == 1 ? 0.05 : 0.25)).system();
    asym = std::max(asym, (K - K.transpose()).cwiseAbs().maxCoeff() / K.cwiseAbs().maxCoeff());
  }
  o.detail << "asymmetry " << num(asym) << " ";
  o.check(asym < 1e-12, "symmetry 1e-12");
  // energy minimality
  double margin = kInf;
  for (int n : {1, 2}) {
    auto sp = ProblemSpec::make(n, 0.75, sanity_kernel());
    sp.exterior_data = [](const Point& x) { return std::tanh(x[0]) + 0.5 * std::tanh(2 * x[1] + x[0]); };
    const auto m = std::make_shared<const Mesh>(build_mesh(sp, n == 1 ? 0.1 : 0.25));
    const auto sol = solve_full(sp, m);
    const double E0 = energy(sol.field, sp, sol.assembly);
    std::mt19937 rng(7);
    std::normal_distribution<double> N(0, 1);
    for (int t = 0; t < 20; ++t) {
      auto f = sol.field;
      for (int i = 0; i < m->vertex_count(); ++i)
        if (!m->on_boundary[i]) f.values[i] += 1e-2 * N(rng);
      margin = std::min(margin, energy(f, sp, sol.assembly) - E0);
    }
  }
  o.detail << "energy margin " << num(margin) << " ";
  o.check(margin > 0, "energy minimality");
  // epsilon scaling of entries between non-adjacent nodes
  const double s = 0.6;
  auto sp = ProblemSpec::make(1, s, sanity_kernel());
  const auto m = build_mesh(sp, 0.1);
  const auto K1 = assemble(sp, m).system();
  sp.epsilon = 0.5;
  const auto K2 = assemble(sp, m).system();
  double dev = 0;
  int used = 0;
  for (int i = 0; i < m.vertex_count(); ++i)
    for (int j = 0; j < m.vertex_count(); ++j) {
      const bool adjacent = std::abs(m.vertices[i][0] - m.vertices[j][0]) < 0.11 + 1e-9;
      if (adjacent || K1(i, j) == 0) continue;
      dev = std::max(dev, std::abs(K2(i, j) / K1(i, j) - std::pow(2.0, -2 * (1 - s))));
      ++used;
    }
  o.detail << "eps ratio deviation " << num(dev) << " over " << used << " entries ";
  o.check(used > 0 && dev < 1e-10, "eps scaling 1e-10");
}

void reflection(Outcome& o) {
  double worst = 0, formula = 0, minval = kInf;
  for (int n : {1, 2}) {
    auto sp = ProblemSpec::make(n, 0.5, KernelSpec::constant_pair(1.0));
    sp.g = [](double x) { return 0.1 * x; };
    sp.g_lipschitz = 0.1;
    const auto src = std::make_shared<const Mesh>(restrict_mesh(build_mesh(sp, n == 1 ? 0.05 : 0.2), Side::Omega2));
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> U(-1, 1);
    for (int trial = 0; trial < 100; ++trial) {
      Eigen::VectorXd v(src->vertex_count());
      for (int i = 0; i < v.size(); ++i) {
        const bool on_graph = std::abs(sp.normal_offset(src->vertices[i])) < 1e-12;
        v[i] = src->on_boundary[i] && !on_graph ? 0.0 : U(rng);
      }
      const DiscreteField f{src, v, [](const Point&) { return 0.0; }};
      const auto T = reflect(f, sp.g);
      for (double l : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const double b = level_set_measure(f, l);
        if (b > 0) worst = std::max(worst, level_set_measure(T, l) / b);
      }
      // image formula at the reflected nodes
      for (int i = 0; i < T.mesh->vertex_count(); ++i) {
        const Point& x = T.mesh->vertices[i];
        if (sp.normal_offset(x) >= 0) continue;
        Point y = x;
        const double gx = sp.interface_height(x[0]);
        y[n - 1] = 4 * gx - 3 * x[n - 1];
        formula = std::max(formula, std::abs(T.values[i] - f(y)));
      }
      // positivity: reflect |v|
      const DiscreteField fa{src, v.cwiseAbs(), [](const Point&) { return 0.0; }};
      minval = std::min(minval, reflect(fa, sp.g).values.minCoeff());
    }
  }
  o.detail << "formula " << num(formula) << " min of image " << num(minval) << " max ratio " << num(worst) << " ";
  o.check(formula < 1e-12, "image formula");
  o.check(minval >= 0, "positivity");
  o.check(worst <= 4.0 / 3 * (1 + 1e-12), "4/3 measure bound");
}

void flattening(Outcome& o) {
  std::vector<double> diff;
  double osc = 0, det = 0;
  for (int N : {8, 16}) {
    auto sp = ProblemSpec::make(2, 0.75, sanity_kernel());
    sp.g = [](double x) { return 0.1 * x; };
    sp.g_lipschitz = 0.1;
    sp.f = [](const Point&) { return 1.0; };
    const auto m = std::make_shared<const Mesh>(build_mesh(sp, 2.0 / N));
    const auto u = solve_full(sp, m).field;
    const auto fl = flatten(sp);
    const auto mf = std::make_shared<const Mesh>(build_mesh(fl.flat, 2.0 / N));
    const auto w = solve_full(fl.flat, mf).field;
    double d = 0;
    for (int i = 0; i < m->vertex_count(); ++i) {
      const Point& x = m->vertices[i];
      d = std::max(d, std::abs(u.values[i] - w(fl.Q(x))));
      det = std::max(det, std::abs(fl.jacobian(x).determinant() - 1));
    }
    diff.push_back(d);
    osc = u.values.maxCoeff() - u.values.minCoeff();
  }
  o.detail << "max |u - w(Q)| " << num(diff[0]) << " -> " << num(diff[1]) << " relative " << num(diff[1] / osc)
           << " det deviation " << num(det) << " ";
  o.check(diff[1] < diff[0], "decrease under refinement");
  o.check(diff[1] < 0.05 * osc, "5% of oscillation");
  o.check(det == 0, "unit Jacobian");
}

void conormal(Outcome& o) {
  bool iso = true;
  for (int n : {2, 3})
    for (double s : {0.4, 0.75}) {
      const auto tc = compute_constants(KernelSpec::constant_pair(1.5), Eigen::MatrixXd::Identity(n, n), s);
      iso = iso && tc.nu2.isZero(0) && tc.compatible;
    }
  o.check(iso, "isotropic nu2 = 0 and compatible");
  auto h1 = [](const Point& z) { return 1 + 0.5 * z[0] * z[1] / (z[0] * z[0] + z[1] * z[1]); };
  auto h2 = [](const Point& z) {
    const double r2 = z[0] * z[0] + z[1] * z[1];
    return 1.5 + 0.25 * z[0] * z[1] / r2 + 0.3 * z[0] * z[0] / r2;
  };
  const auto k = KernelSpec::homogeneous(h1, h2, 0.5, 2.0);
  Eigen::MatrixXd A(2, 2);
  A << 1, 0.3, 0.3, 1;
  const double s = 0.75;
  const auto cancel = [&](Nu2Variant v) {
    const auto tc = compute_constants(k, A, s, 0.0, {}, v);
    const auto [I1, I2] = truncated_moments(tc, k, kInf, s);
    return std::pair{tc.nu2[0], I1[0] / (2 * s - 1) + I2[0] / (2 * s)};
  };
  const auto [nu_c, res_c] = cancel(Nu2Variant::Cancellation);
  const auto [nu_d, res_d] = cancel(Nu2Variant::Definition);
  o.detail << "isotropic exact " << (iso ? "yes" : "no") << "; cancellation variant nu2 " << num(nu_c) << " residual "
           << num(res_c) << "; discrepancy: definition variant nu2 " << num(nu_d) << " leaves residual " << num(res_d)
           << " ";
  o.check(std::abs(res_c) < 1e-8, "cancellation oracle 1e-8");
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    void (*fn)(Outcome&);
    double budget;  // seconds
  };
  const Criterion all[] = {
      {"1 q-identities", q_identities, 5},
      {"2 homogeneous action", homogeneous_action_check, 30},
      {"3 alpha0 consistency", alpha0_consistency, 10},
      {"4 profile residual boundedness", profile_residual, 60},
      {"5 transmission condition", transmission_condition, 120},
      {"6 exponent recovery", exponent_recovery, 120},
      {"7 solver sanity", solver_sanity, 180},
      {"8 reflection operator", reflection, 30},
      {"9 flattening equivalence", flattening, 300},
      {"10 nu2 and compatibility", conormal, 30},
  };
  int failed = 0;
  for (const auto& c : all) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.fn(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "[exception: " << e.what() << "] ";
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.check(dt < c.budget, "runtime budget " + num(c.budget) + " s");
    std::printf("%s criterion %s: %s(%.1f s)\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.str().c_str(), dt);
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d of %zu criteria passed\n", int(std::size(all)) - failed, std::size(all));
  return failed == 0 ? 0 : 1;
}
