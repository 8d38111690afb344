#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "translab/analysis.hpp"
#include "translab/coeffs.hpp"
#include "translab/errors.hpp"
#include "translab/homog.hpp"
#include "translab/mesh.hpp"
#include "translab/problem.hpp"
#include "translab/solver.hpp"

namespace translab {

// Flat key = value text with dotted sections; '#' starts a comment.
struct ExperimentConfig {
  std::string command;
  std::map<std::string, std::string> values;
  std::string output_dir = ".";
  bool plot = false;
  unsigned seed = 0;

  bool has(const std::string& k) const { return values.count(k) > 0; }
  std::string str(const std::string& k, const std::string& def) const {
    auto it = values.find(k);
    return it == values.end() ? def : it->second;
  }
  double num(const std::string& k, double def) const {
    auto it = values.find(k);
    if (it == values.end()) return def;
    try {
      std::size_t pos = 0;
      const double v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw DomainError("config: key " + k + " expects a number, got '" + it->second + "'");
    }
  }
  int integer(const std::string& k, int def) const {
    const double v = num(k, def);
    if (v != std::floor(v)) throw DomainError("config: key " + k + " expects an integer");
    return int(v);
  }
};

inline const std::set<std::string>& known_config_keys() {
  static const std::set<std::string> keys{
      "command",          "problem.n",          "problem.s",        "problem.epsilon",   "problem.delta",
      "problem.domain_radius", "problem.truncation_radius", "problem.A", "problem.b",    "problem.f",
      "problem.exterior", "problem.g",          "kernel.mode",      "kernel.nu",         "kernel.a1",
      "kernel.nu_prime",  "kernel.lambda",      "kernel.Lambda",    "kernel.anisotropy", "mesh.h",
      "mesh.grading",     "mesh.depth",         "solve.angles",     "analysis.depths",   "analysis.window_max",
      "profile.points",   "flatten.cells"};
  return keys;
}

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream is(text);
  std::string line;
  int no = 0;
  while (std::getline(is, line)) {
    ++no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw DomainError("config: line " + std::to_string(no) + " is not of the form key = value");
    const std::string k = trim(line.substr(0, eq));
    if (k.empty()) throw DomainError("config: line " + std::to_string(no) + " has an empty key");
    kv[k] = trim(line.substr(eq + 1));
  }
  return kv;
}

inline std::vector<double> parse_list(const std::string& v, const std::string& key) {
  std::vector<double> out;
  std::istringstream ss(v);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(std::stod(trim(tok)));
    } catch (const std::exception&) {
      throw DomainError("config: key " + key + " has a malformed number list '" + v + "'");
    }
  }
  return out;
}

// name:args split
inline std::pair<std::string, std::vector<double>> parse_builtin(const std::string& v, const std::string& key) {
  const auto c = v.find(':');
  if (c == std::string::npos) return {trim(v), {}};
  return {trim(v.substr(0, c)), parse_list(v.substr(c + 1), key)};
}

// Registry of named scalar fields: constant:c, ramp:c0,c1[,c2], power:alpha,
// gaussian:amp,width, profile (the homogeneous profile of the kernel)
inline ScalarField builtin_field(const std::string& v, const std::string& key, const ProblemSpec& spec,
                                 std::shared_ptr<const HomogeneousProfile> profile) {
  const auto [name, a] = parse_builtin(v, key);
  const int n = spec.n;
  const auto g = spec.g;
  const auto offset = [n, g](const Point& x) { return x[n - 1] - (n == 1 ? 0.0 : g(x[0])); };
  const auto need = [&](std::size_t lo, std::size_t hi) {
    if (a.size() < lo || a.size() > hi) throw DomainError("config: " + key + " '" + v + "' has the wrong number of arguments");
  };
  if (name == "constant") {
    need(1, 1);
    const double c = a[0];
    return [c](const Point&) { return c; };
  }
  if (name == "ramp") {
    need(2, 3);
    const double c0 = a[0], c1 = a[1], c2 = a.size() > 2 ? a[2] : 0.0;
    return [c0, c1, c2](const Point& x) { return c0 + c1 * x[0] + c2 * x[1]; };
  }
  if (name == "power") {
    need(1, 1);
    const double al = a[0];
    return [al, offset](const Point& x) { return rho(al, offset(x)); };
  }
  if (name == "gaussian") {
    need(2, 2);
    const double amp = a[0], w = a[1];
    if (!(w > 0)) throw DomainError("config: " + key + " gaussian width must be positive");
    return [amp, w](const Point& x) { return amp * std::exp(-(x[0] * x[0] + x[1] * x[1]) / (w * w)); };
  }
  if (name == "profile") {
    need(0, 0);
    if (!profile) throw DomainError("config: " + key + " profile needs a constant-pair kernel");
    return [profile, offset](const Point& x) { return eval_profile(*profile, offset(x)); };
  }
  throw DomainError("config: " + key + " names an unknown field '" + name + "'");
}

struct BuiltProblem {
  ProblemSpec spec;
  std::shared_ptr<const HomogeneousProfile> profile;
};

inline BuiltProblem build_problem(const ExperimentConfig& c) {
  BuiltProblem out;
  const int n = c.integer("problem.n", 1);
  const double s = c.num("problem.s", 0.5);
  if (!(s > 0 && s < 1)) throw DomainError("problem.s: order must lie in (0,1)");
  if (n != 1 && n != 2) throw DomainError("problem.n: dimension must be 1 or 2");
  const std::string mode = c.str("kernel.mode", "constant_pair");
  const double nu = c.num("kernel.nu", 1.0), a1 = c.num("kernel.a1", 1.0);
  KernelSpec k;
  if (mode == "constant_pair") {
    k = KernelSpec::constant_pair(nu, a1);
    if (c.has("kernel.nu_prime")) k.nu_prime = c.num("kernel.nu_prime", nu);
  } else if (mode == "homogeneous") {
    const double an = c.num("kernel.anisotropy", 0.0);
    // a_i(z) = base_i (1 + anisotropy z_1^2 / |z|^2)
    const auto dir = [an](double base) {
      return [an, base](const Point& z) {
        const double r2 = z[0] * z[0] + z[1] * z[1] + z[2] * z[2];
        return base * (1 + an * (r2 > 0 ? z[0] * z[0] / r2 : 0.0));
      };
    };
    k = KernelSpec::homogeneous(dir(a1), dir(nu), std::min(a1, nu) * std::min(1.0, 1 + an),
                                std::max(a1, nu) * std::max(1.0, 1 + an));
  } else {
    throw DomainError("kernel.mode: expected constant_pair or homogeneous, got '" + mode + "'");
  }
  if (c.has("kernel.lambda")) k.lambda = c.num("kernel.lambda", k.lambda);
  if (c.has("kernel.Lambda")) k.Lambda = c.num("kernel.Lambda", k.Lambda);
  ProblemSpec p = ProblemSpec::make(n, s, k);
  p.epsilon = c.num("problem.epsilon", 1.0);
  p.delta = c.num("problem.delta", 0.0);
  p.domain_radius = c.num("problem.domain_radius", 1.0);
  p.truncation_radius = c.num("problem.truncation_radius", 2 * p.domain_radius);
  // interface graph
  {
    const auto [name, a] = parse_builtin(c.str("problem.g", "flat"), "problem.g");
    if (name == "flat") {
      p.g = [](double) { return 0.0; };
      p.g_lipschitz = 0;
    } else if (name == "linear" && a.size() == 1) {
      const double cc = a[0];
      p.g = [cc](double x) { return cc * x; };
      p.g_lipschitz = std::abs(cc);
    } else if (name == "quadratic" && a.size() == 1) {
      const double cc = a[0];
      p.g = [cc](double x) { return cc * x * x; };
      p.g_lipschitz = 2 * std::abs(cc) * p.domain_radius;
    } else {
      throw DomainError("problem.g: expected flat, linear:c or quadratic:c");
    }
    if (n == 1 && name != "flat") throw DomainError("problem.g: a 1D interface is the point 0 (use flat)");
  }
  // local matrix
  {
    const auto [name, a] = parse_builtin(c.str("problem.A", "identity"), "problem.A");
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
    if (name == "identity") {
    } else if (name == "scalar" && a.size() == 1) {
      A *= a[0];
    } else if (name == "diag" && int(a.size()) == n) {
      for (int i = 0; i < n; ++i) A(i, i) = a[i];
    } else if (name == "full" && int(a.size()) == n * n) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = a[i * n + j];
    } else {
      throw DomainError("problem.A: expected identity, scalar:c, diag:... or full:... with n entries");
    }
    p.A = [A](const Point&) { return A; };
    // default ellipticity bounds cover both the kernel weights and A
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (A + A.transpose()));
    if (!c.has("kernel.lambda")) p.kernel.lambda = std::min(p.kernel.lambda, es.eigenvalues().minCoeff());
    if (!c.has("kernel.Lambda")) p.kernel.Lambda = std::max(p.kernel.Lambda, es.eigenvalues().maxCoeff());
  }
  {
    const auto b = parse_list(c.str("problem.b", n == 1 ? "0" : "0,0"), "problem.b");
    p.b = Eigen::Map<const Eigen::VectorXd>(b.data(), Eigen::Index(b.size()));
  }
  if (k.mode == KernelMode::ConstantPair && nu > 0) {
    try {
      auto prof = std::make_shared<HomogeneousProfile>(build_profile(s, nu, n, {}, -1, k.nu_prime));
      out.profile = prof;
    } catch (const NumericalError&) {
    }
  }
  p.f = builtin_field(c.str("problem.f", "constant:0"), "problem.f", p, out.profile);
  p.exterior_data = builtin_field(c.str("problem.exterior", "constant:0"), "problem.exterior", p, out.profile);
  out.spec = p;
  return out;
}

inline std::vector<std::string> validate(const ExperimentConfig& c) {
  std::vector<std::string> v;
  static const std::set<std::string> commands{"exponent", "profile", "solve", "analyze", "flatten-check"};
  if (!commands.count(c.command)) v.push_back("command: unknown command '" + c.command + "'");
  for (const auto& [k, val] : c.values)
    if (!known_config_keys().count(k)) v.push_back("config: unknown key " + k);
  try {
    const auto bp = build_problem(c);
    for (const auto& s : bp.spec.violations()) v.push_back(s);
    if (c.num("mesh.h", 0.1) <= 0) v.push_back("mesh.h: must be positive");
    const double gr = c.num("mesh.grading", 0.85);
    if (!(gr > 0 && gr <= 1)) v.push_back("mesh.grading: must lie in (0,1]");
    if (c.integer("mesh.depth", 0) < 0) v.push_back("mesh.depth: must be nonnegative");
    if (c.integer("solve.angles", 64) < 4) v.push_back("solve.angles: need at least 4 directions");
  } catch (const Error& e) {
    v.push_back(e.what());
  }
  return v;
}

// Static SVG line chart
struct Series {
  std::string label;
  std::vector<double> x, y;
};

inline void write_svg(const std::string& path, const std::string& title, const std::vector<Series>& series,
                      bool logx = false, bool logy = false) {
  const double W = 640, H = 420, L = 60, R = 20, T = 40, B = 50;
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  const auto tx = [logx](double v) { return logx ? std::log10(v) : v; };
  const auto ty = [logy](double v) { return logy ? std::log10(std::abs(v)) : v; };
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      x0 = std::min(x0, tx(s.x[i])), x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, ty(s.y[i])), y1 = std::max(y1, ty(s.y[i]));
    }
  if (!(x1 > x0)) x1 = x0 + 1;
  if (!(y1 > y0)) y1 = y0 + 1;
  std::ofstream os(path);
  char buf[128];
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\">" << title
     << "</text>\n";
  os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    os << "<polyline fill=\"none\" stroke=\"" << colors[k % 5] << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double px = L + (tx(s.x[i]) - x0) / (x1 - x0) * (W - L - R);
      const double py = H - B - (ty(s.y[i]) - y0) / (y1 - y0) * (H - T - B);
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px, py);
      os << buf;
    }
    os << "\"/>\n";
    os << "<text x=\"" << L + 10 << "\" y=\"" << T + 18 * (k + 1) << "\" fill=\"" << colors[k % 5]
       << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.label << "</text>\n";
  }
  std::snprintf(buf, sizeof buf, "%.4g", logx ? std::pow(10, x0) : x0);
  os << "<text x=\"" << L << "\" y=\"" << H - B + 18 << "\" font-size=\"11\">" << buf << "</text>\n";
  std::snprintf(buf, sizeof buf, "%.4g", logx ? std::pow(10, x1) : x1);
  os << "<text x=\"" << W - R << "\" y=\"" << H - B + 18 << "\" font-size=\"11\" text-anchor=\"end\">" << buf
     << "</text>\n";
  std::snprintf(buf, sizeof buf, "%.4g", logy ? std::pow(10, y0) : y0);
  os << "<text x=\"" << L - 4 << "\" y=\"" << H - B << "\" font-size=\"11\" text-anchor=\"end\">" << buf << "</text>\n";
  std::snprintf(buf, sizeof buf, "%.4g", logy ? std::pow(10, y1) : y1);
  os << "<text x=\"" << L - 4 << "\" y=\"" << T + 10 << "\" font-size=\"11\" text-anchor=\"end\">" << buf
     << "</text>\n";
  os << "</svg>\n";
}

namespace detail {

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream os(p);
  if (!os) throw DomainError("cli: cannot write " + p.string());
  os << text;
}

inline void write_rows(const std::filesystem::path& p, const std::vector<CsvRow>& rows) {
  std::ofstream os(p);
  if (!os) throw DomainError("cli: cannot write " + p.string());
  write_csv(os, rows);
}

// residual of the homogeneous profile, the load that makes it an exact solution
inline ScalarField profile_residual_field(std::shared_ptr<const HomogeneousProfile> P) {
  return [P](const Point& x) {
    const double t = x[0];
    if (t == 0) return 0.0;
    const double br[] = {-P->cutoff.r_out, -P->cutoff.r_in, 0.0, P->cutoff.r_in, P->cutoff.r_out};
    return transmission_residual([&](double r) { return eval_profile(*P, r); }, t < 0 ? eval_profile(*P, t, 2) : 0.0,
                                 P->s, P->nu, P->nu_prime, P->n, t, QuadratureConfig{1e-8, 1e-8, 60, 0.5}, br);
  };
}

inline int run_exponent(const ExperimentConfig& c, const std::filesystem::path& out) {
  const auto bp = build_problem(c);
  const ProblemSpec& p = bp.spec;
  const Eigen::MatrixXd A = p.A(Point{0, 0, 0});
  const auto tc = compute_constants(p.kernel, A, p.s, p.b[p.n - 1]);
  std::vector<CsvRow> rows;
  const bool cp = p.kernel.mode == KernelMode::ConstantPair;
  const double simple = cp ? solve_alpha0_simple(p.s, p.kernel.nu, 1e-12) : std::numeric_limits<double>::quiet_NaN();
  rows.push_back({"alpha0", p.s, tc.alpha0, simple});
  if (cp) rows.push_back({"q_at_alpha0", p.s, q_value(p.s, tc.alpha0), (1 - p.kernel.nu / 2) / (2 * p.s)});
  rows.push_back({"alpha0_omega1", p.s, tc.alpha0 + 2 - 2 * p.s});
  rows.push_back({"M0", p.s, tc.M0});
  rows.push_back({"k_star", p.s, double(profile_k_star(tc.alpha0, p.s))});
  rows.push_back({"A_s1", p.s, tc.A_s1});
  rows.push_back({"A_s2", p.s, tc.A_s2});
  for (int i = 0; i < tc.nu2.size(); ++i) rows.push_back({"nu2_" + std::to_string(i + 1), p.s, tc.nu2[i]});
  rows.push_back({"compatible", p.s, tc.compatible ? 1.0 : 0.0});
  write_rows(out / "exponent.csv", rows);
  if (c.plot) {
    Series qs{"q(s,alpha)", {}, {}}, target{"target", {}, {}};
    const double lo = std::max(2 * p.s - 1, 0.0), hi = 2 * p.s;
    for (int i = 1; i < 100; ++i) {
      const double a = lo + (hi - lo) * i / 100;
      qs.x.push_back(a);
      qs.y.push_back(q_value(p.s, a));
      target.x.push_back(a);
      target.y.push_back(cp ? (1 - p.kernel.nu / 2) / (2 * p.s) : 0.0);
    }
    write_svg((out / "exponent.svg").string(), "q(s, alpha) on the admissible range", {qs, target});
  }
  return 0;
}

inline int run_profile(const ExperimentConfig& c, const std::filesystem::path& out) {
  const auto bp = build_problem(c);
  if (!bp.profile) throw DomainError("profile: needs a constant-pair kernel with nu > 0");
  const auto& P = *bp.profile;
  write_text(out / "profile.txt", serialize_profile(P));
  const int kmax = c.integer("profile.points", 8);
  std::vector<double> pts;
  for (int k = 1; k <= kmax; ++k) pts.push_back(std::ldexp(1.0, -k)), pts.push_back(-std::ldexp(1.0, -k));
  const auto res = residual_check(P, pts, QuadratureConfig{1e-9, 1e-9, 60, 0.5});
  std::vector<CsvRow> rows;
  rows.push_back({"alpha0", 0, P.alpha0});
  rows.push_back({"M0", 0, P.M0, transmission_constant_M0(P.alpha0, P.nu, P.n, P.s, {}, P.nu_prime)});
  for (const auto& r : res)
    rows.push_back({r.side == Side::Omega2 ? "residual_omega2" : "residual_omega1", std::abs(r.x_n), r.residual});
  write_rows(out / "profile.csv", rows);
  if (c.plot) {
    Series s{"Phi", {}, {}};
    for (int i = 0; i <= 400; ++i) {
      const double x = -2.2 + 4.4 * i / 400;
      s.x.push_back(x);
      s.y.push_back(eval_profile(P, x));
    }
    write_svg((out / "profile.svg").string(), "homogeneous profile", {s});
  }
  return 0;
}

inline std::shared_ptr<const Mesh> mesh_from(const ExperimentConfig& c, const ProblemSpec& p) {
  return std::make_shared<const Mesh>(
      build_mesh(p, c.num("mesh.h", 0.1), c.num("mesh.grading", 0.85), c.integer("mesh.depth", 0)));
}

inline int run_solve(const ExperimentConfig& c, const std::filesystem::path& out) {
  const auto bp = build_problem(c);
  const ProblemSpec& p = bp.spec;
  SolveOptions so;
  so.assembly.angles = c.integer("solve.angles", 64);
  const auto mesh = mesh_from(c, p);
  const auto sol = solve_full(p, mesh, so);
  std::vector<CsvRow> rows;
  const double h = mesh->h_max;
  double err = 0;
  for (int i = 0; i < mesh->vertex_count(); ++i)
    err = std::max(err, std::abs(sol.field.values[i] - p.exterior_data(mesh->vertices[i])));
  rows.push_back({"nodes", h, double(mesh->vertex_count())});
  rows.push_back({"residual", h, sol.residual, 0.0});
  rows.push_back({"rcond", h, sol.rcond});
  rows.push_back({"max_error", h, err, 0.0});
  if (p.kernel.variational()) {
    const double E0 = energy(sol.field, p, sol.assembly, so.assembly);
    rows.push_back({"energy", h, E0});
    // seeded perturbations of the interior nodes never lower the energy
    std::mt19937 rng(c.seed);
    std::normal_distribution<double> N(0.0, 1.0);
    double margin = std::numeric_limits<double>::infinity();
    for (int t = 0; t < 20; ++t) {
      DiscreteField f = sol.field;
      for (int i = 0; i < mesh->vertex_count(); ++i)
        if (!mesh->on_boundary[i]) f.values[i] += 1e-2 * N(rng);
      margin = std::min(margin, energy(f, p, sol.assembly, so.assembly) - E0);
    }
    rows.push_back({"energy_min_margin", h, margin});
  }
  write_rows(out / "solve.csv", rows);
  write_text(out / "mesh.txt", mesh->to_text());
  write_text(out / "field.txt", sol.field.to_text());
  if (c.plot) {
    Series s{"u_h on x' = 0", {}, {}};
    const double R = p.domain_radius;
    for (int i = 0; i <= 200; ++i) {
      const double t = -R + 2 * R * i / 200;
      const Point x = p.n == 1 ? Point{t, 0, 0} : Point{0, t + p.g(0), 0};
      s.x.push_back(t);
      s.y.push_back(sol.field(x));
    }
    write_svg((out / "solve.svg").string(), "discrete solution across the interface", {s});
  }
  return 0;
}

inline int run_analyze(const ExperimentConfig& c, const std::filesystem::path& out) {
  auto bp = build_problem(c);
  ProblemSpec p = bp.spec;
  if (p.n != 1) throw DomainError("analyze: the interface study runs in 1D");
  if (!bp.profile) throw DomainError("analyze: needs a constant-pair kernel with nu > 0");
  const auto P = bp.profile;
  // exterior data and load of the exact profile, which is then the solution
  p.exterior_data = [P](const Point& x) { return eval_profile(*P, x[0]); };
  p.f = profile_residual_field(P);
  if (!c.has("problem.domain_radius")) p.domain_radius = P->cutoff.r_out;
  if (!c.has("problem.truncation_radius")) p.truncation_radius = p.domain_radius + 1;
  p.validate();
  const auto depths = parse_list(c.str("analysis.depths", "45,65"), "analysis.depths");
  const double wmax = c.num("analysis.window_max", 0.01);
  std::vector<CsvRow> rows;
  std::vector<Series> plots;
  for (double d : depths) {
    const auto mesh = std::make_shared<const Mesh>(build_mesh(p, c.num("mesh.h", 0.05), c.num("mesh.grading", 0.85), int(d)));
    const auto sol = solve_full(p, mesh);
    double err = 0;
    for (int i = 0; i < mesh->vertex_count(); ++i)
      err = std::max(err, std::abs(sol.field.values[i] - p.exterior_data(mesh->vertices[i])));
    const std::pair<double, double> w{4 * mesh->h_min, wmax};
    const auto rep = analyze_interface(sol.field, 0, 0, 1, P->alpha0, p.s, w);
    const double h = mesh->h_min;
    rows.push_back({"alpha_omega2", h, rep.alpha_hat_omega2, P->alpha0});
    rows.push_back({"alpha_omega1", h, rep.alpha_hat_omega1, P->alpha0 + 2 - 2 * p.s});
    rows.push_back({"ratio", h, rep.ratio_hat, P->M0});
    rows.push_back({"max_error", h, err, 0.0});
    if (c.plot) {
      Series s{"|u(t)-u(0)|, h_min = " + csv_number(h), {}, {}};
      for (const auto& smp : trace_samples(sol.field, 0, 0, 1, +1, w, 24)) s.x.push_back(smp.t), s.y.push_back(smp.value);
      plots.push_back(s);
    }
  }
  write_rows(out / "analyze.csv", rows);
  if (c.plot) write_svg((out / "analyze.svg").string(), "Omega2 trace near the interface", plots, true, true);
  return 0;
}

inline int run_flatten_check(const ExperimentConfig& c, const std::filesystem::path& out) {
  const auto bp = build_problem(c);
  const ProblemSpec& p = bp.spec;
  if (p.n != 2) throw DomainError("flatten-check: needs problem.n = 2");
  const auto fl = flatten(p);
  SolveOptions so;
  so.assembly.angles = c.integer("solve.angles", 64);
  const int N0 = c.integer("flatten.cells", 8);
  std::vector<CsvRow> rows;
  double worst_det = 0;
  for (int i = 0; i <= 20; ++i) {
    const Point x{-p.domain_radius + 2 * p.domain_radius * i / 20, 0, 0};
    worst_det = std::max(worst_det, std::abs(fl.jacobian(x).determinant() - 1));
  }
  rows.push_back({"det_jacobian_deviation", 0, worst_det, 0.0});
  for (int N : {N0, 2 * N0}) {
    const double h = 2 * p.domain_radius / N;
    const auto mc = std::make_shared<const Mesh>(build_mesh(p, h));
    const auto mf = std::make_shared<const Mesh>(build_mesh(fl.flat, h));
    const auto u = solve_full(p, mc, so).field;
    const auto w = solve_full(fl.flat, mf, so).field;
    double d = 0;
    for (int i = 0; i < mc->vertex_count(); ++i) d = std::max(d, std::abs(u.values[i] - w(fl.Q(mc->vertices[i]))));
    const double osc = u.values.maxCoeff() - u.values.minCoeff();
    rows.push_back({"max_diff", h, d, 0.0});
    rows.push_back({"oscillation", h, osc});
    rows.push_back({"relative_diff", h, osc > 0 ? d / osc : d, 0.0});
  }
  write_rows(out / "flatten.csv", rows);
  return 0;
}

}  // namespace detail

// Exit codes: 0 success, 2 validation error, 3 numerical failure
inline int run(const ExperimentConfig& c, std::ostream& err) {
  const auto v = validate(c);
  if (!v.empty()) {
    for (const auto& s : v) err << "validation: " << s << "\n";
    return 2;
  }
  try {
    const std::filesystem::path out(c.output_dir);
    std::filesystem::create_directories(out);
    if (c.command == "exponent") return detail::run_exponent(c, out);
    if (c.command == "profile") return detail::run_profile(c, out);
    if (c.command == "solve") return detail::run_solve(c, out);
    if (c.command == "analyze") return detail::run_analyze(c, out);
    return detail::run_flatten_check(c, out);
  } catch (const DomainError& e) {
    err << c.command << ": " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    err << c.command << ": " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    err << c.command << ": " << e.what() << "\n";
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    err << c.command << ": " << e.what() << "\n";
    return 2;
  }
}

}  // namespace translab
