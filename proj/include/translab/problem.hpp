#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "translab/errors.hpp"
#include "translab/kernel.hpp"

namespace translab {

using ScalarField = std::function<double(const Point&)>;
using MatrixField = std::function<Eigen::MatrixXd(const Point&)>;

// One instance of the epsilon-scaled, delta-regularized transmission problem.
// The domain is the cylinder |x'| < R, |x_n - g(x')| < R (an interval in 1D).
struct ProblemSpec {
  int n = 1;
  double s = 0.5;
  MatrixField A;
  KernelSpec kernel = KernelSpec::constant_pair(1.0);
  Eigen::VectorXd b;
  ScalarField f;
  std::function<double(double)> g;
  double g_lipschitz = 0.0;
  ScalarField exterior_data;
  double epsilon = 1.0;
  double delta = 0.0;
  double domain_radius = 1.0;
  double truncation_radius = 2.0;

  static ProblemSpec make(int n, double s, const KernelSpec& kernel) {
    ProblemSpec p;
    p.n = n;
    p.s = s;
    p.kernel = kernel;
    p.A = [n](const Point&) { return Eigen::MatrixXd::Identity(n, n).eval(); };
    p.b = Eigen::VectorXd::Zero(n);
    p.f = [](const Point&) { return 0.0; };
    p.g = [](double) { return 0.0; };
    p.exterior_data = [](const Point&) { return 0.0; };
    return p;
  }

  double interface_height(double xp) const { return n == 1 || !g ? 0.0 : g(xp); }

  // signed distance-like coordinate across the interface
  double normal_offset(const Point& x) const { return x[n - 1] - interface_height(n == 1 ? 0.0 : x[0]); }

  Side side_of(const Point& x) const {
    const double t = normal_offset(x);
    return t > 0 ? Side::Omega2 : (t < 0 ? Side::Omega1 : Side::Gamma);
  }

  bool inside(const Point& x) const {
    if (std::abs(normal_offset(x)) >= domain_radius) return false;
    return n == 1 || std::abs(x[0]) < domain_radius;
  }

  std::vector<std::string> violations() const {
    std::vector<std::string> v;
    if (n != 1 && n != 2) v.push_back("problem.n: dimension must be 1 or 2");
    if (!(s > 0 && s < 1)) v.push_back("problem.s: order must lie in (0,1)");
    if (!(epsilon > 0)) v.push_back("problem.epsilon: scale must be positive");
    if (!(delta >= 0)) v.push_back("problem.delta: viscosity must be nonnegative");
    if (!(domain_radius > 0)) v.push_back("problem.domain_radius: must be positive");
    if (!(truncation_radius > domain_radius)) v.push_back("problem.truncation_radius: must exceed domain_radius");
    if (!A) v.push_back("problem.A: missing");
    if (!f) v.push_back("problem.f: missing");
    if (!exterior_data) v.push_back("problem.exterior_data: missing");
    if (b.size() != n) v.push_back("problem.b: drift must have n components");
    if (s < 0.5 && b.size() == n && b.norm() > 0)
      v.push_back("problem.b: drift must vanish when s < 1/2 (standing assumption: either b = 0 or s >= 1/2)");
    if (kernel.mode == KernelMode::ConstantPair && !(kernel.nu > 0))
      v.push_back("kernel.nu: must be positive (the case nu <= 0 is not covered)");
    try {
      kernel.validate();
    } catch (const Error& e) {
      v.push_back(e.what());
    }
    if (A && (n == 1 || n == 2) && kernel.lambda > 0) {
      const Point samples[] = {{0, 0, 0}, {0.5, -0.5, 0}, {-0.5, -0.5, 0}};
      for (const auto& x : samples) {
        const Eigen::MatrixXd a = A(x);
        if (a.rows() != n || a.cols() != n) {
          v.push_back("problem.A: matrix must be n x n");
          break;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (a + a.transpose()));
        const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
        if (lo < kernel.lambda * (1 - 1e-12) || hi > kernel.Lambda * (1 + 1e-12)) {
          v.push_back("problem.A: ellipticity bounds violated at a sample point");
          break;
        }
      }
    }
    return v;
  }

  void validate() const {
    const auto v = violations();
    if (!v.empty()) throw DomainError(v.front());
  }
};

}  // namespace translab
