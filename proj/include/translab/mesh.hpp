#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "translab/errors.hpp"
#include "translab/kernel.hpp"
#include "translab/problem.hpp"

namespace translab {

// Interface-conforming P1 mesh. In 1D elements use the first two vertex slots
// and vertices are sorted. In 2D vertices are (x', t + g(x')) on a tensor grid
// in (x', t), so the interface t = 0 is a row of edges.
struct Mesh {
  int dim = 1;
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> elements;
  std::vector<Side> side;
  std::vector<char> on_boundary;
  std::vector<std::array<int, 3>> neighbors;  // across edge (v[k], v[k+1]); -1 on the boundary
  bool interface_conforming = true;
  double radius = 1.0;
  double grading = 1.0;
  double h_min = 0.0;
  double h_max = 0.0;

  int vertex_count() const { return int(vertices.size()); }
  int element_count() const { return int(elements.size()); }
  int verts_per_element() const { return dim == 1 ? 2 : 3; }

  double measure(int e) const {
    const auto& v = elements[e];
    if (dim == 1) return vertices[v[1]][0] - vertices[v[0]][0];
    const auto& a = vertices[v[0]];
    const auto& b = vertices[v[1]];
    const auto& c = vertices[v[2]];
    return 0.5 * std::abs((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
  }

  // barycentric coordinates of x in element e
  std::array<double, 3> barycentric(int e, const Point& x) const {
    const auto& v = elements[e];
    if (dim == 1) {
      const double a = vertices[v[0]][0], b = vertices[v[1]][0];
      const double t = (x[0] - a) / (b - a);
      return {1 - t, t, 0.0};
    }
    const auto& a = vertices[v[0]];
    const auto& b = vertices[v[1]];
    const auto& c = vertices[v[2]];
    const double det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    const double l1 = ((x[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (x[1] - a[1])) / det;
    const double l2 = ((b[0] - a[0]) * (x[1] - a[1]) - (x[0] - a[0]) * (b[1] - a[1])) / det;
    return {1 - l1 - l2, l1, l2};
  }

  // gradients of the three barycentric functions (2D) or two hat slopes (1D)
  std::array<std::array<double, 2>, 3> gradients(int e) const {
    const auto& v = elements[e];
    std::array<std::array<double, 2>, 3> g{};
    if (dim == 1) {
      const double h = measure(e);
      g[0] = {-1 / h, 0};
      g[1] = {1 / h, 0};
      return g;
    }
    const auto& a = vertices[v[0]];
    const auto& b = vertices[v[1]];
    const auto& c = vertices[v[2]];
    const double det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    g[1] = {(c[1] - a[1]) / det, -(c[0] - a[0]) / det};
    g[2] = {-(b[1] - a[1]) / det, (b[0] - a[0]) / det};
    g[0] = {-g[1][0] - g[2][0], -g[1][1] - g[2][1]};
    return g;
  }

  // element containing x, or -1 outside the mesh
  int locate(const Point& x, int hint = -1) const {
    if (dim == 1) {
      const double xv = x[0];
      if (xv < vertices.front()[0] || xv > vertices.back()[0]) return -1;
      auto it = std::upper_bound(vertices.begin(), vertices.end(), xv,
                                 [](double a, const Point& p) { return a < p[0]; });
      int i = int(it - vertices.begin()) - 1;
      return std::clamp(i, 0, element_count() - 1);
    }
    const auto inside = [&](int e) {
      const auto l = barycentric(e, x);
      return l[0] >= -1e-12 && l[1] >= -1e-12 && l[2] >= -1e-12;
    };
    if (hint >= 0) {
      if (inside(hint)) return hint;
      for (int k = 0; k < 3; ++k) {
        const int nb = neighbors[hint][k];
        if (nb >= 0 && inside(nb)) return nb;
      }
    }
    if (bucket_n > 0) {
      const int ix = std::clamp(int((x[0] - box_lo[0]) / bucket_w[0]), 0, bucket_n - 1);
      const int iy = std::clamp(int((x[1] - box_lo[1]) / bucket_w[1]), 0, bucket_n - 1);
      if (x[0] < box_lo[0] - 1e-12 || x[1] < box_lo[1] - 1e-12 || x[0] > box_hi[0] + 1e-12 ||
          x[1] > box_hi[1] + 1e-12)
        return -1;
      for (int e : buckets[iy * bucket_n + ix])
        if (inside(e)) return e;
      return -1;
    }
    for (int e = 0; e < element_count(); ++e)
      if (inside(e)) return e;
    return -1;
  }

  void build_topology() {
    on_boundary.assign(vertices.size(), 0);
    if (dim == 1) {
      on_boundary.front() = on_boundary.back() = 1;
      neighbors.assign(elements.size(), {-1, -1, -1});
      for (int e = 0; e < element_count(); ++e) {
        neighbors[e][0] = e > 0 ? e - 1 : -1;
        neighbors[e][1] = e + 1 < element_count() ? e + 1 : -1;
      }
      return;
    }
    std::map<std::pair<int, int>, std::pair<int, int>> edge;  // edge -> (element, local edge)
    neighbors.assign(elements.size(), {-1, -1, -1});
    for (int e = 0; e < element_count(); ++e)
      for (int k = 0; k < 3; ++k) {
        int a = elements[e][k], b = elements[e][(k + 1) % 3];
        auto key = std::minmax(a, b);
        auto it = edge.find(key);
        if (it == edge.end()) {
          edge[key] = {e, k};
        } else {
          neighbors[e][k] = it->second.first;
          neighbors[it->second.first][it->second.second] = e;
        }
      }
    for (int e = 0; e < element_count(); ++e)
      for (int k = 0; k < 3; ++k)
        if (neighbors[e][k] < 0) on_boundary[elements[e][k]] = on_boundary[elements[e][(k + 1) % 3]] = 1;
    // bucket grid for point location
    box_lo = {1e300, 1e300};
    box_hi = {-1e300, -1e300};
    for (const auto& p : vertices)
      for (int d = 0; d < 2; ++d) {
        box_lo[d] = std::min(box_lo[d], p[d]);
        box_hi[d] = std::max(box_hi[d], p[d]);
      }
    bucket_n = std::max(1, int(std::sqrt(double(element_count())) / 2));
    for (int d = 0; d < 2; ++d) bucket_w[d] = (box_hi[d] - box_lo[d]) / bucket_n;
    buckets.assign(bucket_n * bucket_n, {});
    for (int e = 0; e < element_count(); ++e) {
      double lo[2] = {1e300, 1e300}, hi[2] = {-1e300, -1e300};
      for (int k = 0; k < 3; ++k)
        for (int d = 0; d < 2; ++d) {
          lo[d] = std::min(lo[d], vertices[elements[e][k]][d]);
          hi[d] = std::max(hi[d], vertices[elements[e][k]][d]);
        }
      const int x0 = std::clamp(int((lo[0] - box_lo[0]) / bucket_w[0] - 1e-9), 0, bucket_n - 1);
      const int x1 = std::clamp(int((hi[0] - box_lo[0]) / bucket_w[0] + 1e-9), 0, bucket_n - 1);
      const int y0 = std::clamp(int((lo[1] - box_lo[1]) / bucket_w[1] - 1e-9), 0, bucket_n - 1);
      const int y1 = std::clamp(int((hi[1] - box_lo[1]) / bucket_w[1] + 1e-9), 0, bucket_n - 1);
      for (int iy = y0; iy <= y1; ++iy)
        for (int ix = x0; ix <= x1; ++ix) buckets[iy * bucket_n + ix].push_back(e);
    }
  }

  // one vertex per line (coordinates, side label), then elements
  std::string to_text() const {
    std::ostringstream os;
    os.precision(17);
    os << "dim " << dim << "\nvertices " << vertices.size() << "\n";
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      os << vertices[i][0];
      if (dim == 2) os << " " << vertices[i][1];
      os << " " << int(on_boundary[i]) << "\n";
    }
    os << "elements " << elements.size() << "\n";
    for (int e = 0; e < element_count(); ++e) {
      for (int k = 0; k < verts_per_element(); ++k) os << elements[e][k] << " ";
      os << (side[e] == Side::Omega1 ? "omega1" : "omega2") << "\n";
    }
    return os.str();
  }

 private:
  std::array<double, 2> box_lo{}, box_hi{}, bucket_w{};
  int bucket_n = 0;
  std::vector<std::vector<int>> buckets;
};

namespace detail {

// offsets in [0, R] graded toward 0: depth geometric cells of ratio grading
// ending at size target_h, then a uniform fill
inline std::vector<double> graded_offsets(double R, double target_h, double grading, int depth) {
  std::vector<double> t{0.0};
  double pos = 0.0;
  for (int j = depth; j >= 1; --j) {
    const double h = target_h * std::pow(grading, j);
    if (pos + h > R) break;
    pos += h;
    t.push_back(pos);
  }
  const double rest = R - pos;
  const int m = std::max(1, int(std::ceil(rest / target_h - 1e-9)));
  for (int i = 1; i <= m; ++i) t.push_back(i == m ? R : pos + rest * i / m);
  return t;
}

}  // namespace detail

// depth counts the geometric cells toward the interface; 0 gives a uniform mesh
inline Mesh build_mesh(const ProblemSpec& spec, double target_h, double grading = 0.85, int depth = 0) {
  require(target_h > 0, "build_mesh: target_h must be positive");
  require(grading > 0 && grading <= 1, "build_mesh: grading must lie in (0,1]");
  require(depth >= 0, "build_mesh: depth must be nonnegative");
  require(spec.n == 1 || spec.n == 2, "build_mesh: dimension must be 1 or 2");
  const double R = spec.domain_radius;
  require(target_h < R, "build_mesh: target_h must be smaller than the domain radius");
  const auto t = detail::graded_offsets(R, target_h, grading, depth);
  Mesh m;
  m.dim = spec.n;
  m.radius = R;
  m.grading = grading;
  std::vector<double> line;
  for (auto it = t.rbegin(); it != t.rend(); ++it)
    if (*it > 0) line.push_back(-*it);
  for (double v : t) line.push_back(v);
  if (spec.n == 1) {
    for (double x : line) m.vertices.push_back({x, 0, 0});
    for (int i = 0; i + 1 < int(line.size()); ++i) {
      m.elements.push_back({i, i + 1, -1});
      m.side.push_back(line[i] + line[i + 1] > 0 ? Side::Omega2 : Side::Omega1);
    }
  } else {
    const auto& g = spec.g;
    // Lipschitz check on samples
    const int ns = 401;
    for (int i = 0; i + 1 < ns; ++i) {
      const double a = -R + 2 * R * i / (ns - 1), b = -R + 2 * R * (i + 1) / (ns - 1);
      if (std::abs(g(b) - g(a)) > spec.g_lipschitz * (b - a) * (1 + 1e-9) + 1e-14)
        throw GeometryError("build_mesh: interface graph exceeds its recorded Lipschitz bound");
    }
    const int nx = std::max(2, int(std::ceil(2 * R / target_h - 1e-9)));
    std::vector<double> xs(nx + 1);
    for (int i = 0; i <= nx; ++i) xs[i] = -R + 2 * R * i / nx;
    const int ny = int(line.size());
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i <= nx; ++i) m.vertices.push_back({xs[i], line[j] + g(xs[i]), 0});
    const auto id = [&](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j + 1 < ny; ++j) {
      const Side sd = line[j] + line[j + 1] > 0 ? Side::Omega2 : Side::Omega1;
      for (int i = 0; i < nx; ++i) {
        // counterclockwise triangles
        m.elements.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
        m.elements.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        m.side.push_back(sd);
        m.side.push_back(sd);
      }
    }
  }
  m.build_topology();
  m.h_min = 1e300;
  m.h_max = 0;
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    m.h_min = std::min(m.h_min, line[i + 1] - line[i]);
    m.h_max = std::max(m.h_max, line[i + 1] - line[i]);
  }
  return m;
}

// P1 field on a mesh, closed by exact exterior data outside the domain
struct DiscreteField {
  std::shared_ptr<const Mesh> mesh;
  Eigen::VectorXd values;
  ScalarField exterior;

  double operator()(const Point& x) const {
    const int e = mesh->locate(x);
    if (e < 0) return exterior(x);
    const auto l = mesh->barycentric(e, x);
    double v = 0;
    for (int k = 0; k < mesh->verts_per_element(); ++k) v += l[k] * values[mesh->elements[e][k]];
    return v;
  }
  double operator()(double x) const { return (*this)(Point{x, 0, 0}); }

  std::string to_text() const {
    std::ostringstream os;
    os.precision(17);
    for (int i = 0; i < values.size(); ++i) os << i << " " << values[i] << "\n";
    return os.str();
  }
};

}  // namespace translab
