#include "viscofem/spaces.hpp"

#include <algorithm>
#include <cmath>

namespace vfem {

namespace {

// 3-point degree-2 rule (midpoints of edges)
const double kXi3[] = {0.5, 0.5, 0.0};
const double kEta3[] = {0.0, 0.5, 0.5};
const double kW3[] = {1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0};

// 7-point degree-5 rule
const double kA = (6.0 - std::sqrt(15.0)) / 21.0;
const double kB = (6.0 + std::sqrt(15.0)) / 21.0;
const double kWA = (155.0 - std::sqrt(15.0)) / 2400.0;
const double kWB = (155.0 + std::sqrt(15.0)) / 2400.0;
const double kXi7[] = {1.0 / 3.0, kA, 1.0 - 2.0 * kA, kA, kB, 1.0 - 2.0 * kB, kB};
const double kEta7[] = {1.0 / 3.0, kA, kA, 1.0 - 2.0 * kA, kB, kB, 1.0 - 2.0 * kB};
const double kW7[] = {9.0 / 80.0, kWA, kWA, kWA, kWB, kWB, kWB};

const QuadRule kRule3{3, kXi3, kEta3, kW3};
const QuadRule kRule7{7, kXi7, kEta7, kW7};

}  // namespace

const QuadRule& quad_rule(int degree) { return degree <= 2 ? kRule3 : kRule7; }

void p2_basis(double xi, double eta, double val[6]) {
  double l0 = 1.0 - xi - eta, l1 = xi, l2 = eta;
  val[0] = l0 * (2.0 * l0 - 1.0);
  val[1] = l1 * (2.0 * l1 - 1.0);
  val[2] = l2 * (2.0 * l2 - 1.0);
  val[3] = 4.0 * l0 * l1;
  val[4] = 4.0 * l1 * l2;
  val[5] = 4.0 * l2 * l0;
}

void p2_grad_ref(double xi, double eta, double gx[6], double gy[6]) {
  double l0 = 1.0 - xi - eta;
  gx[0] = 1.0 - 4.0 * l0;
  gy[0] = 1.0 - 4.0 * l0;
  gx[1] = 4.0 * xi - 1.0;
  gy[1] = 0.0;
  gx[2] = 0.0;
  gy[2] = 4.0 * eta - 1.0;
  gx[3] = 4.0 * (l0 - xi);
  gy[3] = -4.0 * xi;
  gx[4] = 4.0 * eta;
  gy[4] = 4.0 * xi;
  gx[5] = -4.0 * eta;
  gy[5] = 4.0 * (l0 - eta);
}

void p1_basis(double xi, double eta, double val[3]) {
  val[0] = 1.0 - xi - eta;
  val[1] = xi;
  val[2] = eta;
}

int Spaces::edge_dof(int u, int v) const {
  std::array<int, 2> k{std::min(u, v), std::max(u, v)};
  auto it = std::lower_bound(edges.begin(), edges.end(), k);
  if (it == edges.end() || *it != k) return -1;
  return nv + static_cast<int>(it - edges.begin());
}

Spaces Spaces::build(const Mesh& mesh) {
  Spaces s;
  s.mesh = &mesh;
  s.nv = mesh.n_nodes();
  std::vector<std::array<int, 2>> all;
  all.reserve(mesh.tris.size() * 3);
  for (const Tri& t : mesh.tris) {
    all.push_back({std::min(t.a, t.b), std::max(t.a, t.b)});
    all.push_back({std::min(t.b, t.c), std::max(t.b, t.c)});
    all.push_back({std::min(t.c, t.a), std::max(t.c, t.a)});
  }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  s.edges = std::move(all);

  s.tri_edges.resize(mesh.tris.size());
  for (size_t t = 0; t < mesh.tris.size(); ++t) {
    const Tri& e = mesh.tris[t];
    s.tri_edges[t][0] = s.edge_dof(e.a, e.b) - s.nv;
    s.tri_edges[t][1] = s.edge_dof(e.b, e.c) - s.nv;
    s.tri_edges[t][2] = s.edge_dof(e.c, e.a) - s.nv;
  }
  return s;
}

}  // namespace vfem
