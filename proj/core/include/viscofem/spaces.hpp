#pragma once

#include <array>
#include <vector>

#include "viscofem/mesh.hpp"

namespace vfem {

// quadrature on the reference triangle (0,0)-(1,0)-(0,1); weights sum to 1/2
struct QuadRule {
  int n = 0;
  const double* xi = nullptr;
  const double* eta = nullptr;
  const double* w = nullptr;
};

// degree-2 (3 points) or degree-5 (7 points)
const QuadRule& quad_rule(int degree);

// local P2 node order: vertices 0,1,2 then edge midpoints (0,1),(1,2),(2,0)
void p2_basis(double xi, double eta, double val[6]);
void p2_grad_ref(double xi, double eta, double gx[6], double gy[6]);
void p1_basis(double xi, double eta, double val[3]);
inline constexpr double kP1GradRef[3][2] = {{-1.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}};

// global edge enumeration for the quadratic space; lexicographic order of
// sorted vertex pairs so numbering is mesh-deterministic
struct Spaces {
  const Mesh* mesh = nullptr;
  std::vector<std::array<int, 2>> edges;      // (lo, hi)
  std::vector<std::array<int, 3>> tri_edges;  // edge ids for (a,b),(b,c),(c,a)
  int nv = 0;

  int n_edges() const { return static_cast<int>(edges.size()); }
  int n_p2() const { return nv + n_edges(); }

  int p2_dof(int tri, int local) const {
    const Tri& t = mesh->tris[tri];
    switch (local) {
      case 0: return t.a;
      case 1: return t.b;
      case 2: return t.c;
      default: return nv + tri_edges[tri][local - 3];
    }
  }

  Vec2 p2_pos(int dof) const {
    if (dof < nv) return mesh->nodes[dof];
    const auto& e = edges[dof - nv];
    return (mesh->nodes[e[0]] + mesh->nodes[e[1]]) * 0.5;
  }

  // edge dof id for a vertex pair, -1 if the edge does not exist
  int edge_dof(int u, int v) const;

  static Spaces build(const Mesh& mesh);
};

}  // namespace vfem
