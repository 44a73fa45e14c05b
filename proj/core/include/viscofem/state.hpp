#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "viscofem/logconf.hpp"
#include "viscofem/spaces.hpp"

namespace vfem {

using VecX = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

// Monolithic dof layout: velocity (P2, interleaved x/y), pressure (P1),
// projected gradient G (P1, 4 components xx,xy,yx,yy), log-conformation s
// (P1, 3 components xx,xy,yy).
struct Layout {
  int nv = 0;   // P1 dofs (vertices)
  int np2 = 0;  // P2 dofs (vertices + edges)
  int off_p = 0, off_g = 0, off_s = 0;
  int total = 0;

  static Layout build(const Spaces& sp) {
    Layout l;
    l.nv = sp.nv;
    l.np2 = sp.n_p2();
    l.off_p = 2 * l.np2;
    l.off_g = l.off_p + l.nv;
    l.off_s = l.off_g + 4 * l.nv;
    l.total = l.off_s + 3 * l.nv;
    return l;
  }

  int v_dof(int p2node, int comp) const { return 2 * p2node + comp; }
  int p_dof(int vert) const { return off_p + vert; }
  int g_dof(int vert, int comp) const { return off_g + 4 * vert + comp; }
  int s_dof(int vert, int comp) const { return off_s + 3 * vert + comp; }
};

// how the divergence of the elastic stress is evaluated
enum class ElasticDivScheme {
  NodalStress,  // stress at vertices, gradient of its P1 interpolant
  ChainRule,    // analytic d(stress)/ds contracted with the P1 gradient of s
};

struct SolverParams {
  double re = 0.0;
  double beta = 0.5;
  ModelClosure model;
  double supg_coeff = 2.0;
  double brinkman_alpha = 0.0;
  int quad_degree = 5;
  ElasticDivScheme elastic_div = ElasticDivScheme::NodalStress;
  int threads = 1;
};

struct FieldState {
  Layout layout;
  VecX u;
  double time = 0.0;
  double we = 0.0;

  SymTensor2 s_at(int vert) const {
    return {u[layout.s_dof(vert, 0)], u[layout.s_dof(vert, 1)], u[layout.s_dof(vert, 2)]};
  }
  Vec2 v_at(int p2node) const { return {u[layout.v_dof(p2node, 0)], u[layout.v_dof(p2node, 1)]}; }
};

}  // namespace vfem
