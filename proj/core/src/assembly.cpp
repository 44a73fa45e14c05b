#include "viscofem/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace vfem {

namespace {

// local dof blocks within a 36-entry element vector
constexpr int kLV = 0;   // 12 velocity dofs (p2 node n, comp d) -> 2n+d
constexpr int kLP = 12;  // 3 pressure dofs
constexpr int kLG = 15;  // 12 gradient dofs (vertex m, comp c) -> 15+4m+c
constexpr int kLS = 27;  // 9 log-conformation dofs -> 27+3m+c
constexpr int kLoc = 36;

double* coeff_ptr(SpMat& m, int row, int col) {
  const int* outer = m.outerIndexPtr();
  const int* inner = m.innerIndexPtr();
  int lo = outer[col], hi = outer[col + 1];
  const int* found = std::lower_bound(inner + lo, inner + hi, row);
  return m.valuePtr() + (found - inner);
}

}  // namespace

FemSystem::FemSystem(const Mesh& mesh, SolverParams params, BcSpec bc_spec, RampSpec ramp)
    : mesh_(&mesh),
      spaces_(Spaces::build(mesh)),
      layout_(Layout::build(spaces_)),
      params_(params),
      bc_(BcTable::build(mesh, spaces_, std::move(bc_spec))),
      ramp_(ramp) {
  fixed_ = bc_.fixed_mask(layout_);
  differential_.assign(layout_.total, 0);
  for (int v = 0; v < layout_.nv; ++v) {
    for (int c = 0; c < 3; ++c) {
      int d = layout_.s_dof(v, c);
      if (!fixed_[d]) differential_[d] = 1;
    }
  }
  if (params_.re > 0.0) {
    for (int n = 0; n < layout_.np2; ++n) {
      for (int c = 0; c < 2; ++c) {
        int d = layout_.v_dof(n, c);
        if (!fixed_[d]) differential_[d] = 1;
      }
    }
  }
}

void FemSystem::impose_constraints(double t, VecX& u) const {
  bc_.impose(we_at(t), layout_, spaces_, u);
}

void FemSystem::residual(const VecX& u, const VecX& udot, double t, VecX& r) const {
  assemble(u, udot, t, 0.0, &r, nullptr, true);
}

void FemSystem::raw_residual(const VecX& u, const VecX& udot, double t, VecX& r) const {
  assemble(u, udot, t, 0.0, &r, nullptr, false);
}

void FemSystem::jacobian(const VecX& u, const VecX& udot, double t, double sigma,
                         SpMat& jac) const {
  assemble(u, udot, t, sigma, nullptr, &jac, true);
}

void FemSystem::build_pattern(SpMat& jac) const {
  const int n = layout_.total;
  std::vector<std::vector<int>> cols(n);  // row lists per column
  auto add = [&](int row, int col) { cols[col].push_back(row); };

  std::array<int, kLoc> gd{};
  for (int t = 0; t < mesh_->n_tris(); ++t) {
    const Tri& tri = mesh_->tris[t];
    const int verts[3] = {tri.a, tri.b, tri.c};
    for (int nl = 0; nl < 6; ++nl) {
      int g = spaces_.p2_dof(t, nl);
      gd[2 * nl] = layout_.v_dof(g, 0);
      gd[2 * nl + 1] = layout_.v_dof(g, 1);
    }
    for (int m = 0; m < 3; ++m) {
      gd[kLP + m] = layout_.p_dof(verts[m]);
      for (int c = 0; c < 4; ++c) gd[kLG + 4 * m + c] = layout_.g_dof(verts[m], c);
      for (int c = 0; c < 3; ++c) gd[kLS + 3 * m + c] = layout_.s_dof(verts[m], c);
    }
    // momentum rows couple to everything
    for (int i = 0; i < 12; ++i) {
      for (int j = 0; j < kLoc; ++j) add(gd[i], gd[j]);
    }
    // continuity rows couple to velocity
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 12; ++j) add(gd[kLP + i], gd[j]);
    }
    // gradient rows couple to velocity and same-component gradient dofs
    for (int m = 0; m < 3; ++m) {
      for (int c = 0; c < 4; ++c) {
        int row = gd[kLG + 4 * m + c];
        for (int j = 0; j < 12; ++j) add(row, gd[j]);
        for (int m2 = 0; m2 < 3; ++m2) add(row, gd[kLG + 4 * m2 + c]);
      }
    }
    // log-conformation rows couple to velocity, gradient and s
    for (int i = 0; i < 9; ++i) {
      int row = gd[kLS + i];
      for (int j = 0; j < 12; ++j) add(row, gd[j]);
      for (int j = kLG; j < kLoc; ++j) add(row, gd[j]);
    }
  }
  for (int i = 0; i < n; ++i) add(i, i);

  std::vector<int> outer(n + 1, 0);
  for (int c = 0; c < n; ++c) {
    auto& v = cols[c];
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    outer[c + 1] = outer[c] + static_cast<int>(v.size());
  }
  jac.resize(n, n);
  jac.resizeNonZeros(outer[n]);
  std::copy(outer.begin(), outer.end(), jac.outerIndexPtr());
  for (int c = 0; c < n; ++c) {
    std::copy(cols[c].begin(), cols[c].end(), jac.innerIndexPtr() + outer[c]);
  }
  std::fill(jac.valuePtr(), jac.valuePtr() + outer[n], 0.0);
}

namespace {

struct QpBasis {
  double phi[6];
  double gref[6][2];
  double psi[3];
  double w;
  double xi, eta;
};

std::vector<QpBasis> make_qp_table(int degree) {
  const QuadRule& q = quad_rule(degree);
  std::vector<QpBasis> out(q.n);
  for (int i = 0; i < q.n; ++i) {
    QpBasis& b = out[i];
    b.xi = q.xi[i];
    b.eta = q.eta[i];
    b.w = q.w[i];
    p2_basis(q.xi[i], q.eta[i], b.phi);
    double gx[6], gy[6];
    p2_grad_ref(q.xi[i], q.eta[i], gx, gy);
    for (int k = 0; k < 6; ++k) {
      b.gref[k][0] = gx[k];
      b.gref[k][1] = gy[k];
    }
    p1_basis(q.xi[i], q.eta[i], b.psi);
  }
  return out;
}

}  // namespace

void FemSystem::assemble(const VecX& u, const VecX& udot, double t, double sigma, VecX* r,
                         SpMat* jac, bool mask_rows) const {
  const int n = layout_.total;
  const double we = we_at(t);
  const double beta = params_.beta;
  const double re = params_.re;
  const double alpha = params_.brinkman_alpha;
  const double supg = params_.supg_coeff;
  const bool chain_rule = params_.elastic_div == ElasticDivScheme::ChainRule;
  const bool has_force = static_cast<bool>(force_);
  static thread_local std::vector<QpBasis> qp5 = make_qp_table(5);
  static thread_local std::vector<QpBasis> qp2 = make_qp_table(2);
  const std::vector<QpBasis>& qps = params_.quad_degree <= 2 ? qp2 : qp5;

  if (r) r->setZero(n);
  if (jac) {
    if (jac->rows() != n || jac->nonZeros() == 0) build_pattern(*jac);
    std::fill(jac->valuePtr(), jac->valuePtr() + jac->nonZeros(), 0.0);
  }

  const int nthreads = std::max(1, params_.threads);
  const int ntri = mesh_->n_tris();
  std::vector<VecX> r_buf;
  std::vector<std::vector<double>> j_buf;
  if (nthreads > 1) {
    if (r) r_buf.assign(nthreads, VecX::Zero(n));
    if (jac) j_buf.assign(nthreads, std::vector<double>(jac->nonZeros(), 0.0));
  }

  std::vector<std::string> errors(nthreads);

  auto worker = [&](int tid, int t0, int t1, VecX* r_out, double* j_out) {
    double loc_r[kLoc];
    double loc_j[kLoc][kLoc];
    std::array<int, kLoc> gd{};

    for (int el = t0; el < t1; ++el) {
      try {
        const Tri& tri = mesh_->tris[el];
        const int verts[3] = {tri.a, tri.b, tri.c};
        const Vec2 pa = mesh_->nodes[tri.a], pb = mesh_->nodes[tri.b], pc = mesh_->nodes[tri.c];
        const double j11 = pb.x - pa.x, j12 = pc.x - pa.x;
        const double j21 = pb.y - pa.y, j22 = pc.y - pa.y;
        const double detj = j11 * j22 - j12 * j21;
        const double inv = 1.0 / detj;
        // rows of J^{-T}
        const double it11 = j22 * inv, it12 = -j21 * inv;
        const double it21 = -j12 * inv, it22 = j11 * inv;
        const double hk = mesh_->h_elem[el];

        for (int nl = 0; nl < 6; ++nl) {
          int g = spaces_.p2_dof(el, nl);
          gd[2 * nl] = layout_.v_dof(g, 0);
          gd[2 * nl + 1] = layout_.v_dof(g, 1);
        }
        for (int m = 0; m < 3; ++m) {
          gd[kLP + m] = layout_.p_dof(verts[m]);
          for (int c = 0; c < 4; ++c) gd[kLG + 4 * m + c] = layout_.g_dof(verts[m], c);
          for (int c = 0; c < 3; ++c) gd[kLS + 3 * m + c] = layout_.s_dof(verts[m], c);
        }

        // P1 gradients (constant over element)
        double gpsi[3][2];
        for (int m = 0; m < 3; ++m) {
          gpsi[m][0] = it11 * kP1GradRef[m][0] + it12 * kP1GradRef[m][1];
          gpsi[m][1] = it21 * kP1GradRef[m][0] + it22 * kP1GradRef[m][1];
        }

        // gradient of s (P1): grad_s[c][dim]
        double grad_s[3][2] = {};
        for (int m = 0; m < 3; ++m) {
          for (int c = 0; c < 3; ++c) {
            double sv = u[gd[kLS + 3 * m + c]];
            grad_s[c][0] += sv * gpsi[m][0];
            grad_s[c][1] += sv * gpsi[m][1];
          }
        }

        // elastic stress divergence from the nodal-stress interpolant
        double div_tau[2] = {0.0, 0.0};
        double ddiv_ds[2][3][3] = {};  // [dim][vertex][s comp]
        if (!chain_rule) {
          for (int m = 0; m < 3; ++m) {
            SymTensor2 sm{u[gd[kLS + 3 * m + 0]], u[gd[kLS + 3 * m + 1]], u[gd[kLS + 3 * m + 2]]};
            ElasticStressDerivs ed = elastic_stress_derivs(sm, we, beta);
            div_tau[0] += gpsi[m][0] * ed.tau.xx + gpsi[m][1] * ed.tau.xy;
            div_tau[1] += gpsi[m][0] * ed.tau.xy + gpsi[m][1] * ed.tau.yy;
            for (int c = 0; c < 3; ++c) {
              ddiv_ds[0][m][c] = gpsi[m][0] * ed.d_s[0][c] + gpsi[m][1] * ed.d_s[1][c];
              ddiv_ds[1][m][c] = gpsi[m][0] * ed.d_s[1][c] + gpsi[m][1] * ed.d_s[2][c];
            }
          }
        }

        for (int i = 0; i < kLoc; ++i) loc_r[i] = 0.0;
        if (jac) {
          for (int i = 0; i < kLoc; ++i)
            for (int j = 0; j < kLoc; ++j) loc_j[i][j] = 0.0;
        }

        for (const QpBasis& qb : qps) {
          const double wq = qb.w * detj;
          // physical P2 gradients
          double gphi[6][2];
          for (int k = 0; k < 6; ++k) {
            gphi[k][0] = it11 * qb.gref[k][0] + it12 * qb.gref[k][1];
            gphi[k][1] = it21 * qb.gref[k][0] + it22 * qb.gref[k][1];
          }

          double vx = 0, vy = 0, vdx = 0, vdy = 0;
          double gv[2][2] = {};
          for (int k = 0; k < 6; ++k) {
            double ux = u[gd[2 * k]], uy = u[gd[2 * k + 1]];
            vx += qb.phi[k] * ux;
            vy += qb.phi[k] * uy;
            gv[0][0] += ux * gphi[k][0];
            gv[0][1] += ux * gphi[k][1];
            gv[1][0] += uy * gphi[k][0];
            gv[1][1] += uy * gphi[k][1];
            if (re > 0.0) {
              vdx += qb.phi[k] * udot[gd[2 * k]];
              vdy += qb.phi[k] * udot[gd[2 * k + 1]];
            }
          }
          double p = 0;
          double g4[4] = {};
          SymTensor2 s{};
          double sdot[3] = {};
          for (int m = 0; m < 3; ++m) {
            p += qb.psi[m] * u[gd[kLP + m]];
            for (int c = 0; c < 4; ++c) g4[c] += qb.psi[m] * u[gd[kLG + 4 * m + c]];
            sdot[0] += qb.psi[m] * udot[gd[kLS + 3 * m + 0]];
            sdot[1] += qb.psi[m] * udot[gd[kLS + 3 * m + 1]];
            sdot[2] += qb.psi[m] * udot[gd[kLS + 3 * m + 2]];
          }
          s.xx = qb.psi[0] * u[gd[kLS + 0]] + qb.psi[1] * u[gd[kLS + 3]] + qb.psi[2] * u[gd[kLS + 6]];
          s.xy = qb.psi[0] * u[gd[kLS + 1]] + qb.psi[1] * u[gd[kLS + 4]] + qb.psi[2] * u[gd[kLS + 7]];
          s.yy = qb.psi[0] * u[gd[kLS + 2]] + qb.psi[1] * u[gd[kLS + 5]] + qb.psi[2] * u[gd[kLS + 8]];

          Tensor2 gt{g4[0], g4[1], g4[2], g4[3]};
          ReactionDerivs rd = reaction_derivs(s, gt, params_.model, we);

          double dtau_q[2] = {div_tau[0], div_tau[1]};
          ElasticStressDerivs ed_q;
          if (chain_rule) {
            ed_q = elastic_stress_derivs(s, we, beta);
            dtau_q[0] = ed_q.d_s[0][0] * grad_s[0][0] + ed_q.d_s[0][1] * grad_s[1][0] +
                        ed_q.d_s[0][2] * grad_s[2][0] + ed_q.d_s[1][0] * grad_s[0][1] +
                        ed_q.d_s[1][1] * grad_s[1][1] + ed_q.d_s[1][2] * grad_s[2][1];
            dtau_q[1] = ed_q.d_s[1][0] * grad_s[0][0] + ed_q.d_s[1][1] * grad_s[1][0] +
                        ed_q.d_s[1][2] * grad_s[2][0] + ed_q.d_s[2][0] * grad_s[0][1] +
                        ed_q.d_s[2][1] * grad_s[1][1] + ed_q.d_s[2][2] * grad_s[2][1];
          }

          Vec2 fq{0.0, 0.0};
          if (has_force) {
            Vec2 xq = pa * (1.0 - qb.xi - qb.eta) + pb * qb.xi + pc * qb.eta;
            fq = force_(xq, t);
          }

          // convective terms
          const double conv_x = vx * gv[0][0] + vy * gv[0][1];
          const double conv_y = vx * gv[1][0] + vy * gv[1][1];

          // --- momentum rows
          for (int k = 0; k < 6; ++k) {
            for (int d = 0; d < 2; ++d) {
              double val = -p * gphi[k][d];
              for (int j = 0; j < 2; ++j) {
                double sym = gv[d][j] + gv[j][d];
                double devss = sym - (g4[2 * d + j] + g4[2 * j + d]);
                val += (beta * sym + (1.0 - beta) * devss) * gphi[k][j];
              }
              val -= dtau_q[d] * qb.phi[k];
              if (re > 0.0) {
                val += re * ((d == 0 ? vdx + conv_x : vdy + conv_y)) * qb.phi[k];
              }
              if (alpha != 0.0) val += alpha * (d == 0 ? vx : vy) * qb.phi[k];
              if (has_force) val -= (d == 0 ? fq.x : fq.y) * qb.phi[k];
              loc_r[2 * k + d] += wq * val;
            }
          }

          // --- continuity rows
          const double divv = gv[0][0] + gv[1][1];
          for (int m = 0; m < 3; ++m) loc_r[kLP + m] += wq * divv * qb.psi[m];

          // --- gradient projection rows
          for (int m = 0; m < 3; ++m) {
            for (int c = 0; c < 4; ++c) {
              loc_r[kLG + 4 * m + c] += wq * (g4[c] - gv[c / 2][c % 2]) * qb.psi[m];
            }
          }

          // --- constitutive rows with SUPG weight
          double wsupg[3];
          for (int m = 0; m < 3; ++m) {
            wsupg[m] = qb.psi[m] + supg * hk * (vx * gpsi[m][0] + vy * gpsi[m][1]);
          }
          double rs[3];
          for (int c = 0; c < 3; ++c) {
            double adv = vx * grad_s[c][0] + vy * grad_s[c][1];
            double pic = c == 0 ? rd.pi.xx : (c == 1 ? rd.pi.xy : rd.pi.yy);
            rs[c] = sdot[c] + adv - pic;
            for (int m = 0; m < 3; ++m) loc_r[kLS + 3 * m + c] += wq * rs[c] * wsupg[m];
          }

          if (!jac) continue;

          // --- momentum block
          for (int k = 0; k < 6; ++k) {
            for (int d = 0; d < 2; ++d) {
              int row = 2 * k + d;
              for (int j = 0; j < 6; ++j) {
                double lap = gphi[j][0] * gphi[k][0] + gphi[j][1] * gphi[k][1];
                for (int c = 0; c < 2; ++c) {
                  double val = gphi[j][d] * gphi[k][c];
                  if (c == d) val += lap;
                  if (re > 0.0) {
                    double conv_dc = (c == d) ? (vx * gphi[j][0] + vy * gphi[j][1]) : 0.0;
                    val += re * (sigma * qb.phi[j] * (c == d) + conv_dc + qb.phi[j] * gv[d][c]) *
                           qb.phi[k];
                  }
                  if (alpha != 0.0 && c == d) val += alpha * qb.phi[j] * qb.phi[k];
                  loc_j[row][2 * j + c] += wq * val;
                }
              }
              for (int m = 0; m < 3; ++m) {
                loc_j[row][kLP + m] += wq * (-qb.psi[m] * gphi[k][d]);
                for (int c = 0; c < 4; ++c) {
                  int a = c / 2, bcomp = c % 2;
                  double val = 0.0;
                  if (a == d) val -= (1.0 - beta) * gphi[k][bcomp];
                  if (bcomp == d) val -= (1.0 - beta) * gphi[k][a];
                  loc_j[row][kLG + 4 * m + c] += wq * qb.psi[m] * val;
                }
                for (int c = 0; c < 3; ++c) {
                  double dd;
                  if (!chain_rule) {
                    dd = ddiv_ds[d][m][c];
                  } else {
                    // first-order part only; the reaction-block dominates
                    dd = (d == 0 ? ed_q.d_s[0][c] * gpsi[m][0] + ed_q.d_s[1][c] * gpsi[m][1]
                                 : ed_q.d_s[1][c] * gpsi[m][0] + ed_q.d_s[2][c] * gpsi[m][1]);
                  }
                  loc_j[row][kLS + 3 * m + c] -= wq * qb.phi[k] * dd;
                }
              }
            }
          }

          // --- continuity block
          for (int m = 0; m < 3; ++m) {
            for (int j = 0; j < 6; ++j) {
              for (int c = 0; c < 2; ++c) {
                loc_j[kLP + m][2 * j + c] += wq * gphi[j][c] * qb.psi[m];
              }
            }
          }

          // --- gradient projection block
          for (int m = 0; m < 3; ++m) {
            for (int c = 0; c < 4; ++c) {
              int row = kLG + 4 * m + c;
              for (int m2 = 0; m2 < 3; ++m2) {
                loc_j[row][kLG + 4 * m2 + c] += wq * qb.psi[m2] * qb.psi[m];
              }
              for (int j = 0; j < 6; ++j) {
                loc_j[row][2 * j + (c / 2)] -= wq * gphi[j][c % 2] * qb.psi[m];
              }
            }
          }

          // --- constitutive block
          for (int m = 0; m < 3; ++m) {
            for (int c = 0; c < 3; ++c) {
              int row = kLS + 3 * m + c;
              for (int m2 = 0; m2 < 3; ++m2) {
                for (int c2 = 0; c2 < 3; ++c2) {
                  double val = -rd.d_s[c][c2] * qb.psi[m2];
                  if (c2 == c) {
                    val += sigma * qb.psi[m2] + vx * gpsi[m2][0] + vy * gpsi[m2][1];
                  }
                  loc_j[row][kLS + 3 * m2 + c2] += wq * val * wsupg[m];
                }
                for (int c4 = 0; c4 < 4; ++c4) {
                  loc_j[row][kLG + 4 * m2 + c4] += wq * (-rd.d_g[c][c4]) * qb.psi[m2] * wsupg[m];
                }
              }
              for (int j = 0; j < 6; ++j) {
                for (int a = 0; a < 2; ++a) {
                  double val = qb.phi[j] * grad_s[c][a] * wsupg[m] +
                               rs[c] * supg * hk * qb.phi[j] * gpsi[m][a];
                  loc_j[row][2 * j + a] += wq * val;
                }
              }
            }
          }
        }

        // scatter
        if (r_out) {
          for (int i = 0; i < kLoc; ++i) {
            if (mask_rows && is_masked(gd[i])) continue;
            (*r_out)[gd[i]] += loc_r[i];
          }
        }
        if (j_out) {
          for (int i = 0; i < kLoc; ++i) {
            if (is_masked(gd[i])) continue;
            for (int j = 0; j < kLoc; ++j) {
              if (is_masked(gd[j])) continue;
              double v = loc_j[i][j];
              if (v == 0.0) continue;
              const int* outer = jac->outerIndexPtr();
              const int* inner = jac->innerIndexPtr();
              const int* found =
                  std::lower_bound(inner + outer[gd[j]], inner + outer[gd[j] + 1], gd[i]);
              j_out[found - inner] += v;
            }
          }
        }
      } catch (const KernelError& e) {
        if (errors[tid].empty()) {
          errors[tid] = std::string(e.what()) + " (element " + std::to_string(el) + ")";
        }
        return;
      }
    }
  };

  if (nthreads == 1) {
    worker(0, 0, ntri, r, jac ? jac->valuePtr() : nullptr);
  } else {
    std::vector<std::thread> pool;
    int chunk = (ntri + nthreads - 1) / nthreads;
    for (int tid = 0; tid < nthreads; ++tid) {
      int t0 = tid * chunk, t1 = std::min(ntri, t0 + chunk);
      pool.emplace_back(worker, tid, t0, t1, r ? &r_buf[tid] : nullptr,
                        jac ? j_buf[tid].data() : nullptr);
    }
    for (auto& th : pool) th.join();
    for (int tid = 0; tid < nthreads; ++tid) {
      if (r) *r += r_buf[tid];
      if (jac) {
        double* dst = jac->valuePtr();
        const double* src = j_buf[tid].data();
        for (Eigen::Index i = 0; i < jac->nonZeros(); ++i) dst[i] += src[i];
      }
    }
  }

  for (const auto& e : errors) {
    if (!e.empty()) throw AssemblyError(e);
  }

  if (jac) {
    // identity rows for pinned/frozen dofs
    for (int d = 0; d < n; ++d) {
      if (is_masked(d)) *coeff_ptr(*jac, d, d) = 1.0;
    }
  }
  if (r && mask_rows) {
    for (int d = 0; d < n; ++d) {
      if (is_masked(d)) (*r)[d] = 0.0;
    }
  }
  if (r) {
    for (int d = 0; d < n; ++d) {
      if (!std::isfinite((*r)[d])) {
        throw AssemblyError("non-finite residual entry at dof " + std::to_string(d));
      }
    }
  }
}

void FemSystem::build_locator() const {
  if (!grid_bins_.empty()) return;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const Vec2& p : mesh_->nodes) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  double hmax = *std::max_element(mesh_->h_elem.begin(), mesh_->h_elem.end());
  gcell_ = 2.0 * hmax;
  gx0_ = xmin - 0.5 * gcell_;
  gy0_ = ymin - 0.5 * gcell_;
  gnx_ = std::max(1, static_cast<int>((xmax - gx0_) / gcell_) + 2);
  gny_ = std::max(1, static_cast<int>((ymax - gy0_) / gcell_) + 2);
  grid_bins_.assign(static_cast<size_t>(gnx_) * gny_, {});
  for (int t = 0; t < mesh_->n_tris(); ++t) {
    const Tri& e = mesh_->tris[t];
    double tx0 = 1e300, tx1 = -1e300, ty0 = 1e300, ty1 = -1e300;
    for (int v : {e.a, e.b, e.c}) {
      tx0 = std::min(tx0, mesh_->nodes[v].x);
      tx1 = std::max(tx1, mesh_->nodes[v].x);
      ty0 = std::min(ty0, mesh_->nodes[v].y);
      ty1 = std::max(ty1, mesh_->nodes[v].y);
    }
    int i0 = static_cast<int>((tx0 - gx0_) / gcell_), i1 = static_cast<int>((tx1 - gx0_) / gcell_);
    int j0 = static_cast<int>((ty0 - gy0_) / gcell_), j1 = static_cast<int>((ty1 - gy0_) / gcell_);
    for (int j = std::max(0, j0); j <= std::min(gny_ - 1, j1); ++j) {
      for (int i = std::max(0, i0); i <= std::min(gnx_ - 1, i1); ++i) {
        grid_bins_[static_cast<size_t>(j) * gnx_ + i].push_back(t);
      }
    }
  }
}

int FemSystem::locate(Vec2 p) const {
  build_locator();
  int i = static_cast<int>((p.x - gx0_) / gcell_);
  int j = static_cast<int>((p.y - gy0_) / gcell_);
  if (i < 0 || i >= gnx_ || j < 0 || j >= gny_) return -1;
  for (int t : grid_bins_[static_cast<size_t>(j) * gnx_ + i]) {
    const Tri& e = mesh_->tris[t];
    Vec2 a = mesh_->nodes[e.a], b = mesh_->nodes[e.b], c = mesh_->nodes[e.c];
    double det = (b - a).cross(c - a);
    double l1 = (p - a).cross(c - a) / det;
    double l2 = (b - a).cross(p - a) / det;
    if (l1 >= -1e-10 && l2 >= -1e-10 && l1 + l2 <= 1.0 + 1e-10) return t;
  }
  return -1;
}

std::optional<FemSystem::Probe> FemSystem::interpolate(const VecX& u, Vec2 p) const {
  int t = locate(p);
  if (t < 0) return std::nullopt;
  const Tri& e = mesh_->tris[t];
  Vec2 a = mesh_->nodes[e.a], b = mesh_->nodes[e.b], c = mesh_->nodes[e.c];
  double det = (b - a).cross(c - a);
  double xi = (p - a).cross(c - a) / det;
  double eta = (b - a).cross(p - a) / det;

  double phi[6], psi[3];
  p2_basis(xi, eta, phi);
  p1_basis(xi, eta, psi);

  Probe pr{};
  pr.element = t;
  for (int k = 0; k < 6; ++k) {
    int g = spaces_.p2_dof(t, k);
    pr.v.x += phi[k] * u[layout_.v_dof(g, 0)];
    pr.v.y += phi[k] * u[layout_.v_dof(g, 1)];
  }
  const int verts[3] = {e.a, e.b, e.c};
  for (int m = 0; m < 3; ++m) {
    pr.p += psi[m] * u[layout_.p_dof(verts[m])];
    pr.g.xx += psi[m] * u[layout_.g_dof(verts[m], 0)];
    pr.g.xy += psi[m] * u[layout_.g_dof(verts[m], 1)];
    pr.g.yx += psi[m] * u[layout_.g_dof(verts[m], 2)];
    pr.g.yy += psi[m] * u[layout_.g_dof(verts[m], 3)];
    pr.s.xx += psi[m] * u[layout_.s_dof(verts[m], 0)];
    pr.s.xy += psi[m] * u[layout_.s_dof(verts[m], 1)];
    pr.s.yy += psi[m] * u[layout_.s_dof(verts[m], 2)];
  }
  pr.a = conformation_from_log(pr.s);
  return pr;
}

}  // namespace vfem
