#include "viscofem/post.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <map>

#include "viscofem/vtk.hpp"

namespace vfem {

namespace {

// 3-point Gauss on [0,1]
const double kGx[3] = {0.5 - std::sqrt(0.15), 0.5, 0.5 + std::sqrt(0.15)};
const double kGw[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

struct EdgeFrame {
  int tri;
  Vec2 a, b;
  Vec2 nrm;  // outward unit normal (domain left of a->b)
  double len;
};

EdgeFrame edge_frame(const FemSystem& sys, const BEdge& e) {
  const Mesh& mesh = sys.mesh();
  EdgeFrame f;
  f.a = mesh.nodes[e.a];
  f.b = mesh.nodes[e.b];
  Vec2 d = f.b - f.a;
  f.len = d.norm();
  f.nrm = {d.y / f.len, -d.x / f.len};
  f.tri = -1;
  // parent triangle: the one containing the directed edge
  for (int t = 0; t < mesh.n_tris() && f.tri < 0; ++t) {
    const Tri& tr = mesh.tris[t];
    const int v[3] = {tr.a, tr.b, tr.c};
    for (int k = 0; k < 3; ++k) {
      if (v[k] == e.a && v[(k + 1) % 3] == e.b) {
        f.tri = t;
        break;
      }
    }
  }
  if (f.tri < 0) throw PostError("boundary edge has no parent triangle");
  return f;
}

// map of parent triangles for all boundary edges, built once per call site
std::vector<EdgeFrame> boundary_frames(const FemSystem& sys) {
  const Mesh& mesh = sys.mesh();
  std::map<std::pair<int, int>, int> owner;
  for (int t = 0; t < mesh.n_tris(); ++t) {
    const Tri& tr = mesh.tris[t];
    const int v[3] = {tr.a, tr.b, tr.c};
    for (int k = 0; k < 3; ++k) owner[{v[k], v[(k + 1) % 3]}] = t;
  }
  std::vector<EdgeFrame> out;
  out.reserve(mesh.bedges.size());
  for (const BEdge& e : mesh.bedges) {
    EdgeFrame f;
    f.a = mesh.nodes[e.a];
    f.b = mesh.nodes[e.b];
    Vec2 d = f.b - f.a;
    f.len = d.norm();
    f.nrm = {d.y / f.len, -d.x / f.len};
    auto it = owner.find({e.a, e.b});
    if (it == owner.end()) throw PostError("boundary edge has no parent triangle");
    f.tri = it->second;
    out.push_back(f);
  }
  return out;
}

struct PointFields {
  Vec2 v;
  double p;
  Tensor2 gv;  // velocity gradient from the quadratic space
  SymTensor2 s;
};

PointFields fields_at(const FemSystem& sys, const VecX& u, int tri, Vec2 x) {
  const Mesh& mesh = sys.mesh();
  const Layout& lay = sys.layout();
  const Tri& tr = mesh.tris[tri];
  Vec2 a = mesh.nodes[tr.a], b = mesh.nodes[tr.b], c = mesh.nodes[tr.c];
  double det = (b - a).cross(c - a);
  double xi = (x - a).cross(c - a) / det;
  double eta = (b - a).cross(x - a) / det;

  double phi[6], psi[3], gx[6], gy[6];
  p2_basis(xi, eta, phi);
  p1_basis(xi, eta, psi);
  p2_grad_ref(xi, eta, gx, gy);

  double j11 = b.x - a.x, j12 = c.x - a.x, j21 = b.y - a.y, j22 = c.y - a.y;
  double inv = 1.0 / det;
  double it11 = j22 * inv, it12 = -j21 * inv, it21 = -j12 * inv, it22 = j11 * inv;

  PointFields f{};
  for (int k = 0; k < 6; ++k) {
    int g = sys.spaces().p2_dof(tri, k);
    double ux = u[lay.v_dof(g, 0)], uy = u[lay.v_dof(g, 1)];
    f.v.x += phi[k] * ux;
    f.v.y += phi[k] * uy;
    double px = it11 * gx[k] + it12 * gy[k];
    double py = it21 * gx[k] + it22 * gy[k];
    f.gv.xx += ux * px;
    f.gv.xy += ux * py;
    f.gv.yx += uy * px;
    f.gv.yy += uy * py;
  }
  const int verts[3] = {tr.a, tr.b, tr.c};
  for (int m = 0; m < 3; ++m) {
    f.p += psi[m] * u[lay.p_dof(verts[m])];
    f.s.xx += psi[m] * u[lay.s_dof(verts[m], 0)];
    f.s.xy += psi[m] * u[lay.s_dof(verts[m], 1)];
    f.s.yy += psi[m] * u[lay.s_dof(verts[m], 2)];
  }
  return f;
}

SymTensor2 total_stress(const PointFields& f, double we, double beta) {
  SymTensor2 tau = elastic_stress(f.s, we, beta);
  tau.xx += -f.p + 2.0 * beta * f.gv.xx;
  tau.yy += -f.p + 2.0 * beta * f.gv.yy;
  tau.xy += beta * (f.gv.xy + f.gv.yx);
  return tau;
}

}  // namespace

double drag(const FemSystem& sys, const VecX& u, double we) {
  const Mesh& mesh = sys.mesh();
  bool any = false;
  double total = 0.0;
  auto frames = boundary_frames(sys);
  for (size_t i = 0; i < mesh.bedges.size(); ++i) {
    if (mesh.bedges[i].tag.kind != BoundaryTag::Kind::Cylinder) continue;
    any = true;
    const EdgeFrame& f = frames[i];
    for (int g = 0; g < 3; ++g) {
      Vec2 x = f.a + (f.b - f.a) * kGx[g];
      PointFields pf = fields_at(sys, u, f.tri, x);
      SymTensor2 tau = total_stress(pf, we, sys.params().beta);
      double tx = tau.xx * f.nrm.x + tau.xy * f.nrm.y;  // x-component of traction
      total += kGw[g] * f.len * tx;
    }
  }
  if (!any) throw PostError("no cylinder boundary in this mesh");
  return -2.0 * total;
}

double drag_residual_functional(const FemSystem& sys, const VecX& u, double we, double t) {
  const Mesh& mesh = sys.mesh();
  const Layout& lay = sys.layout();

  VecX r(lay.total), udot = VecX::Zero(lay.total);
  sys.raw_residual(u, udot, t, r);

  std::vector<char> on_cyl(sys.spaces().n_p2(), 0);
  bool any = false;
  for (const BEdge& e : mesh.bedges) {
    if (e.tag.kind != BoundaryTag::Kind::Cylinder) continue;
    any = true;
    on_cyl[e.a] = on_cyl[e.b] = 1;
    int mid = sys.spaces().edge_dof(e.a, e.b);
    if (mid >= 0) on_cyl[mid] = 1;
  }
  if (!any) throw PostError("no cylinder boundary in this mesh");

  double fx = 0.0;
  for (int nd = 0; nd < sys.spaces().n_p2(); ++nd) {
    if (on_cyl[nd]) fx += r[lay.v_dof(nd, 0)];
  }

  // elastic traction is not integrated by parts, so it is added directly
  double elastic = 0.0;
  auto frames = boundary_frames(sys);
  for (size_t i = 0; i < mesh.bedges.size(); ++i) {
    if (mesh.bedges[i].tag.kind != BoundaryTag::Kind::Cylinder) continue;
    const EdgeFrame& f = frames[i];
    for (int g = 0; g < 3; ++g) {
      Vec2 x = f.a + (f.b - f.a) * kGx[g];
      PointFields pf = fields_at(sys, u, f.tri, x);
      SymTensor2 te = elastic_stress(pf.s, we, sys.params().beta);
      elastic += kGw[g] * f.len * (te.xx * f.nrm.x + te.xy * f.nrm.y);
    }
  }
  return -2.0 * (fx + elastic);
}

double dissipation(const FemSystem& sys, const VecX& u, double we) {
  const Mesh& mesh = sys.mesh();
  const QuadRule& q = quad_rule(sys.params().quad_degree);
  double total = 0.0;
  for (int t = 0; t < mesh.n_tris(); ++t) {
    const Tri& tr = mesh.tris[t];
    Vec2 a = mesh.nodes[tr.a], b = mesh.nodes[tr.b], c = mesh.nodes[tr.c];
    double det = (b - a).cross(c - a);
    for (int g = 0; g < q.n; ++g) {
      Vec2 x = a * (1.0 - q.xi[g] - q.eta[g]) + b * q.xi[g] + c * q.eta[g];
      PointFields pf = fields_at(sys, u, t, x);
      SymTensor2 tau = total_stress(pf, we, sys.params().beta);
      double d11 = 2.0 * pf.gv.xx, d22 = 2.0 * pf.gv.yy, d12 = pf.gv.xy + pf.gv.yx;
      total += q.w[g] * det * (tau.xx * d11 + tau.yy * d22 + 2.0 * tau.xy * d12);
    }
  }
  return total;
}

double vorticity_integral(const FemSystem& sys, const VecX& u, Region region) {
  const Mesh& mesh = sys.mesh();
  const QuadRule& q = quad_rule(sys.params().quad_degree);
  double total = 0.0;
  for (int t = 0; t < mesh.n_tris(); ++t) {
    const Tri& tr = mesh.tris[t];
    Vec2 cen = mesh.centroid(t);
    if (region == Region::CenterSquare &&
        !(std::abs(cen.x) < 0.5 && std::abs(cen.y) < 0.5)) {
      continue;
    }
    Vec2 a = mesh.nodes[tr.a], b = mesh.nodes[tr.b], c = mesh.nodes[tr.c];
    double det = (b - a).cross(c - a);
    for (int g = 0; g < q.n; ++g) {
      Vec2 x = a * (1.0 - q.xi[g] - q.eta[g]) + b * q.xi[g] + c * q.eta[g];
      if (region == Region::CenterDisk && x.norm() >= 0.5) continue;
      PointFields pf = fields_at(sys, u, t, x);
      total += q.w[g] * det * (pf.gv.yx - pf.gv.xy);
    }
  }
  return total;
}

double boundary_flux(const FemSystem& sys, const VecX& u, BoundaryTag::Kind kind, int port) {
  const Mesh& mesh = sys.mesh();
  auto frames = boundary_frames(sys);
  double total = 0.0;
  for (size_t i = 0; i < mesh.bedges.size(); ++i) {
    const BoundaryTag& tag = mesh.bedges[i].tag;
    if (tag.kind != kind || (port >= 0 && tag.port != port)) continue;
    const EdgeFrame& f = frames[i];
    for (int g = 0; g < 3; ++g) {
      Vec2 x = f.a + (f.b - f.a) * kGx[g];
      PointFields pf = fields_at(sys, u, f.tri, x);
      total += kGw[g] * f.len * pf.v.dot(f.nrm);
    }
  }
  return total;
}

FluxBalance flux_balance(const FemSystem& sys, const VecX& u) {
  FluxBalance fb;
  fb.net = boundary_flux(sys, u, BoundaryTag::Kind::Inlet) +
           boundary_flux(sys, u, BoundaryTag::Kind::Outlet);
  fb.inflow = std::abs(boundary_flux(sys, u, BoundaryTag::Kind::Inlet));
  return fb;
}

VecX vorticity_field(const FemSystem& sys, const VecX& u) {
  const Mesh& mesh = sys.mesh();
  const QuadRule& q = quad_rule(5);
  VecX num = VecX::Zero(mesh.n_nodes()), den = VecX::Zero(mesh.n_nodes());
  for (int t = 0; t < mesh.n_tris(); ++t) {
    const Tri& tr = mesh.tris[t];
    const int verts[3] = {tr.a, tr.b, tr.c};
    Vec2 a = mesh.nodes[tr.a], b = mesh.nodes[tr.b], c = mesh.nodes[tr.c];
    double det = (b - a).cross(c - a);
    for (int g = 0; g < q.n; ++g) {
      Vec2 x = a * (1.0 - q.xi[g] - q.eta[g]) + b * q.xi[g] + c * q.eta[g];
      PointFields pf = fields_at(sys, u, t, x);
      double om = pf.gv.yx - pf.gv.xy;
      double psi[3];
      p1_basis(q.xi[g], q.eta[g], psi);
      for (int m = 0; m < 3; ++m) {
        num[verts[m]] += q.w[g] * det * psi[m] * om;
        den[verts[m]] += q.w[g] * det * psi[m];
      }
    }
  }
  for (int i = 0; i < num.size(); ++i) num[i] = den[i] > 0.0 ? num[i] / den[i] : 0.0;
  return num;
}

VecX stream_function(const FemSystem& sys, const VecX& u) {
  const Mesh& mesh = sys.mesh();
  const int nv = mesh.n_nodes();
  auto frames = boundary_frames(sys);

  // accumulate psi along the boundary loop(s)
  std::map<int, std::pair<int, double>> next;  // from node -> (to node, edge flux)
  for (size_t i = 0; i < mesh.bedges.size(); ++i) {
    const BEdge& e = mesh.bedges[i];
    const EdgeFrame& f = frames[i];
    double flux = 0.0;
    for (int g = 0; g < 3; ++g) {
      Vec2 x = f.a + (f.b - f.a) * kGx[g];
      PointFields pf = fields_at(sys, u, f.tri, x);
      flux += kGw[g] * f.len * pf.v.dot(f.nrm);
    }
    next[e.a] = {e.b, flux};
  }

  std::vector<double> psi_b(nv, 0.0);
  std::vector<char> on_b(nv, 0), visited(nv, 0);
  for (const BEdge& e : mesh.bedges) on_b[e.a] = on_b[e.b] = 1;

  double total_inflow = std::abs(boundary_flux(sys, u, BoundaryTag::Kind::Inlet));
  double closure_tol = std::max(1e-8, 1e-8 * total_inflow);
  for (const BEdge& start : mesh.bedges) {
    if (visited[start.a]) continue;
    int n0 = start.a;
    double acc = 0.0;
    int cur = n0;
    while (true) {
      visited[cur] = 1;
      psi_b[cur] = acc;
      auto it = next.find(cur);
      if (it == next.end()) throw PostError("boundary loop is not closed");
      acc += it->second.second;
      cur = it->second.first;
      if (cur == n0) break;
    }
    if (std::abs(acc) > closure_tol) {
      throw PostError("inconsistent fluxes: boundary circulation " + std::to_string(acc));
    }
  }

  // P1 Laplace solve with Dirichlet data psi_b
  std::vector<Eigen::Triplet<double>> trips;
  VecX rhs = VecX::Zero(nv);
  const QuadRule& q = quad_rule(5);
  for (int t = 0; t < mesh.n_tris(); ++t) {
    const Tri& tr = mesh.tris[t];
    const int verts[3] = {tr.a, tr.b, tr.c};
    Vec2 a = mesh.nodes[tr.a], b = mesh.nodes[tr.b], c = mesh.nodes[tr.c];
    double j11 = b.x - a.x, j12 = c.x - a.x, j21 = b.y - a.y, j22 = c.y - a.y;
    double det = j11 * j22 - j12 * j21;
    double inv = 1.0 / det;
    double it11 = j22 * inv, it12 = -j21 * inv, it21 = -j12 * inv, it22 = j11 * inv;
    double gpsi[3][2];
    for (int m = 0; m < 3; ++m) {
      gpsi[m][0] = it11 * kP1GradRef[m][0] + it12 * kP1GradRef[m][1];
      gpsi[m][1] = it21 * kP1GradRef[m][0] + it22 * kP1GradRef[m][1];
    }
    double area = 0.5 * det;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        double k = area * (gpsi[i][0] * gpsi[j][0] + gpsi[i][1] * gpsi[j][1]);
        int gi = verts[i], gj = verts[j];
        if (on_b[gi]) continue;
        if (on_b[gj]) {
          rhs[gi] -= k * psi_b[gj];
        } else {
          trips.emplace_back(gi, gj, k);
        }
      }
    }
    for (int g = 0; g < q.n; ++g) {
      Vec2 x = a * (1.0 - q.xi[g] - q.eta[g]) + b * q.xi[g] + c * q.eta[g];
      PointFields pf = fields_at(sys, u, t, x);
      double om = pf.gv.yx - pf.gv.xy;
      double psi[3];
      p1_basis(q.xi[g], q.eta[g], psi);
      for (int m = 0; m < 3; ++m) {
        if (!on_b[verts[m]]) rhs[verts[m]] += q.w[g] * det * psi[m] * om;
      }
    }
  }
  for (int i = 0; i < nv; ++i) {
    if (on_b[i]) trips.emplace_back(i, i, 1.0);
  }
  SpMat lap(nv, nv);
  lap.setFromTriplets(trips.begin(), trips.end());
  for (int i = 0; i < nv; ++i) {
    if (on_b[i]) rhs[i] = psi_b[i];
  }
  Eigen::SimplicialLDLT<SpMat> chol(lap);
  if (chol.info() != Eigen::Success) throw PostError("stream-function solve failed");
  return chol.solve(rhs);
}

std::vector<Vec2> stagnation_points(const FemSystem& sys, const VecX& u) {
  const Mesh& mesh = sys.mesh();

  std::vector<std::pair<double, Vec2>> seeds;
  std::vector<char> wall_vert(mesh.n_nodes(), 0);
  for (const BEdge& e : mesh.bedges) {
    if (e.tag.kind == BoundaryTag::Kind::Wall || e.tag.kind == BoundaryTag::Kind::Cylinder) {
      wall_vert[e.a] = wall_vert[e.b] = 1;
    }
  }
  const QuadRule& q = quad_rule(5);
  for (int t = 0; t < mesh.n_tris(); ++t) {
    const Tri& tr = mesh.tris[t];
    if (wall_vert[tr.a] || wall_vert[tr.b] || wall_vert[tr.c]) continue;
    Vec2 a = mesh.nodes[tr.a], b = mesh.nodes[tr.b], c = mesh.nodes[tr.c];
    double best = 1e300;
    Vec2 at;
    for (int g = 0; g < q.n; ++g) {
      Vec2 x = a * (1.0 - q.xi[g] - q.eta[g]) + b * q.xi[g] + c * q.eta[g];
      PointFields pf = fields_at(sys, u, t, x);
      double vn = pf.v.norm();
      if (vn < best) {
        best = vn;
        at = x;
      }
    }
    seeds.push_back({best, at});
  }
  std::sort(seeds.begin(), seeds.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  if (seeds.size() > 50) seeds.resize(50);

  auto wall_distance = [&](Vec2 p) {
    double d = 1e300;
    for (const BEdge& e : mesh.bedges) {
      if (e.tag.kind != BoundaryTag::Kind::Wall && e.tag.kind != BoundaryTag::Kind::Cylinder)
        continue;
      Vec2 a = mesh.nodes[e.a], b = mesh.nodes[e.b];
      Vec2 ab = b - a;
      double s = std::clamp((p - a).dot(ab) / ab.dot(ab), 0.0, 1.0);
      d = std::min(d, (p - (a + ab * s)).norm());
    }
    return d;
  };

  std::vector<Vec2> found;
  for (const auto& [v0, seed] : seeds) {
    Vec2 x = seed;
    bool ok = false;
    for (int it = 0; it < 40; ++it) {
      int t = sys.locate(x);
      if (t < 0) break;
      PointFields pf = fields_at(sys, u, t, x);
      if (pf.v.norm() < 1e-10) {
        ok = true;
        break;
      }
      double det = pf.gv.xx * pf.gv.yy - pf.gv.xy * pf.gv.yx;
      if (std::abs(det) < 1e-14) break;
      Vec2 dx{(-pf.v.x * pf.gv.yy + pf.v.y * pf.gv.xy) / det,
              (-pf.v.y * pf.gv.xx + pf.v.x * pf.gv.yx) / det};
      double cap = 2.0 * mesh.h_elem[t];
      if (dx.norm() > cap) dx = dx * (cap / dx.norm());
      x = x + dx;
      if (dx.norm() < 1e-12) {
        ok = fields_at(sys, u, sys.locate(x) >= 0 ? sys.locate(x) : t, x).v.norm() < 1e-8;
        break;
      }
    }
    if (!ok) continue;
    if (wall_distance(x) < 1e-3) continue;
    bool dup = false;
    for (const Vec2& p : found) {
      if ((p - x).norm() < 1e-3) {
        dup = true;
        break;
      }
    }
    if (!dup) found.push_back(x);
  }
  return found;
}

double interstagnation_flux(const FemSystem& sys, const VecX& u, Vec2 p1, Vec2 p2) {
  Vec2 d = p2 - p1;
  double len = d.norm();
  if (len == 0.0) return 0.0;
  Vec2 nrm = d.perp() * (1.0 / len);
  const int nseg = 64;
  double total = 0.0;
  for (int i = 0; i < nseg; ++i) {
    for (int g = 0; g < 3; ++g) {
      double s = (i + kGx[g]) / nseg;
      Vec2 x = p1 + d * s;
      int t = sys.locate(x);
      if (t < 0) continue;
      PointFields pf = fields_at(sys, u, t, x);
      total += kGw[g] * (len / nseg) * pf.v.dot(nrm);
    }
  }
  return total;
}

double max_trace_a(const FemSystem& sys, const VecX& u, const std::function<bool(Vec2)>& pred) {
  const Mesh& mesh = sys.mesh();
  const Layout& lay = sys.layout();
  double best = -1e300;
  for (int i = 0; i < mesh.n_nodes(); ++i) {
    if (pred && !pred(mesh.nodes[i])) continue;
    SymTensor2 s{u[lay.s_dof(i, 0)], u[lay.s_dof(i, 1)], u[lay.s_dof(i, 2)]};
    best = std::max(best, conformation_from_log(s).trace());
  }
  return best;
}

void field_export(const FemSystem& sys, const VecX& u, double we, const std::string& vtk_path,
                  const std::string& csv_path) {
  const Mesh& mesh = sys.mesh();
  const Layout& lay = sys.layout();
  const int nv = mesh.n_nodes();

  VecX p(nv), tra(nv), log_tra(nv), deta(nv), vx(nv), vy(nv);
  for (int i = 0; i < nv; ++i) {
    p[i] = u[lay.p_dof(i)];
    SymTensor2 s{u[lay.s_dof(i, 0)], u[lay.s_dof(i, 1)], u[lay.s_dof(i, 2)]};
    SymTensor2 a = conformation_from_log(s);
    tra[i] = a.trace();
    log_tra[i] = std::log10(std::max(a.trace(), 1e-300));
    deta[i] = a.det();
    vx[i] = u[lay.v_dof(i, 0)];
    vy[i] = u[lay.v_dof(i, 1)];
  }
  VecX psi = stream_function(sys, u);
  VecX om = vorticity_field(sys, u);

  VtkWriter w;
  w.add_scalar("pressure", p);
  w.add_scalar("trace_A", tra);
  w.add_scalar("log10_trace_A", log_tra);
  w.add_scalar("det_A", deta);
  w.add_scalar("stream_function", psi);
  w.add_scalar("vorticity", om);
  w.add_vector("velocity", vx, vy);
  w.write(vtk_path, mesh);

  write_point_csv(csv_path, mesh,
                  {{"vx", &vx},
                   {"vy", &vy},
                   {"p", &p},
                   {"trace_A", &tra},
                   {"det_A", &deta},
                   {"stream_function", &psi},
                   {"vorticity", &om}});
  (void)we;
}

}  // namespace vfem
