#include "viscofem/bc.hpp"

#include <algorithm>
#include <cmath>

namespace vfem {

BcTable BcTable::build(const Mesh& mesh, const Spaces& spaces, BcSpec spec) {
  BcTable t;
  t.spec_ = std::move(spec);
  t.vnodes_.resize(spaces.n_p2());
  t.p_pin_.assign(spaces.nv, 0);

  // full zero (walls) outranks inlet data, which outranks directional pins
  auto rank = [](VSrc s) { return s == VSrc::Zero ? 2 : (s == VSrc::Inlet ? 1 : 0); };
  auto pin = [&](int node, uint8_t mask, VSrc src, int port) {
    VNode& n = t.vnodes_[node];
    n.mask |= mask;
    if (rank(src) > rank(n.src)) {
      n.src = src;
      n.port = port;
    }
  };

  std::vector<char> s_pinned(spaces.nv, 0);
  for (const BEdge& e : mesh.bedges) {
    int mid = spaces.edge_dof(e.a, e.b);
    int nodes[3] = {e.a, e.b, mid};
    Vec2 d = mesh.nodes[e.b] - mesh.nodes[e.a];
    switch (e.tag.kind) {
      case BoundaryTag::Kind::Wall:
      case BoundaryTag::Kind::Cylinder:
        for (int n : nodes) pin(n, 3, VSrc::Zero, 0);
        break;
      case BoundaryTag::Kind::Inlet:
        if (!t.spec_.inlets.count(e.tag.port)) {
          throw MeshError("no inlet data for port " + std::to_string(e.tag.port));
        }
        for (int n : nodes) pin(n, 3, VSrc::Inlet, e.tag.port);
        for (int n : {e.a, e.b}) {
          if (!s_pinned[n]) {
            s_pinned[n] = 1;
            t.s_pins_.push_back({n, e.tag.port});
          }
        }
        break;
      case BoundaryTag::Kind::Symmetry:
        if (std::abs(d.y) > 1e-9 * std::max(1.0, std::abs(d.x))) {
          throw MeshError("symmetry boundaries must lie along y = const");
        }
        for (int n : nodes) pin(n, 2, VSrc::None, 0);
        break;
      case BoundaryTag::Kind::Outlet:
        // pressure enters weakly through the dropped traction integral
        if (t.spec_.pin_outlet_tangential) {
          double len = d.norm();
          if (std::abs(d.x) <= 1e-9 * len) {
            for (int n : nodes) pin(n, 2, VSrc::None, 0);  // vertical cap
          } else if (std::abs(d.y) <= 1e-9 * len) {
            for (int n : nodes) pin(n, 1, VSrc::None, 0);  // horizontal cap
          }
        }
        break;
    }
  }
  return t;
}

void BcTable::impose(double we, const Layout& layout, const Spaces& spaces, VecX& u) const {
  for (int n = 0; n < static_cast<int>(vnodes_.size()); ++n) {
    const VNode& vn = vnodes_[n];
    if (!vn.mask) continue;
    Vec2 val{0.0, 0.0};
    if (vn.src == VSrc::Inlet) val = spec_.inlets.at(vn.port).velocity(spaces.p2_pos(n), we);
    if (vn.mask & 1) u[layout.v_dof(n, 0)] = val.x;
    if (vn.mask & 2) u[layout.v_dof(n, 1)] = val.y;
  }
  for (int v = 0; v < static_cast<int>(p_pin_.size()); ++v) {
    if (p_pin_[v]) u[layout.p_dof(v)] = 0.0;
  }
  for (const SPin& sp : s_pins_) {
    SymTensor2 s = spec_.inlets.at(sp.port).log_conf(spaces.mesh->nodes[sp.vert], we);
    u[layout.s_dof(sp.vert, 0)] = s.xx;
    u[layout.s_dof(sp.vert, 1)] = s.xy;
    u[layout.s_dof(sp.vert, 2)] = s.yy;
  }
}

std::vector<char> BcTable::fixed_mask(const Layout& layout) const {
  std::vector<char> fixed(layout.total, 0);
  for (int n = 0; n < static_cast<int>(vnodes_.size()); ++n) {
    if (vnodes_[n].mask & 1) fixed[layout.v_dof(n, 0)] = 1;
    if (vnodes_[n].mask & 2) fixed[layout.v_dof(n, 1)] = 1;
  }
  for (int v = 0; v < static_cast<int>(p_pin_.size()); ++v) {
    if (p_pin_[v]) fixed[layout.p_dof(v)] = 1;
  }
  for (const SPin& sp : s_pins_) {
    for (int c = 0; c < 3; ++c) fixed[layout.s_dof(sp.vert, c)] = 1;
  }
  return fixed;
}

int BcTable::n_constrained(const Layout& layout) const {
  auto m = fixed_mask(layout);
  return static_cast<int>(std::count(m.begin(), m.end(), char(1)));
}

}  // namespace vfem
