#include "viscofem/meshgen.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <unordered_map>
#include <vector>

namespace vfem {

namespace {

constexpr double kPi = std::numbers::pi;

class MeshBuilder {
 public:
  explicit MeshBuilder(double tol = 1e-9) : tol_(tol) {}

  int node(Vec2 p) {
    long long qx = std::llround(p.x / tol_), qy = std::llround(p.y / tol_);
    for (long long dx = -1; dx <= 1; ++dx) {
      for (long long dy = -1; dy <= 1; ++dy) {
        auto it = bins_.find(bin_key(qx + dx, qy + dy));
        if (it == bins_.end()) continue;
        for (int id : it->second) {
          if (std::abs(mesh_.nodes[id].x - p.x) <= tol_ &&
              std::abs(mesh_.nodes[id].y - p.y) <= tol_) {
            return id;
          }
        }
      }
    }
    int id = mesh_.n_nodes();
    mesh_.nodes.push_back(p);
    bins_[bin_key(qx, qy)].push_back(id);
    return id;
  }

  void tri(int a, int b, int c) {
    double area2 = (mesh_.nodes[b] - mesh_.nodes[a]).cross(mesh_.nodes[c] - mesh_.nodes[a]);
    if (area2 == 0.0) throw MeshError("degenerate element produced by generator");
    if (area2 < 0.0) std::swap(b, c);
    mesh_.tris.push_back({a, b, c});
  }

  // corners CCW; split by the shorter diagonal, ties resolved by the flag
  void quad(int a, int b, int c, int d, bool prefer_ac_on_tie) {
    double dac = sq_dist(a, c), dbd = sq_dist(b, d);
    double scale = std::max(dac, dbd);
    bool use_ac;
    if (dac < dbd - 1e-12 * scale) {
      use_ac = true;
    } else if (dbd < dac - 1e-12 * scale) {
      use_ac = false;
    } else {
      use_ac = prefer_ac_on_tie;
    }
    if (use_ac) {
      tri(a, b, c);
      tri(a, c, d);
    } else {
      tri(a, b, d);
      tri(b, c, d);
    }
  }

  // tag = f(endpoint_a, endpoint_b) for boundary edges found by incidence
  Mesh finish(const std::function<BoundaryTag(Vec2, Vec2)>& classify) {
    std::unordered_map<long long, int> count;
    auto ekey = [this](int u, int v) {
      long long lo = std::min(u, v), hi = std::max(u, v);
      return lo * static_cast<long long>(mesh_.n_nodes()) + hi;
    };
    for (const Tri& t : mesh_.tris) {
      ++count[ekey(t.a, t.b)];
      ++count[ekey(t.b, t.c)];
      ++count[ekey(t.c, t.a)];
    }
    for (const Tri& t : mesh_.tris) {
      const int e[3][2] = {{t.a, t.b}, {t.b, t.c}, {t.c, t.a}};
      for (auto& uv : e) {
        if (count[ekey(uv[0], uv[1])] == 1) {
          BEdge be;
          be.a = uv[0];
          be.b = uv[1];
          be.tag = classify(mesh_.nodes[be.a], mesh_.nodes[be.b]);
          mesh_.bedges.push_back(be);
        }
      }
    }
    mesh_.compute_h();
    auto bad = check_mesh(mesh_);
    if (!bad.empty()) throw MeshError("generator produced invalid mesh: " + bad.front());
    return std::move(mesh_);
  }

 private:
  static uint64_t bin_key(long long qx, long long qy) {
    return static_cast<uint64_t>(qx) * 0x9E3779B97F4A7C15ull ^
           static_cast<uint64_t>(qy) * 0xC2B2AE3D27D4EB4Full;
  }
  double sq_dist(int i, int j) const {
    Vec2 d = mesh_.nodes[i] - mesh_.nodes[j];
    return d.dot(d);
  }

  Mesh mesh_;
  std::unordered_map<uint64_t, std::vector<int>> bins_;
  double tol_;
};

// geometric span sequence summing exactly to `total`, starting near w_first,
// growing by `ratio` up to w_cap, then rescaled
std::vector<double> graded_spans(double total, double w_first, double ratio, double w_cap) {
  std::vector<double> w;
  double cur = std::min(w_first, total);
  double sum = 0.0;
  while (sum < total) {
    w.push_back(cur);
    sum += cur;
    cur = std::min(cur * ratio, w_cap);
  }
  double scale = total / sum;
  for (double& x : w) x *= scale;
  return w;
}

std::vector<double> cumulative(const std::vector<double>& spans) {
  std::vector<double> c(spans.size() + 1, 0.0);
  for (size_t i = 0; i < spans.size(); ++i) c[i + 1] = c[i] + spans[i];
  return c;
}

int make_even(int n) { return n % 2 ? n + 1 : n; }

// structured quad patch from a lattice point function
void add_patch(MeshBuilder& b, int ni, int nj, const std::function<Vec2(int, int)>& point,
               const std::function<bool(int, int)>& tie_rule) {
  std::vector<int> ids(static_cast<size_t>(ni + 1) * (nj + 1));
  auto at = [&](int i, int j) -> int& { return ids[static_cast<size_t>(j) * (ni + 1) + i]; };
  for (int j = 0; j <= nj; ++j)
    for (int i = 0; i <= ni; ++i) at(i, j) = b.node(point(i, j));
  for (int j = 0; j < nj; ++j) {
    for (int i = 0; i < ni; ++i) {
      b.quad(at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1), tie_rule(i, j));
    }
  }
}

// uniform barycentric subdivision of triangle (o, a, b) into n^2 elements
void add_sector(MeshBuilder& b, Vec2 o, Vec2 a, Vec2 vb, int n) {
  std::vector<std::vector<int>> ids(n + 1);
  for (int i = 0; i <= n; ++i) {
    ids[i].resize(n + 1 - i);
    for (int j = 0; j <= n - i; ++j) {
      double u = static_cast<double>(i) / n, v = static_cast<double>(j) / n;
      Vec2 p = o + (a - o) * u + (vb - o) * v;
      ids[i][j] = b.node(p);
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n - i; ++j) {
      b.tri(ids[i][j], ids[i + 1][j], ids[i][j + 1]);
      if (i + j < n - 1) b.tri(ids[i + 1][j], ids[i + 1][j + 1], ids[i][j + 1]);
    }
  }
}

bool near(double a, double b, double tol = 1e-7) { return std::abs(a - b) <= tol; }

}  // namespace

Mesh gen_cylinder_half(double h_target, double l_up, double l_down) {
  if (!(h_target > 0.0)) throw MeshError("h_target must be positive");
  if (l_up < 2.0 || l_down < 2.0) {
    throw MeshError("degenerate geometry: channel lengths must be at least 2R");
  }
  const double h_in = 0.35 * h_target;  // spacing at the cylinder surface

  // angular resolution; multiple of 4 so the square-path corners are hit
  int nt = std::max(16, 4 * static_cast<int>(std::lround(kPi / h_in / 4.0)));
  const int nq = nt / 4;

  // transfinite block between the half-circle and the square path
  // (2,0)->(2,2)->(-2,2)->(-2,0); theta and path arclength advance together
  auto path_point = [&](int i) -> Vec2 {
    if (i <= nq) return {2.0, 2.0 * i / nq};
    if (i <= 3 * nq) return {2.0 - 4.0 * (i - nq) / (2 * nq), 2.0};
    return {-2.0, 2.0 - 2.0 * (i - 3 * nq) / nq};
  };

  // shared normalized radial profile sized for the longest column
  double l_max = 0.0;
  for (int i = 0; i <= nt; ++i) {
    double th = kPi * i / nt;
    l_max = std::max(l_max, (path_point(i) - Vec2{std::cos(th), std::sin(th)}).norm());
  }
  auto radial = cumulative(graded_spans(l_max, h_in, 1.3, 1.6 * h_target));
  const int nr = static_cast<int>(radial.size()) - 1;
  for (double& r : radial) r /= l_max;

  MeshBuilder b;
  add_patch(
      b, nt, nr,
      [&](int i, int j) {
        double th = kPi * i / nt;
        Vec2 c{std::cos(th), std::sin(th)};
        Vec2 p = path_point(i);
        return c + (p - c) * radial[j];
      },
      [](int, int) { return true; });

  // upstream / downstream rectangles, graded away from the cylinder block
  const double wy = 2.0 / nq;
  const double w0 = 8.0 / nt;
  const double wcap = 0.95 * std::sqrt(std::max(4.0 * h_target * h_target - wy * wy, 1e-12));
  auto xr = cumulative(graded_spans(l_down - 2.0, w0, 1.25, wcap));
  add_patch(
      b, static_cast<int>(xr.size()) - 1, nq,
      [&](int i, int j) { return Vec2{2.0 + xr[i], wy * j}; }, [](int, int) { return true; });
  auto xl = cumulative(graded_spans(l_up - 2.0, w0, 1.25, wcap));
  add_patch(
      b, static_cast<int>(xl.size()) - 1, nq,
      [&](int i, int j) { return Vec2{-2.0 - xl[i], wy * j}; }, [](int, int) { return true; });

  return b.finish([&](Vec2 a, Vec2 c) {
    Vec2 mid = (a + c) * 0.5;
    if (near(a.norm(), 1.0) && near(c.norm(), 1.0)) return BoundaryTag{BoundaryTag::Kind::Cylinder, 0};
    if (near(mid.y, 0.0)) return BoundaryTag{BoundaryTag::Kind::Symmetry, 0};
    if (near(mid.x, -l_up)) return BoundaryTag{BoundaryTag::Kind::Inlet, 1};
    if (near(mid.x, l_down)) return BoundaryTag{BoundaryTag::Kind::Outlet, 1};
    return BoundaryTag{BoundaryTag::Kind::Wall, 0};
  });
}

Mesh gen_cross_slot(double h_target, double l_arm) {
  if (!(h_target > 0.0)) throw MeshError("h_target must be positive");
  if (l_arm < 1.0) throw MeshError("degenerate geometry: arm length must be at least 1");

  const double hc = 0.5 * h_target;  // central-square spacing
  const int nc = make_even(std::max(4, static_cast<int>(std::ceil(1.0 / hc))));
  const double sp = 1.0 / nc;

  // diagonal orientation by quadrant keeps the triangulation exactly
  // mirror-symmetric about both axes
  auto quadrant_rule = [](Vec2 center) { return center.x * center.y > 0.0; };

  MeshBuilder b;
  auto grid = [&](int i) { return -0.5 + sp * i; };
  add_patch(
      b, nc, nc, [&](int i, int j) { return Vec2{grid(i), grid(j)}; },
      [&](int i, int j) { return quadrant_rule({grid(i) + 0.5 * sp, grid(j) + 0.5 * sp}); });

  const double wcap = 0.95 * std::sqrt(std::max(4.0 * h_target * h_target - sp * sp, 1e-12));
  auto ax = cumulative(graded_spans(l_arm, sp, 1.2, wcap));
  const int na = static_cast<int>(ax.size()) - 1;

  struct Arm {
    Vec2 dir;
  };
  for (Arm arm : {Arm{{1, 0}}, Arm{{-1, 0}}, Arm{{0, 1}}, Arm{{0, -1}}}) {
    Vec2 t = arm.dir.perp();
    add_patch(
        b, nc, na,
        [&](int i, int j) { return arm.dir * (0.5 + ax[j]) + t * grid(i); },
        [&](int i, int j) {
          Vec2 c = arm.dir * (0.5 + 0.5 * (ax[j] + ax[j + 1])) + t * (grid(i) + 0.5 * sp);
          return quadrant_rule(c);
        });
  }

  const double ext = 0.5 + l_arm;
  return b.finish([&](Vec2 a, Vec2 c) {
    Vec2 mid = (a + c) * 0.5;
    if (near(mid.x, -ext)) return BoundaryTag{BoundaryTag::Kind::Inlet, 1};
    if (near(mid.x, ext)) return BoundaryTag{BoundaryTag::Kind::Inlet, 2};
    if (near(mid.y, ext)) return BoundaryTag{BoundaryTag::Kind::Outlet, 1};
    if (near(mid.y, -ext)) return BoundaryTag{BoundaryTag::Kind::Outlet, 2};
    return BoundaryTag{BoundaryTag::Kind::Wall, 0};
  });
}

Mesh gen_trislot(double h_target, double theta, double l_in, double l_out) {
  if (!(h_target > 0.0)) throw MeshError("h_target must be positive");
  if (!(theta > kPi / 6.0 && theta < kPi / 2.0)) {
    throw MeshError("self-intersecting geometry: theta outside (pi/6, pi/2)");
  }

  struct Channel {
    double angle;
    bool inlet;
    int port;
    double len;
    Vec2 dir, tan;  // tan = dir rotated +90deg (CCW side)
  };

  std::vector<Channel> ch = {
      {kPi / 2.0, false, 1, l_out, {}, {}},          {kPi / 2.0 + theta, true, 2, l_in, {}, {}},
      {3.0 * kPi / 2.0 - theta, false, 2, l_out, {}, {}}, {3.0 * kPi / 2.0, true, 1, l_in, {}, {}},
      {3.0 * kPi / 2.0 + theta, false, 3, l_out, {}, {}}, {kPi / 2.0 - theta + 2.0 * kPi, true, 3, l_in, {}, {}},
  };
  std::sort(ch.begin(), ch.end(), [](const Channel& a, const Channel& b) { return a.angle < b.angle; });
  for (Channel& c : ch) {
    c.dir = {std::cos(c.angle), std::sin(c.angle)};
    c.tan = c.dir.perp();
  }

  // hexagon vertex between channel k and k+1: on k's CCW wall and k+1's CW wall
  const int n = static_cast<int>(ch.size());
  std::vector<Vec2> w(n);
  for (int k = 0; k < n; ++k) {
    const Channel& a = ch[k];
    const Channel& c = ch[(k + 1) % n];
    double det = a.tan.x * c.tan.y - a.tan.y * c.tan.x;
    if (std::abs(det) < 1e-12) throw MeshError("self-intersecting geometry: parallel channel walls");
    w[k] = {(0.5 * c.tan.y + 0.5 * a.tan.y) / det, (-0.5 * c.tan.x - 0.5 * a.tan.x) / det};
  }
  for (int k = 0; k < n; ++k) {
    Vec2 e0 = w[(k + 1) % n] - w[k];
    Vec2 e1 = w[(k + 2) % n] - w[(k + 1) % n];
    if (e0.cross(e1) <= 0.0) throw MeshError("self-intersecting geometry: core not convex");
    if (w[k].norm() + 1.0 > std::min(l_in, l_out)) {
      throw MeshError("self-intersecting geometry: channels shorter than the core");
    }
  }

  const double hc = 0.5 * h_target;
  const int nc = make_even(std::max(4, static_cast<int>(std::ceil(1.0 / hc))));

  MeshBuilder b;
  for (int k = 0; k < n; ++k) add_sector(b, {0.0, 0.0}, w[(k + n - 1) % n], w[k], nc);

  const double wcap = 0.95 * std::sqrt(std::max(4.0 * h_target * h_target - 1.0 / (nc * nc), 1e-12));
  for (int k = 0; k < n; ++k) {
    const Channel& c = ch[k];
    Vec2 m0 = w[(k + n - 1) % n];  // CW wall, p.tan = -1/2
    Vec2 m1 = w[k];                // CCW wall, p.tan = +1/2
    Vec2 e0 = c.dir * c.len - c.tan * 0.5;
    Vec2 e1 = c.dir * c.len + c.tan * 0.5;
    double dmax = std::max((e0 - m0).norm(), (e1 - m1).norm());
    double w0 = std::max((m1 - m0).norm(), 1.0) / nc;
    auto tj = cumulative(graded_spans(dmax, w0, 1.2, wcap));
    const int na = static_cast<int>(tj.size()) - 1;
    for (double& t : tj) t /= dmax;
    add_patch(
        b, nc, na,
        [&](int i, int j) {
          double u = static_cast<double>(i) / nc;
          Vec2 mouth = m0 + (m1 - m0) * u;
          Vec2 cap = e0 + (e1 - e0) * u;
          return mouth + (cap - mouth) * tj[j];
        },
        [&](int i, int) { return i < nc / 2; });
  }

  return b.finish([&](Vec2 a, Vec2 cpt) {
    Vec2 mid = (a + cpt) * 0.5;
    for (const Channel& c : ch) {
      if (near(mid.dot(c.dir), c.len) && std::abs(mid.dot(c.tan)) < 0.5 + 1e-7) {
        return BoundaryTag{c.inlet ? BoundaryTag::Kind::Inlet : BoundaryTag::Kind::Outlet, c.port};
      }
    }
    return BoundaryTag{BoundaryTag::Kind::Wall, 0};
  });
}

Mesh gen_channel(double h_target, double length, double half_height) {
  if (!(h_target > 0.0)) throw MeshError("h_target must be positive");
  if (!(length > 0.0) || !(half_height > 0.0)) throw MeshError("degenerate geometry");
  int nx = std::max(2, static_cast<int>(std::ceil(length / h_target)));
  int ny = std::max(2, static_cast<int>(std::ceil(half_height / h_target)));
  MeshBuilder b;
  add_patch(
      b, nx, ny,
      [&](int i, int j) { return Vec2{length * i / nx, half_height * j / ny}; },
      [](int, int) { return true; });
  return b.finish([&](Vec2 a, Vec2 c) {
    Vec2 mid = (a + c) * 0.5;
    if (near(mid.x, 0.0)) return BoundaryTag{BoundaryTag::Kind::Inlet, 1};
    if (near(mid.x, length)) return BoundaryTag{BoundaryTag::Kind::Outlet, 1};
    if (near(mid.y, 0.0)) return BoundaryTag{BoundaryTag::Kind::Symmetry, 0};
    return BoundaryTag{BoundaryTag::Kind::Wall, 0};
  });
}

}  // namespace vfem
