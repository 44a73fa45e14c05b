#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "viscofem/meshgen.hpp"

using namespace vfem;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

int euler_characteristic(const Mesh& m) {
  std::set<std::pair<int, int>> edges;
  for (const Tri& t : m.tris) {
    edges.insert({std::min(t.a, t.b), std::max(t.a, t.b)});
    edges.insert({std::min(t.b, t.c), std::max(t.b, t.c)});
    edges.insert({std::min(t.c, t.a), std::max(t.c, t.a)});
  }
  return m.n_nodes() - static_cast<int>(edges.size()) + m.n_tris();
}

void check_h_bounds(const Mesh& m, double h_target) {
  for (double h : m.h_elem) {
    CHECK(h <= 2.0 * h_target * (1.0 + 1e-9));
    CHECK(h >= h_target / 8.0);
  }
}

double min_h_location_radius(const Mesh& m) {
  double best = 1e300;
  Vec2 where;
  for (int t = 0; t < m.n_tris(); ++t) {
    if (m.h_elem[t] < best) {
      best = m.h_elem[t];
      where = m.centroid(t);
    }
  }
  return where.norm();
}

const Mesh& cyl_coarse() {
  static Mesh m = gen_cylinder_half(0.28);
  return m;
}

}  // namespace

TEST_CASE("cylinder mesh satisfies all invariants") {
  const Mesh& m = cyl_coarse();
  CHECK(check_mesh(m).empty());
  CHECK(euler_characteristic(m) == 1);
  check_h_bounds(m, 0.28);
}

TEST_CASE("cylinder mesh is finest next to the cylinder") {
  const Mesh& m = cyl_coarse();
  // the element with the smallest h sits against the unit circle
  CHECK(min_h_location_radius(m) < 1.3);
  Mesh fine = gen_cylinder_half(0.07);
  CHECK(check_mesh(fine).empty());
  CHECK(min_h_location_radius(fine) < 1.1);
  check_h_bounds(fine, 0.07);
}

TEST_CASE("cylinder boundary tag lengths match the geometry") {
  const Mesh& m = cyl_coarse();
  CHECK(tag_length(m, BoundaryTag::Kind::Inlet) == Approx(2.0).epsilon(1e-9));
  CHECK(tag_length(m, BoundaryTag::Kind::Outlet) == Approx(2.0).epsilon(1e-9));
  CHECK(tag_length(m, BoundaryTag::Kind::Wall) == Approx(20.0).epsilon(1e-9));
  // symmetry segments: 2*(10-1) minus nothing (cut by the cylinder)
  CHECK(tag_length(m, BoundaryTag::Kind::Symmetry) == Approx(18.0).epsilon(1e-9));
  // chord length of the half circle with N segments: 2 N sin(pi/2N)
  int ncyl = 0;
  for (const BEdge& e : m.bedges) {
    if (e.tag.kind == BoundaryTag::Kind::Cylinder) ++ncyl;
  }
  double chords = 2.0 * ncyl * std::sin(kPi / (2.0 * ncyl));
  CHECK(tag_length(m, BoundaryTag::Kind::Cylinder) == Approx(chords).epsilon(1e-9));
  CHECK(tag_length(m, BoundaryTag::Kind::Cylinder) == Approx(kPi).epsilon(2e-2));
}

TEST_CASE("cylinder refinement roughly quadruples the element count") {
  Mesh a = gen_cylinder_half(0.4);
  Mesh b = gen_cylinder_half(0.2);
  double ratio = static_cast<double>(b.n_tris()) / a.n_tris();
  CHECK(ratio > 2.8);
  CHECK(ratio < 5.2);
}

TEST_CASE("cylinder rejects degenerate lengths") {
  CHECK_THROWS_WITH_AS(gen_cylinder_half(0.2, 1.5, 10.0), doctest::Contains("degenerate"),
                       MeshError);
  CHECK_THROWS_AS(gen_cylinder_half(0.2, 10.0, 1.0), MeshError);
}

TEST_CASE("cross-slot mesh invariants and bounding box") {
  Mesh m = gen_cross_slot(0.15, 10.0);
  CHECK(check_mesh(m).empty());
  CHECK(euler_characteristic(m) == 1);
  check_h_bounds(m, 0.15);
  double xmin = 1e300, xmax = -1e300;
  for (const Vec2& p : m.nodes) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
  }
  CHECK(xmin == Approx(-10.5).epsilon(1e-12));
  CHECK(xmax == Approx(10.5).epsilon(1e-12));
  CHECK(tag_length(m, BoundaryTag::Kind::Inlet, 1) == Approx(1.0).epsilon(1e-9));
  CHECK(tag_length(m, BoundaryTag::Kind::Inlet, 2) == Approx(1.0).epsilon(1e-9));
  CHECK(tag_length(m, BoundaryTag::Kind::Outlet, 1) == Approx(1.0).epsilon(1e-9));
  CHECK(tag_length(m, BoundaryTag::Kind::Outlet, 2) == Approx(1.0).epsilon(1e-9));
}

TEST_CASE("cross-slot central square is exactly triangulated") {
  Mesh m = gen_cross_slot(0.2, 4.0);
  // no triangle straddles the square boundary: each is fully inside or outside
  for (int t = 0; t < m.n_tris(); ++t) {
    const Tri& tr = m.tris[t];
    int inside = 0;
    for (int v : {tr.a, tr.b, tr.c}) {
      Vec2 p = m.nodes[v];
      if (std::abs(p.x) < 0.5 - 1e-12 && std::abs(p.y) < 0.5 - 1e-12) ++inside;
    }
    Vec2 c = m.centroid(t);
    bool c_in = std::abs(c.x) < 0.5 && std::abs(c.y) < 0.5;
    if (inside > 0) CHECK(c_in);  // any strictly-interior vertex forces the element inside
  }
}

TEST_CASE("cross-slot triangulation is mirror symmetric in both axes") {
  Mesh m = gen_cross_slot(0.25, 3.0);
  std::map<std::pair<long long, long long>, int> index;
  auto key = [](Vec2 p) {
    return std::pair{std::llround(p.x * 1e9), std::llround(p.y * 1e9)};
  };
  for (int i = 0; i < m.n_nodes(); ++i) index[key(m.nodes[i])] = i;

  std::set<std::array<int, 3>> tris;
  for (const Tri& t : m.tris) {
    std::array<int, 3> k{t.a, t.b, t.c};
    std::sort(k.begin(), k.end());
    tris.insert(k);
  }
  for (auto mirror : {+1, -1}) {
    for (const Tri& t : m.tris) {
      std::array<int, 3> k;
      int j = 0;
      for (int v : {t.a, t.b, t.c}) {
        Vec2 p = m.nodes[v];
        Vec2 q = mirror > 0 ? Vec2{-p.x, p.y} : Vec2{p.x, -p.y};
        auto it = index.find(key(q));
        REQUIRE(it != index.end());
        k[j++] = it->second;
      }
      std::sort(k.begin(), k.end());
      CHECK(tris.count(k) == 1);
    }
  }
}

TEST_CASE("cross-slot refinement scaling and degenerate arm") {
  Mesh a = gen_cross_slot(0.3, 4.0);
  Mesh b = gen_cross_slot(0.15, 4.0);
  double ratio = static_cast<double>(b.n_tris()) / a.n_tris();
  CHECK(ratio > 2.8);
  CHECK(ratio < 5.2);
  CHECK_THROWS_WITH_AS(gen_cross_slot(0.2, 0.5), doctest::Contains("degenerate"), MeshError);
}

TEST_CASE("tri-slot mesh invariants for several angles") {
  for (double theta : {kPi / 3.0, kPi / 3.5, kPi / 4.0, 0.58}) {
    Mesh m = gen_trislot(0.22, theta);
    CHECK(check_mesh(m).empty());
    CHECK(euler_characteristic(m) == 1);
    // three inlets and three outlets of width 1
    for (int port : {1, 2, 3}) {
      CHECK(tag_length(m, BoundaryTag::Kind::Inlet, port) == Approx(1.0).epsilon(1e-9));
      CHECK(tag_length(m, BoundaryTag::Kind::Outlet, port) == Approx(1.0).epsilon(1e-9));
    }
    // bounding circle encloses the longest channels
    double rmax = 0.0;
    for (const Vec2& p : m.nodes) rmax = std::max(rmax, p.norm());
    CHECK(rmax >= 8.0);
    CHECK(rmax <= std::sqrt(8.0 * 8.0 + 0.25) + 1e-9);
  }
}

TEST_CASE("tri-slot node set has 120-degree symmetry at theta = pi/3") {
  Mesh m = gen_trislot(0.3, kPi / 3.0);
  std::set<std::pair<long long, long long>> nodes;
  auto key = [](Vec2 p) {
    return std::pair{std::llround(p.x * 1e9), std::llround(p.y * 1e9)};
  };
  for (const Vec2& p : m.nodes) nodes.insert(key(p));
  double c = std::cos(2.0 * kPi / 3.0), s = std::sin(2.0 * kPi / 3.0);
  for (const Vec2& p : m.nodes) {
    Vec2 q{c * p.x - s * p.y, s * p.x + c * p.y};
    CHECK(nodes.count(key(q)) == 1);
  }
}

TEST_CASE("tri-slot rejects invalid angles") {
  CHECK_THROWS_WITH_AS(gen_trislot(0.2, kPi / 7.0), doctest::Contains("self-intersecting"),
                       MeshError);
  CHECK_THROWS_AS(gen_trislot(0.2, kPi / 2.0), MeshError);
}

TEST_CASE("channel generator") {
  Mesh m = gen_channel(0.25, 6.0, 2.0);
  CHECK(check_mesh(m).empty());
  CHECK(tag_length(m, BoundaryTag::Kind::Inlet) == Approx(2.0).epsilon(1e-9));
  CHECK(tag_length(m, BoundaryTag::Kind::Symmetry) == Approx(6.0).epsilon(1e-9));
}

TEST_CASE("mesh text round trip is identical") {
  Mesh m = gen_cross_slot(0.3, 2.0);
  std::string text = save_mesh(m);
  Mesh back = load_mesh(text);
  REQUIRE(back.n_nodes() == m.n_nodes());
  REQUIRE(back.n_tris() == m.n_tris());
  for (int i = 0; i < m.n_nodes(); ++i) {
    CHECK(back.nodes[i].x == m.nodes[i].x);
    CHECK(back.nodes[i].y == m.nodes[i].y);
  }
  for (int i = 0; i < m.n_tris(); ++i) {
    CHECK(back.tris[i].a == m.tris[i].a);
    CHECK(back.tris[i].b == m.tris[i].b);
    CHECK(back.tris[i].c == m.tris[i].c);
  }
  REQUIRE(back.bedges.size() == m.bedges.size());
  for (size_t i = 0; i < m.bedges.size(); ++i) {
    CHECK(back.bedges[i].tag == m.bedges[i].tag);
  }
  // and the save is byte-stable
  CHECK(save_mesh(back) == text);
}

TEST_CASE("generators are deterministic") {
  CHECK(save_mesh(gen_cylinder_half(0.3)) == save_mesh(gen_cylinder_half(0.3)));
  CHECK(save_mesh(gen_trislot(0.3, kPi / 3.5)) == save_mesh(gen_trislot(0.3, kPi / 3.5)));
}

TEST_CASE("hand-written fixture parses") {
  std::string text =
      "vmesh 1\n"
      "# unit square\n"
      "nodes 4\n"
      "0 0\n1 0\n1 1\n0 1\n"
      "tris 2\n"
      "0 1 2\n0 2 3\n"
      "bedges 4\n"
      "0 1 wall\n1 2 outlet:1\n2 3 wall\n3 0 inlet:1\n";
  Mesh m = load_mesh(text);
  CHECK(m.n_nodes() == 4);
  CHECK(m.n_tris() == 2);
  CHECK(m.bedges.size() == 4);
  CHECK(m.bedges[1].tag.kind == BoundaryTag::Kind::Outlet);
  CHECK(m.bedges[1].tag.port == 1);
}

TEST_CASE("loader reports a flipped triangle with its index") {
  std::string text =
      "vmesh 1\n"
      "nodes 4\n0 0\n1 0\n1 1\n0 1\n"
      "tris 2\n0 2 1\n0 2 3\n"  // first triangle clockwise
      "bedges 4\n0 1 wall\n1 2 wall\n2 3 wall\n3 0 wall\n";
  CHECK_THROWS_WITH_AS(load_mesh(text), doctest::Contains("triangle 0"), MeshError);
}

TEST_CASE("loader reports parse errors with line numbers") {
  CHECK_THROWS_WITH_AS(load_mesh("vmesh 2\n"), doctest::Contains("line 1"), MeshError);
  CHECK_THROWS_WITH_AS(load_mesh("vmesh 1\nnodes 1\nbogus\n"), doctest::Contains("line 3"),
                       MeshError);
  CHECK_THROWS_WITH_AS(load_mesh("vmesh 1\nnodes 0\ntris 0\nbedges 1\n0 1 fancy\n"),
                       doctest::Contains("line 5"), MeshError);
}

TEST_CASE("check_mesh flags untagged boundary and interior tags") {
  std::string base =
      "vmesh 1\n"
      "nodes 4\n0 0\n1 0\n1 1\n0 1\n"
      "tris 2\n0 1 2\n0 2 3\n";
  CHECK_THROWS_WITH_AS(load_mesh(base + "bedges 3\n0 1 wall\n1 2 wall\n2 3 wall\n"),
                       doctest::Contains("without tag"), MeshError);
  CHECK_THROWS_WITH_AS(
      load_mesh(base + "bedges 5\n0 1 wall\n1 2 wall\n2 3 wall\n3 0 wall\n0 2 wall\n"),
      doctest::Contains("interior"), MeshError);
}
