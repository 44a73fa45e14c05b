#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "viscofem/tensor.hpp"

namespace vfem {

struct MeshError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BoundaryTag {
  enum class Kind { Wall, Inlet, Outlet, Symmetry, Cylinder };
  Kind kind = Kind::Wall;
  int port = 0;  // port index for Inlet/Outlet

  bool operator==(const BoundaryTag&) const = default;

  std::string str() const;
  static BoundaryTag parse(const std::string& text);
};

struct Tri {
  int a = 0, b = 0, c = 0;  // CCW
};

// Boundary edge directed so that the domain lies on its left, i.e. (a, b)
// appears in exactly that order in its parent triangle. The outward unit
// normal is then (dy, -dx)/len.
struct BEdge {
  int a = 0, b = 0;
  BoundaryTag tag;
};

struct Mesh {
  std::vector<Vec2> nodes;
  std::vector<Tri> tris;
  std::vector<BEdge> bedges;
  std::vector<double> h_elem;  // longest edge per triangle

  int n_nodes() const { return static_cast<int>(nodes.size()); }
  int n_tris() const { return static_cast<int>(tris.size()); }

  double signed_area(int t) const {
    const Tri& e = tris[t];
    return 0.5 * (nodes[e.b] - nodes[e.a]).cross(nodes[e.c] - nodes[e.a]);
  }
  Vec2 centroid(int t) const {
    const Tri& e = tris[t];
    return (nodes[e.a] + nodes[e.b] + nodes[e.c]) * (1.0 / 3.0);
  }

  void compute_h();
};

// validates every mesh invariant; returns human-readable violations
std::vector<std::string> check_mesh(const Mesh& mesh);

std::string save_mesh(const Mesh& mesh);
Mesh load_mesh(const std::string& text);

void write_mesh_file(const Mesh& mesh, const std::string& path);
Mesh read_mesh_file(const std::string& path);

// total boundary length carried by a tag
double tag_length(const Mesh& mesh, BoundaryTag::Kind kind, int port = -1);

}  // namespace vfem
