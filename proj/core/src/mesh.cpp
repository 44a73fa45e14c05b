#include "viscofem/mesh.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace vfem {

std::string BoundaryTag::str() const {
  switch (kind) {
    case Kind::Wall:
      return "wall";
    case Kind::Inlet:
      return "inlet:" + std::to_string(port);
    case Kind::Outlet:
      return "outlet:" + std::to_string(port);
    case Kind::Symmetry:
      return "symmetry";
    case Kind::Cylinder:
      return "cylinder";
  }
  return "wall";
}

BoundaryTag BoundaryTag::parse(const std::string& text) {
  BoundaryTag t;
  if (text == "wall") {
    t.kind = Kind::Wall;
  } else if (text == "symmetry") {
    t.kind = Kind::Symmetry;
  } else if (text == "cylinder") {
    t.kind = Kind::Cylinder;
  } else if (text.rfind("inlet:", 0) == 0) {
    t.kind = Kind::Inlet;
    t.port = std::stoi(text.substr(6));
  } else if (text.rfind("outlet:", 0) == 0) {
    t.kind = Kind::Outlet;
    t.port = std::stoi(text.substr(7));
  } else {
    throw MeshError("unknown boundary tag '" + text + "'");
  }
  return t;
}

void Mesh::compute_h() {
  h_elem.resize(tris.size());
  for (size_t t = 0; t < tris.size(); ++t) {
    const Tri& e = tris[t];
    double l0 = (nodes[e.b] - nodes[e.a]).norm();
    double l1 = (nodes[e.c] - nodes[e.b]).norm();
    double l2 = (nodes[e.a] - nodes[e.c]).norm();
    h_elem[t] = std::max({l0, l1, l2});
  }
}

namespace {

using EdgeKey = std::pair<int, int>;

EdgeKey key(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

}  // namespace

std::vector<std::string> check_mesh(const Mesh& mesh) {
  std::vector<std::string> bad;
  const int nn = mesh.n_nodes();

  for (size_t t = 0; t < mesh.tris.size(); ++t) {
    const Tri& e = mesh.tris[t];
    for (int v : {e.a, e.b, e.c}) {
      if (v < 0 || v >= nn) {
        bad.push_back("triangle " + std::to_string(t) + ": node index out of range");
        break;
      }
    }
  }
  if (!bad.empty()) return bad;

  for (size_t t = 0; t < mesh.tris.size(); ++t) {
    if (mesh.signed_area(static_cast<int>(t)) <= 0.0) {
      bad.push_back("triangle " + std::to_string(t) + ": non-positive signed area");
    }
  }

  // edge incidence counts from the triangles
  std::map<EdgeKey, int> count;
  for (const Tri& e : mesh.tris) {
    ++count[key(e.a, e.b)];
    ++count[key(e.b, e.c)];
    ++count[key(e.c, e.a)];
  }
  for (const auto& [k, c] : count) {
    if (c > 2) {
      bad.push_back("edge (" + std::to_string(k.first) + "," + std::to_string(k.second) +
                    "): shared by " + std::to_string(c) + " triangles");
    }
  }

  std::map<EdgeKey, int> tagged;
  for (size_t i = 0; i < mesh.bedges.size(); ++i) {
    const BEdge& be = mesh.bedges[i];
    if (be.a < 0 || be.a >= nn || be.b < 0 || be.b >= nn) {
      bad.push_back("boundary edge " + std::to_string(i) + ": node index out of range");
      continue;
    }
    auto k = key(be.a, be.b);
    if (++tagged[k] > 1) {
      bad.push_back("boundary edge " + std::to_string(i) + ": duplicate tag");
    }
    auto it = count.find(k);
    if (it == count.end()) {
      bad.push_back("boundary edge " + std::to_string(i) + ": not an edge of any triangle");
    } else if (it->second != 1) {
      bad.push_back("boundary edge " + std::to_string(i) + ": tagged edge is interior");
    }
  }
  for (const auto& [k, c] : count) {
    if (c == 1 && tagged.find(k) == tagged.end()) {
      bad.push_back("edge (" + std::to_string(k.first) + "," + std::to_string(k.second) +
                    "): boundary edge without tag");
    }
  }

  // orientation: each tagged edge must appear as a directed edge of its triangle
  std::map<EdgeKey, std::pair<int, int>> directed;
  for (const Tri& e : mesh.tris) {
    directed[key(e.a, e.b)] = {e.a, e.b};
    directed[key(e.b, e.c)] = {e.b, e.c};
    directed[key(e.c, e.a)] = {e.c, e.a};
  }
  for (size_t i = 0; i < mesh.bedges.size(); ++i) {
    const BEdge& be = mesh.bedges[i];
    auto it = directed.find(key(be.a, be.b));
    if (it != directed.end() && count[key(be.a, be.b)] == 1 &&
        (it->second.first != be.a || it->second.second != be.b)) {
      bad.push_back("boundary edge " + std::to_string(i) +
                    ": orientation opposes its triangle (domain must lie left)");
    }
  }

  if (!mesh.h_elem.empty() && mesh.h_elem.size() != mesh.tris.size()) {
    bad.push_back("h_elem size does not match triangle count");
  }
  return bad;
}

std::string save_mesh(const Mesh& mesh) {
  std::string out;
  out.reserve(mesh.nodes.size() * 48 + mesh.tris.size() * 24);
  char buf[128];
  out += "vmesh 1\n";
  std::snprintf(buf, sizeof buf, "nodes %d\n", mesh.n_nodes());
  out += buf;
  for (const Vec2& p : mesh.nodes) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", p.x, p.y);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "tris %d\n", mesh.n_tris());
  out += buf;
  for (const Tri& t : mesh.tris) {
    std::snprintf(buf, sizeof buf, "%d %d %d\n", t.a, t.b, t.c);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "bedges %d\n", static_cast<int>(mesh.bedges.size()));
  out += buf;
  for (const BEdge& e : mesh.bedges) {
    std::snprintf(buf, sizeof buf, "%d %d %s\n", e.a, e.b, e.tag.str().c_str());
    out += buf;
  }
  return out;
}

namespace {

struct LineReader {
  std::istringstream in;
  int lineno = 0;

  explicit LineReader(const std::string& text) : in(text) {}

  // next non-empty line with comments stripped
  bool next(std::string& line) {
    std::string raw;
    while (std::getline(in, raw)) {
      ++lineno;
      auto h = raw.find('#');
      if (h != std::string::npos) raw.erase(h);
      size_t b = raw.find_first_not_of(" \t\r");
      if (b == std::string::npos) continue;
      size_t e = raw.find_last_not_of(" \t\r");
      line = raw.substr(b, e - b + 1);
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw MeshError("mesh parse error at line " + std::to_string(lineno) + ": " + what);
  }
};

}  // namespace

Mesh load_mesh(const std::string& text) {
  LineReader r(text);
  std::string line;
  if (!r.next(line) || line != "vmesh 1") r.fail("expected header 'vmesh 1'");

  Mesh mesh;
  int n = 0;
  if (!r.next(line) || std::sscanf(line.c_str(), "nodes %d", &n) != 1 || n < 0) {
    r.fail("expected 'nodes N'");
  }
  mesh.nodes.reserve(n);
  for (int i = 0; i < n; ++i) {
    double x, y;
    if (!r.next(line) || std::sscanf(line.c_str(), "%lf %lf", &x, &y) != 2) {
      r.fail("expected node coordinates");
    }
    mesh.nodes.push_back({x, y});
  }

  int m = 0;
  if (!r.next(line) || std::sscanf(line.c_str(), "tris %d", &m) != 1 || m < 0) {
    r.fail("expected 'tris M'");
  }
  mesh.tris.reserve(m);
  for (int i = 0; i < m; ++i) {
    Tri t;
    if (!r.next(line) || std::sscanf(line.c_str(), "%d %d %d", &t.a, &t.b, &t.c) != 3) {
      r.fail("expected triangle indices");
    }
    mesh.tris.push_back(t);
  }

  int k = 0;
  if (!r.next(line) || std::sscanf(line.c_str(), "bedges %d", &k) != 1 || k < 0) {
    r.fail("expected 'bedges K'");
  }
  mesh.bedges.reserve(k);
  for (int i = 0; i < k; ++i) {
    BEdge e;
    char tag[64];
    if (!r.next(line) || std::sscanf(line.c_str(), "%d %d %63s", &e.a, &e.b, tag) != 3) {
      r.fail("expected boundary edge");
    }
    try {
      e.tag = BoundaryTag::parse(tag);
    } catch (const MeshError& err) {
      r.fail(err.what());
    }
    mesh.bedges.push_back(e);
  }
  if (r.next(line)) r.fail("trailing content after boundary edges");

  mesh.compute_h();
  auto bad = check_mesh(mesh);
  if (!bad.empty()) throw MeshError("invalid mesh: " + bad.front());
  return mesh;
}

void write_mesh_file(const Mesh& mesh, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw MeshError("cannot open '" + path + "' for writing");
  f << save_mesh(mesh);
}

Mesh read_mesh_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw MeshError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return load_mesh(ss.str());
}

double tag_length(const Mesh& mesh, BoundaryTag::Kind kind, int port) {
  double len = 0.0;
  for (const BEdge& e : mesh.bedges) {
    if (e.tag.kind == kind && (port < 0 || e.tag.port == port)) {
      len += (mesh.nodes[e.b] - mesh.nodes[e.a]).norm();
    }
  }
  return len;
}

}  // namespace vfem
