#include "viscofem/vtk.hpp"

#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace vfem {

namespace {

void append(std::string& out, const char* fmt, ...) {
  char buf[256];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, args);
  va_end(args);
  out += buf;
}

}  // namespace

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
    f << content;
    if (!f.good()) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

void VtkWriter::write(const std::string& path, const Mesh& mesh) const {
  std::string out;
  out.reserve(mesh.n_nodes() * 64);
  out += "# vtk DataFile Version 2.0\n";
  out += "viscofem fields\n";
  out += "ASCII\n";
  out += "DATASET UNSTRUCTURED_GRID\n";
  append(out, "POINTS %d double\n", mesh.n_nodes());
  for (const Vec2& p : mesh.nodes) append(out, "%.9g %.9g 0\n", p.x, p.y);
  append(out, "CELLS %d %d\n", mesh.n_tris(), 4 * mesh.n_tris());
  for (const Tri& t : mesh.tris) append(out, "3 %d %d %d\n", t.a, t.b, t.c);
  append(out, "CELL_TYPES %d\n", mesh.n_tris());
  for (int i = 0; i < mesh.n_tris(); ++i) out += "5\n";
  append(out, "POINT_DATA %d\n", mesh.n_nodes());
  for (const Scalar& s : scalars_) {
    append(out, "SCALARS %s double 1\n", s.name.c_str());
    out += "LOOKUP_TABLE default\n";
    for (int i = 0; i < s.values.size(); ++i) append(out, "%.9g\n", s.values[i]);
  }
  for (const Vector& v : vectors_) {
    append(out, "VECTORS %s double\n", v.name.c_str());
    for (int i = 0; i < v.x.size(); ++i) append(out, "%.9g %.9g 0\n", v.x[i], v.y[i]);
  }
  write_file_atomic(path, out);
}

void write_point_csv(const std::string& path, const Mesh& mesh,
                     const std::vector<std::pair<std::string, const VecX*>>& columns) {
  std::string out = "x,y";
  for (const auto& [name, _] : columns) out += "," + name;
  out += "\n";
  char buf[64];
  for (int i = 0; i < mesh.n_nodes(); ++i) {
    std::snprintf(buf, sizeof buf, "%.9g,%.9g", mesh.nodes[i].x, mesh.nodes[i].y);
    out += buf;
    for (const auto& [_, col] : columns) {
      std::snprintf(buf, sizeof buf, ",%.9g", (*col)[i]);
      out += buf;
    }
    out += "\n";
  }
  write_file_atomic(path, out);
}

}  // namespace vfem
