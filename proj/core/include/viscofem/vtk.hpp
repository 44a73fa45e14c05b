#pragma once

#include <string>
#include <vector>

#include "viscofem/mesh.hpp"
#include "viscofem/state.hpp"

namespace vfem {

// VTK legacy ASCII unstructured-grid writer for vertex data on triangle
// meshes; output is byte-deterministic for identical input
class VtkWriter {
 public:
  void add_scalar(const std::string& name, const VecX& values) { scalars_.push_back({name, values}); }
  void add_vector(const std::string& name, const VecX& x, const VecX& y) {
    vectors_.push_back({name, x, y});
  }
  void write(const std::string& path, const Mesh& mesh) const;

 private:
  struct Scalar {
    std::string name;
    VecX values;
  };
  struct Vector {
    std::string name;
    VecX x, y;
  };
  std::vector<Scalar> scalars_;
  std::vector<Vector> vectors_;
};

// simple per-node CSV: x,y,<columns>
void write_point_csv(const std::string& path, const Mesh& mesh,
                     const std::vector<std::pair<std::string, const VecX*>>& columns);

// atomic text-file write (temp file + rename)
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace vfem
