#pragma once

#include <functional>
#include <memory>

#include "viscofem/post.hpp"
#include "viscofem/run_config.hpp"

namespace vfem {

struct PreparedCase {
  Mesh mesh;
  std::unique_ptr<FemSystem> sys;
};

// mesh + system + boundary conditions + force wiring from a config
PreparedCase prepare_case(const RunConfig& cfg);

// named scalar functional of the solution; throws ConfigError for unknown names
using ObserverFn = std::function<double(const FemSystem&, const VecX&, double we)>;
ObserverFn make_observer(const std::string& name);

struct RunArtifacts {
  std::string out_dir;
  VecX final_u;
  double final_t = 0.0;
  double final_we = 0.0;
  std::vector<std::string> columns;        // t, We, observers...
  std::vector<std::vector<double>> rows;   // accepted-step samples
  long steps = 0;
};

// executes one configured run and writes run.csv, solve_log.csv, final.vtk,
// final.csv, mesh.txt and manifest.cfg under out_root/out_dir
RunArtifacts execute_run(const RunConfig& cfg, const std::string& out_root,
                         bool write_artifacts = true);

}  // namespace vfem
