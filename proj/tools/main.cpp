#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <json.hpp>

#include "viscofem/bench_cases.hpp"
#include "viscofem/meshgen.hpp"
#include "viscofem/vtk.hpp"

using nlohmann::json;
using namespace vfem;

namespace {

std::string out_root() {
  const char* env = std::getenv("VISCOFEM_OUT_ROOT");
  return env ? env : "";
}

int cmd_run(const std::string& cfg_path) {
  RunConfig cfg;
  try {
    cfg = load_run_config(cfg_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  try {
    RunArtifacts art = execute_run(cfg, out_root());
    std::cout << "run complete: " << art.steps << " steps, artifacts in " << art.out_dir << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "solver failure (stage: run): " << e.what() << "\n";
    return 3;
  }
}

int cmd_mesh(const std::string& cfg_path, const std::string& out_path) {
  RunConfig cfg;
  try {
    cfg = load_run_config(cfg_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  try {
    PreparedCase pc = prepare_case(cfg);
    std::string path = out_path.empty() ? cfg.run.out_dir + "/mesh.txt" : out_path;
    write_file_atomic(path, save_mesh(pc.mesh));

    // quality report
    double min_angle = 180.0, hmin = 1e300, hmax = 0.0;
    for (int t = 0; t < pc.mesh.n_tris(); ++t) {
      const Tri& tr = pc.mesh.tris[t];
      Vec2 p[3] = {pc.mesh.nodes[tr.a], pc.mesh.nodes[tr.b], pc.mesh.nodes[tr.c]};
      for (int k = 0; k < 3; ++k) {
        Vec2 e1 = p[(k + 1) % 3] - p[k];
        Vec2 e2 = p[(k + 2) % 3] - p[k];
        double ang = std::acos(std::clamp(e1.dot(e2) / (e1.norm() * e2.norm()), -1.0, 1.0));
        min_angle = std::min(min_angle, ang * 180.0 / 3.14159265358979323846);
      }
      hmin = std::min(hmin, pc.mesh.h_elem[t]);
      hmax = std::max(hmax, pc.mesh.h_elem[t]);
    }
    std::printf("mesh: %d nodes, %d triangles, %zu boundary edges\n", pc.mesh.n_nodes(),
                pc.mesh.n_tris(), pc.mesh.bedges.size());
    std::printf("quality: min angle %.2f deg, h in [%.4g, %.4g] (target %.4g)\n", min_angle, hmin,
                hmax, cfg.geometry.h_target);
    std::printf("written: %s\n", path.c_str());
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "mesh generation failed: " << e.what() << "\n";
    return 3;
  }
}

int cmd_sweep(const std::string& cfg_path, const std::string& param, const std::string& values) {
  RunConfig base;
  try {
    base = load_run_config(cfg_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  std::vector<double> vals;
  {
    std::istringstream ss(values);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) vals.push_back(std::stod(item));
    }
  }
  if (vals.empty()) {
    std::cerr << "config error: sweep values list is empty\n";
    return 2;
  }

  std::string agg;
  bool header_done = false;
  for (double v : vals) {
    RunConfig cfg = base;
    // patch the swept key through the config text round trip
    std::string text = format_run_config(cfg);
    auto dot = param.find('.');
    if (dot == std::string::npos) {
      std::cerr << "config error: sweep parameter must be section.key\n";
      return 2;
    }
    std::string section = "[" + param.substr(0, dot) + "]";
    std::string key = param.substr(dot + 1);
    std::istringstream in(text);
    std::string line, out, cur;
    bool patched = false;
    char vb[64];
    std::snprintf(vb, sizeof vb, "%.17g", v);
    while (std::getline(in, line)) {
      if (!line.empty() && line.front() == '[') cur = line;
      auto eq = line.find('=');
      if (cur == section && eq != std::string::npos) {
        std::string k = line.substr(0, eq);
        k.erase(k.find_last_not_of(" \t") + 1);
        if (k == key) {
          line = key + " = " + vb;
          patched = true;
        }
      }
      out += line + "\n";
    }
    if (!patched) {
      std::cerr << "config error: unknown sweep parameter '" << param << "'\n";
      return 2;
    }
    try {
      cfg = parse_run_config(out);
    } catch (const ConfigError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 2;
    }
    char sub[64];
    std::snprintf(sub, sizeof sub, "%s_%.6g", key.c_str(), v);
    cfg.run.out_dir = base.run.out_dir + "/" + sub;

    try {
      RunArtifacts art = execute_run(cfg, out_root());
      if (!header_done) {
        agg = param;
        for (const auto& c : art.columns) agg += "," + c;
        agg += "\n";
        header_done = true;
      }
      char buf[64];
      for (const auto& row : art.rows) {
        std::snprintf(buf, sizeof buf, "%.12g", v);
        agg += buf;
        for (double x : row) {
          std::snprintf(buf, sizeof buf, ",%.12g", x);
          agg += buf;
        }
        agg += "\n";
      }
    } catch (const std::exception& e) {
      std::cerr << "solver failure (stage: sweep " << sub << "): " << e.what() << "\n";
      return 3;
    }
  }
  std::string root = out_root();
  std::string agg_path =
      (root.empty() ? base.run.out_dir : root + "/" + base.run.out_dir) + "/sweep.csv";
  write_file_atomic(agg_path, agg);
  std::cout << "sweep complete: " << agg_path << "\n";
  return 0;
}

int cmd_bench(const std::string& name, int level, bool nightly) {
  try {
    BenchReport rep = run_benchmark(name, level, nightly, 2);
    json j;
    j["benchmark"] = rep.benchmark;
    j["level"] = rep.level;
    j["pass"] = rep.pass;
    j["checks"] = json::array();
    for (const CheckResult& c : rep.checks) {
      j["checks"].push_back({{"name", c.name},
                             {"pass", c.pass},
                             {"value", c.value},
                             {"detail", c.detail}});
      std::printf("[%s] %s: %g %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.value,
                  c.detail.c_str());
    }
    std::string root = out_root();
    std::string path = (root.empty() ? std::string("out") : root) + "/bench_" + name + ".json";
    write_file_atomic(path, j.dump(2) + "\n");
    std::printf("report: %s\n", path.c_str());
    return rep.pass ? 0 : 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "solver failure (stage: bench " << name << "): " << e.what() << "\n";
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"viscofem: log-conformation viscoelastic flow on triangle meshes"};
  app.require_subcommand(1);

  std::string cfg_path, out_path, param, values, bench_name;
  int level = 0;
  bool nightly = false;

  auto* run = app.add_subcommand("run", "execute one configured solve");
  run->add_option("config", cfg_path, "config file")->required();

  auto* bench = app.add_subcommand("bench", "run a benchmark preset and report pass/fail");
  bench->add_option("name", bench_name, "cylinder | crossslot | trislot")->required();
  bench->add_option("--level", level, "mesh level 0 (coarse), 1, 2 (fine)");
  bench->add_flag("--nightly", nightly, "include the long fine-mesh checks");

  auto* sweep = app.add_subcommand("sweep", "run a config across parameter values");
  sweep->add_option("config", cfg_path, "config file")->required();
  sweep->add_option("--param", param, "section.key to vary")->required();
  sweep->add_option("--values", values, "comma-separated values")->required();

  auto* mesh = app.add_subcommand("mesh", "generate a mesh and quality report");
  mesh->add_option("config", cfg_path, "config file")->required();
  mesh->add_option("--out", out_path, "output mesh path");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return cmd_run(cfg_path);
  if (mesh->parsed()) return cmd_mesh(cfg_path, out_path);
  if (sweep->parsed()) return cmd_sweep(cfg_path, param, values);
  if (bench->parsed()) return cmd_bench(bench_name, level, nightly);
  return 1;
}
