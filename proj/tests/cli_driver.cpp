// Drives the command-line binary end to end: exit codes, artifact layout and
// byte determinism. The binary path arrives as argv[1].

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int failures = 0;

void expect(bool ok, const std::string& what) {
  if (!ok) {
    std::cerr << "FAIL: " << what << "\n";
    ++failures;
  } else {
    std::cout << "ok: " << what << "\n";
  }
}

int run(const std::string& cmd) {
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: cli_driver <viscofem-binary>\n";
    return 2;
  }
  std::string bin = argv[1];
  fs::path work = fs::temp_directory_path() / "viscofem_cli_test";
  fs::remove_all(work);
  fs::create_directories(work);

  // tiny transient channel run
  fs::path cfg = work / "channel.cfg";
  {
    std::ofstream f(cfg);
    f << "[geometry]\nkind = channel\nh_target = 0.5\nlength = 4\nhalf_height = 2\n"
      << "[fluid]\nmodel = oldroyd_b\nbeta = 0.59\n"
      << "[ramp]\nWe_start = 0.05\nWe_end = 0.3\nT_step = 6\n"
      << "[run]\nmode = transient\nt_end = 8\nout_dir = runA\n"
      << "observers = dissipation,flux_imbalance\n";
  }
  std::string env = "VISCOFEM_OUT_ROOT=" + work.string() + " ";
  expect(run(env + bin + " run " + cfg.string() + " > " + (work / "runA.log").string()) == 0,
         "transient run exits 0");
  for (const char* name :
       {"run.csv", "solve_log.csv", "final.vtk", "final.csv", "mesh.txt", "manifest.cfg"}) {
    expect(fs::exists(work / "runA" / name), std::string("artifact ") + name + " written");
  }
  {
    std::string csv = slurp(work / "runA" / "run.csv");
    expect(csv.rfind("t,We,dissipation,flux_imbalance", 0) == 0, "run.csv header");
    expect(csv.find('\n') != std::string::npos && csv.size() > 40, "run.csv has rows");
  }

  // determinism: the same config into a second directory is byte-identical
  fs::path cfg2 = work / "channel2.cfg";
  {
    std::string text = slurp(cfg);
    text.replace(text.find("runA"), 4, "runB");
    std::ofstream f(cfg2);
    f << text;
  }
  expect(run(env + bin + " run " + cfg2.string() + " > /dev/null") == 0, "second run exits 0");
  expect(slurp(work / "runA" / "run.csv") == slurp(work / "runB" / "run.csv"),
         "run.csv is byte identical across runs");
  expect(slurp(work / "runA" / "final.vtk") == slurp(work / "runB" / "final.vtk"),
         "final.vtk is byte identical across runs");

  // config validation exit code and message
  fs::path bad = work / "bad.cfg";
  {
    std::ofstream f(bad);
    f << "[fluid]\nbeta = 1.5\n";
  }
  expect(run(env + bin + " run " + bad.string() + " 2> " + (work / "bad.log").string()) == 2,
         "config error exits 2");
  expect(slurp(work / "bad.log").find("beta out of range [0,1]") != std::string::npos,
         "config error names the violation");

  // solver failure exit code: a transient that cannot take a single step
  fs::path hard = work / "hard.cfg";
  {
    std::ofstream f(hard);
    f << "[geometry]\nkind = channel\nh_target = 0.5\nlength = 4\n"
      << "[ramp]\nWe_start = 0.05\nWe_end = 0.3\nT_step = 6\n"
      << "[stepper]\nrel_tol = 1e-300\nabs_tol = 1e-300\ndt_init = 1e-2\n"
      << "[run]\nmode = transient\nt_end = 8\nout_dir = hard\nobservers = dissipation\n";
  }
  expect(run(env + bin + " run " + hard.string() + " 2> " + (work / "hard.log").string()) == 3,
         "solver failure exits 3");
  expect(slurp(work / "hard.log").find("solver failure") != std::string::npos,
         "solver failure message names the stage");

  // mesh subcommand
  expect(run(env + bin + " mesh " + cfg.string() + " --out " + (work / "m.txt").string() +
             " > " + (work / "mesh.log").string()) == 0,
         "mesh subcommand exits 0");
  expect(fs::exists(work / "m.txt"), "mesh file written");
  expect(slurp(work / "mesh.log").find("min angle") != std::string::npos,
         "mesh quality report printed");

  // sweep subcommand aggregates rows per parameter value
  expect(run(env + bin + " sweep " + cfg.string() +
             " --param ramp.We_end --values 0.2,0.3 > /dev/null") == 0,
         "sweep exits 0");
  {
    std::string agg = slurp(work / "runA" / "sweep.csv");
    expect(agg.rfind("ramp.We_end,t,We,dissipation,flux_imbalance", 0) == 0,
           "sweep header carries the parameter");
    expect(agg.find("\n0.2,") != std::string::npos && agg.find("\n0.3,") != std::string::npos,
           "sweep contains both parameter values");
  }

  fs::remove_all(work);
  if (failures) {
    std::cerr << failures << " CLI checks failed\n";
    return 1;
  }
  std::cout << "all CLI checks passed\n";
  return 0;
}
