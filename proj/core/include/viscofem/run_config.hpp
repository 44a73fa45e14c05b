#pragma once

#include <string>
#include <vector>

#include "viscofem/cases.hpp"
#include "viscofem/state.hpp"
#include "viscofem/time_stepper.hpp"

namespace vfem {

struct ConfigError : std::runtime_error {
  std::string key;
  ConfigError(std::string key_, const std::string& what)
      : std::runtime_error(key_.empty() ? what : key_ + ": " + what), key(std::move(key_)) {}
};

struct GeometryConfig {
  std::string kind = "channel";  // cylinder | crossslot | trislot | channel | file:<path>
  double h_target = 0.2;
  double l_up = 10.0, l_down = 10.0;       // cylinder
  double l_arm = 10.0;                     // crossslot
  double theta = 1.0471975511965976;       // trislot (pi/3)
  double l_in = 6.0, l_out = 8.0;          // trislot
  double length = 12.0, half_height = 2.0; // channel
};

struct RampConfig {
  double we_start = 0.05;
  double we_end = 0.5;
  double t_start = 0.0;
  double t_step = -1.0;  // <0: auto 8000*(0.07/h_target)
};

struct ForceConfig {
  std::string kind = "none";  // none | rotating | upward
  double amplitude = 1.0;
  double t_start = 0.0;
  double t_end = 0.0;
};

struct RunSection {
  std::string mode = "transient";  // transient | steady
  double t_end = -1.0;             // <0: auto (ramp end + 20 relaxation times)
  std::string out_dir = "out";
  std::vector<std::string> observers = {"drag_if_cylinder"};
  long seed = 0;
  int threads = 1;
};

struct RunConfig {
  GeometryConfig geometry;
  SolverParams fluid;  // model, beta, Re, supg, quadrature, elastic scheme
  RampConfig ramp;
  TimeStepperConfig stepper;
  ForceConfig force;
  RunSection run;

  double resolved_t_step() const {
    return ramp.t_step > 0.0 ? ramp.t_step : 8000.0 * (0.07 / geometry.h_target);
  }
  RampSpec ramp_spec() const {
    RampSpec r;
    r.we_start = ramp.we_start;
    r.we_end = ramp.we_end;
    r.t_start = ramp.t_start;
    r.t_end = ramp.t_start + resolved_t_step();
    return r;
  }
};

// line-based "key = value" format with [section] headers and '#' comments;
// unknown keys are rejected
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

// serialization used for run manifests; parses back to an equivalent config
std::string format_run_config(const RunConfig& cfg);

}  // namespace vfem
