#pragma once

// Scenario drivers for the three benchmark studies, shared by the command
// line front end and the acceptance suite.

#include <map>
#include <memory>

#include "viscofem/linear_solver.hpp"
#include "viscofem/runner.hpp"

namespace vfem {

// quasi-steady observer series from a single ramped cylinder run
struct RampSeries {
  std::vector<double> t, we;
  std::map<std::string, std::vector<double>> series;

  // linear interpolation of a series against the We samples
  double at_we(const std::string& name, double we) const;
};

RampSeries cylinder_ramp_series(double h, double we_end, double t_step_scale, int threads,
                                const std::vector<std::string>& observers,
                                TimeStepperConfig stepper = {});

// stepping preset for branch probes: lazy factorization reuse, local error
// control tight enough to track small asymmetry signals
TimeStepperConfig probe_stepper();

// FENE-CR cross-slot (a_max^2 = 100, beta = 0.2, Re = 0, s = eps I inlets)
class CrossSlotStudy {
 public:
  CrossSlotStudy(double h, int threads);
  ~CrossSlotStudy();

  FemSystem& system() { return *sys_; }

  // steady state on the symmetric branch (stable or not), warm-started
  const VecX& symmetric_state(double we);

  double asym(const VecX& u) const;  // signed vorticity integral
  double dissipation_of(const VecX& u) const;

  struct Branch {
    VecX u;
    double asym = 0.0;
    double dissipation = 0.0;
    bool flipped = false;  // settled on an asymmetric state
  };
  // rotational pulse of the given sign, free evolution, Newton polish
  Branch flip_branch(double we, double pulse_sign);

  // bisection of the instability onset using flip probes
  std::pair<double, double> onset_interval(double lo, double hi, double width);

  struct SweepRow {
    double we;
    double asym;
    double dissipation;
  };
  // stable-branch sweep: symmetric below the onset hint, asymmetric above
  std::vector<SweepRow> sweep(double we0, double we1, double dwe, double onset_hint);

 private:
  bool probe_above_onset(double we);
  void newton_here(VecX& u);  // steady solve with the shared factorization

  Mesh mesh_;
  std::unique_ptr<FemSystem> sys_;
  int threads_;
  LinearSolver lin_;
  SpMat jac_;
  std::map<long, VecX> symmetric_cache_;  // key: round(we * 1e6)
};

// FENE-CR tri-slot (beta = 0.1, otherwise cross-slot parameters)
class TrislotStudy {
 public:
  TrislotStudy(double h, double theta, int threads);
  ~TrislotStudy();

  FemSystem& system() { return *sys_; }
  double asym(const VecX& u) const;  // vorticity integral over the center disk

  // quasi-steady ramp from we0 with a weak rotational pulse early in the
  // ramp, polished by a steady solve
  VecX ramped_state(double we0, double we1, double pulse_amp);

  struct Forced {
    VecX u;
    double asym = 0.0;
    char label = '?';        // 'c' clockwise, 'w' counter-clockwise, 's' straight
    bool persisted = false;  // classification unchanged after the force died
  };
  // artificial body force from rest at fixed We, envelope shutoff, free
  // evolution, Newton polish
  Forced forced_state(double we, BodyForce::Kind kind, double amplitude);

  static char classify(double asym, double tol = 1e-3);

 private:
  void newton_here(VecX& u);

  Mesh mesh_;
  std::unique_ptr<FemSystem> sys_;
  int threads_;
  LinearSolver lin_;
  SpMat jac_;
};

struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0.0;
  std::string detail;
};

struct BenchReport {
  std::string benchmark;
  int level = 0;
  bool pass = true;
  std::vector<CheckResult> checks;

  void add(const std::string& name, bool ok, double value, const std::string& detail) {
    checks.push_back({name, ok, value, detail});
    pass = pass && ok;
  }
};

// paper-preset benchmark scenarios; level selects the mesh ladder entry
BenchReport run_benchmark(const std::string& name, int level, bool nightly, int threads);

// mesh ladders
double cylinder_level_h(int level);   // {0.14, 0.10, 0.07}
double crossslot_level_h(int level);  // {0.16, 0.12, 0.09}
double trislot_level_h(int level);    // {0.20, 0.15, 0.11}

}  // namespace vfem
