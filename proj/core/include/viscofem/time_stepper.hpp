#pragma once

#include <functional>

#include "viscofem/assembly.hpp"
#include "viscofem/newton.hpp"

namespace vfem {

struct TimeStepperConfig {
  double rel_tol = 1e-3;
  double abs_tol = 1e-4;
  double dt_init = 1e-3;
  double dt_max = 0.0;        // 0: only window caps apply
  double dt_min_rel = 1e-10;  // times the horizon
  int max_order = 2;          // BDF order 1..2
  NewtonConfig newton;
  enum class Refresh { EveryStep, Lazy } refresh = Refresh::EveryStep;
  long max_steps = 2000000;
};

struct StepRecord {
  long step = 0;
  double t = 0.0;
  double we = 0.0;
  double dt = 0.0;
  int order = 1;
  double res_norm = 0.0;
  int newton_iters = 0;
  bool jac_refreshed = false;
};

struct TransientOptions {
  TimeStepperConfig stepper;
  // dt is capped at span/20 inside each window, and steps land exactly on
  // window edges
  std::vector<std::pair<double, double>> rate_windows;
  std::function<void(const StepRecord&, const VecX&)> on_accept;
  std::function<double(double)> we_of_t;  // for the log only
  // early termination, checked after each accepted step
  std::function<bool(const StepRecord&, const VecX&)> stop_when;
};

// integrates the DAE from t0 to t1; u is consistent on return
void transient_solve(DaeSystem& sys, VecX& u, double t0, double t1, const TransientOptions& opt);

// steady solve F(u, 0, t) = 0 with Dirichlet data at time t
NewtonReport steady_solve(DaeSystem& sys, VecX& u, double t, const NewtonConfig& cfg);

// solves the algebraic variables with all differential dofs frozen
NewtonReport consistent_init(DaeSystem& sys, VecX& u, double t, const NewtonConfig& cfg);

struct ContinuationReport {
  NewtonReport newtonian;
  NewtonReport steady;
  long transient_steps = 0;
};

// three-stage steady-state recipe at fixed Weissenberg number:
// a Newtonian-style algebraic solve, a transient over ten relaxation times,
// then a steady Newton solve
ContinuationReport continuation_procedure(FemSystem& sys, double we, VecX& u,
                                          const TimeStepperConfig& cfg);

}  // namespace vfem
