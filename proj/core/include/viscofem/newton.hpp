#pragma once

#include <string>
#include <vector>

#include "viscofem/dae.hpp"
#include "viscofem/linear_solver.hpp"

namespace vfem {

struct NewtonConfig {
  enum class Damping { Constant, Automatic };
  Damping damping = Damping::Automatic;
  double factor = 1.0;  // step factor for Constant damping
  int max_iter = 30;
  double rtol = 1e-10;
  double atol = 1e-11;
  int max_backtracks = 12;
};

struct NewtonReport {
  bool converged = false;
  int iterations = 0;
  int factorizations = 0;
  std::vector<double> residual_history;
  std::string failure;

  std::string trace() const;
};

struct NewtonError : SolveError {
  NewtonReport report;
  NewtonError(const std::string& what, NewtonReport rep)
      : SolveError(what + "\n" + rep.trace()), report(std::move(rep)) {}
};

// Solves F(u, udot(u), t) = 0 where udot = shift*u + udot_base (BDF form);
// steady problems use shift = 0 and udot_base = 0. Dirichlet values must
// already be imposed on u. When reuse_jacobian is true an existing
// factorization in `lin` is used until convergence stalls.
NewtonReport newton_solve(const DaeSystem& sys, VecX& u, double t, double shift,
                          const VecX& udot_base, const NewtonConfig& cfg, LinearSolver& lin,
                          SpMat& jac, bool reuse_jacobian = false, bool throw_on_fail = true);

}  // namespace vfem
