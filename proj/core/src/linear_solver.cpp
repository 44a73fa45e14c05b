#include "viscofem/linear_solver.hpp"

namespace vfem {

void LinearSolver::factorize(const SpMat& a) {
  if (!analyzed_) {
    lu_.analyzePattern(a);
    analyzed_ = true;
  }
  lu_.factorize(a);
  if (lu_.info() != Eigen::Success) {
    // identify an empty or zero-diagonal row as the likely culprit
    int suspect = -1;
    for (int c = 0; c < a.outerSize() && suspect < 0; ++c) {
      bool any = false;
      for (SpMat::InnerIterator it(a, c); it; ++it) {
        if (it.value() != 0.0) {
          any = true;
          break;
        }
      }
      if (!any) suspect = c;
    }
    ready_ = false;
    throw SolveError("singular linear system" +
                     (suspect >= 0 ? " (zero pivot near dof " + std::to_string(suspect) + ")"
                                   : std::string()));
  }
  ready_ = true;
}

VecX LinearSolver::solve(const SpMat& a, const VecX& rhs) const {
  if (!ready_) throw SolveError("linear solve requested before factorization");
  VecX x = lu_.solve(rhs);
  double rhs_norm = rhs.norm();
  if (rhs_norm == 0.0) return x;
  for (int pass = 0; pass < 3; ++pass) {
    VecX resid = rhs - a * x;
    if (resid.norm() <= 1e-12 * rhs_norm) break;
    x += lu_.solve(resid);
  }
  return x;
}

}  // namespace vfem
