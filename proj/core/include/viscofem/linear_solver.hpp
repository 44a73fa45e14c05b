#pragma once

#include <Eigen/SparseLU>
#include <memory>
#include <stdexcept>

#include "viscofem/state.hpp"

namespace vfem {

struct SolveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Sparse direct LU with reused symbolic analysis and iterative refinement.
class LinearSolver {
 public:
  void factorize(const SpMat& a);
  // solve with the current factorization, refining to 1e-12 relative
  VecX solve(const SpMat& a, const VecX& rhs) const;
  bool ready() const { return ready_; }
  // drop the numeric factorization; the symbolic analysis is kept
  void reset() { ready_ = false; }

 private:
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
  bool analyzed_ = false;
  bool ready_ = false;
};

}  // namespace vfem
