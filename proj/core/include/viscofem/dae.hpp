#pragma once

#include "viscofem/state.hpp"

namespace vfem {

// Implicit DAE F(u, du/dt, t) = 0. Algebraic equations ignore du/dt.
// Fixed dofs carry Dirichlet data written by impose_constraints; their
// Jacobian rows are identity and their residual entries zero.
class DaeSystem {
 public:
  virtual ~DaeSystem() = default;

  virtual int size() const = 0;
  virtual const std::vector<char>& differential_mask() const = 0;
  virtual const std::vector<char>& fixed_mask() const = 0;

  virtual void impose_constraints(double t, VecX& u) const {}

  virtual void residual(const VecX& u, const VecX& udot, double t, VecX& r) const = 0;
  // J = dF/du + sigma dF/d(udot); builds the pattern on first use
  virtual void jacobian(const VecX& u, const VecX& udot, double t, double sigma,
                        SpMat& jac) const = 0;

  // temporarily treat additional dofs as pinned (consistent initialization);
  // pass nullptr to clear
  virtual void set_extra_frozen(const std::vector<char>* frozen) {}
};

}  // namespace vfem
