#pragma once

#include "viscofem/dae.hpp"
#include "viscofem/logconf.hpp"

namespace vfem {

// Spatially homogeneous flow: ds/dt = Pi(s, G) at a single material point
// with a frozen velocity gradient. Used for constitutive oracles and time
// integrator order checks.
class HomogeneousSystem : public DaeSystem {
 public:
  HomogeneousSystem(ModelClosure model, double we, Tensor2 g)
      : model_(model), we_(we), g_(g), diff_(3, 1), fixed_(3, 0) {}

  int size() const override { return 3; }
  const std::vector<char>& differential_mask() const override { return diff_; }
  const std::vector<char>& fixed_mask() const override { return fixed_; }

  void residual(const VecX& u, const VecX& udot, double t, VecX& r) const override;
  void jacobian(const VecX& u, const VecX& udot, double t, double sigma,
                SpMat& jac) const override;

  // steady conformation tensor reached from s0 by integrating to t_end
  static SymTensor2 integrate(ModelClosure model, double we, Tensor2 g, SymTensor2 s0,
                              double t_end, double dt, int max_order = 2);

 private:
  ModelClosure model_;
  double we_;
  Tensor2 g_;
  std::vector<char> diff_, fixed_;
};

}  // namespace vfem
