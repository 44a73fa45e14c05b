#include "viscofem/homogeneous.hpp"

#include <algorithm>
#include <cmath>

#include "viscofem/time_stepper.hpp"

namespace vfem {

void HomogeneousSystem::residual(const VecX& u, const VecX& udot, double, VecX& r) const {
  SymTensor2 s{u[0], u[1], u[2]};
  SymTensor2 pi = reaction(s, g_, model_, we_);
  r.resize(3);
  r[0] = udot[0] - pi.xx;
  r[1] = udot[1] - pi.xy;
  r[2] = udot[2] - pi.yy;
}

void HomogeneousSystem::jacobian(const VecX& u, const VecX&, double, double sigma,
                                 SpMat& jac) const {
  SymTensor2 s{u[0], u[1], u[2]};
  ReactionDerivs rd = reaction_derivs(s, g_, model_, we_);
  jac.resize(3, 3);
  std::vector<Eigen::Triplet<double>> trips;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double v = -rd.d_s[i][j] + (i == j ? sigma : 0.0);
      trips.emplace_back(i, j, v);
    }
  }
  jac.setFromTriplets(trips.begin(), trips.end());
}

SymTensor2 HomogeneousSystem::integrate(ModelClosure model, double we, Tensor2 g, SymTensor2 s0,
                                        double t_end, double dt, int max_order) {
  HomogeneousSystem sys(model, we, g);
  VecX u(3);
  u << s0.xx, s0.xy, s0.yy;
  TransientOptions opt;
  opt.stepper.dt_init = dt;
  opt.stepper.dt_max = dt;
  opt.stepper.rel_tol = 1e9;  // fixed-step mode: never reject on local error
  opt.stepper.abs_tol = 1e9;
  opt.stepper.max_order = max_order;
  opt.stepper.newton.rtol = 1e-12;
  // residual entries scale with the BDF shift, so the attainable floor does too
  opt.stepper.newton.atol = 1e-11 * std::max(1.0, 1.0 / dt);
  transient_solve(sys, u, 0.0, t_end, opt);
  return {u[0], u[1], u[2]};
}

}  // namespace vfem
