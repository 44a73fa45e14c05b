#pragma once

#include <functional>
#include <optional>

#include "viscofem/bc.hpp"
#include "viscofem/dae.hpp"
#include "viscofem/ramp.hpp"

namespace vfem {

struct AssemblyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// body force field f(x, t)
using BodyForceField = std::function<Vec2(Vec2, double)>;

// Mixed finite-element discretization of the dimensionless governing
// equations on a triangle mesh: P2 velocity, P1 pressure, P1 projected
// velocity gradient (DEVSS), P1 log-conformation with SUPG weighting.
class FemSystem : public DaeSystem {
 public:
  FemSystem(const Mesh& mesh, SolverParams params, BcSpec bc_spec,
            RampSpec ramp = RampSpec::constant(0.5));

  const Mesh& mesh() const { return *mesh_; }
  const Spaces& spaces() const { return spaces_; }
  const Layout& layout() const { return layout_; }
  const SolverParams& params() const { return params_; }
  SolverParams& params() { return params_; }
  const BcTable& bc() const { return bc_; }
  const RampSpec& ramp() const { return ramp_; }
  void set_ramp(const RampSpec& r) { ramp_ = r; }

  double we_at(double t) const { return step_function(t, ramp_); }

  void set_body_force(BodyForceField f) { force_ = std::move(f); }
  const BodyForceField& body_force() const { return force_; }

  // DaeSystem interface
  int size() const override { return layout_.total; }
  const std::vector<char>& differential_mask() const override { return differential_; }
  const std::vector<char>& fixed_mask() const override { return fixed_; }
  void impose_constraints(double t, VecX& u) const override;
  void residual(const VecX& u, const VecX& udot, double t, VecX& r) const override;
  void jacobian(const VecX& u, const VecX& udot, double t, double sigma,
                SpMat& jac) const override;
  void set_extra_frozen(const std::vector<char>* frozen) override { extra_frozen_ = frozen; }

  // residual without the Dirichlet row masking, for reaction-force
  // functionals
  void raw_residual(const VecX& u, const VecX& udot, double t, VecX& r) const;

  // number of Dirichlet-constrained dofs
  int n_constrained() const { return bc_.n_constrained(layout_); }

  // fields interpolated at a point (element located by walking the mesh)
  struct Probe {
    Vec2 v;
    double p;
    Tensor2 g;
    SymTensor2 s;
    SymTensor2 a;
    int element;
  };
  std::optional<Probe> interpolate(const VecX& u, Vec2 point) const;
  int locate(Vec2 point) const;  // containing element or -1

  VecX zero_state() const { return VecX::Zero(layout_.total); }

 private:
  struct ElementCache;
  void assemble(const VecX& u, const VecX& udot, double t, double sigma, VecX* r, SpMat* jac,
                bool mask_rows) const;
  void build_pattern(SpMat& jac) const;
  bool is_masked(int dof) const {
    return fixed_[dof] || (extra_frozen_ && (*extra_frozen_)[dof]);
  }

  const Mesh* mesh_;
  Spaces spaces_;
  Layout layout_;
  SolverParams params_;
  BcTable bc_;
  RampSpec ramp_;
  BodyForceField force_;
  std::vector<char> fixed_;
  std::vector<char> differential_;
  const std::vector<char>* extra_frozen_ = nullptr;

  // point-location grid
  mutable std::vector<std::vector<int>> grid_bins_;
  mutable double gx0_ = 0, gy0_ = 0, gcell_ = 1;
  mutable int gnx_ = 0, gny_ = 0;
  void build_locator() const;
};

}  // namespace vfem
