#pragma once

#include "viscofem/bc.hpp"
#include "viscofem/ramp.hpp"

namespace vfem {

// Developed Oldroyd-B profile for the half-channel of height 2 (cylinder
// geometry scaling): unit mean velocity, conformation from the steady
// simple-shear relation.
std::pair<Vec2, SymTensor2> inlet_oldroydb(double y, double we);

// Developed FENE-CR profile (same channel scaling); n_dot_x is the component
// of the inlet normal along +x. Throws for a_max_sq <= 2.
std::pair<Vec2, SymTensor2> inlet_fenecr(double y, double we, double a_max_sq, double n_dot_x);

// the near-equilibrium inlet used by the slot geometries
inline SymTensor2 inlet_eps_identity() { return {1e-12, 0.0, 1e-12}; }

struct BodyForce {
  enum class Kind { None, Rotating, Upward };
  Kind kind = Kind::None;
  double amplitude = 1.0;
  RampSpec envelope;  // force is scaled by (1 - st(t))

  Vec2 operator()(Vec2 x, double t) const;
  static Vec2 eval_spatial(Kind kind, Vec2 x);
};

// boundary-condition specs for the benchmark geometries
BcSpec cylinder_bc();
BcSpec channel_bc(double we_scale_unused = 0.0);
BcSpec cross_slot_bc(double l_arm = 10.0);
BcSpec trislot_bc(double theta, double l_in = 6.0, double l_out = 8.0);

}  // namespace vfem
