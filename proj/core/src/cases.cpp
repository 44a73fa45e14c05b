#include "viscofem/cases.hpp"

#include <cmath>
#include <numbers>

#include "viscofem/logconf.hpp"

namespace vfem {

std::pair<Vec2, SymTensor2> inlet_oldroydb(double y, double we) {
  Vec2 v{1.5 * (1.0 - 0.25 * y * y), 0.0};
  SymTensor2 a;
  a.xx = 1.0 + 9.0 / 8.0 * y * y * we * we;
  a.xy = -0.75 * y * we;
  a.yy = 1.0;
  return {v, a};
}

std::pair<Vec2, SymTensor2> inlet_fenecr(double y, double we, double a_max_sq, double n_dot_x) {
  if (!(a_max_sq > 2.0)) throw KernelError("invalid extensibility: a_max_sq must exceed 2");
  double chi = 3.0 * we * (y / 4.0) * n_dot_x;
  SymTensor2 a;
  double chi2 = chi * chi;
  if (chi2 < 1e-12) {
    a.xx = 1.0;
  } else {
    // a2 - sqrt(a2^2 + 8 chi^2 (a2-2)) rationalized so large extensibility
    // does not cancel away the O(chi^2/a2) correction
    double am2 = a_max_sq;
    double root = std::sqrt(am2 * am2 + 8.0 * chi2 * (am2 - 2.0));
    a.xx = am2 - 1.0 - 2.0 * am2 * (am2 - 2.0) / (am2 + root);
  }
  a.xy = chi * (1.0 - (a.xx + 1.0) / a_max_sq);
  a.yy = 1.0;
  // inflow along the inward normal
  Vec2 v{-1.5 * (1.0 - 0.25 * y * y) * n_dot_x, 0.0};
  return {v, a};
}

Vec2 BodyForce::eval_spatial(Kind kind, Vec2 x) {
  constexpr double cutoff = 1.0;  // 0.5 / sin(pi/6)
  if (x.norm() > cutoff) return {0.0, 0.0};
  switch (kind) {
    case Kind::Rotating:
      return {0.5 * x.y, -0.5 * x.x};
    case Kind::Upward:
      return {0.0, 0.25 - x.x * x.x};
    case Kind::None:
      break;
  }
  return {0.0, 0.0};
}

Vec2 BodyForce::operator()(Vec2 x, double t) const {
  if (kind == Kind::None) return {0.0, 0.0};
  double env = 1.0 - step_profile(t, envelope.t_start, envelope.t_end);
  if (env == 0.0) return {0.0, 0.0};
  Vec2 f = eval_spatial(kind, x);
  return f * (amplitude * env);
}

BcSpec cylinder_bc() {
  BcSpec bc;
  InletBc in;
  in.velocity = [](Vec2 p, double we) { return inlet_oldroydb(p.y, we).first; };
  in.log_conf = [](Vec2 p, double we) {
    return log_from_conformation(inlet_oldroydb(p.y, we).second);
  };
  bc.inlets[1] = in;
  return bc;
}

BcSpec channel_bc(double) { return cylinder_bc(); }

BcSpec cross_slot_bc(double l_arm) {
  BcSpec bc;
  auto make = [l_arm](Vec2 dir) {
    InletBc in;
    in.velocity = [dir](Vec2 p, double) {
      double t = dir.x != 0.0 ? p.y : p.x;  // transverse coordinate
      return dir * (1.5 * (1.0 - 4.0 * t * t));
    };
    in.log_conf = [](Vec2, double) { return inlet_eps_identity(); };
    return in;
  };
  bc.inlets[1] = make({1.0, 0.0});   // left inlet flows +x
  bc.inlets[2] = make({-1.0, 0.0});  // right inlet flows -x
  return bc;
}

BcSpec trislot_bc(double theta, double, double) {
  constexpr double kPi = std::numbers::pi;
  BcSpec bc;
  auto make = [](double angle) {
    Vec2 dir{std::cos(angle), std::sin(angle)};  // outward channel direction
    Vec2 tan = dir.perp();
    InletBc in;
    in.velocity = [dir, tan](Vec2 p, double) {
      double t = p.dot(tan);
      return -dir * (1.5 * (1.0 - 4.0 * t * t));
    };
    in.log_conf = [](Vec2, double) { return inlet_eps_identity(); };
    return in;
  };
  bc.inlets[1] = make(3.0 * kPi / 2.0);
  bc.inlets[2] = make(kPi / 2.0 + theta);
  bc.inlets[3] = make(kPi / 2.0 - theta);
  return bc;
}

}  // namespace vfem
