#pragma once

#include <cstdint>
#include <functional>
#include <map>

#include "viscofem/state.hpp"

namespace vfem {

// Inlet data by port: velocity profile and log-conformation profile, both
// functions of position and the current Weissenberg number.
struct InletBc {
  std::function<Vec2(Vec2, double)> velocity;
  std::function<SymTensor2(Vec2, double)> log_conf;
};

struct BcSpec {
  std::map<int, InletBc> inlets;
  // at outlets the solvent traction is dropped from the weak form and the
  // pressure is pinned to zero; where the outlet cap is axis-aligned the
  // tangential velocity component is pinned as well (normal outflow)
  bool pin_outlet_tangential = true;
};

// Dirichlet data resolved against a mesh: which dofs are pinned and where
// their values come from. Values depend on We, so they are re-imposed
// whenever the ramp advances.
class BcTable {
 public:
  static BcTable build(const Mesh& mesh, const Spaces& spaces, BcSpec spec);

  // write boundary values into the state vector
  void impose(double we, const Layout& layout, const Spaces& spaces, VecX& u) const;

  std::vector<char> fixed_mask(const Layout& layout) const;
  int n_constrained(const Layout& layout) const;

  const BcSpec& spec() const { return spec_; }

 private:
  enum class VSrc : uint8_t { None, Zero, Inlet };
  struct VNode {
    uint8_t mask = 0;  // bit 0: x pinned, bit 1: y pinned
    VSrc src = VSrc::None;
    int port = 0;
  };
  struct SPin {
    int vert;
    int port;
  };

  BcSpec spec_;
  std::vector<VNode> vnodes_;
  std::vector<char> p_pin_;
  std::vector<SPin> s_pins_;
};

}  // namespace vfem
