#pragma once

#include <stdexcept>

namespace vfem {

// Regularized step from 0 to 1 over [t_start, t_end]: C1 cubic
// 0.5 + 1.5*tb - 2*tb^3 with tb = (t - (t_start+t_end)/2)/(t_end - t_start).
inline double step_profile(double t, double t_start, double t_end) {
  if (t < t_start) return 0.0;
  if (t >= t_end) return 1.0;
  double tb = (t - 0.5 * (t_start + t_end)) / (t_end - t_start);
  return 0.5 + 1.5 * tb - 2.0 * tb * tb * tb;
}

struct RampSpec {
  double we_start = 0.5;
  double we_end = 0.5;
  double t_start = 0.0;
  double t_end = 1.0;

  double span() const { return t_end - t_start; }

  void validate() const {
    if (!(t_end > t_start) || t_start < 0.0) throw std::invalid_argument("ramp: t_end must exceed t_start >= 0");
    if (!(we_start > 0.0) || !(we_end > 0.0)) throw std::invalid_argument("ramp: Weissenberg numbers must be positive");
  }

  static RampSpec constant(double we) { return {we, we, 0.0, 1.0}; }
};

inline double step_function(double t, const RampSpec& r) {
  return r.we_start + (r.we_end - r.we_start) * step_profile(t, r.t_start, r.t_end);
}

}  // namespace vfem
