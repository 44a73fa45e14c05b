#pragma once

#include <random>

#include "viscofem/logconf.hpp"

namespace vfem::test {

// dense 2x2 helpers kept independent of the kernel under test

struct M2 {
  double a11, a12, a21, a22;

  static M2 from_sym(const SymTensor2& s) { return {s.xx, s.xy, s.xy, s.yy}; }
  static M2 from_gen(const Tensor2& g) { return {g.xx, g.xy, g.yx, g.yy}; }
  static M2 identity() { return {1, 0, 0, 1}; }

  M2 mul(const M2& o) const {
    return {a11 * o.a11 + a12 * o.a21, a11 * o.a12 + a12 * o.a22, a21 * o.a11 + a22 * o.a21,
            a21 * o.a12 + a22 * o.a22};
  }
  M2 t() const { return {a11, a21, a12, a22}; }
  M2 add(const M2& o) const { return {a11 + o.a11, a12 + o.a12, a21 + o.a21, a22 + o.a22}; }
  M2 scale(double c) const { return {c * a11, c * a12, c * a21, c * a22}; }
  double max_abs_diff(const M2& o) const {
    return std::max({std::abs(a11 - o.a11), std::abs(a12 - o.a12), std::abs(a21 - o.a21),
                     std::abs(a22 - o.a22)});
  }
};

// matrix exponential by scaling and squaring of the Taylor series
inline M2 expm_series(const M2& m) {
  double norm = std::max({std::abs(m.a11), std::abs(m.a12), std::abs(m.a21), std::abs(m.a22)});
  int k = 0;
  while (norm > 0.25 && k < 60) {
    norm *= 0.5;
    ++k;
  }
  M2 x = m.scale(std::pow(0.5, k));
  M2 sum = M2::identity();
  M2 term = M2::identity();
  for (int n = 1; n <= 24; ++n) {
    term = term.mul(x).scale(1.0 / n);
    sum = sum.add(term);
  }
  for (int i = 0; i < k; ++i) sum = sum.mul(sum);
  return sum;
}

inline std::mt19937& rng() {
  static std::mt19937 gen(20240817u);
  return gen;
}

inline SymTensor2 random_sym(double lo = -3.0, double hi = 3.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  return {d(rng()), d(rng()), d(rng())};
}

inline Tensor2 random_tensor(double lo = -2.0, double hi = 2.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  return {d(rng()), d(rng()), d(rng()), d(rng())};
}

}  // namespace vfem::test
