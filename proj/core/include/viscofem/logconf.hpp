#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "viscofem/dual.hpp"
#include "viscofem/tensor.hpp"

namespace vfem {

struct KernelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Model { OldroydB, Giesekus, PTTExp, FENEP, FENECR };
enum class RelaxationMode { AsWritten, Consistent };

struct ModelClosure {
  Model kind = Model::OldroydB;
  double alpha_gie = 0.0;   // Giesekus mobility, in [0,1]
  double eps_ptt = 0.0;     // PTT rate parameter, >= 0
  double a_max_sq = 100.0;  // squared maximum extension for FENE models
  RelaxationMode mode = RelaxationMode::Consistent;
};

// numerical parameter shared by the identity-rotation branch and the
// degenerate-eigenvalue branch of the off-diagonal closure
inline constexpr double kEigEps = 1e-12;
// exponent clamp; beyond this the conformation tensor is not representable
inline constexpr double kExpClamp = 700.0;

namespace detail {

template <class T>
void check_exp_range(const T& lam1, const T& lam2) {
  double a = value_of(lam1), b = value_of(lam2);
  if (!(a > -kExpClamp && a < kExpClamp && b > -kExpClamp && b < kExpClamp)) {
    throw KernelError("conformation overflow: |log-eigenvalue| exceeds " +
                      std::to_string(kExpClamp));
  }
}

}  // namespace detail

template <class T>
Eigensystem2T<T> eig_sym_t(const SymTensor2T<T>& s, double eps = kEigEps) {
  using std::sqrt;
  Eigensystem2T<T> e;
  if (std::abs(value_of(s.xy)) <= eps) {
    e.lam1 = s.xx;
    e.lam2 = s.yy;
    e.v1x = T(1);
    e.v1y = T(0);
    e.identity = true;
    return e;
  }
  T delta = s.xx - s.yy;
  T disc = sqrt(delta * delta + T(4) * s.xy * s.xy);
  e.lam1 = T(0.5) * (s.xx + s.yy - disc);
  e.lam2 = T(0.5) * (s.xx + s.yy + disc);
  // v1 = (lam1 - s_yy, s_xy). The first component is rewritten to avoid
  // cancellation when s_xx > s_yy; both forms equal (delta - disc)/2.
  T v1x = (value_of(delta) <= 0.0) ? T(0.5) * (delta - disc)
                                   : -T(2) * s.xy * s.xy / (delta + disc);
  T v1y = s.xy;
  T inv = T(1) / sqrt(v1x * v1x + v1y * v1y);
  e.v1x = v1x * inv;
  e.v1y = v1y * inv;
  e.identity = false;
  return e;
}

inline Eigensystem2 eig_sym(const SymTensor2& s, double eps = kEigEps) {
  if (!(std::isfinite(s.xx) && std::isfinite(s.xy) && std::isfinite(s.yy))) {
    throw KernelError("eig_sym: non-finite input tensor");
  }
  return eig_sym_t<double>(s, eps);
}

// A = R exp(diag(lam)) R^T from a precomputed eigensystem
template <class T>
SymTensor2T<T> conformation_from_eig(const Eigensystem2T<T>& e) {
  using std::exp;
  detail::check_exp_range(e.lam1, e.lam2);
  T e1 = exp(e.lam1), e2 = exp(e.lam2);
  T c = e.v1x, d = e.v1y;
  SymTensor2T<T> a;
  a.xx = c * c * e1 + d * d * e2;
  a.xy = c * d * (e1 - e2);
  a.yy = c * c * e2 + d * d * e1;
  return a;
}

template <class T>
SymTensor2T<T> conformation_from_log_t(const SymTensor2T<T>& s, double eps = kEigEps) {
  return conformation_from_eig(eig_sym_t(s, eps));
}

inline SymTensor2 conformation_from_log(const SymTensor2& s, double eps = kEigEps) {
  return conformation_from_eig(eig_sym(s, eps));
}

// inverse map, used to set inlet data for s from conformation profiles
inline SymTensor2 log_from_conformation(const SymTensor2& a, double eps = kEigEps) {
  if (!(a.xx > 0.0) || !(a.det() > 0.0)) {
    throw KernelError("log_from_conformation: tensor not positive definite");
  }
  Eigensystem2 e = eig_sym(a, eps);
  double l1 = std::log(e.lam1), l2 = std::log(e.lam2);
  double c = e.v1x, d = e.v1y;
  SymTensor2 s;
  s.xx = c * c * l1 + d * d * l2;
  s.xy = c * d * (l1 - l2);
  s.yy = c * c * l2 + d * d * l1;
  return s;
}

// G-tilde = R^T G R
template <class T>
Tensor2T<T> rotate_gradient_t(const Tensor2T<T>& g, const Eigensystem2T<T>& e) {
  if (e.identity) return g;
  T c = e.v1x, d = e.v1y;
  Tensor2T<T> r;
  r.xx = c * c * g.xx + c * d * (g.xy + g.yx) + d * d * g.yy;
  r.xy = c * c * g.xy + c * d * (g.yy - g.xx) - d * d * g.yx;
  r.yx = c * c * g.yx + c * d * (g.yy - g.xx) - d * d * g.xy;
  r.yy = c * c * g.yy - c * d * (g.xy + g.yx) + d * d * g.xx;
  return r;
}

inline Tensor2 rotate_gradient(const Tensor2& g, const Eigensystem2& e) {
  return rotate_gradient_t<double>(g, e);
}

namespace detail {

// relaxation factor r_i such that Omega_ii = 2*Gt_ii - r_i/We
template <class T>
std::pair<T, T> relaxation_factors(const ModelClosure& m, const T& lam1, const T& lam2) {
  using std::exp;
  using std::expm1;
  const bool consistent = (m.mode == RelaxationMode::Consistent);
  switch (m.kind) {
    case Model::OldroydB:
      return {-expm1(-lam1), -expm1(-lam2)};
    case Model::Giesekus: {
      T g1 = expm1(lam1), g2 = expm1(lam2);
      T f1 = (T(1) + m.alpha_gie * g1) * g1;
      T f2 = (T(1) + m.alpha_gie * g2) * g2;
      if (consistent) {
        f1 = f1 * exp(-lam1);
        f2 = f2 * exp(-lam2);
      }
      return {f1, f2};
    }
    case Model::PTTExp: {
      if (consistent) {
        T f = exp(m.eps_ptt * (exp(lam1) + exp(lam2) - T(3)));
        return {f * (-expm1(-lam1)), f * (-expm1(-lam2))};
      }
      T k = exp(m.eps_ptt * (lam1 + lam2 - T(3)));
      return {k, k};
    }
    case Model::FENEP: {
      T denom = consistent ? T(1) - (exp(lam1) + exp(lam2)) / m.a_max_sq
                           : T(1) - (lam1 + lam2) / m.a_max_sq;
      if (value_of(denom) <= 0.0) {
        throw KernelError("FENE bound exceeded: trace reached the maximum extension");
      }
      T k = T(1) / denom;
      if (consistent) return {k - exp(-lam1), k - exp(-lam2)};
      return {k * exp(lam1) - T(1), k * exp(lam2) - T(1)};
    }
    case Model::FENECR: {
      T denom = consistent ? T(1) - (exp(lam1) + exp(lam2)) / m.a_max_sq
                           : T(1) - (lam1 + lam2) / m.a_max_sq;
      if (value_of(denom) <= 0.0) {
        throw KernelError("FENE bound exceeded: trace reached the maximum extension");
      }
      T k = T(1) / denom;
      if (consistent) return {-k * expm1(-lam1), -k * expm1(-lam2)};
      return {k * expm1(lam1), k * expm1(lam2)};
    }
  }
  throw KernelError("unknown model");
}

}  // namespace detail

template <class T>
std::pair<T, T> omega_diag_t(const ModelClosure& m, const Tensor2T<T>& gt, const T& lam1,
                             const T& lam2, double we) {
  detail::check_exp_range(lam1, lam2);
  auto [r1, r2] = detail::relaxation_factors(m, lam1, lam2);
  return {T(2) * gt.xx - r1 / we, T(2) * gt.yy - r2 / we};
}

inline std::pair<double, double> omega_diag(const ModelClosure& m, const Tensor2& gt,
                                            double lam1, double lam2, double we) {
  return omega_diag_t<double>(m, gt, lam1, lam2, we);
}

// Omega_12 = (lam1-lam2)/(e^lam1 - e^lam2) * (e^lam1 Gt_12 + e^lam2 Gt_21),
// with the degenerate branch Gt_12 + Gt_21 for |lam1-lam2| <= eps.
// Evaluated via expm1 in a form that stays accurate near the branch point
// and cannot overflow for admissible eigenvalues.
template <class T>
T omega_offdiag_t(const Tensor2T<T>& gt, const T& lam1, const T& lam2, double eps = kEigEps) {
  using std::exp;
  using std::expm1;
  T g = lam1 - lam2;
  if (std::abs(value_of(g)) <= eps) return gt.xy + gt.yx;
  detail::check_exp_range(lam1, lam2);
  if (value_of(g) >= 0.0) {
    T a = -g / expm1(-g);  // g / (1 - e^{-g})
    return a * gt.xy + a * exp(-g) * gt.yx;
  }
  T a = g / expm1(g);
  return a * exp(g) * gt.xy + a * gt.yx;
}

inline double omega_offdiag(const Tensor2& gt, double lam1, double lam2, double eps = kEigEps) {
  return omega_offdiag_t<double>(gt, lam1, lam2, eps);
}

// Pi = R Omega R^T
template <class T>
SymTensor2T<T> reaction_term_t(const Eigensystem2T<T>& e, const T& o11, const T& o12,
                               const T& o22) {
  T c = e.v1x, d = e.v1y;
  SymTensor2T<T> p;
  p.xx = c * c * o11 - T(2) * c * d * o12 + d * d * o22;
  p.xy = (c * c - d * d) * o12 + c * d * (o11 - o22);
  p.yy = c * c * o22 + T(2) * c * d * o12 + d * d * o11;
  return p;
}

inline SymTensor2 reaction_term(const Eigensystem2& e, double o11, double o12, double o22) {
  return reaction_term_t<double>(e, o11, o12, o22);
}

// Full reaction pipeline Pi(s, G). The off-diagonal closure is written in
// terms of the rotated gradient with its off-diagonal entries swapped; the
// homogeneous-shear fixed point pins this orientation.
template <class T>
SymTensor2T<T> reaction_t(const SymTensor2T<T>& s, const Tensor2T<T>& g, const ModelClosure& m,
                          double we, double eps = kEigEps) {
  Eigensystem2T<T> e = eig_sym_t(s, eps);
  Tensor2T<T> gt = rotate_gradient_t(g, e);
  auto [o11, o22] = omega_diag_t(m, gt, e.lam1, e.lam2, we);
  T o12 = omega_offdiag_t(gt.transposed(), e.lam1, e.lam2, eps);
  return reaction_term_t(e, o11, o12, o22);
}

inline SymTensor2 reaction(const SymTensor2& s, const Tensor2& g, const ModelClosure& m,
                           double we, double eps = kEigEps) {
  return reaction_t<double>(s, g, m, we, eps);
}

// dimensionless elastic stress (1-beta)/We * (A - I)
template <class T>
SymTensor2T<T> elastic_stress_t(const SymTensor2T<T>& s, double we, double beta,
                                double eps = kEigEps) {
  SymTensor2T<T> a = conformation_from_log_t(s, eps);
  double c = (1.0 - beta) / we;
  return {c * (a.xx - T(1)), c * a.xy, c * (a.yy - T(1))};
}

inline SymTensor2 elastic_stress(const SymTensor2& s, double we, double beta,
                                 double eps = kEigEps) {
  return elastic_stress_t<double>(s, we, beta, eps);
}

struct Invariants2 {
  double trace = 0.0;
  double det = 0.0;
};

inline Invariants2 invariants(const SymTensor2& a) { return {a.trace(), a.det()}; }

// --- derivative bundles for Jacobian assembly -------------------------------

// component order for s is (xx, xy, yy); for G it is (xx, xy, yx, yy)
struct ReactionDerivs {
  SymTensor2 pi;
  double d_s[3][3];  // d pi_c / d s_k
  double d_g[3][4];  // d pi_c / d g_k
};

namespace detail {

// Derivatives are evaluated just off the degenerate-rotation branch: inside
// |s_xy| <= eps the branch freezes the eigenvectors and would silently drop
// every d/ds_xy coupling (including the relaxation term that keeps the
// linearization well conditioned). The closed-form path is regular at
// s_xy = 1e-9 and approximates the true derivative to that order.
inline double nudge_off_branch(double sxy) {
  if (std::abs(sxy) >= 1e-9) return sxy;
  return sxy >= 0.0 ? 1e-9 : -1e-9;
}

}  // namespace detail

inline ReactionDerivs reaction_derivs(const SymTensor2& s, const Tensor2& g,
                                      const ModelClosure& m, double we, double eps = kEigEps) {
  using D = Dual<7>;
  SymTensor2T<D> sd;
  sd.xx = D::seed(s.xx, 0);
  sd.xy = D::seed(detail::nudge_off_branch(s.xy), 1);
  sd.yy = D::seed(s.yy, 2);
  Tensor2T<D> gd;
  gd.xx = D::seed(g.xx, 3);
  gd.xy = D::seed(g.xy, 4);
  gd.yx = D::seed(g.yx, 5);
  gd.yy = D::seed(g.yy, 6);
  SymTensor2T<D> p = reaction_t(sd, gd, m, we, eps);
  ReactionDerivs out;
  const D* comps[3] = {&p.xx, &p.xy, &p.yy};
  out.pi = {p.xx.v, p.xy.v, p.yy.v};
  for (int c = 0; c < 3; ++c) {
    for (int k = 0; k < 3; ++k) out.d_s[c][k] = comps[c]->d[k];
    for (int k = 0; k < 4; ++k) out.d_g[c][k] = comps[c]->d[3 + k];
  }
  return out;
}

struct ElasticStressDerivs {
  SymTensor2 tau;
  double d_s[3][3];
};

inline ElasticStressDerivs elastic_stress_derivs(const SymTensor2& s, double we, double beta,
                                                 double eps = kEigEps) {
  using D = Dual<3>;
  SymTensor2T<D> sd;
  sd.xx = D::seed(s.xx, 0);
  sd.xy = D::seed(detail::nudge_off_branch(s.xy), 1);
  sd.yy = D::seed(s.yy, 2);
  SymTensor2T<D> t = elastic_stress_t(sd, we, beta, eps);
  ElasticStressDerivs out;
  const D* comps[3] = {&t.xx, &t.xy, &t.yy};
  out.tau = {t.xx.v, t.xy.v, t.yy.v};
  for (int c = 0; c < 3; ++c)
    for (int k = 0; k < 3; ++k) out.d_s[c][k] = comps[c]->d[k];
  return out;
}

}  // namespace vfem
