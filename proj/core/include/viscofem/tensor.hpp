#pragma once

#include <cmath>

namespace vfem {

struct Vec2 {
  double x = 0.0, y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double a) const { return {a * x, a * y}; }
  Vec2 operator-() const { return {-x, -y}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double norm() const { return std::sqrt(x * x + y * y); }
  Vec2 normalized() const {
    double n = norm();
    return {x / n, y / n};
  }
  // rotation by +90 degrees
  Vec2 perp() const { return {-y, x}; }
};

inline Vec2 operator*(double a, const Vec2& v) { return v * a; }

// Symmetric 2x2 tensor stored as (xx, xy, yy). Holds the conformation
// tensor A, its matrix logarithm s, the elastic stress and the reaction term.
template <class T>
struct SymTensor2T {
  T xx{}, xy{}, yy{};

  SymTensor2T() = default;
  SymTensor2T(T a, T b, T c) : xx(a), xy(b), yy(c) {}

  SymTensor2T operator+(const SymTensor2T& o) const { return {xx + o.xx, xy + o.xy, yy + o.yy}; }
  SymTensor2T operator-(const SymTensor2T& o) const { return {xx - o.xx, xy - o.xy, yy - o.yy}; }
  SymTensor2T operator*(T a) const { return {a * xx, a * xy, a * yy}; }
  T trace() const { return xx + yy; }
  T det() const { return xx * yy - xy * xy; }
};

using SymTensor2 = SymTensor2T<double>;

// General 2x2 tensor. For velocity gradients the storage convention is
// xy = d(v_x)/dy, yx = d(v_y)/dx.
template <class T>
struct Tensor2T {
  T xx{}, xy{}, yx{}, yy{};

  Tensor2T() = default;
  Tensor2T(T a, T b, T c, T d) : xx(a), xy(b), yx(c), yy(d) {}

  Tensor2T transposed() const { return {xx, yx, xy, yy}; }
  T trace() const { return xx + yy; }
};

using Tensor2 = Tensor2T<double>;

// Eigen-decomposition of a symmetric 2x2 tensor. lam1 is the minus-branch
// root of the characteristic polynomial, (v1x, v1y) the unit eigenvector of
// lam1. When |xy| <= eps the rotation is the identity and (lam1, lam2) are
// the diagonal entries in storage order, unsorted.
template <class T>
struct Eigensystem2T {
  T lam1{}, lam2{};
  T v1x{}, v1y{};
  bool identity = false;
};

using Eigensystem2 = Eigensystem2T<double>;

}  // namespace vfem
