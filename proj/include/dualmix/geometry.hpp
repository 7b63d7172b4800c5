// Small fixed-size geometric types used throughout the library.
#pragma once

#include <array>
#include <cmath>

namespace dualmix {

struct Vec2 {
  double x = 0.0, y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double norm() const { return std::sqrt(x * x + y * y); }
  // (n1,n2)^perp = (-n2,n1)
  Vec2 perp() const { return {-y, x}; }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

// 2x2 tensor, row-major.
struct Mat2 {
  std::array<double, 4> a{0.0, 0.0, 0.0, 0.0};  // [xx, xy, yx, yy]

  Mat2() = default;
  Mat2(double xx, double xy, double yx, double yy) : a{xx, xy, yx, yy} {}

  double& operator()(int i, int j) { return a[2 * i + j]; }
  double operator()(int i, int j) const { return a[2 * i + j]; }

  Mat2 operator+(const Mat2& o) const {
    return {a[0] + o.a[0], a[1] + o.a[1], a[2] + o.a[2], a[3] + o.a[3]};
  }
  Mat2 operator-(const Mat2& o) const {
    return {a[0] - o.a[0], a[1] - o.a[1], a[2] - o.a[2], a[3] - o.a[3]};
  }
  Mat2 operator*(double s) const { return {a[0] * s, a[1] * s, a[2] * s, a[3] * s}; }

  Mat2 transpose() const { return {a[0], a[2], a[1], a[3]}; }
  double trace() const { return a[0] + a[3]; }
  Mat2 sym() const {
    double off = 0.5 * (a[1] + a[2]);
    return {a[0], off, off, a[3]};
  }
  Mat2 skw() const {
    double off = 0.5 * (a[1] - a[2]);
    return {0.0, off, -off, 0.0};
  }
  // deviatoric (trace-free) part
  Mat2 dev() const {
    double t = 0.5 * trace();
    return {a[0] - t, a[1], a[2], a[3] - t};
  }
  double frobInner(const Mat2& o) const {
    return a[0] * o.a[0] + a[1] * o.a[1] + a[2] * o.a[2] + a[3] * o.a[3];
  }
  double frobNorm() const { return std::sqrt(frobInner(*this)); }
  Vec2 row(int i) const { return {a[2 * i], a[2 * i + 1]}; }
  Vec2 apply(const Vec2& v) const {
    return {a[0] * v.x + a[1] * v.y, a[2] * v.x + a[3] * v.y};
  }

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
};

inline Mat2 operator*(double s, const Mat2& m) { return m * s; }

// outer product u (x) v
inline Mat2 outer(const Vec2& u, const Vec2& v) {
  return {u.x * v.x, u.x * v.y, u.y * v.x, u.y * v.y};
}

}  // namespace dualmix
