// Dense bivariate polynomials of low degree, used to represent local shape
// functions in element-scaled coordinates xi = (x - x_c)/h_K.
#pragma once

#include <array>
#include <cassert>

#include "dualmix/geometry.hpp"

namespace dualmix {

// Monomial order: 1, x, y, x^2, xy, y^2, x^3, x^2 y, x y^2, y^3.
inline constexpr int kPolyCoeffs = 10;
inline constexpr int kPolyMaxDeg = 3;

struct Poly {
  std::array<double, kPolyCoeffs> c{};

  static constexpr std::array<int, kPolyCoeffs> px{0, 1, 0, 2, 1, 0, 3, 2, 1, 0};
  static constexpr std::array<int, kPolyCoeffs> py{0, 0, 1, 0, 1, 2, 0, 1, 2, 3};

  static int index(int i, int j) {
    int d = i + j;
    assert(d <= kPolyMaxDeg);
    return d * (d + 1) / 2 + j;
  }

  double eval(const Vec2& p) const {
    double x = p.x, y = p.y;
    double x2 = x * x, y2 = y * y;
    return c[0] + c[1] * x + c[2] * y + c[3] * x2 + c[4] * x * y + c[5] * y2 +
           c[6] * x2 * x + c[7] * x2 * y + c[8] * x * y2 + c[9] * y2 * y;
  }

  Poly dx() const {
    Poly d;
    for (int k = 0; k < kPolyCoeffs; ++k)
      if (px[k] > 0) d.c[index(px[k] - 1, py[k])] += px[k] * c[k];
    return d;
  }
  Poly dy() const {
    Poly d;
    for (int k = 0; k < kPolyCoeffs; ++k)
      if (py[k] > 0) d.c[index(px[k], py[k] - 1)] += py[k] * c[k];
    return d;
  }

  Poly& operator+=(const Poly& o) {
    for (int k = 0; k < kPolyCoeffs; ++k) c[k] += o.c[k];
    return *this;
  }
  Poly operator*(double s) const {
    Poly r = *this;
    for (auto& v : r.c) v *= s;
    return r;
  }
};

struct VecPoly {
  Poly x, y;
  Vec2 eval(const Vec2& p) const { return {x.eval(p), y.eval(p)}; }
};

struct TensorPoly {
  std::array<Poly, 4> a;  // row-major [xx, xy, yx, yy]
  Mat2 eval(const Vec2& p) const {
    return {a[0].eval(p), a[1].eval(p), a[2].eval(p), a[3].eval(p)};
  }
};

}  // namespace dualmix
