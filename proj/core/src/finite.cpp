#include "dmn/finite.hpp"

#include "dmn/errors.hpp"

namespace dmn {

Mat4 Mat4::operator+(const Mat4& o) const {
  Mat4 r;
  for (int i = 0; i < 16; ++i) r.m[i] = m[i] + o.m[i];
  return r;
}

Mat4 Mat4::operator-(const Mat4& o) const {
  Mat4 r;
  for (int i = 0; i < 16; ++i) r.m[i] = m[i] - o.m[i];
  return r;
}

Mat4 Mat4::operator*(double s) const {
  Mat4 r;
  for (int i = 0; i < 16; ++i) r.m[i] = m[i] * s;
  return r;
}

Mat4 Mat4::operator*(const Mat4& o) const {
  Mat4 r;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      double s = 0;
      for (int k = 0; k < 4; ++k) s += (*this)(i, k) * o(k, j);
      r(i, j) = s;
    }
  return r;
}

Vec4 Mat4::operator*(const Vec4& x) const {
  Vec4 r;
  for (int i = 0; i < 4; ++i) {
    double s = 0;
    for (int j = 0; j < 4; ++j) s += (*this)(i, j) * x[j];
    r[i] = s;
  }
  return r;
}

Mat4 Mat4::transposed() const {
  Mat4 r;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) r(i, j) = (*this)(j, i);
  return r;
}

Mat4 symmetrize(const Mat4& a) {
  Mat4 r;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) r(i, j) = 0.5 * (a(i, j) + a(j, i));
  return r;
}

double relative_asymmetry(const Mat4& a) {
  double asym = 0, scale = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      asym += (a(i, j) - a(j, i)) * (a(i, j) - a(j, i));
      scale += a(i, j) * a(i, j);
    }
  return scale > 0 ? std::sqrt(asym / scale) : 0.0;
}

Mat4 finite_rotation_matrix(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  const double c2 = c * c, s2 = s * s, sc = s * c;
  return {{c2, s2, sc, sc,
           s2, c2, -sc, -sc,
           -sc, sc, c2, -s2,
           -sc, sc, -s2, c2}};
}

std::array<double, 2> solve_interface_2x2(double a11, double a12, double a21, double a22,
                                          double b1, double b2) {
  const double det = a11 * a22 - a12 * a21;
  const double scale = std::abs(a11) + std::abs(a12) + std::abs(a21) + std::abs(a22);
  if (!std::isfinite(det) || std::abs(det) <= 1e-300 * std::max(1.0, scale * scale))
    throw SingularInterface("2x2 interface system is singular");
  return {(b1 * a22 - b2 * a12) / det, (a11 * b2 - a21 * b1) / det};
}

}  // namespace dmn
