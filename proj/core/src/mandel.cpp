#include "dmn/mandel.hpp"

#include "dmn/errors.hpp"

namespace dmn {

Mat3 Mat3::operator+(const Mat3& o) const {
  Mat3 r;
  for (int i = 0; i < 9; ++i) r.m[i] = m[i] + o.m[i];
  return r;
}

Mat3 Mat3::operator-(const Mat3& o) const {
  Mat3 r;
  for (int i = 0; i < 9; ++i) r.m[i] = m[i] - o.m[i];
  return r;
}

Mat3 Mat3::operator*(double s) const {
  Mat3 r;
  for (int i = 0; i < 9; ++i) r.m[i] = m[i] * s;
  return r;
}

Mat3 Mat3::operator*(const Mat3& o) const {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0;
      for (int k = 0; k < 3; ++k) s += (*this)(i, k) * o(k, j);
      r(i, j) = s;
    }
  return r;
}

Vec3 Mat3::operator*(const Vec3& x) const {
  Vec3 r;
  for (int i = 0; i < 3; ++i)
    r[i] = (*this)(i, 0) * x[0] + (*this)(i, 1) * x[1] + (*this)(i, 2) * x[2];
  return r;
}

Mat3 Mat3::transposed() const {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = (*this)(j, i);
  return r;
}

double det3(const Mat3& a) {
  return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
         a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
         a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

Mat3 inverse3(const Mat3& a) {
  const double det = det3(a);
  if (det == 0.0 || !std::isfinite(det))
    throw SingularMacroSystem("3x3 matrix is singular");
  const double inv = 1.0 / det;
  Mat3 r;
  r(0, 0) = (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) * inv;
  r(0, 1) = (a(0, 2) * a(2, 1) - a(0, 1) * a(2, 2)) * inv;
  r(0, 2) = (a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1)) * inv;
  r(1, 0) = (a(1, 2) * a(2, 0) - a(1, 0) * a(2, 2)) * inv;
  r(1, 1) = (a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0)) * inv;
  r(1, 2) = (a(0, 2) * a(1, 0) - a(0, 0) * a(1, 2)) * inv;
  r(2, 0) = (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0)) * inv;
  r(2, 1) = (a(0, 1) * a(2, 0) - a(0, 0) * a(2, 1)) * inv;
  r(2, 2) = (a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0)) * inv;
  return r;
}

Vec3 solve3(const Mat3& a, const Vec3& b) { return inverse3(a) * b; }

double frobenius_norm(const Mat3& b) {
  double s = 0;
  for (double x : b.m) s += x * x;
  return std::sqrt(s);
}

Mat3 rotation_matrix(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  const double c2 = c * c, s2 = s * s, sc = s * c;
  const double r2 = std::sqrt(2.0);
  return {{c2, s2, r2 * sc,
           s2, c2, -r2 * sc,
           -r2 * sc, r2 * sc, c2 - s2}};
}

Mat3 rotation_matrix_derivative(double theta) {
  const double s2t = std::sin(2 * theta), c2t = std::cos(2 * theta);
  const double r2 = std::sqrt(2.0);
  return {{-s2t, s2t, r2 * c2t,
           s2t, -s2t, -r2 * c2t,
           -r2 * c2t, r2 * c2t, -2 * s2t}};
}

Mat3 rotate_compliance(const Mat3& d, double theta) {
  return symmetrize(rotation_matrix(-theta) * d * rotation_matrix(theta));
}

Vec3 rotate_vector(const Vec3& x, double theta) {
  return rotation_matrix(-theta) * x;
}

bool is_spd(const Mat3& d) {
  if (d(0, 0) <= 0) return false;
  if (d(0, 0) * d(1, 1) - d(0, 1) * d(1, 0) <= 0) return false;
  return det3(d) > 0;
}

}  // namespace dmn
