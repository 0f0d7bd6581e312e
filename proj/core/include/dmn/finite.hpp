// Finite-strain vector/matrix algebra over the component ordering
// (11, 22, 12, 21) used for the deformation gradient F and the first
// Piola-Kirchhoff stress P. Tangent matrices have major symmetry only,
// so they are full symmetric 4x4.
#pragma once

#include <array>
#include <cmath>

namespace dmn {

struct Vec4 {
  std::array<double, 4> v{};

  double& operator[](int i) { return v[i]; }
  double operator[](int i) const { return v[i]; }

  Vec4 operator+(const Vec4& o) const { return {{v[0] + o[0], v[1] + o[1], v[2] + o[2], v[3] + o[3]}}; }
  Vec4 operator-(const Vec4& o) const { return {{v[0] - o[0], v[1] - o[1], v[2] - o[2], v[3] - o[3]}}; }
  Vec4 operator*(double s) const { return {{v[0] * s, v[1] * s, v[2] * s, v[3] * s}}; }
  double norm() const { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3]); }

  static Vec4 identity_deformation() { return {{1, 1, 0, 0}}; }
};

inline Vec4 operator*(double s, const Vec4& a) { return a * s; }

struct Mat4 {
  std::array<double, 16> m{};

  double& operator()(int i, int j) { return m[4 * i + j]; }
  double operator()(int i, int j) const { return m[4 * i + j]; }

  static Mat4 identity() {
    Mat4 r;
    r(0, 0) = r(1, 1) = r(2, 2) = r(3, 3) = 1;
    return r;
  }

  Mat4 operator+(const Mat4& o) const;
  Mat4 operator-(const Mat4& o) const;
  Mat4 operator*(double s) const;
  Mat4 operator*(const Mat4& o) const;
  Vec4 operator*(const Vec4& x) const;
  Mat4 transposed() const;
};

inline Mat4 operator*(double s, const Mat4& a) { return a * s; }

Mat4 symmetrize(const Mat4& a);

// Relative asymmetry |A - A^T| / |A|, used to sanity-check analytically
// symmetric results.
double relative_asymmetry(const Mat4& a);

// Rotation of a general (non-symmetric) second-order tensor by theta in the
// (11,22,12,21) ordering. R^f(-theta) = R^f(theta)^-1.
Mat4 finite_rotation_matrix(double theta);

// Linear solve on the (2,3) interface block; throws SingularInterface.
std::array<double, 2> solve_interface_2x2(double a11, double a12, double a21, double a22,
                                          double b1, double b2);

}  // namespace dmn
