// Mandel-notation algebra for 2D plane strain.
//
// Strain and stress are 3-vectors (e11, e22, sqrt(2) e12); compliance and
// stiffness are symmetric 3x3 matrices in the same basis. Rotation matrices
// in this basis are orthogonal, R(theta)^-1 = R(-theta) = R(theta)^T.
#pragma once

#include <array>
#include <cmath>

namespace dmn {

struct Vec3 {
  std::array<double, 3> v{};

  double& operator[](int i) { return v[i]; }
  double operator[](int i) const { return v[i]; }

  Vec3 operator+(const Vec3& o) const { return {{v[0] + o[0], v[1] + o[1], v[2] + o[2]}}; }
  Vec3 operator-(const Vec3& o) const { return {{v[0] - o[0], v[1] - o[1], v[2] - o[2]}}; }
  Vec3 operator*(double s) const { return {{v[0] * s, v[1] * s, v[2] * s}}; }
  double dot(const Vec3& o) const { return v[0] * o[0] + v[1] * o[1] + v[2] * o[2]; }
  double norm() const { return std::sqrt(dot(*this)); }
};

inline Vec3 operator*(double s, const Vec3& a) { return a * s; }

// Dense 3x3, row-major. Used for both symmetric Mandel matrices and
// rotation operators.
struct Mat3 {
  std::array<double, 9> m{};

  double& operator()(int i, int j) { return m[3 * i + j]; }
  double operator()(int i, int j) const { return m[3 * i + j]; }

  static Mat3 identity() { return {{1, 0, 0, 0, 1, 0, 0, 0, 1}}; }
  static Mat3 zero() { return {}; }

  // Symmetric matrix from the 6 independent entries (11,12,13,22,23,33).
  static Mat3 sym(double a11, double a12, double a13, double a22, double a23, double a33) {
    return {{a11, a12, a13, a12, a22, a23, a13, a23, a33}};
  }

  Mat3 operator+(const Mat3& o) const;
  Mat3 operator-(const Mat3& o) const;
  Mat3 operator*(double s) const;
  Mat3 operator*(const Mat3& o) const;
  Vec3 operator*(const Vec3& x) const;

  Mat3 transposed() const;
  double trace() const { return m[0] + m[4] + m[8]; }
};

inline Mat3 operator*(double s, const Mat3& a) { return a * s; }

double det3(const Mat3& a);
Mat3 inverse3(const Mat3& a);       // throws SingularMacroSystem on singular input
Vec3 solve3(const Mat3& a, const Vec3& b);

// Frobenius norm over the full 3x3 matrix (off-diagonals counted twice
// for a symmetric argument).
double frobenius_norm(const Mat3& b);

// Rotation of a symmetric second-order tensor by theta in Mandel notation.
Mat3 rotation_matrix(double theta);
// d/dtheta of rotation_matrix.
Mat3 rotation_matrix_derivative(double theta);

// R(-theta) D R(theta)
Mat3 rotate_compliance(const Mat3& d, double theta);

// R(-theta) v  (rotate a strain/stress vector together with the structure)
Vec3 rotate_vector(const Vec3& x, double theta);

// Leading-principal-minor test; input assumed symmetric.
bool is_spd(const Mat3& d);

inline Mat3 symmetrize(const Mat3& a) {
  Mat3 r = a;
  r(0, 1) = r(1, 0) = 0.5 * (a(0, 1) + a(1, 0));
  r(0, 2) = r(2, 0) = 0.5 * (a(0, 2) + a(2, 0));
  r(1, 2) = r(2, 1) = 0.5 * (a(1, 2) + a(2, 1));
  return r;
}

}  // namespace dmn
