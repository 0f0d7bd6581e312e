// Shared random generators for the test suite.
#pragma once

#include <random>

#include "dmn/finite.hpp"
#include "dmn/mandel.hpp"
#include "dmn/materials.hpp"
#include "dmn/sampling.hpp"

namespace dmn::testing {

inline double urand(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Random SPD compliance with populated shear couplings: an orthotropic
// sample rotated by a random angle.
inline Mat3 random_compliance(std::mt19937_64& rng) {
  std::array<double, 7> u;
  for (auto& x : u) x = urand(rng, 0, 1);
  auto [p1, p2] = sample_phase_pair(u);
  const Mat3 d = (urand(rng, 0, 1) < 0.5) ? p1.compliance() : p2.compliance();
  return rotate_compliance(d, urand(rng, -1.5, 1.5));
}

inline Vec3 random_vec3(std::mt19937_64& rng, double scale = 1.0) {
  return Vec3{{urand(rng, -scale, scale), urand(rng, -scale, scale), urand(rng, -scale, scale)}};
}

inline Vec4 random_vec4(std::mt19937_64& rng, double scale = 1.0) {
  return Vec4{{urand(rng, -scale, scale), urand(rng, -scale, scale), urand(rng, -scale, scale),
               urand(rng, -scale, scale)}};
}

// Physical finite-strain tangent: Mooney-Rivlin with random coefficients
// evaluated at a random deformation near the identity.
inline Mat4 random_tangent(std::mt19937_64& rng) {
  const MooneyRivlinLaw law(urand(rng, 10, 500), urand(rng, 5, 250), urand(rng, 0.3, 0.49));
  Vec4 f = Vec4::identity_deformation();
  f[0] += urand(rng, -0.2, 0.4);
  f[1] += urand(rng, -0.2, 0.4);
  f[2] += urand(rng, -0.2, 0.2);
  f[3] += urand(rng, -0.2, 0.2);
  return law.evaluate(f).a;
}

inline double rel_diff(const Mat3& a, const Mat3& b) {
  Mat3 d = a - b;
  return frobenius_norm(d) / frobenius_norm(b);
}

inline double rel_diff4(const Mat4& a, const Mat4& b) {
  double num = 0, den = 0;
  for (int i = 0; i < 16; ++i) {
    num += (a.m[i] - b.m[i]) * (a.m[i] - b.m[i]);
    den += b.m[i] * b.m[i];
  }
  return std::sqrt(num / den);
}

}  // namespace dmn::testing
