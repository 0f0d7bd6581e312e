// Independent reference solvers used to generate training data and to
// validate the closed-form block formulas: exact two-layer laminate
// solvers (linear, elasto-plastic, finite strain) built directly on the
// interface equations, and an FFT-based periodic homogenizer for pixel
// microstructures.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dmn/materials.hpp"
#include "dmn/online_solver.hpp"

namespace dmn {

// Homogenized compliance of a two-layer laminate (interface normal along
// direction 2, then rotated by theta) from three unit-strain solves of
// the interface system. Never calls the building-block formulas.
Mat3 laminate_exact(const Mat3& d1, const Mat3& d2, double f1, double theta);

// Homogenized residual strain under zero macroscopic stress increment.
Vec3 laminate_residual_strain(const Mat3& d1, const Mat3& d2, const Vec3& de1, const Vec3& de2,
                              double f1, double theta);

// Finite-strain counterparts (un-rotated laminate frame).
Mat4 laminate_finite_tangent(const Mat4& a1, const Mat4& a2, double f1);
Vec4 laminate_residual_stress_oracle(const Mat4& a1, const Mat4& a2, const Vec4& dp1,
                                     const Vec4& dp2, double f1);

// Incremental two-layer drivers: Newton on the interface unknowns with a
// finite-difference Jacobian, exact constitutive evaluations per layer.
PathResult laminate_plastic_driver(const std::shared_ptr<SmallStrainLaw>& law1,
                                   const std::shared_ptr<SmallStrainLaw>& law2, double f1,
                                   double theta, const LoadPath& path);

PathResult laminate_finite_driver(const std::shared_ptr<FiniteStrainLaw>& law1,
                                  const std::shared_ptr<FiniteStrainLaw>& law2, double f1,
                                  double theta, const LoadPath& path);

// ------------------------------------------------------------------ FFT

struct PixelMicrostructure {
  int n = 0;                       // grid side, power of two
  std::vector<std::uint8_t> phases;  // row-major, 0 = phase 1, 1 = phase 2
  std::string label;

  double vf1() const;
  int phase_at(int ix, int iy) const { return phases[std::size_t(iy) * n + ix] == 0 ? 1 : 2; }
};

PixelMicrostructure stripes_micro(int n, double vf1);          // vertical stripes
PixelMicrostructure checkerboard_micro(int n, int period);
PixelMicrostructure inclusion_micro(int n, double vf2);        // circular phase-2 inclusion
PixelMicrostructure blob_micro(int n, double vf1, std::uint64_t seed);

std::string micro_to_json(const PixelMicrostructure& m);
PixelMicrostructure micro_from_json(const std::string& text);
void save_micro(const PixelMicrostructure& m, const std::string& path);
PixelMicrostructure load_micro(const std::string& path);

struct FftOptions {
  double tol = 1e-8;       // equilibrium residual
  long max_iter = 100000;
};

// Basic fixed-point spectral scheme with an isotropic reference medium;
// returns the homogenized compliance from three unit-strain loads.
// Throws NoConvergence with the residual when the budget runs out.
Mat3 fft_homogenize(const PixelMicrostructure& micro, const Mat3& d1, const Mat3& d2,
                    FftOptions opt = {});

}  // namespace dmn
