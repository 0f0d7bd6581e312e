// Two-layer homogenization building block.
//
// Small strain: closed-form laminate homogenization of child compliances,
// residual-strain homogenization, and all partial derivatives used by
// backpropagation. Finite strain: tangent stiffness and residual stress
// homogenization via the concentration tensor of the 2x2 interface system.
//
// Layer convention: direction 1 is continuous across the interface
// (epsilon_1^1 = epsilon_1^2); stresses sigma_2, sigma_3 are continuous.
#pragma once

#include "dmn/finite.hpp"
#include "dmn/mandel.hpp"

namespace dmn {

struct BlockInputsSmall {
  Mat3 d1, d2;      // child compliances, Mandel
  double f1 = 0.5;  // volume fraction of child 1
  double theta = 0; // rotation of the two-layer structure, radians
};

// All derivative blocks of one building block, evaluated at a given input.
// Matrices are derivatives of the full (symmetric) output matrix with
// respect to the named scalar; component order for dDr_dD1/dDr_dD2 is
// (11, 12, 13, 22, 23, 33).
struct BlockGradients {
  Mat3 dD_dtheta;                  // d Dbar / d theta (after rotation)
  Mat3 dDr_df1;                    // d Dbar^r / d f1
  std::array<Mat3, 6> dDr_dD1;     // d Dbar^r / d D^1_m
  std::array<Mat3, 6> dDr_dD2;     // d Dbar^r / d D^2_m
  Mat3 rot_neg, rot_pos;           // R(-theta), R(theta)

  // d Dbar_ij / d Dbar^r_kl = R_ik(-theta) R_lj(theta)
  double rotation_coeff(int i, int j, int k, int l) const {
    return rot_neg(i, k) * rot_pos(l, j);
  }
};

struct BlockInputsFinite {
  Mat4 a1, a2;      // child tangent stiffnesses (11,22,12,21 ordering)
  Vec4 dp1, dp2;    // child residual stresses
  double f1 = 0.5;
  double theta = 0;
};

// Gamma = f1 D^2_11 + f2 D^1_11; throws DegenerateBlock below this floor.
inline constexpr double kGammaFloor = 1e-30;

// Laminate homogenization of two child compliances (before rotation).
Mat3 homogenize_small(const Mat3& d1, const Mat3& d2, double f1);

// Full block: homogenize then rotate by theta.
Mat3 block_forward(const BlockInputsSmall& in);

BlockGradients block_gradients(const BlockInputsSmall& in);

// Homogenized residual strain delta-eps-bar = R(-theta) delta-eps-bar^r.
Vec3 homogenize_residual_strain(const Mat3& d1, const Mat3& d2, const Vec3& de1,
                                const Vec3& de2, double f1, double theta);

// Distribute a parent strain increment (parent frame) to the two children.
// Children satisfy the interface kinematics/equilibrium exactly; the
// volume-weighted child average reproduces the un-rotated parent increment.
std::pair<Vec3, Vec3> dehomogenize_small(const Vec3& parent_strain_increment,
                                         const BlockInputsSmall& block,
                                         const Vec3& de1, const Vec3& de2);

// Finite strain: homogenized tangent A-bar^r = A^2 - f1 dA S^1 (symmetrized).
Mat4 homogenize_finite(const Mat4& a1, const Mat4& a2, double f1);

// Concentration tensor S^1 mapping block-average F to layer-1 F.
Mat4 concentration_tensor(const Mat4& a1, const Mat4& a2, double f1);

Vec4 homogenize_residual_stress(const Mat4& a1, const Mat4& a2, const Vec4& dp1,
                                const Vec4& dp2, double f1);

std::pair<Vec4, Vec4> dehomogenize_finite(const Vec4& parent_f_increment,
                                          const BlockInputsFinite& block);

}  // namespace dmn
