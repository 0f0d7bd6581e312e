#include "dmn/building_block.hpp"

#include "dmn/errors.hpp"

namespace dmn {

namespace {

double gamma_of(const Mat3& d1, const Mat3& d2, double f1) {
  const double g = f1 * d2(0, 0) + (1.0 - f1) * d1(0, 0);
  if (!(g > kGammaFloor)) throw DegenerateBlock("Gamma <= floor in two-layer block");
  return g;
}

// d Dbar^r / d D^1_m at (d1, d2, f1), m in (11,12,13,22,23,33).
std::array<Mat3, 6> d1_tables(const Mat3& d1, const Mat3& d2, double f1, const Mat3& dr) {
  const double f2 = 1.0 - f1;
  const double g = gamma_of(d1, d2, f1);
  const double d12 = d1(0, 1) - d2(0, 1);
  const double d13 = d1(0, 2) - d2(0, 2);

  std::array<Mat3, 6> t;
  t[0] = Mat3::sym(f1 * d2(0, 0) * d2(0, 0) / g,
                   f2 * (d2(0, 1) - dr(0, 1)),
                   f2 * (d2(0, 2) - dr(0, 2)),
                   f1 * f2 * f2 * d12 * d12 / g,
                   f1 * f2 * f2 * d13 * d12 / g,
                   f1 * f2 * f2 * d13 * d13 / g) * (1.0 / g);
  t[1] = Mat3::sym(0, f1 * d2(0, 0) / g, 0,
                   -2 * f1 * f2 * d12 / g,
                   -f1 * f2 * d13 / g, 0);
  t[2] = Mat3::sym(0, 0, f1 * d2(0, 0) / g,
                   0, -f1 * f2 * d12 / g,
                   -2 * f1 * f2 * d13 / g);
  t[3] = Mat3::sym(0, 0, 0, f1, 0, 0);
  t[4] = Mat3::sym(0, 0, 0, 0, f1, 0);
  t[5] = Mat3::sym(0, 0, 0, 0, 0, f1);
  return t;
}

}  // namespace

Mat3 homogenize_small(const Mat3& d1, const Mat3& d2, double f1) {
  const double f2 = 1.0 - f1;
  const double g = gamma_of(d1, d2, f1);

  const double d12 = d1(0, 1) - d2(0, 1);
  const double d13 = d1(0, 2) - d2(0, 2);

  const double r11 = d1(0, 0) * d2(0, 0) / g;
  const double r12 = (f1 * d1(0, 1) * d2(0, 0) + f2 * d2(0, 1) * d1(0, 0)) / g;
  const double r13 = (f1 * d1(0, 2) * d2(0, 0) + f2 * d2(0, 2) * d1(0, 0)) / g;
  const double r22 = f1 * d1(1, 1) + f2 * d2(1, 1) - f1 * f2 * d12 * d12 / g;
  const double r23 = f1 * d1(1, 2) + f2 * d2(1, 2) - f1 * f2 * d13 * d12 / g;
  const double r33 = f1 * d1(2, 2) + f2 * d2(2, 2) - f1 * f2 * d13 * d13 / g;
  return Mat3::sym(r11, r12, r13, r22, r23, r33);
}

Mat3 block_forward(const BlockInputsSmall& in) {
  return rotate_compliance(homogenize_small(in.d1, in.d2, in.f1), in.theta);
}

BlockGradients block_gradients(const BlockInputsSmall& in) {
  const Mat3 dr = homogenize_small(in.d1, in.d2, in.f1);
  const double f1 = in.f1, f2 = 1.0 - f1;
  const double g = gamma_of(in.d1, in.d2, f1);
  const double g2 = g * g;

  const double d11 = in.d1(0, 0) - in.d2(0, 0);
  const double d12 = in.d1(0, 1) - in.d2(0, 1);
  const double d13 = in.d1(0, 2) - in.d2(0, 2);
  // (f1^2 D^2_11 - f2^2 D^1_11) / Gamma^2 drives the quadratic terms
  const double q = (f1 * f1 * in.d2(0, 0) - f2 * f2 * in.d1(0, 0)) / g2;

  BlockGradients out;
  out.rot_neg = rotation_matrix(-in.theta);
  out.rot_pos = rotation_matrix(in.theta);

  const Mat3 rp_neg = rotation_matrix_derivative(-in.theta);
  const Mat3 rp_pos = rotation_matrix_derivative(in.theta);
  out.dD_dtheta = symmetrize((out.rot_neg * dr * rp_pos) - (rp_neg * dr * out.rot_pos));

  out.dDr_df1 = Mat3::sym(
      d11 * dr(0, 0) / g,
      (d11 * dr(0, 1) + in.d1(0, 1) * in.d2(0, 0) - in.d2(0, 1) * in.d1(0, 0)) / g,
      (d11 * dr(0, 2) + in.d1(0, 2) * in.d2(0, 0) - in.d2(0, 2) * in.d1(0, 0)) / g,
      in.d1(1, 1) - in.d2(1, 1) + q * d12 * d12,
      in.d1(1, 2) - in.d2(1, 2) + q * d13 * d12,
      in.d1(2, 2) - in.d2(2, 2) + q * d13 * d13);

  out.dDr_dD1 = d1_tables(in.d1, in.d2, f1, dr);
  // Switching the phase index: Dbar^r(D1, D2, f1) = Dbar^r(D2, D1, f2).
  out.dDr_dD2 = d1_tables(in.d2, in.d1, f2, dr);
  return out;
}

Vec3 homogenize_residual_strain(const Mat3& d1, const Mat3& d2, const Vec3& de1,
                                const Vec3& de2, double f1, double theta) {
  const double f2 = 1.0 - f1;
  const double g = gamma_of(d1, d2, f1);
  const double jump = de1[0] - de2[0];

  Vec3 r;
  r[0] = (f1 * d2(0, 0) * de1[0] + f2 * d1(0, 0) * de2[0]) / g;
  r[1] = f1 * de1[1] + f2 * de2[1] - f1 * f2 * (d1(0, 1) - d2(0, 1)) * jump / g;
  r[2] = f1 * de1[2] + f2 * de2[2] - f1 * f2 * (d1(0, 2) - d2(0, 2)) * jump / g;
  return rotate_vector(r, theta);
}

std::pair<Vec3, Vec3> dehomogenize_small(const Vec3& parent_strain_increment,
                                         const BlockInputsSmall& block,
                                         const Vec3& de1, const Vec3& de2) {
  const double f1 = block.f1, f2 = 1.0 - f1;
  const Mat3& d1 = block.d1;
  const Mat3& d2 = block.d2;

  // Back to the laminate frame.
  const Vec3 de_bar = rotation_matrix(block.theta) * parent_strain_increment;

  const Mat3 dr = homogenize_small(d1, d2, f1);
  const Vec3 der_bar = rotation_matrix(block.theta) *
                       homogenize_residual_strain(d1, d2, de1, de2, f1, block.theta);
  const Vec3 ds_bar = solve3(dr, de_bar - der_bar);

  // sigma_2, sigma_3 are shared; solve the 2x2 system for the sigma_1 pair
  // from epsilon_1 continuity and the volume average of sigma_1.
  const double rhs1 = (d2(0, 1) - d1(0, 1)) * ds_bar[1] + (d2(0, 2) - d1(0, 2)) * ds_bar[2] +
                      de2[0] - de1[0];
  const auto s1 = solve_interface_2x2(d1(0, 0), -d2(0, 0), f1, f2, rhs1, ds_bar[0]);

  const Vec3 sig1{{s1[0], ds_bar[1], ds_bar[2]}};
  const Vec3 sig2{{s1[1], ds_bar[1], ds_bar[2]}};
  return {d1 * sig1 + de1, d2 * sig2 + de2};
}

Mat4 concentration_tensor(const Mat4& a1, const Mat4& a2, double f1) {
  const double f2 = 1.0 - f1;
  const Mat4 ahat = f2 * a1 + f1 * a2;
  const Mat4 da = a2 - a1;

  // Rows 2,3 of S^1 from the interface solve; rows 1,4 are identity.
  Mat4 s = Mat4::identity();
  for (int col = 0; col < 4; ++col) {
    const double b1 = (col == 1) ? a2(1, 1) : (col == 2) ? a2(1, 2) : f2 * da(1, col);
    const double b2 = (col == 1) ? a2(2, 1) : (col == 2) ? a2(2, 2) : f2 * da(2, col);
    const auto x = solve_interface_2x2(ahat(1, 1), ahat(1, 2), ahat(2, 1), ahat(2, 2), b1, b2);
    s(1, col) = x[0];
    s(2, col) = x[1];
  }
  return s;
}

Mat4 homogenize_finite(const Mat4& a1, const Mat4& a2, double f1) {
  const Mat4 s1 = concentration_tensor(a1, a2, f1);
  const Mat4 da = a2 - a1;
  return symmetrize(a2 - f1 * (da * s1));
}

Vec4 homogenize_residual_stress(const Mat4& a1, const Mat4& a2, const Vec4& dp1,
                                const Vec4& dp2, double f1) {
  const double f2 = 1.0 - f1;
  const Mat4 ahat = f2 * a1 + f1 * a2;
  const Mat4 da = a2 - a1;

  // With zero overall deformation, layer-1 F components (2,3) follow from
  // equilibrium of the residual stresses.
  const auto x = solve_interface_2x2(ahat(1, 1), ahat(1, 2), ahat(2, 1), ahat(2, 2),
                                     dp2[1] - dp1[1], dp2[2] - dp1[2]);
  Vec4 r = f1 * dp1 + f2 * dp2;
  for (int i = 0; i < 4; ++i)
    r[i] -= f1 * f2 * (da(i, 1) * x[0] + da(i, 2) * x[1]);
  return r;
}

std::pair<Vec4, Vec4> dehomogenize_finite(const Vec4& parent_f_increment,
                                          const BlockInputsFinite& block) {
  const double f1 = block.f1, f2 = 1.0 - f1;
  const Vec4 df_bar = finite_rotation_matrix(block.theta) * parent_f_increment;

  const Mat4 s1 = concentration_tensor(block.a1, block.a2, f1);
  const Mat4 ahat = f2 * block.a1 + f1 * block.a2;
  const auto c = solve_interface_2x2(ahat(1, 1), ahat(1, 2), ahat(2, 1), ahat(2, 2),
                                     f2 * (block.dp2[1] - block.dp1[1]),
                                     f2 * (block.dp2[2] - block.dp1[2]));

  Vec4 df1 = s1 * df_bar;
  df1[1] += c[0];
  df1[2] += c[1];

  const Vec4 df2 = (1.0 / f2) * (df_bar - f1 * df1);
  return {df1, df2};
}

}  // namespace dmn
