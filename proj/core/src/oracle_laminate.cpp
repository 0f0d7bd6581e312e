#include <cmath>
#include <functional>

#include "dmn/errors.hpp"
#include "dmn/oracle.hpp"

namespace dmn {

namespace {

void gauss(int n, double a[8][8], double b[8]) {
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-300) throw SingularMacroSystem("laminate system singular");
    if (piv != col) {
      for (int c = 0; c < n; ++c) std::swap(a[piv][c], a[col][c]);
      std::swap(b[piv], b[col]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double m = a[r][col] / a[col][col];
      for (int c = col; c < n; ++c) a[r][c] -= m * a[col][c];
      b[r] -= m * b[col];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    for (int c = r + 1; c < n; ++c) b[r] -= a[r][c] * b[c];
    b[r] /= a[r][r];
  }
}

Vec3 in_plane(const MaterialPointState& s) {
  return Vec3{{s.sigma[0], s.sigma[1], std::sqrt(2.0) * s.sigma[3]}};
}

}  // namespace

Mat3 laminate_exact(const Mat3& d1, const Mat3& d2, double f1, double theta) {
  const double f2 = 1.0 - f1;
  const Mat3 c1 = inverse3(d1), c2 = inverse3(d2);

  // Unknowns per macro load: (eps2^1, eps2^2, eps3^1, eps3^2); eps1 is
  // shared and equal to the macro value. Equations: volume averages of
  // components 2, 3 and continuity of stresses sigma2, sigma3.
  Mat3 cbar;
  for (int load = 0; load < 3; ++load) {
    Vec3 ebar{};
    ebar[load] = 1.0;
    double a[8][8] = {}, b[8] = {};
    // rows 0,1: f1 e^1_m + f2 e^2_m = ebar_m for m = 1, 2
    a[0][0] = f1; a[0][1] = f2; b[0] = ebar[1];
    a[1][2] = f1; a[1][3] = f2; b[1] = ebar[2];
    // rows 2,3: continuity of sigma_m = C(m,0) e1 + C(m,1) e2 + C(m,2) e3
    a[2][0] = c1(1, 1); a[2][2] = c1(1, 2); a[2][1] = -c2(1, 1); a[2][3] = -c2(1, 2);
    b[2] = (c2(1, 0) - c1(1, 0)) * ebar[0];
    a[3][0] = c1(2, 1); a[3][2] = c1(2, 2); a[3][1] = -c2(2, 1); a[3][3] = -c2(2, 2);
    b[3] = (c2(2, 0) - c1(2, 0)) * ebar[0];
    gauss(4, a, b);

    const Vec3 e1{{ebar[0], b[0], b[2]}};
    const Vec3 e2{{ebar[0], b[1], b[3]}};
    const Vec3 sbar = f1 * (c1 * e1) + f2 * (c2 * e2);
    for (int i = 0; i < 3; ++i) cbar(i, load) = sbar[i];
  }
  return rotate_compliance(symmetrize(inverse3(symmetrize(cbar))), theta);
}

Vec3 laminate_residual_strain(const Mat3& d1, const Mat3& d2, const Vec3& de1, const Vec3& de2,
                              double f1, double theta) {
  const double f2 = 1.0 - f1;
  // Zero macroscopic stress increment: the continuous components sigma2,
  // sigma3 vanish; the sigma1 pair balances to zero volume average while
  // keeping eps1 continuous.
  double a[8][8] = {}, b[8] = {};
  a[0][0] = f1; a[0][1] = f2; b[0] = 0;
  a[1][0] = d1(0, 0); a[1][1] = -d2(0, 0); b[1] = de2[0] - de1[0];
  gauss(2, a, b);
  const Vec3 s1{{b[0], 0, 0}}, s2{{b[1], 0, 0}};
  const Vec3 e1 = d1 * s1 + de1;
  const Vec3 e2 = d2 * s2 + de2;
  return rotate_vector(f1 * e1 + f2 * e2, theta);
}

Mat4 laminate_finite_tangent(const Mat4& a1, const Mat4& a2, double f1) {
  const double f2 = 1.0 - f1;
  // Components 0 (F11) and 3 (F21) are continuous; components 1, 2 split
  // between the layers under the volume-average constraint and traction
  // continuity of P22, P12 (rows 1, 2).
  Mat4 abar;
  for (int load = 0; load < 4; ++load) {
    Vec4 fbar{};
    fbar[load] = 1.0;
    // unknowns x = (dF1^1, dF2^1); layer 2 follows from the average.
    double m[8][8] = {}, b[8] = {};
    for (int r = 0; r < 2; ++r) {
      const int row = r + 1;
      // residual row: [A1 dF^1 - A2 dF^2]_row = 0 with
      // dF^2_j = (fbar_j - f1 dF^1_j)/f2 for j in {1,2}, dF^2_j = fbar_j else.
      for (int c = 0; c < 2; ++c) {
        const int j = c + 1;
        m[r][c] = a1(row, j) + a2(row, j) * (f1 / f2);
      }
      b[r] = 0;
      for (int j = 0; j < 4; ++j) {
        const double df2_fixed = (j == 1 || j == 2) ? fbar[j] / f2 : fbar[j];
        b[r] += a2(row, j) * df2_fixed;
        if (j == 0 || j == 3) b[r] -= a1(row, j) * fbar[j];
      }
    }
    gauss(2, m, b);
    const Vec4 df1{{fbar[0], b[0], b[1], fbar[3]}};
    const Vec4 df2{{fbar[0], (fbar[1] - f1 * b[0]) / f2, (fbar[2] - f1 * b[1]) / f2, fbar[3]}};
    const Vec4 pbar = f1 * (a1 * df1) + f2 * (a2 * df2);
    for (int i = 0; i < 4; ++i) abar(i, load) = pbar[i];
  }
  return abar;
}

Vec4 laminate_residual_stress_oracle(const Mat4& a1, const Mat4& a2, const Vec4& dp1,
                                     const Vec4& dp2, double f1) {
  const double f2 = 1.0 - f1;
  // Zero overall deformation increment; layer 1 moves in components 1, 2,
  // layer 2 compensates; P22, P12 continuity picks the split.
  double m[8][8] = {}, b[8] = {};
  for (int r = 0; r < 2; ++r) {
    const int row = r + 1;
    for (int c = 0; c < 2; ++c) {
      const int j = c + 1;
      m[r][c] = a1(row, j) + a2(row, j) * (f1 / f2);
    }
    b[r] = dp2[row] - dp1[row];
  }
  gauss(2, m, b);
  const Vec4 df1{{0, b[0], b[1], 0}};
  const Vec4 df2 = (-f1 / f2) * df1;
  return f1 * (a1 * df1 + dp1) + f2 * (a2 * df2 + dp2);
}

namespace {

struct SmallDriverState {
  MaterialPointState s1, s2;
};

}  // namespace

PathResult laminate_plastic_driver(const std::shared_ptr<SmallStrainLaw>& law1,
                                   const std::shared_ptr<SmallStrainLaw>& law2, double f1,
                                   double theta, const LoadPath& path) {
  const double f2 = 1.0 - f1;
  SmallDriverState st;
  Vec3 eps_acc{}, sig_acc{};  // global frame totals

  PathResult out;
  for (std::size_t sidx = 0; sidx < path.steps.size(); ++sidx) {
    const LoadStep& step = path.steps[sidx];

    auto residual = [&](const double x[5], double r[5], Vec3& eps_new, Vec3& sig_new) {
      const Vec3 de1{{x[0], x[1], x[3]}};
      const Vec3 de2{{x[0], x[2], x[4]}};
      const SmallEval e1 = law1->evaluate(st.s1, de1);
      const SmallEval e2 = law2->evaluate(st.s2, de2);
      const Vec3 sig1 = in_plane(e1.state);
      const Vec3 sig2 = in_plane(e2.state);
      r[0] = sig1[1] - sig2[1];
      r[1] = sig1[2] - sig2[2];
      const Vec3 eps_lam = f1 * de1 + f2 * de2;
      const Vec3 sig_lam = f1 * sig1 + f2 * sig2;
      eps_new = eps_acc + rotate_vector(eps_lam, theta);
      sig_new = rotate_vector(sig_lam, theta);
      for (int i = 0; i < 3; ++i)
        r[2 + i] = step.c[i].strain ? (eps_new[i] - step.c[i].target)
                                    : (sig_new[i] - step.c[i].target);
    };

    double x[5] = {};
    Vec3 eps_new, sig_new;
    double r0[5];
    bool converged = false;
    for (int iter = 0; iter < 100; ++iter) {
      residual(x, r0, eps_new, sig_new);
      double norm = 0;
      for (int i = 0; i < 5; ++i) norm = std::max(norm, std::abs(r0[i]));
      if (norm < 1e-11 * std::max(1.0, sig_new.norm())) {
        converged = true;
        break;
      }
      double jac[8][8] = {}, rhs[8];
      const double h = 1e-8;
      for (int c = 0; c < 5; ++c) {
        double xp[5];
        for (int i = 0; i < 5; ++i) xp[i] = x[i];
        xp[c] += h;
        double rp[5];
        Vec3 e_, s_;
        residual(xp, rp, e_, s_);
        for (int rr = 0; rr < 5; ++rr) jac[rr][c] = (rp[rr] - r0[rr]) / h;
      }
      for (int i = 0; i < 5; ++i) rhs[i] = -r0[i];
      gauss(5, jac, rhs);
      for (int i = 0; i < 5; ++i) x[i] += rhs[i];
    }
    if (!converged)
      throw NewtonDivergence("laminate driver failed at step " + std::to_string(sidx));

    // Commit; eps_new/sig_new carry the converged candidate.
    const Vec3 de1{{x[0], x[1], x[3]}};
    const Vec3 de2{{x[0], x[2], x[4]}};
    st.s1 = law1->evaluate(st.s1, de1).state;
    st.s2 = law2->evaluate(st.s2, de2).state;
    eps_acc = eps_new;
    sig_acc = sig_new;

    StepRecord rec;
    rec.step = int(sidx);
    rec.strain = eps_acc;
    rec.stress = sig_acc;
    out.records.push_back(rec);
  }
  return out;
}

PathResult laminate_finite_driver(const std::shared_ptr<FiniteStrainLaw>& law1,
                                  const std::shared_ptr<FiniteStrainLaw>& law2, double f1,
                                  double theta, const LoadPath& path) {
  const double f2 = 1.0 - f1;
  Vec4 fl1 = Vec4::identity_deformation(), fl2 = Vec4::identity_deformation();

  PathResult out;
  for (std::size_t sidx = 0; sidx < path.steps.size(); ++sidx) {
    const LoadStep& step = path.steps[sidx];

    // x = (dF0 shared, dF3 shared, dF1^1, dF1^2, dF2^1, dF2^2), laminate frame.
    auto residual = [&](const double x[6], double r[6], Vec4& f_glob, Vec4& p_glob) {
      const Vec4 df1{{x[0], x[2], x[4], x[1]}};
      const Vec4 df2{{x[0], x[3], x[5], x[1]}};
      const Vec4 p1 = law1->evaluate(fl1 + df1).p;
      const Vec4 p2 = law2->evaluate(fl2 + df2).p;
      r[0] = p1[1] - p2[1];
      r[1] = p1[2] - p2[2];
      const Vec4 f_lam = f1 * (fl1 + df1) + f2 * (fl2 + df2);
      const Vec4 p_lam = f1 * p1 + f2 * p2;
      f_glob = finite_rotation_matrix(-theta) * f_lam;
      p_glob = finite_rotation_matrix(-theta) * p_lam;
      for (int i = 0; i < 4; ++i)
        r[2 + i] = step.c[i].strain ? (f_glob[i] - step.c[i].target)
                                    : (p_glob[i] - step.c[i].target);
    };

    double x[6] = {};
    Vec4 f_glob, p_glob;
    double r0[6];
    bool converged = false;
    for (int iter = 0; iter < 200; ++iter) {
      residual(x, r0, f_glob, p_glob);
      double norm = 0;
      for (int i = 0; i < 6; ++i) norm = std::max(norm, std::abs(r0[i]));
      if (norm < 1e-10 * std::max(1.0, p_glob.norm())) {
        converged = true;
        break;
      }
      double jac[8][8] = {}, rhs[8];
      const double h = 1e-7;
      for (int c = 0; c < 6; ++c) {
        double xp[6];
        for (int i = 0; i < 6; ++i) xp[i] = x[i];
        xp[c] += h;
        double rp[6];
        Vec4 f_, p_;
        residual(xp, rp, f_, p_);
        for (int rr = 0; rr < 6; ++rr) jac[rr][c] = (rp[rr] - r0[rr]) / h;
      }
      for (int i = 0; i < 6; ++i) rhs[i] = -r0[i];
      gauss(6, jac, rhs);
      for (int i = 0; i < 6; ++i) x[i] += rhs[i];
    }
    if (!converged)
      throw NewtonDivergence("finite laminate driver failed at step " + std::to_string(sidx));

    fl1 = fl1 + Vec4{{x[0], x[2], x[4], x[1]}};
    fl2 = fl2 + Vec4{{x[0], x[3], x[5], x[1]}};

    StepRecord rec;
    rec.step = int(sidx);
    rec.fbar = f_glob;
    rec.pbar = p_glob;
    out.records.push_back(rec);
  }
  return out;
}

}  // namespace dmn
