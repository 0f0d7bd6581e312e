#include "dmn/materials.hpp"

#include <cmath>

#include "dmn/errors.hpp"

namespace dmn {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

// (11, 22, 33, 12) tensor helpers. Contractions count the 12 component
// twice; 13 and 23 are identically zero in plane strain.
double tens_trace(const SymTensor& t) { return t[0] + t[1] + t[2]; }

double tens_inner(const SymTensor& a, const SymTensor& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + 2.0 * a[3] * b[3];
}

SymTensor tens_dev(const SymTensor& t) {
  const double m = tens_trace(t) / 3.0;
  return {t[0] - m, t[1] - m, t[2] - m, t[3]};
}

SymTensor tens_add(const SymTensor& a, const SymTensor& b, double s = 1.0) {
  return {a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2], a[3] + s * b[3]};
}

SymTensor tens_scale(const SymTensor& a, double s) {
  return {s * a[0], s * a[1], s * a[2], s * a[3]};
}

Vec3 in_plane_mandel(const SymTensor& t) { return {{t[0], t[1], kSqrt2 * t[3]}}; }

SymTensor strain_from_mandel(const Vec3& m) { return {m[0], m[1], 0.0, m[2] / kSqrt2}; }

// Isotropic elastic stress from elastic strain.
SymTensor elastic_stress(const SymTensor& eps_e, double lambda, double mu) {
  const double tr = tens_trace(eps_e);
  return {lambda * tr + 2 * mu * eps_e[0], lambda * tr + 2 * mu * eps_e[1],
          lambda * tr + 2 * mu * eps_e[2], 2 * mu * eps_e[3]};
}

}  // namespace

ElasticLaw ElasticLaw::isotropic_plane_strain(double e, double nu) {
  const double d11 = (1.0 - nu * nu) / e;
  const double d12 = -nu * (1.0 + nu) / e;
  const double d33 = (1.0 + nu) / e;  // Mandel shear slot, 1/(2G)
  return ElasticLaw(Mat3::sym(d11, d12, 0, d11, 0, d33));
}

SmallEval ElasticLaw::evaluate(const MaterialPointState& committed, const Vec3& deps) const {
  SmallEval out;
  out.compliance = d_;
  out.dsigma = solve3(d_, deps);
  out.residual = Vec3{};
  out.state = committed;
  out.state.eps = tens_add(committed.eps, strain_from_mandel(deps));
  const Vec3 sig = in_plane_mandel(committed.sigma) + out.dsigma;
  out.state.sigma = {sig[0], sig[1], committed.sigma[2], sig[2] / kSqrt2};
  return out;
}

J2PlasticLaw::J2PlasticLaw(double e, double nu, std::vector<Segment> hardening)
    : e_(e), nu_(nu), hardening_(std::move(hardening)) {
  mu_ = e / (2.0 * (1.0 + nu));
  kappa_ = e / (3.0 * (1.0 - 2.0 * nu));
  if (hardening_.empty()) throw Error("J2 law needs at least one hardening segment");
}

double J2PlasticLaw::yield_stress(double ep_bar) const {
  // Left-continuous lookup: a breakpoint belongs to the segment below it.
  std::size_t i = 0;
  while (i + 1 < hardening_.size() && hardening_[i + 1].eps_start < ep_bar) ++i;
  const auto& s = hardening_[i];
  return s.sigma_at_start + s.slope * (ep_bar - s.eps_start);
}

SmallEval J2PlasticLaw::evaluate(const MaterialPointState& committed, const Vec3& deps) const {
  const SymTensor deps_t = strain_from_mandel(deps);
  const SymTensor eps_new = tens_add(committed.eps, deps_t);
  const SymTensor eps_e_tr = tens_add(eps_new, committed.eps_p, -1.0);
  const SymTensor sig_tr = elastic_stress(eps_e_tr, kappa_ - 2.0 * mu_ / 3.0, mu_);
  const SymTensor s_tr = tens_dev(sig_tr);
  const double q_tr = std::sqrt(1.5 * tens_inner(s_tr, s_tr));
  const double p_tr = tens_trace(sig_tr) / 3.0;

  SmallEval out;
  out.state = committed;
  out.state.eps = eps_new;

  const double sy0 = yield_stress(committed.ep_bar);
  if (q_tr <= sy0 + 1e-12 * std::max(1.0, sy0)) {
    // Elastic step.
    out.state.sigma = sig_tr;
    const double d11 = (1.0 - nu_ * nu_) / e_;
    const double d12 = -nu_ * (1.0 + nu_) / e_;
    out.compliance = Mat3::sym(d11, d12, 0, d11, 0, (1.0 + nu_) / e_);
    out.dsigma = in_plane_mandel(sig_tr) - in_plane_mandel(committed.sigma);
    out.residual = deps - out.compliance * out.dsigma;
    return out;
  }

  // Radial return over the piecewise-linear segments. The plastic
  // multiplier is capped at a hardening jump (yield stress rises faster
  // than the trial relaxes), which stops plastic flow at the breakpoint.
  double ep = committed.ep_bar;
  double dgamma = 0;
  for (std::size_t i = 0; i < hardening_.size(); ++i) {
    if (i + 1 < hardening_.size() && hardening_[i + 1].eps_start <= ep) continue;
    const auto& seg = hardening_[i];
    const double sy_here = seg.sigma_at_start + seg.slope * (ep - seg.eps_start);
    const double q_here = q_tr - 3.0 * mu_ * dgamma;
    if (q_here <= sy_here) break;  // jump absorbed the remaining overstress
    const double dg = (q_here - sy_here) / (3.0 * mu_ + seg.slope);
    if (i + 1 == hardening_.size() || ep + dg <= hardening_[i + 1].eps_start) {
      dgamma += dg;
      ep += dg;
      break;
    }
    const double step = hardening_[i + 1].eps_start - ep;
    dgamma += step;
    ep = hardening_[i + 1].eps_start;
  }

  const SymTensor n = tens_scale(s_tr, 1.0 / q_tr);  // s_tr / q_tr, |n| = sqrt(2/3)
  const SymTensor deps_p = tens_scale(n, 1.5 * dgamma);
  out.state.eps_p = tens_add(committed.eps_p, deps_p);
  out.state.ep_bar = ep;
  const double b = 1.0 - 3.0 * mu_ * dgamma / q_tr;
  SymTensor sig = tens_scale(s_tr, b);
  sig[0] += p_tr;
  sig[1] += p_tr;
  sig[2] += p_tr;
  out.state.sigma = sig;

  // Consistent tangent: K 1x1 + 2 mu b I_dev - 9 mu^2 (1/(3mu+H) - dgamma/q_tr) NxN.
  // At a capped (jump) return the plastic flow is stationary, so H -> inf.
  const bool capped = (q_tr - 3.0 * mu_ * dgamma) > yield_stress(ep) + 1e-12;
  const double h = hardening_[hardening_.size() - 1].slope;
  double slope_here = h;
  for (const auto& seg : hardening_)
    if (seg.eps_start < ep || (&seg == &hardening_[0])) slope_here = seg.slope;
  const double corr =
      capped ? -9.0 * mu_ * mu_ * (-dgamma / q_tr)
             : -9.0 * mu_ * mu_ * (1.0 / (3.0 * mu_ + slope_here) - dgamma / q_tr);

  // Assemble the in-plane Mandel tangent from the tensor form.
  auto cmod = [&](int i, int j, const SymTensor& nn) {
    // i, j index (11, 22, 12) pairs; delta terms per component.
    auto kron = [](int a, int b) { return a == b ? 1.0 : 0.0; };
    const int ii[3] = {0, 1, 0}, jj[3] = {0, 1, 1};
    const int p = ii[i], q = jj[i], r = ii[j], s = jj[j];
    const double one_one = kron(p, q) * kron(r, s);
    const double idev = 0.5 * (kron(p, r) * kron(q, s) + kron(p, s) * kron(q, r)) -
                        kron(p, q) * kron(r, s) / 3.0;
    const int map_i = (i == 2) ? 3 : i;  // (11,22,12) -> SymTensor slots
    const int map_j = (j == 2) ? 3 : j;
    return kappa_ * one_one + 2.0 * mu_ * b * idev + corr * nn[map_i] * nn[map_j];
  };
  Mat3 c_alg;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double v = cmod(i, j, n);
      if (i == 2) v *= kSqrt2;
      if (j == 2) v *= kSqrt2;
      c_alg(i, j) = v;
    }
  out.compliance = inverse3(c_alg);
  out.dsigma = in_plane_mandel(sig) - in_plane_mandel(committed.sigma);
  out.residual = deps - out.compliance * out.dsigma;
  return out;
}

MooneyRivlinLaw::MooneyRivlinLaw(double a, double b, double nu) : a_(a), b_(b), nu_(nu) {
  c_ = 0.5 * a + b;
  d_ = (a * (5.0 * nu - 2.0) + b * (11.0 * nu - 5.0)) / (2.0 * (1.0 - 2.0 * nu));
}

FiniteEval MooneyRivlinLaw::evaluate(const Vec4& fv) const {
  // 3x3 deformation gradient with F33 = 1.
  const double f11 = fv[0], f22 = fv[1], f12 = fv[2], f21 = fv[3];
  if (f11 * f22 - f12 * f21 <= 0) throw InvertedElement("det F <= 0");

  double f[3][3] = {{f11, f12, 0}, {f21, f22, 0}, {0, 0, 1}};
  double c[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      c[i][j] = 0;
      for (int k = 0; k < 3; ++k) c[i][j] += f[k][i] * f[k][j];
    }

  const double i1 = c[0][0] + c[1][1] + c[2][2];
  double c2[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      c2[i][j] = 0;
      for (int k = 0; k < 3; ++k) c2[i][j] += c[i][k] * c[k][j];
    }
  const double i2 = 0.5 * (i1 * i1 - (c2[0][0] + c2[1][1] + c2[2][2]));
  const double det2 = c[0][0] * c[1][1] - c[0][1] * c[1][0];
  const double i3 = det2 * c[2][2];  // c is block diagonal with c22 block

  double cinv[3][3] = {{c[1][1] / det2, -c[0][1] / det2, 0},
                       {-c[1][0] / det2, c[0][0] / det2, 0},
                       {0, 0, 1.0 / c[2][2]}};

  // W = A(I-3) + B(II-3) + C(III^-2 - 1) + D(III-1)^2
  const double w = a_ * (i1 - 3) + b_ * (i2 - 3) + c_ * (1.0 / (i3 * i3) - 1.0) +
                   d_ * (i3 - 1) * (i3 - 1);
  const double w3 = -2.0 * c_ / (i3 * i3 * i3) + 2.0 * d_ * (i3 - 1);  // dW/dIII
  const double g = w3 * i3;
  const double gp = 4.0 * c_ / (i3 * i3 * i3) + 2.0 * d_ * (2.0 * i3 - 1.0);  // d(g)/dIII

  // Second Piola-Kirchhoff: S = 2[A 1 + B(I 1 - C) + g C^-1]
  double s2[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      s2[i][j] = 2.0 * (a_ * (i == j) + b_ * (i1 * (i == j) - c[i][j]) + g * cinv[i][j]);

  // C^SE = 2 dS/dC.
  auto cse = [&](int j, int n, int p, int l) {
    auto kr = [](int x, int y) { return x == y ? 1.0 : 0.0; };
    const double isym = 0.5 * (kr(j, p) * kr(n, l) + kr(j, l) * kr(n, p));
    return 4.0 * b_ * (kr(j, n) * kr(p, l) - isym) + 4.0 * gp * i3 * cinv[j][n] * cinv[p][l] -
           2.0 * g * (cinv[j][p] * cinv[l][n] + cinv[j][l] * cinv[p][n]);
  };

  // P = F S and A_ijkl = delta_ik S_jl + F_im C^SE_mjpl F_kp.
  double p3[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      p3[i][j] = 0;
      for (int m = 0; m < 3; ++m) p3[i][j] += f[i][m] * s2[m][j];
    }

  static constexpr int vi[4] = {0, 1, 0, 1};
  static constexpr int vj[4] = {0, 1, 1, 0};
  FiniteEval out;
  out.w = w;
  out.p = {{p3[0][0], p3[1][1], p3[0][1], p3[1][0]}};
  for (int av = 0; av < 4; ++av)
    for (int bv = 0; bv < 4; ++bv) {
      const int i = vi[av], j = vj[av], k = vi[bv], l = vj[bv];
      double t = (i == k) ? s2[j][l] : 0.0;
      for (int m = 0; m < 3; ++m)
        for (int p = 0; p < 3; ++p) t += f[i][m] * cse(m, j, p, l) * f[k][p];
      out.a(av, bv) = t;
    }
  return out;
}

MaterialRegistry make_reference_materials() {
  MaterialRegistry r;
  r.small["p1-hard"] = std::make_shared<ElasticLaw>(ElasticLaw::isotropic_plane_strain(500.0, 0.19));
  r.small["p1-soft"] = std::make_shared<ElasticLaw>(ElasticLaw::isotropic_plane_strain(1.0, 0.19));
  r.small["p2-plastic"] = std::make_shared<J2PlasticLaw>(
      100.0, 0.3,
      std::vector<J2PlasticLaw::Segment>{{0.0, 0.1, 5.0}, {0.008, 0.156, 2.0}});
  r.finite["p2-mr"] = std::make_shared<MooneyRivlinLaw>(100.0, 50.0, 0.49);
  r.finite["p1-mr-hard"] = std::make_shared<MooneyRivlinLaw>(1000.0, 500.0, 0.49);
  r.finite["p1-mr-soft"] = std::make_shared<MooneyRivlinLaw>(10.0, 5.0, 0.49);
  return r;
}

}  // namespace dmn
