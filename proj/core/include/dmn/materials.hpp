// Local constitutive laws evaluated at active leaves: linear elasticity
// (plane strain), small-strain J2 plasticity with piecewise-linear
// isotropic hardening, and Mooney-Rivlin hyperelasticity.
#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "dmn/finite.hpp"
#include "dmn/mandel.hpp"

namespace dmn {

// Symmetric plane-strain tensor storage: (t11, t22, t33, t12).
using SymTensor = std::array<double, 4>;

struct MaterialPointState {
  SymTensor eps{};      // total strain, eps33 = 0 always
  SymTensor eps_p{};    // plastic strain
  SymTensor sigma{};    // stress, sigma33 tracked
  double ep_bar = 0;    // effective plastic strain, non-decreasing
};

struct SmallEval {
  Vec3 dsigma;               // in-plane Mandel stress increment
  Mat3 compliance;           // algorithmic compliance, in-plane Mandel
  Vec3 residual;             // delta-eps = deps - D * dsigma
  MaterialPointState state;  // uncommitted trial state
};

class SmallStrainLaw {
 public:
  virtual ~SmallStrainLaw() = default;
  virtual SmallEval evaluate(const MaterialPointState& committed, const Vec3& deps) const = 0;
};

class ElasticLaw : public SmallStrainLaw {
 public:
  explicit ElasticLaw(Mat3 compliance) : d_(compliance) {}
  static ElasticLaw isotropic_plane_strain(double e, double nu);

  SmallEval evaluate(const MaterialPointState& committed, const Vec3& deps) const override;
  const Mat3& compliance() const { return d_; }

 private:
  Mat3 d_;
};

class J2PlasticLaw : public SmallStrainLaw {
 public:
  // Hardening segments: {eps_start, sigma_y right limit at eps_start,
  // slope}; lookup is left-continuous at breakpoints.
  struct Segment {
    double eps_start, sigma_at_start, slope;
  };

  J2PlasticLaw(double e, double nu, std::vector<Segment> hardening);

  SmallEval evaluate(const MaterialPointState& committed, const Vec3& deps) const override;
  double yield_stress(double ep_bar) const;

  double youngs() const { return e_; }
  double poisson() const { return nu_; }

 private:
  double e_, nu_, mu_, kappa_;
  std::vector<Segment> hardening_;
};

struct FiniteEval {
  Vec4 p;   // first Piola-Kirchhoff stress (P11, P22, P12, P21)
  Mat4 a;   // tangent dP/dF in the same ordering
  double w = 0;  // strain energy density
};

class FiniteStrainLaw {
 public:
  virtual ~FiniteStrainLaw() = default;
  // F as (F11, F22, F12, F21); plane strain with F33 = 1.
  virtual FiniteEval evaluate(const Vec4& f) const = 0;
};

class MooneyRivlinLaw : public FiniteStrainLaw {
 public:
  MooneyRivlinLaw(double a, double b, double nu);

  FiniteEval evaluate(const Vec4& f) const override;
  double c_coeff() const { return c_; }
  double d_coeff() const { return d_; }

 private:
  double a_, b_, nu_, c_, d_;
};

struct MaterialRegistry {
  std::map<std::string, std::shared_ptr<SmallStrainLaw>> small;
  std::map<std::string, std::shared_ptr<FiniteStrainLaw>> finite;
};

// Built-in constants (GPa for the small-strain laws, MPa for the
// Mooney-Rivlin ones): p1-hard, p1-soft, p2-plastic, p2-mr, p1-mr-hard,
// p1-mr-soft.
MaterialRegistry make_reference_materials();

}  // namespace dmn
