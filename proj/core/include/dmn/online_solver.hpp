// Online extrapolation of a trained network: incremental Newton solution
// with per-leaf constitutive laws, mixed macroscopic strain/stress
// control, and load-path execution in small and finite strain.
#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dmn/materials.hpp"
#include "dmn/network.hpp"

namespace dmn {

// One macroscopic component: either the strain-like measure (eps or F) or
// its stress conjugate is prescribed; target is the total value at the
// end of the step.
struct Constraint {
  bool strain = true;
  double target = 0;
};

struct LoadStep {
  std::array<Constraint, 4> c{};  // components 0..2 (small) or 0..3 (finite)
};

struct LoadPath {
  bool finite = false;
  std::vector<LoadStep> steps;
};

// eps11 ramped to `to`, sigma22 = 0, eps12 = 0.
LoadPath uniaxial_tension_path(int n_steps, double to);
// Ramp up then back to zero, same constraints.
LoadPath loading_unloading_path(int n_steps_each, double to);
// F11 ramped to `to`, P22 = 0, F12 = F21 = 0 (F components start at 1,1,0,0).
LoadPath finite_uniaxial_path(int n_steps, double to);

struct StepRecord {
  int step = 0;
  int iterations = 0;
  int bisections = 0;
  Vec3 strain{}, stress{};
  Vec4 fbar = Vec4::identity_deformation();
  Vec4 pbar{};
};

struct LeafStrainStat {
  int leaf = 0;
  double weight = 0;     // normalized
  double e_mean = 0;     // (E11 + E22)/2 of the Green strain
  double e_maxshear = 0; // sqrt(((E11-E22)/2)^2 + E12^2)
};

struct PathResult {
  std::vector<StepRecord> records;
  std::vector<LeafStrainStat> leaf_stats;  // finite strain only, final state

  std::string to_csv() const;
  std::string to_json() const;
};

struct SolverOptions {
  double tol = 1e-8;
  int max_iter = 50;
  int max_bisections = 8;
};

class SmallStrainSolver {
 public:
  SmallStrainSolver(const MaterialNetwork& net, std::shared_ptr<SmallStrainLaw> phase1,
                    std::shared_ptr<SmallStrainLaw> phase2, SolverOptions opt = {});

  StepRecord run_step(const LoadStep& step);
  PathResult run_path(const LoadPath& path);

  const Vec3& macro_strain() const { return eps_acc_; }
  const Vec3& macro_stress() const { return sig_acc_; }
  // Root quantities of the latest assembly (testing access).
  const Mat3& root_compliance() const { return node_d_[0][0]; }
  const Vec3& root_residual() const { return node_de_[0][0]; }

 private:
  int newton(const LoadStep& step, Vec3& de_bar, Vec3& ds_bar);
  void evaluate_leaves();
  void assemble_up();
  void distribute_down(const Vec3& de_bar_root);

  const MaterialNetwork& net_;
  SolverOptions opt_;
  WeightTree w_;
  std::vector<std::shared_ptr<SmallStrainLaw>> leaf_law_;
  std::vector<MaterialPointState> leaf_state_;
  std::vector<Vec3> leaf_deps_;
  std::vector<SmallEval> leaf_eval_;
  std::vector<std::vector<Mat3>> node_d_;
  std::vector<std::vector<Vec3>> node_de_;
  Vec3 eps_acc_{}, sig_acc_{};
};

class FiniteStrainSolver {
 public:
  FiniteStrainSolver(const MaterialNetwork& net, std::shared_ptr<FiniteStrainLaw> phase1,
                     std::shared_ptr<FiniteStrainLaw> phase2, SolverOptions opt = {});

  StepRecord run_step(const LoadStep& step);
  PathResult run_path(const LoadPath& path, bool leaf_stats = false);

  const Vec4& macro_f() const { return f_acc_; }
  const Vec4& macro_p() const { return p_acc_; }
  std::vector<LeafStrainStat> green_strain_stats() const;

 private:
  int newton(const LoadStep& step, Vec4& df_bar, Vec4& dp_bar);
  void evaluate_leaves();
  void assemble_up();
  void distribute_down(const Vec4& df_bar_root);

  const MaterialNetwork& net_;
  SolverOptions opt_;
  WeightTree w_;
  std::vector<std::shared_ptr<FiniteStrainLaw>> leaf_law_;
  std::vector<Vec4> leaf_f_, leaf_p_;  // committed per-leaf state
  std::vector<Vec4> leaf_df_;
  std::vector<FiniteEval> leaf_eval_;
  std::vector<Vec4> leaf_dp_res_;
  std::vector<std::vector<Mat4>> node_a_;
  std::vector<std::vector<Vec4>> node_dp_;
  Vec4 f_acc_ = Vec4::identity_deformation();
  Vec4 p_acc_{};
};

}  // namespace dmn
