#include "dmn/online_solver.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "dmn/building_block.hpp"
#include "dmn/errors.hpp"
#include "json.hpp"

namespace dmn {

namespace {

// Dense Gaussian elimination with partial pivoting for the small mixed
// macro systems (n <= 4).
void solve_dense(int n, double a[4][4], double b[4]) {
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-300) throw SingularMacroSystem("macro constraint system singular");
    if (piv != col) {
      for (int c = 0; c < 4; ++c) std::swap(a[piv][c], a[col][c]);
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

// Mixed solve on the root relation de = D ds + de_r: strain-prescribed
// components of de are fixed, the conjugate stress components are solved.
void mixed_solve_small(const Mat3& d, const Vec3& de_r, const bool strain_prescribed[3],
                       const double target[3], Vec3& de, Vec3& ds) {
  int unknown[3], nu = 0;
  for (int i = 0; i < 3; ++i) {
    if (strain_prescribed[i]) {
      unknown[nu++] = i;
    } else {
      ds[i] = target[i];
    }
  }
  // Rows of strain-prescribed components give equations for their stresses.
  double a[4][4] = {}, b[4] = {};
  for (int r = 0; r < nu; ++r) {
    const int i = unknown[r];
    b[r] = target[i] - de_r[i];
    for (int j = 0; j < 3; ++j) {
      if (strain_prescribed[j]) {
        for (int c = 0; c < nu; ++c)
          if (unknown[c] == j) a[r][c] = d(i, j);
      } else {
        b[r] -= d(i, j) * ds[j];
      }
    }
  }
  if (nu > 0) solve_dense(nu, a, b);
  for (int r = 0; r < nu; ++r) ds[unknown[r]] = b[r];
  de = d * ds + de_r;
  for (int i = 0; i < 3; ++i)
    if (strain_prescribed[i]) de[i] = target[i];
}

// Root relation dp = A df + dp_r; F-prescribed components fixed, the rest
// solved from their prescribed stress rows.
void mixed_solve_finite(const Mat4& a0, const Vec4& dp_r, const bool f_prescribed[4],
                        const double target[4], Vec4& df, Vec4& dp) {
  int unknown[4], nu = 0;
  for (int i = 0; i < 4; ++i) {
    if (f_prescribed[i])
      df[i] = target[i];
    else
      unknown[nu++] = i;
  }
  double a[4][4] = {}, b[4] = {};
  for (int r = 0; r < nu; ++r) {
    const int i = unknown[r];
    b[r] = target[i] - dp_r[i];
    for (int j = 0; j < 4; ++j) {
      if (f_prescribed[j]) {
        b[r] -= a0(i, j) * df[j];
      } else {
        for (int c = 0; c < nu; ++c)
          if (unknown[c] == j) a[r][c] = a0(i, j);
      }
    }
  }
  if (nu > 0) solve_dense(nu, a, b);
  for (int r = 0; r < nu; ++r) df[unknown[r]] = b[r];
  dp = a0 * df + dp_r;
  for (int i = 0; i < 4; ++i)
    if (!f_prescribed[i]) dp[i] = target[i];
}

double rel_change3(const Vec3& now, const Vec3& prev) {
  return (now - prev).norm() / std::max(now.norm(), 1e-12);
}

double rel_change4(const Vec4& now, const Vec4& prev) {
  return (now - prev).norm() / std::max(now.norm(), 1e-12);
}

}  // namespace

LoadPath uniaxial_tension_path(int n_steps, double to) {
  LoadPath p;
  for (int s = 1; s <= n_steps; ++s) {
    LoadStep step;
    step.c[0] = {true, to * s / n_steps};
    step.c[1] = {false, 0.0};  // sigma22 = 0
    step.c[2] = {true, 0.0};   // eps12 = 0
    p.steps.push_back(step);
  }
  return p;
}

LoadPath loading_unloading_path(int n_steps_each, double to) {
  LoadPath p = uniaxial_tension_path(n_steps_each, to);
  for (int s = n_steps_each - 1; s >= 0; --s) {
    LoadStep step;
    step.c[0] = {true, to * s / n_steps_each};
    step.c[1] = {false, 0.0};
    step.c[2] = {true, 0.0};
    p.steps.push_back(step);
  }
  return p;
}

LoadPath finite_uniaxial_path(int n_steps, double to) {
  LoadPath p;
  p.finite = true;
  for (int s = 1; s <= n_steps; ++s) {
    LoadStep step;
    step.c[0] = {true, 1.0 + (to - 1.0) * s / n_steps};
    step.c[1] = {false, 0.0};  // P22 = 0
    step.c[2] = {true, 0.0};   // F12 = 0
    step.c[3] = {true, 0.0};   // F21 = 0
    p.steps.push_back(step);
  }
  return p;
}

// ---------------------------------------------------------------- small

SmallStrainSolver::SmallStrainSolver(const MaterialNetwork& net,
                                     std::shared_ptr<SmallStrainLaw> phase1,
                                     std::shared_ptr<SmallStrainLaw> phase2, SolverOptions opt)
    : net_(net), opt_(opt) {
  w_ = propagate_weights(net_);
  const int leaves = net_.n_leaves();
  leaf_law_.resize(leaves);
  leaf_state_.resize(leaves);
  leaf_deps_.resize(leaves);
  leaf_eval_.resize(leaves);
  for (int j = 0; j < leaves; ++j)
    leaf_law_[j] = (net_.phase_of_leaf[j] == 1) ? phase1 : phase2;
  node_d_.resize(net_.depth + 1);
  node_de_.resize(net_.depth + 1);
  for (int i = 0; i <= net_.depth; ++i) {
    node_d_[i].resize(std::size_t{1} << i);
    node_de_[i].resize(std::size_t{1} << i);
  }
}

void SmallStrainSolver::evaluate_leaves() {
  for (int j = 0; j < net_.n_leaves(); ++j)
    if (w_[net_.depth][j] > 0)
      leaf_eval_[j] = leaf_law_[j]->evaluate(leaf_state_[j], leaf_deps_[j]);
}

void SmallStrainSolver::assemble_up() {
  const int n = net_.depth;
  for (int j = 0; j < net_.n_leaves(); ++j) {
    if (!(w_[n][j] > 0)) continue;
    node_d_[n][j] = rotate_compliance(leaf_eval_[j].compliance, net_.theta[n][j]);
    node_de_[n][j] = rotate_vector(leaf_eval_[j].residual, net_.theta[n][j]);
  }
  for (int i = n - 1; i >= 0; --i)
    for (std::size_t k = 0; k < (std::size_t{1} << i); ++k) {
      if (!(w_[i][k] > 0)) continue;
      const double w1 = w_[i + 1][2 * k], w2 = w_[i + 1][2 * k + 1];
      const double theta = net_.theta[i][k];
      if (w2 == 0) {
        node_d_[i][k] = rotate_compliance(node_d_[i + 1][2 * k], theta);
        node_de_[i][k] = rotate_vector(node_de_[i + 1][2 * k], theta);
      } else if (w1 == 0) {
        node_d_[i][k] = rotate_compliance(node_d_[i + 1][2 * k + 1], theta);
        node_de_[i][k] = rotate_vector(node_de_[i + 1][2 * k + 1], theta);
      } else {
        const double f1 = w1 / (w1 + w2);
        node_d_[i][k] = rotate_compliance(
            homogenize_small(node_d_[i + 1][2 * k], node_d_[i + 1][2 * k + 1], f1), theta);
        node_de_[i][k] =
            homogenize_residual_strain(node_d_[i + 1][2 * k], node_d_[i + 1][2 * k + 1],
                                       node_de_[i + 1][2 * k], node_de_[i + 1][2 * k + 1], f1,
                                       theta);
      }
    }
}

void SmallStrainSolver::distribute_down(const Vec3& de_bar_root) {
  const int n = net_.depth;
  std::vector<std::vector<Vec3>> inc(n + 1);
  for (int i = 0; i <= n; ++i) inc[i].resize(std::size_t{1} << i);
  inc[0][0] = de_bar_root;
  for (int i = 0; i < n; ++i)
    for (std::size_t k = 0; k < (std::size_t{1} << i); ++k) {
      if (!(w_[i][k] > 0)) continue;
      const double w1 = w_[i + 1][2 * k], w2 = w_[i + 1][2 * k + 1];
      const double theta = net_.theta[i][k];
      if (w2 == 0) {
        inc[i + 1][2 * k] = rotate_vector(inc[i][k], -theta);
      } else if (w1 == 0) {
        inc[i + 1][2 * k + 1] = rotate_vector(inc[i][k], -theta);
      } else {
        BlockInputsSmall block;
        block.d1 = node_d_[i + 1][2 * k];
        block.d2 = node_d_[i + 1][2 * k + 1];
        block.f1 = w1 / (w1 + w2);
        block.theta = theta;
        const auto [c1, c2] = dehomogenize_small(inc[i][k], block, node_de_[i + 1][2 * k],
                                                 node_de_[i + 1][2 * k + 1]);
        inc[i + 1][2 * k] = c1;
        inc[i + 1][2 * k + 1] = c2;
      }
    }
  for (int j = 0; j < net_.n_leaves(); ++j)
    if (w_[n][j] > 0) leaf_deps_[j] = rotate_vector(inc[n][j], -net_.theta[n][j]);
}

int SmallStrainSolver::newton(const LoadStep& step, Vec3& de_bar, Vec3& ds_bar) {
  bool strain_prescribed[3];
  double target[3];
  for (int i = 0; i < 3; ++i) {
    strain_prescribed[i] = step.c[i].strain;
    target[i] = step.c[i].target - (step.c[i].strain ? eps_acc_[i] : sig_acc_[i]);
  }

  for (int j = 0; j < net_.n_leaves(); ++j) leaf_deps_[j] = Vec3{};
  std::vector<Vec3> prev = leaf_deps_;
  for (int iter = 1; iter <= opt_.max_iter; ++iter) {
    evaluate_leaves();
    assemble_up();
    mixed_solve_small(node_d_[0][0], node_de_[0][0], strain_prescribed, target, de_bar, ds_bar);
    prev = leaf_deps_;
    distribute_down(de_bar);
    double change = 0;
    for (int j = 0; j < net_.n_leaves(); ++j)
      if (w_[net_.depth][j] > 0) change = std::max(change, rel_change3(leaf_deps_[j], prev[j]));
    if (change < opt_.tol) {
      evaluate_leaves();
      for (int j = 0; j < net_.n_leaves(); ++j)
        if (w_[net_.depth][j] > 0) leaf_state_[j] = leaf_eval_[j].state;
      eps_acc_ = eps_acc_ + de_bar;
      sig_acc_ = sig_acc_ + ds_bar;
      return iter;
    }
  }
  throw NewtonDivergence("small-strain step did not converge in " +
                         std::to_string(opt_.max_iter) + " iterations");
}

StepRecord SmallStrainSolver::run_step(const LoadStep& step) {
  StepRecord rec;
  // On divergence the step is bisected: both halves interpolate the
  // targets between the committed state and the step's end values.
  std::function<void(const LoadStep&, int)> attempt = [&](const LoadStep& s, int depth) {
    try {
      Vec3 de, ds;
      rec.iterations += newton(s, de, ds);
    } catch (const NewtonDivergence&) {
      if (depth >= opt_.max_bisections) throw;
      ++rec.bisections;
      LoadStep mid = s;
      for (int i = 0; i < 3; ++i) {
        const double from = s.c[i].strain ? eps_acc_[i] : sig_acc_[i];
        mid.c[i].target = 0.5 * (from + s.c[i].target);
      }
      attempt(mid, depth + 1);
      attempt(s, depth + 1);
    }
  };
  attempt(step, 0);
  rec.strain = eps_acc_;
  rec.stress = sig_acc_;
  return rec;
}

PathResult SmallStrainSolver::run_path(const LoadPath& path) {
  PathResult out;
  for (std::size_t s = 0; s < path.steps.size(); ++s) {
    try {
      StepRecord rec = run_step(path.steps[s]);
      rec.step = int(s);
      out.records.push_back(rec);
    } catch (const Error& e) {
      throw NewtonDivergence("step " + std::to_string(s) + ": " + e.what());
    }
  }
  return out;
}

// --------------------------------------------------------------- finite

FiniteStrainSolver::FiniteStrainSolver(const MaterialNetwork& net,
                                       std::shared_ptr<FiniteStrainLaw> phase1,
                                       std::shared_ptr<FiniteStrainLaw> phase2, SolverOptions opt)
    : net_(net), opt_(opt) {
  w_ = propagate_weights(net_);
  const int leaves = net_.n_leaves();
  leaf_law_.resize(leaves);
  leaf_f_.assign(leaves, Vec4::identity_deformation());
  leaf_p_.resize(leaves);
  leaf_df_.resize(leaves);
  leaf_eval_.resize(leaves);
  leaf_dp_res_.resize(leaves);
  for (int j = 0; j < leaves; ++j)
    leaf_law_[j] = (net_.phase_of_leaf[j] == 1) ? phase1 : phase2;
  node_a_.resize(net_.depth + 1);
  node_dp_.resize(net_.depth + 1);
  for (int i = 0; i <= net_.depth; ++i) {
    node_a_[i].resize(std::size_t{1} << i);
    node_dp_[i].resize(std::size_t{1} << i);
  }
}

void FiniteStrainSolver::evaluate_leaves() {
  for (int j = 0; j < net_.n_leaves(); ++j) {
    if (!(w_[net_.depth][j] > 0)) continue;
    const Vec4 f_trial = leaf_f_[j] + leaf_df_[j];
    leaf_eval_[j] = leaf_law_[j]->evaluate(f_trial);
    // Linearization residual: exact stress minus tangent prediction.
    leaf_dp_res_[j] = leaf_eval_[j].p - leaf_p_[j] - leaf_eval_[j].a * leaf_df_[j];
  }
}

void FiniteStrainSolver::assemble_up() {
  const int n = net_.depth;
  for (int j = 0; j < net_.n_leaves(); ++j) {
    if (!(w_[n][j] > 0)) continue;
    const Mat4 rn = finite_rotation_matrix(-net_.theta[n][j]);
    const Mat4 rp = finite_rotation_matrix(net_.theta[n][j]);
    node_a_[n][j] = rn * leaf_eval_[j].a * rp;
    node_dp_[n][j] = rn * leaf_dp_res_[j];
  }
  for (int i = n - 1; i >= 0; --i)
    for (std::size_t k = 0; k < (std::size_t{1} << i); ++k) {
      if (!(w_[i][k] > 0)) continue;
      const double w1 = w_[i + 1][2 * k], w2 = w_[i + 1][2 * k + 1];
      const Mat4 rn = finite_rotation_matrix(-net_.theta[i][k]);
      const Mat4 rp = finite_rotation_matrix(net_.theta[i][k]);
      if (w2 == 0) {
        node_a_[i][k] = rn * node_a_[i + 1][2 * k] * rp;
        node_dp_[i][k] = rn * node_dp_[i + 1][2 * k];
      } else if (w1 == 0) {
        node_a_[i][k] = rn * node_a_[i + 1][2 * k + 1] * rp;
        node_dp_[i][k] = rn * node_dp_[i + 1][2 * k + 1];
      } else {
        const double f1 = w1 / (w1 + w2);
        node_a_[i][k] =
            rn * homogenize_finite(node_a_[i + 1][2 * k], node_a_[i + 1][2 * k + 1], f1) * rp;
        node_dp_[i][k] =
            rn * homogenize_residual_stress(node_a_[i + 1][2 * k], node_a_[i + 1][2 * k + 1],
                                            node_dp_[i + 1][2 * k], node_dp_[i + 1][2 * k + 1],
                                            f1);
      }
    }
}

void FiniteStrainSolver::distribute_down(const Vec4& df_bar_root) {
  const int n = net_.depth;
  std::vector<std::vector<Vec4>> inc(n + 1);
  for (int i = 0; i <= n; ++i) inc[i].resize(std::size_t{1} << i);
  inc[0][0] = df_bar_root;
  for (int i = 0; i < n; ++i)
    for (std::size_t k = 0; k < (std::size_t{1} << i); ++k) {
      if (!(w_[i][k] > 0)) continue;
      const double w1 = w_[i + 1][2 * k], w2 = w_[i + 1][2 * k + 1];
      const double theta = net_.theta[i][k];
      if (w2 == 0) {
        inc[i + 1][2 * k] = finite_rotation_matrix(theta) * inc[i][k];
      } else if (w1 == 0) {
        inc[i + 1][2 * k + 1] = finite_rotation_matrix(theta) * inc[i][k];
      } else {
        BlockInputsFinite block;
        block.a1 = node_a_[i + 1][2 * k];
        block.a2 = node_a_[i + 1][2 * k + 1];
        block.dp1 = node_dp_[i + 1][2 * k];
        block.dp2 = node_dp_[i + 1][2 * k + 1];
        block.f1 = w1 / (w1 + w2);
        block.theta = theta;
        const auto [c1, c2] = dehomogenize_finite(inc[i][k], block);
        inc[i + 1][2 * k] = c1;
        inc[i + 1][2 * k + 1] = c2;
      }
    }
  for (int j = 0; j < net_.n_leaves(); ++j)
    if (w_[n][j] > 0) leaf_df_[j] = finite_rotation_matrix(net_.theta[n][j]) * inc[n][j];
}

int FiniteStrainSolver::newton(const LoadStep& step, Vec4& df_bar, Vec4& dp_bar) {
  bool f_prescribed[4];
  double target[4];
  for (int i = 0; i < 4; ++i) {
    f_prescribed[i] = step.c[i].strain;
    target[i] = step.c[i].target - (step.c[i].strain ? f_acc_[i] : p_acc_[i]);
  }

  for (int j = 0; j < net_.n_leaves(); ++j) leaf_df_[j] = Vec4{};
  for (int iter = 1; iter <= opt_.max_iter; ++iter) {
    evaluate_leaves();
    assemble_up();
    mixed_solve_finite(node_a_[0][0], node_dp_[0][0], f_prescribed, target, df_bar, dp_bar);
    const std::vector<Vec4> prev = leaf_df_;
    distribute_down(df_bar);
    double change = 0;
    for (int j = 0; j < net_.n_leaves(); ++j)
      if (w_[net_.depth][j] > 0) change = std::max(change, rel_change4(leaf_df_[j], prev[j]));
    if (change < opt_.tol) {
      for (int j = 0; j < net_.n_leaves(); ++j) {
        if (!(w_[net_.depth][j] > 0)) continue;
        leaf_f_[j] = leaf_f_[j] + leaf_df_[j];
        leaf_p_[j] = leaf_law_[j]->evaluate(leaf_f_[j]).p;
      }
      f_acc_ = f_acc_ + df_bar;
      p_acc_ = p_acc_ + dp_bar;
      return iter;
    }
  }
  throw NewtonDivergence("finite-strain step did not converge in " +
                         std::to_string(opt_.max_iter) + " iterations");
}

StepRecord FiniteStrainSolver::run_step(const LoadStep& step) {
  StepRecord rec;
  std::function<void(const LoadStep&, int)> attempt = [&](const LoadStep& s, int depth) {
    try {
      Vec4 df, dp;
      rec.iterations += newton(s, df, dp);
    } catch (const NewtonDivergence&) {
      if (depth >= opt_.max_bisections) throw;
      ++rec.bisections;
      LoadStep mid = s;
      for (int i = 0; i < 4; ++i) {
        const double from = s.c[i].strain ? f_acc_[i] : p_acc_[i];
        mid.c[i].target = 0.5 * (from + s.c[i].target);
      }
      attempt(mid, depth + 1);
      attempt(s, depth + 1);
    }
  };
  attempt(step, 0);
  rec.fbar = f_acc_;
  rec.pbar = p_acc_;
  return rec;
}

PathResult FiniteStrainSolver::run_path(const LoadPath& path, bool leaf_stats) {
  PathResult out;
  for (std::size_t s = 0; s < path.steps.size(); ++s) {
    try {
      StepRecord rec = run_step(path.steps[s]);
      rec.step = int(s);
      out.records.push_back(rec);
    } catch (const Error& e) {
      throw NewtonDivergence("step " + std::to_string(s) + ": " + e.what());
    }
  }
  if (leaf_stats) out.leaf_stats = green_strain_stats();
  return out;
}

std::vector<LeafStrainStat> FiniteStrainSolver::green_strain_stats() const {
  std::vector<LeafStrainStat> stats;
  const double root_w = w_[0][0];
  for (int j = 0; j < net_.n_leaves(); ++j) {
    if (!(w_[net_.depth][j] > 0)) continue;
    const Vec4& f = leaf_f_[j];
    const double e11 = 0.5 * (f[0] * f[0] + f[3] * f[3] - 1.0);
    const double e22 = 0.5 * (f[2] * f[2] + f[1] * f[1] - 1.0);
    const double e12 = 0.5 * (f[0] * f[2] + f[3] * f[1]);
    LeafStrainStat st;
    st.leaf = j;
    st.weight = w_[net_.depth][j] / root_w;
    st.e_mean = 0.5 * (e11 + e22);
    st.e_maxshear = std::sqrt(0.25 * (e11 - e22) * (e11 - e22) + e12 * e12);
    stats.push_back(st);
  }
  return stats;
}

// --------------------------------------------------------------- export

std::string PathResult::to_csv() const {
  std::ostringstream out;
  out.precision(12);
  out << "step,iterations,bisections,eps11,eps22,eps12,sig11,sig22,sig12,"
         "F11,F22,F12,F21,P11,P22,P12,P21\n";
  for (const auto& r : records) {
    out << r.step << "," << r.iterations << "," << r.bisections;
    out << "," << r.strain[0] << "," << r.strain[1] << "," << r.strain[2] / 1.4142135623730951;
    out << "," << r.stress[0] << "," << r.stress[1] << "," << r.stress[2] / 1.4142135623730951;
    for (int i = 0; i < 4; ++i) out << "," << r.fbar[i];
    for (int i = 0; i < 4; ++i) out << "," << r.pbar[i];
    out << "\n";
  }
  return out.str();
}

std::string PathResult::to_json() const {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& r : records)
    steps.push_back({{"step", r.step},
                     {"iterations", r.iterations},
                     {"bisections", r.bisections},
                     {"strain", {r.strain[0], r.strain[1], r.strain[2]}},
                     {"stress", {r.stress[0], r.stress[1], r.stress[2]}},
                     {"F", {r.fbar[0], r.fbar[1], r.fbar[2], r.fbar[3]}},
                     {"P", {r.pbar[0], r.pbar[1], r.pbar[2], r.pbar[3]}}});
  nlohmann::json stats = nlohmann::json::array();
  for (const auto& s : leaf_stats)
    stats.push_back({{"leaf", s.leaf},
                     {"weight", s.weight},
                     {"E_mean", s.e_mean},
                     {"E_maxshear", s.e_maxshear}});
  return nlohmann::json{{"steps", steps}, {"leaf_green_strain", stats}}.dump(2);
}

}  // namespace dmn
