// Acceptance gate: one criterion per invocation, selected by number.
// Each criterion prints a single PASS/FAIL line; the exit status follows.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <random>
#include <string>
#include <vector>

#include "dmn/compression.hpp"
#include "dmn/online_solver.hpp"
#include "dmn/oracle.hpp"
#include "dmn/trainer.hpp"
#include "test_helpers.hpp"

using namespace dmn;
using namespace dmn::testing;

namespace {

// ------------------------------------------------------------ criterion 1

bool gradient_exactness() {
  std::mt19937_64 rng(1001);
  const double h = 1e-6;
  double worst = 0;
  auto check_net = [&](int depth, std::uint64_t seed) {
    MaterialNetwork net = init_random(depth, seed);
    TrainingSample s;
    s.dp1 = random_compliance(rng);
    s.dp2 = random_compliance(rng);
    s.ddns = rotate_compliance(forward_elastic(net, s.dp1, s.dp2), 0.15);
    const GradientVector g = backprop(net, s);

    double num = 0, den = 0;
    auto fd_of = [&](MaterialNetwork& p, MaterialNetwork& m) {
      return (cost(p, {s}, 0, 1) - cost(m, {s}, 0, 1)) / (2 * h);
    };
    for (int j = 0; j < net.n_leaves(); ++j) {
      MaterialNetwork p = net, m = net;
      p.z[j] += h;
      m.z[j] -= h;
      const double fd = fd_of(p, m);
      num += (fd - g.z[j]) * (fd - g.z[j]);
      den += fd * fd;
    }
    for (int i = 0; i <= depth; ++i)
      for (int k = 0; k < (1 << i); ++k) {
        MaterialNetwork p = net, m = net;
        p.theta[i][k] += h;
        m.theta[i][k] -= h;
        const double fd = fd_of(p, m);
        num += (fd - g.theta[i][k]) * (fd - g.theta[i][k]);
        den += fd * fd;
      }
    const double rel = std::sqrt(num / den);
    worst = std::max(worst, rel);
    return rel < 1e-5;
  };

  bool ok = true;
  for (int r = 0; r < 50; ++r) ok = check_net(3, 2000 + r) && ok;
  for (int r = 0; r < 10; ++r) ok = check_net(5, 3000 + r) && ok;
  std::printf("  worst relative gradient error: %.3g\n", worst);
  return ok;
}

// ------------------------------------------------------------ criterion 2

bool block_vs_oracle() {
  std::mt19937_64 rng(1002);
  double worst = 0;
  bool ok = true;
  for (int i = 0; i < 1000; ++i) {
    const Mat3 d1 = random_compliance(rng), d2 = random_compliance(rng);
    const double f1 = urand(rng, 0.05, 0.95), theta = urand(rng, -1.5, 1.5);

    const double e1 = rel_diff(block_forward({d1, d2, f1, theta}),
                               laminate_exact(d1, d2, f1, theta));
    const Vec3 de1 = random_vec3(rng, 0.01), de2 = random_vec3(rng, 0.01);
    const Vec3 rs_got = homogenize_residual_strain(d1, d2, de1, de2, f1, theta);
    const Vec3 rs_want = laminate_residual_strain(d1, d2, de1, de2, f1, theta);
    const double e2 = (rs_got - rs_want).norm() / std::max(1e-12, rs_want.norm());

    const Mat4 a1 = random_tangent(rng), a2 = random_tangent(rng);
    const double e3 = rel_diff4(homogenize_finite(a1, a2, f1),
                                laminate_finite_tangent(a1, a2, f1));
    const Vec4 dp1 = random_vec4(rng, 5), dp2 = random_vec4(rng, 5);
    const Vec4 fr_got = homogenize_residual_stress(a1, a2, dp1, dp2, f1);
    const Vec4 fr_want = laminate_residual_stress_oracle(a1, a2, dp1, dp2, f1);
    const double e4 = (fr_got - fr_want).norm() / std::max(1e-12, fr_want.norm());

    for (double e : {e1, e2, e3, e4}) {
      worst = std::max(worst, e);
      if (e >= 1e-10) ok = false;
    }
  }
  std::printf("  worst relative deviation over 1000 inputs: %.3g\n", worst);
  return ok;
}

// ---------------------------------------------------- training utilities

std::pair<std::vector<TrainingSample>, std::vector<TrainingSample>> laminate_data(
    double f1, double theta, int n_train, int n_valid, std::uint64_t seed) {
  auto [tr, va] = build_dataset(
      [f1, theta](const Mat3& d1, const Mat3& d2) { return laminate_exact(d1, d2, f1, theta); },
      n_train, n_valid, seed);
  return {tr.samples, va.samples};
}

// ------------------------------------------------------------ criterion 3

bool uniform_degeneration() {
  bool all_ok = true;
  for (int depth : {3, 5, 7}) {
    double best = 1e9;
    bool depth_ok = false;
    for (std::uint64_t seed : {11u, 22u, 33u}) {
      auto [tr, va] = build_dataset(
          [](const Mat3& d1, const Mat3&) { return d1; }, 60, 20, 500 + seed);
      TrainerConfig cfg;
      cfg.epochs = 3000;
      cfg.batch_size = 20;
      cfg.seed = seed;
      // The data is reproduced exactly by a single leaf; the leaf-weight
      // regularizer and tight merge tolerances only hinder collapse here.
      cfg.lambda = 0;
      cfg.merge_tol_f = 0.5;
      cfg.merge_tol_theta = 0.5;
      auto [net, hist] = train(init_random(depth, seed), tr.samples, va.samples, cfg);
      const double err = mean_error(net, tr.samples);
      const int na = count_active(net);
      best = std::min(best, err);
      if (na <= 2 && err < 1e-3) depth_ok = true;
      std::printf("  N=%d seed %llu: error %.3g, active %d\n", depth,
                  (unsigned long long)seed, err, na);
      if (depth_ok && best < 5e-4) break;
    }
    if (!(depth_ok && best < 5e-4)) all_ok = false;
  }
  return all_ok;
}

// ------------------------------------------------------------ criterion 4

bool fast_convergence() {
  auto [tr, va] = laminate_data(0.3, 0.0, 200, 100, 42);
  bool ok = false;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    TrainerConfig cfg;
    cfg.epochs = 1000;
    cfg.batch_size = 20;
    cfg.seed = seed;
    auto [net, hist] = train(init_random(5, seed), tr, va, cfg);
    const double te = mean_error(net, tr);
    const double ve = mean_error(net, va);
    std::printf("  seed %llu: training %.4f validation %.4f\n", (unsigned long long)seed, te,
                ve);
    if (te <= 0.02 && std::abs(ve - te) < 0.01) {
      ok = true;
      break;
    }
  }
  return ok;
}

// ------------------------------------------------------------ criterion 5

bool fft_learning() {
  const auto micro = stripes_micro(64, 0.45);
  const double vf1_true = micro.vf1();
  auto [tr, va] = build_dataset(
      [&micro](const Mat3& d1, const Mat3& d2) { return fft_homogenize(micro, d1, d2); }, 150,
      50, 77);

  bool ok = false;
  for (std::uint64_t seed : {5u, 6u, 7u}) {
    TrainerConfig cfg;
    cfg.epochs = 3000;
    cfg.batch_size = 20;
    cfg.seed = seed;
    // Leaf rotations must travel to the edge of their init range to fit a
    // quarter-turned laminate, so keep the step size up throughout.
    cfg.eta0 = 0.05;
    cfg.eta_min = 0.05;
    auto [net, hist] = train(init_random(5, seed), tr.samples, va.samples, cfg);
    const double err = mean_error(net, tr.samples);
    const double vf1 = phase_volume_fraction(net);
    std::printf("  seed %llu: error %.4f, learned vf1 %.4f (true %.4f)\n",
                (unsigned long long)seed, err, vf1, vf1_true);
    if (err <= 0.02 && std::abs(vf1 - vf1_true) <= 0.03) {
      ok = true;
      break;
    }
  }
  return ok;
}

// ------------------------------------------------------------ criterion 6

bool parameter_counts() {
  bool ok = true;
  for (int depth : {3, 5, 7}) {
    const MaterialNetwork net = init_random(depth, 9);
    const int want_params = 3 * (1 << depth) - 1;
    const int want_active = 1 << depth;
    std::printf("  N=%d: parameters %d (want %d), initial active %d (want %d)\n", depth,
                net.n_parameters(), want_params, count_active(net), want_active);
    ok = ok && net.n_parameters() == want_params && count_active(net) == want_active;
  }
  return ok;
}

// ---------------------------------------------------- solver single block

MaterialNetwork single_block(double f1, double theta = 0.0) {
  MaterialNetwork net = init_random(1, 1);
  net.z = {f1, 1.0 - f1};
  net.theta[0][0] = theta;
  net.theta[1][0] = net.theta[1][1] = 0.0;
  return net;
}

// ------------------------------------------------------------ criterion 7

bool online_plasticity() {
  const MaterialRegistry reg = make_reference_materials();
  const double f1 = 0.5;
  const MaterialNetwork net = single_block(f1);
  const LoadPath path = uniaxial_tension_path(25, 0.01);

  SmallStrainSolver solver(net, reg.small.at("p1-hard"), reg.small.at("p2-plastic"));
  const PathResult got = solver.run_path(path);
  const PathResult want = laminate_plastic_driver(reg.small.at("p1-hard"),
                                                  reg.small.at("p2-plastic"), f1, 0.0, path);
  double worst = 0;
  for (std::size_t i = 0; i < got.records.size(); ++i) {
    const double rel = std::abs(got.records[i].stress[0] - want.records[i].stress[0]) /
                       std::abs(want.records[i].stress[0]);
    worst = std::max(worst, rel);
  }
  std::printf("  worst sigma11 deviation from the driver: %.3g\n", worst);
  if (worst >= 5e-3) return false;

  SmallStrainSolver solver2(net, reg.small.at("p1-hard"), reg.small.at("p2-plastic"));
  const PathResult lu = solver2.run_path(loading_unloading_path(8, 0.008));
  const auto& r = lu.records;
  const double slope0 = r[0].stress[0] / r[0].strain[0];
  const double unload =
      (r[8].stress[0] - r[7].stress[0]) / (r[8].strain[0] - r[7].strain[0]);
  const double slope_rel = std::abs(unload - slope0) / std::abs(slope0);
  std::printf("  unload slope deviation from the elastic slope: %.3g\n", slope_rel);
  return slope_rel < 1e-3;
}

// ------------------------------------------------------------ criterion 8

bool online_finite() {
  const MaterialRegistry reg = make_reference_materials();
  const auto law = std::dynamic_pointer_cast<MooneyRivlinLaw>(reg.finite.at("p2-mr"));

  // identical phases to F11 = 2
  const MaterialNetwork net = single_block(0.5, 0.3);
  FiniteStrainSolver solver(net, reg.finite.at("p2-mr"), reg.finite.at("p2-mr"));
  const PathResult res = solver.run_path(finite_uniaxial_path(50, 2.0));
  double worst = 0;
  for (const auto& rec : res.records) {
    Vec4 f{{rec.fbar[0], rec.fbar[1], 0, 0}};
    for (int it = 0; it < 60; ++it) {
      const FiniteEval e = law->evaluate(f);
      const double step = e.p[1] / e.a(1, 1);
      f[1] -= step;
      if (std::abs(step) < 1e-15) break;
    }
    const FiniteEval e = law->evaluate(f);
    worst = std::max(worst, std::abs(rec.pbar[0] - e.p[0]) / std::max(1.0, std::abs(e.p[0])));
    worst = std::max(worst, std::abs(rec.fbar[1] - f[1]) / std::abs(f[1]));
  }
  std::printf("  identical phases, worst deviation from the bare material: %.3g\n", worst);
  if (worst >= 1e-8) return false;

  // mixed phases at F11 = 1.5 against the incremental driver
  const double f1 = 0.3;
  const MaterialNetwork mixed = single_block(f1);
  const LoadPath path = finite_uniaxial_path(25, 1.5);
  FiniteStrainSolver solver2(mixed, reg.finite.at("p1-mr-hard"), reg.finite.at("p2-mr"));
  const PathResult got = solver2.run_path(path);
  const PathResult want = laminate_finite_driver(reg.finite.at("p1-mr-hard"),
                                                 reg.finite.at("p2-mr"), f1, 0.0, path);
  const double rel = std::abs(got.records.back().pbar[0] - want.records.back().pbar[0]) /
                     std::abs(want.records.back().pbar[0]);
  std::printf("  mixed phases, P11 deviation at F11=1.5: %.3g\n", rel);
  return rel < 0.01;
}

// ------------------------------------------------------------ criterion 9

bool linear_cost() {
  const MaterialRegistry reg = make_reference_materials();
  struct Row {
    int na;
    double t;
  };
  std::vector<Row> rows;
  for (int na : {8, 16, 32, 64, 128}) {
    // Uniform weights and zero angles: every active subtree responds
    // identically, so iteration counts match across sizes and the
    // measurement isolates the per-iteration cost.
    MaterialNetwork net = init_random(7, 42);
    for (auto& layer : net.theta)
      for (auto& t : layer) t = 0.0;
    for (int j = 0; j < net.n_leaves(); ++j) net.z[j] = (j < na) ? 1.0 : -0.5;
    double best = 1e300;
    for (int rep = 0; rep < 6; ++rep) {
      SmallStrainSolver solver(net, reg.small.at("p1-hard"), reg.small.at("p2-plastic"));
      const auto t0 = std::chrono::steady_clock::now();
      solver.run_path(uniaxial_tension_path(25, 0.01));
      const auto t1 = std::chrono::steady_clock::now();
      best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    rows.push_back({na, best});
    std::printf("  N_a %3d: %.5f s\n", na, best);
  }

  bool ratios_ok = true;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double ratio = rows[i].t / rows[i - 1].t;
    if (ratio > 2.5) ratios_ok = false;
  }

  const double n = double(rows.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& r : rows) {
    sx += r.na;
    sy += r.t;
    sxx += double(r.na) * r.na;
    sxy += r.na * r.t;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double icept = (sy - slope * sx) / n;
  double ss_res = 0, ss_tot = 0;
  for (const auto& r : rows) {
    ss_res += (r.t - slope * r.na - icept) * (r.t - slope * r.na - icept);
    ss_tot += (r.t - sy / n) * (r.t - sy / n);
  }
  const double r2 = 1.0 - ss_res / ss_tot;
  std::printf("  linear fit R^2 = %.4f, adjacent ratios %s 2.5\n", r2,
              ratios_ok ? "<=" : ">");
  return r2 > 0.95 && ratios_ok;
}

// ----------------------------------------------------------- criterion 10

bool compression_soundness() {
  std::mt19937_64 rng(1010);
  double worst = 0;
  bool merge_ok = true;
  for (int rep = 0; rep < 1000; ++rep) {
    MaterialNetwork net = init_random(3 + rep % 3, 5000 + rep);
    for (auto& z : net.z)
      if (urand(rng, 0, 1) < 0.3) z = -0.3;
    if (count_active(net) == 0) net.z[0] = 0.4;
    const Mat3 dp1 = random_compliance(rng), dp2 = random_compliance(rng);
    const Mat3 before = forward_elastic(net, dp1, dp2);

    reorder(net);
    worst = std::max(worst, rel_diff(forward_elastic(net, dp1, dp2), before));
    delete_pass_through(net);
    worst = std::max(worst, rel_diff(forward_elastic(net, dp1, dp2), before));

    // tolerance-zero merge must not fire on generic networks, and must
    // not change the output either way
    merge_similar_subtrees(net, 0.0, 0.0);
    const double after = rel_diff(forward_elastic(net, dp1, dp2), before);
    if (after > 1e-13) merge_ok = false;
    worst = std::max(worst, after);
  }
  std::printf("  worst output drift over 1000 networks: %.3g\n", worst);
  return worst < 1e-13 && merge_ok;
}

// ----------------------------------------------------------- criterion 11

bool high_contrast() {
  auto [tr, va] = laminate_data(0.3, 0.0, 200, 100, 42);
  TrainerConfig cfg;
  cfg.epochs = 1000;
  cfg.batch_size = 20;
  cfg.seed = 1;
  auto [net, hist] = train(init_random(5, 1), tr, va, cfg);
  const double train_err = mean_error(net, tr);

  const Dataset test = testing_dataset_high_contrast(100, 314);
  std::vector<double> errs;
  for (const auto& s : test.samples) {
    TrainingSample t = s;
    t.ddns = laminate_exact(s.dp1, s.dp2, 0.3, 0.0);
    errs.push_back(sample_error(net, t));  // throws on numerical failure
  }
  double mean = 0;
  std::array<int, 7> histo{};
  for (double e : errs) {
    mean += e;
    int bin = (e <= 1e-6) ? 0 : int(std::floor(std::log10(e))) + 7;
    histo[std::size_t(std::clamp(bin, 0, 6))]++;
  }
  mean /= double(errs.size());
  std::printf("  completed %zu/100 samples; mean error %.4f (training %.4f)\n", errs.size(),
              mean, train_err);
  std::printf("  error decades [<1e-6 .. >=1e-1]:");
  for (int c : histo) std::printf(" %d", c);
  std::printf("\n");
  return errs.size() == 100 && mean < 3.0 * train_err;
}

struct Criterion {
  const char* name;
  bool (*fn)();
};

const Criterion kCriteria[] = {
    {"gradient exactness vs finite differences", gradient_exactness},
    {"building blocks vs interface-system oracles", block_vs_oracle},
    {"uniform-material degeneration to few leaves", uniform_degeneration},
    {"2% training error within 1000 epochs on laminate data", fast_convergence},
    {"learning a 64x64 stripe microstructure from the spectral oracle", fft_learning},
    {"parameter count and initial active-leaf count", parameter_counts},
    {"online plasticity vs incremental laminate driver", online_plasticity},
    {"online finite strain vs bare material and driver", online_finite},
    {"solver cost linear in the number of active leaves", linear_cost},
    {"compression leaves the forward output unchanged", compression_soundness},
    {"high-contrast evaluation completes and stays calibrated", high_contrast},
};

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: %s <criterion 1..11>\n", argv[0]);
    return 2;
  }
  const int idx = std::atoi(argv[1]);
  if (idx < 1 || idx > 11) {
    std::fprintf(stderr, "criterion must be 1..11\n");
    return 2;
  }
  const Criterion& c = kCriteria[idx - 1];
  bool ok = false;
  try {
    ok = c.fn();
  } catch (const std::exception& e) {
    std::printf("  unexpected exception: %s\n", e.what());
    ok = false;
  }
  std::printf("criterion %d (%s): %s\n", idx, c.name, ok ? "PASS" : "FAIL");
  return ok ? 0 : 1;
}
