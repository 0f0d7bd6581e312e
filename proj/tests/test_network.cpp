#include "doctest.h"

#include <filesystem>
#include <random>

#include "dmn/errors.hpp"
#include "dmn/network.hpp"
#include "test_helpers.hpp"

using namespace dmn;
using namespace dmn::testing;

TEST_CASE("initialization: counts, ranges and activity") {
  for (int depth : {3, 5, 7}) {
    const MaterialNetwork net = init_random(depth, 42);
    CHECK(net.n_leaves() == (1 << depth));
    CHECK(net.n_parameters() == 3 * (1 << depth) - 1);
    CHECK(count_active(net) == (1 << depth));
    for (double z : net.z) {
      CHECK(z >= 0.2);
      CHECK(z <= 0.8);
    }
    for (const auto& layer : net.theta)
      for (double t : layer) {
        CHECK(t >= -M_PI / 2);
        CHECK(t <= M_PI / 2);
      }
    CHECK(int(net.theta.size()) == depth + 1);
    // alternating phases
    for (int j = 0; j < net.n_leaves(); ++j) CHECK(net.phase_of_leaf[j] == (j % 2 == 0 ? 1 : 2));
  }
}

TEST_CASE("same seed gives an identical network") {
  const MaterialNetwork a = init_random(4, 9), b = init_random(4, 9);
  CHECK(a.z == b.z);
  CHECK(a.theta == b.theta);
}

TEST_CASE("weight propagation sums children") {
  MaterialNetwork net = init_random(3, 5);
  const WeightTree w = propagate_weights(net);
  for (int i = 2; i >= 0; --i)
    for (int k = 0; k < (1 << i); ++k)
      CHECK(w[i][k] == doctest::Approx(w[i + 1][2 * k] + w[i + 1][2 * k + 1]));
  for (int j = 0; j < net.n_leaves(); ++j)
    CHECK(w[3][j] == doctest::Approx(std::max(net.z[j], 0.0)));

  for (auto& z : net.z) z = -1;
  CHECK_THROWS_AS(propagate_weights(net), DeadNetwork);
  CHECK(propagate_weights_unchecked(net)[0][0] == doctest::Approx(0.0));
}

TEST_CASE("phase volume fraction") {
  MaterialNetwork net = init_random(3, 5);
  for (int j = 0; j < net.n_leaves(); ++j) net.z[j] = (net.phase_of_leaf[j] == 1) ? 1.0 : 3.0;
  CHECK(phase_volume_fraction(net) == doctest::Approx(0.25));
}

TEST_CASE("depth-1 forward equals a single building block") {
  std::mt19937_64 rng(51);
  MaterialNetwork net = init_random(1, 3);
  const Mat3 dp1 = random_compliance(rng), dp2 = random_compliance(rng);
  const double f1 = std::max(net.z[0], 0.0) / (std::max(net.z[0], 0.0) + std::max(net.z[1], 0.0));
  const Mat3 d1 = rotate_compliance(dp1, net.theta[1][0]);
  const Mat3 d2 = rotate_compliance(dp2, net.theta[1][1]);
  const Mat3 want = block_forward({d1, d2, f1, net.theta[0][0]});
  CHECK(rel_diff(forward_elastic(net, dp1, dp2), want) < 1e-13);
}

TEST_CASE("identical isotropic phases reproduce the phase compliance") {
  const MaterialNetwork net = init_random(4, 8);
  // A laminate of a material with itself is that material, and isotropy
  // makes every rotation a no-op, so the whole tree collapses.
  const Mat3 iso = isotropic_compliance(2.0, 0.3);
  CHECK(rel_diff(forward_elastic(net, iso, iso), iso) < 1e-11);
}

TEST_CASE("dead child bypass: single active leaf reproduces its phase") {
  MaterialNetwork net = init_random(3, 7);
  for (int j = 1; j < net.n_leaves(); ++j) net.z[j] = -0.1;
  const Mat3 iso = isotropic_compliance(1.0, 0.25);
  const Mat3 dp2 = isotropic_compliance(10.0, 0.3);
  // leaf 0 is phase 1 and isotropic, so every rotation on the path is a
  // no-op and the output is exactly dp1.
  CHECK(rel_diff(forward_elastic(net, iso, dp2), iso) < 1e-12);
}

TEST_CASE("forward pass is invariant to deactivated subtree parameters") {
  std::mt19937_64 rng(53);
  MaterialNetwork net = init_random(4, 11);
  for (int j = 8; j < 16; ++j) net.z[j] = -0.5;
  const Mat3 dp1 = random_compliance(rng), dp2 = random_compliance(rng);
  const Mat3 before = forward_elastic(net, dp1, dp2);
  for (int j = 8; j < 16; ++j) net.theta[4][j] += 0.4;
  CHECK(rel_diff(forward_elastic(net, dp1, dp2), before) < 1e-15);
}

TEST_CASE("checkpoint round trip is byte-identical") {
  MaterialNetwork net = init_random(5, 123);
  net.history.epochs = 77;
  net.history.final_training_error = 0.0123;
  const std::string s1 = save(net);
  const MaterialNetwork back = load(s1);
  CHECK(save(back) == s1);
  CHECK(back.depth == net.depth);
  CHECK(back.z == net.z);
  CHECK(back.theta == net.theta);
  CHECK(back.phase_of_leaf == net.phase_of_leaf);
  CHECK(back.history.epochs == 77);
}

TEST_CASE("checkpoint file round trip") {
  const std::string path = (std::filesystem::temp_directory_path() / "dmn_net_test.json").string();
  MaterialNetwork net = init_random(3, 4);
  save_file(net, path);
  const MaterialNetwork back = load_file(path);
  CHECK(save(back) == save(net));
  std::filesystem::remove(path);
}

TEST_CASE("malformed checkpoints are rejected") {
  CHECK_THROWS_AS(load("not json"), FormatError);
  CHECK_THROWS_AS(load("{}"), FormatError);
  CHECK_THROWS_AS(load(R"({"version": 99})"), FormatError);
  // truncated z array
  MaterialNetwork net = init_random(2, 1);
  std::string s = save(net);
  const auto pos = s.find("\"z\"");
  REQUIRE(pos != std::string::npos);
  s.replace(pos, 3, "\"y\"");
  CHECK_THROWS_AS(load(s), FormatError);
}
