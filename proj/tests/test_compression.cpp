#include "doctest.h"

#include <random>

#include "dmn/compression.hpp"
#include "test_helpers.hpp"

using namespace dmn;
using namespace dmn::testing;

TEST_CASE("reorder preserves the forward output and sorts children") {
  std::mt19937_64 rng(81);
  for (int rep = 0; rep < 50; ++rep) {
    MaterialNetwork net = init_random(4, 400 + rep);
    const Mat3 dp1 = random_compliance(rng), dp2 = random_compliance(rng);
    const Mat3 before = forward_elastic(net, dp1, dp2);
    reorder(net);
    CHECK(rel_diff(forward_elastic(net, dp1, dp2), before) < 1e-13);
    const WeightTree w = propagate_weights(net);
    for (int i = 0; i < net.depth; ++i)
      for (int k = 0; k < (1 << i); ++k) CHECK(w[i + 1][2 * k] >= w[i + 1][2 * k + 1]);
  }
}

TEST_CASE("delete_pass_through preserves output and clears absorbed angles") {
  std::mt19937_64 rng(82);
  for (int rep = 0; rep < 50; ++rep) {
    MaterialNetwork net = init_random(4, 500 + rep);
    // kill a random subset of leaves to create single-child parents
    for (auto& z : net.z)
      if (urand(rng, 0, 1) < 0.4) z = -0.3;
    if (count_active(net) == 0) net.z[0] = 0.5;
    const Mat3 dp1 = random_compliance(rng), dp2 = random_compliance(rng);
    const Mat3 before = forward_elastic(net, dp1, dp2);
    delete_pass_through(net);
    CHECK(rel_diff(forward_elastic(net, dp1, dp2), before) < 1e-12);

    // no surviving single-child block carries a nonzero angle
    const WeightTree w = propagate_weights(net);
    for (int i = 0; i < net.depth; ++i)
      for (int k = 0; k < (1 << i); ++k) {
        const bool c1 = w[i + 1][2 * k] > 0, c2 = w[i + 1][2 * k + 1] > 0;
        if (c1 != c2 && w[i][k] > 0) CHECK(net.theta[i][k] == 0.0);
      }
  }
}

TEST_CASE("merging identical sibling subtrees preserves the output") {
  std::mt19937_64 rng(83);
  for (int rep = 0; rep < 20; ++rep) {
    MaterialNetwork net = init_random(3, 600 + rep);
    // make the two depth-1 subtrees exact copies of each other
    for (int i = 1; i <= 3; ++i) {
      const int half = 1 << (i - 1);
      for (int k = 0; k < half; ++k) net.theta[i][half + k] = net.theta[i][k];
    }
    for (int j = 0; j < 4; ++j) net.z[4 + j] = net.z[j];
    net.theta[0][0] = 0;  // siblings must also agree through the root blocks
    net.theta[1][1] = net.theta[1][0];

    const Mat3 dp1 = random_compliance(rng), dp2 = random_compliance(rng);
    const Mat3 before = forward_elastic(net, dp1, dp2);
    const int merges = merge_similar_subtrees(net, 0.0, 0.0);
    CHECK(merges >= 1);
    CHECK(rel_diff(forward_elastic(net, dp1, dp2), before) < 1e-12);
    CHECK(count_active(net) < 8);
  }
}

TEST_CASE("merging at tolerance zero never fires on generic networks") {
  std::mt19937_64 rng(84);
  for (int rep = 0; rep < 50; ++rep) {
    MaterialNetwork net = init_random(4, 700 + rep);
    const Mat3 dp1 = random_compliance(rng), dp2 = random_compliance(rng);
    const Mat3 before = forward_elastic(net, dp1, dp2);
    CHECK(merge_similar_subtrees(net, 0.0, 0.0) == 0);
    CHECK(rel_diff(forward_elastic(net, dp1, dp2), before) == 0.0);
  }
}

TEST_CASE("compression passes are idempotent") {
  std::mt19937_64 rng(85);
  MaterialNetwork net = init_random(4, 900);
  for (auto& z : net.z)
    if (urand(rng, 0, 1) < 0.4) z = -0.3;
  reorder(net);
  delete_pass_through(net);
  const std::string snap = save(net);
  reorder(net);
  delete_pass_through(net);
  CHECK(save(net) == snap);
}

TEST_CASE("loose merge tolerance fuses near-duplicates") {
  MaterialNetwork net = init_random(2, 901);
  // siblings at depth 1 nearly identical
  net.z = {0.5, 0.0 - 0.3, 0.52, -0.3};
  net.z[1] = -0.3;
  net.theta[1][0] = 0.30;
  net.theta[1][1] = -0.9;
  net.theta[2][0] = 0.10;
  net.theta[2][2] = 0.11;
  net.theta[1][0] = net.theta[1][1] = 0.3;  // matching block angles
  const int merges = merge_similar_subtrees(net, 0.05, 0.05);
  CHECK(merges == 1);
  // surviving leaf weight is the ReLU sum
  const WeightTree w = propagate_weights(net);
  CHECK(w[0][0] == doctest::Approx(1.02));
  CHECK(count_active(net) == 1);
}
