#include "dmn/compression.hpp"

#include <cmath>

namespace dmn {

namespace {

// Descendant index range of node (i,k) at layer j >= i.
std::pair<std::size_t, std::size_t> span(int i, std::size_t k, int j) {
  return {k << (j - i), (k + 1) << (j - i)};
}

void swap_subtrees(MaterialNetwork& net, WeightTree& w, int i, std::size_t k) {
  // Swap the subtree of (i+1, 2k) with that of (i+1, 2k+1), layer by layer.
  const int n = net.depth;
  for (int j = i + 1; j <= n; ++j) {
    const auto [lo, hi] = span(i + 1, 2 * k, j);
    const std::size_t len = hi - lo;
    for (std::size_t p = 0; p < len; ++p) {
      std::swap(net.theta[j][lo + p], net.theta[j][lo + len + p]);
      std::swap(w[j][lo + p], w[j][lo + len + p]);
      if (j == n) {
        std::swap(net.z[lo + p], net.z[lo + len + p]);
        std::swap(net.phase_of_leaf[lo + p], net.phase_of_leaf[lo + len + p]);
      }
    }
  }
}

// Distance of two angles under the mod-pi symmetry of a two-layer
// structure, in [0, pi/2].
double angle_distance(double a, double b) {
  const double d = std::remainder(a - b, M_PI);
  return std::abs(d);
}

struct SignatureDiff {
  bool comparable = true;  // active patterns align node for node
  double df = 0;
  double dtheta = 0;  // max angle distance / pi
};

void compare_subtrees(const MaterialNetwork& net, const WeightTree& w, int layer, std::size_t a,
                      std::size_t b, SignatureDiff& out) {
  const bool alive_a = w[layer][a] > 0, alive_b = w[layer][b] > 0;
  if (alive_a != alive_b) {
    out.comparable = false;
    return;
  }
  if (!alive_a) return;
  out.dtheta = std::max(out.dtheta, angle_distance(net.theta[layer][a], net.theta[layer][b]) / M_PI);
  if (layer == net.depth) {
    if (net.phase_of_leaf[a] != net.phase_of_leaf[b]) out.comparable = false;
    return;
  }
  const double fa = w[layer + 1][2 * a] / w[layer][a];
  const double fb = w[layer + 1][2 * b] / w[layer][b];
  out.df = std::max(out.df, std::abs(fa - fb));
  compare_subtrees(net, w, layer + 1, 2 * a, 2 * b, out);
  if (!out.comparable) return;
  compare_subtrees(net, w, layer + 1, 2 * a + 1, 2 * b + 1, out);
}

// Fold subtree b into subtree a: weights summed, angles averaged with the
// mod-pi wrap, b deactivated.
void fuse_subtrees(MaterialNetwork& net, const WeightTree& w, int layer, std::size_t a,
                   std::size_t b) {
  if (!(w[layer][a] > 0)) return;
  const double ta = net.theta[layer][a];
  const double tb_adj = ta + std::remainder(net.theta[layer][b] - ta, M_PI);
  net.theta[layer][a] = 0.5 * (ta + tb_adj);
  if (layer == net.depth) {
    net.z[a] = std::max(net.z[a], 0.0) + std::max(net.z[b], 0.0);
    net.z[b] = 0.0;
    return;
  }
  fuse_subtrees(net, w, layer + 1, 2 * a, 2 * b);
  fuse_subtrees(net, w, layer + 1, 2 * a + 1, 2 * b + 1);
}

int merge_pass(MaterialNetwork& net, WeightTree& w, int layer, std::size_t k, double tol_f,
               double tol_theta) {
  if (layer >= net.depth || !(w[layer][k] > 0)) return 0;
  const std::size_t c1 = 2 * k, c2 = 2 * k + 1;
  if (w[layer + 1][c1] > 0 && w[layer + 1][c2] > 0) {
    SignatureDiff diff;
    compare_subtrees(net, w, layer + 1, c1, c2, diff);
    if (diff.comparable && diff.df <= tol_f && diff.dtheta <= tol_theta) {
      fuse_subtrees(net, w, layer + 1, c1, c2);
      w = propagate_weights_unchecked(net);
      return 1 + merge_pass(net, w, layer + 1, c1, tol_f, tol_theta);
    }
  }
  return merge_pass(net, w, layer + 1, c1, tol_f, tol_theta) +
         merge_pass(net, w, layer + 1, c2, tol_f, tol_theta);
}

}  // namespace

void reorder(MaterialNetwork& net) {
  WeightTree w = propagate_weights_unchecked(net);
  for (int i = 0; i < net.depth; ++i)
    for (std::size_t k = 0; k < (std::size_t{1} << i); ++k)
      if (w[i + 1][2 * k] < w[i + 1][2 * k + 1]) swap_subtrees(net, w, i, k);
}

void delete_pass_through(MaterialNetwork& net) {
  const WeightTree w = propagate_weights_unchecked(net);
  for (int i = 0; i < net.depth; ++i)
    for (std::size_t k = 0; k < (std::size_t{1} << i); ++k) {
      if (!(w[i][k] > 0)) continue;
      const std::size_t c1 = 2 * k, c2 = 2 * k + 1;
      const bool a1 = w[i + 1][c1] > 0, a2 = w[i + 1][c2] > 0;
      if (a1 != a2) {
        const std::size_t live = a1 ? c1 : c2;
        net.theta[i + 1][live] += net.theta[i][k];
        net.theta[i][k] = 0.0;
      }
    }
}

int merge_similar_subtrees(MaterialNetwork& net, double tol_f, double tol_theta) {
  WeightTree w = propagate_weights_unchecked(net);
  const int merges = merge_pass(net, w, 0, 0, tol_f, tol_theta);
  if (merges > 0) delete_pass_through(net);
  return merges;
}

}  // namespace dmn
