// Binary-tree material network: topology, leaf activations, rotation
// angles, weight propagation and the linear-elastic forward pass.
//
// Node (i,k), i in [0,N], k in [0, 2^i): children of (i,k) are
// (i+1, 2k) and (i+1, 2k+1). Layers 0..N-1 carry block angles; the
// layer-N angles rotate the phase compliances entering the bottom blocks.
// Parameter count: 2^N activations + (2^(N+1) - 1) angles = 3*2^N - 1.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dmn/building_block.hpp"
#include "dmn/mandel.hpp"

namespace dmn {

struct NodeId {
  int layer = 0;
  int index = 0;  // 0-based within the layer
};

struct MaterialNetwork {
  int depth = 0;                          // N
  std::uint64_t seed = 0;
  std::vector<double> z;                  // 2^N leaf activations
  std::vector<std::vector<double>> theta; // theta[i], size 2^i, i = 0..N
  std::vector<int> phase_of_leaf;         // 1 or 2 per leaf

  struct History {
    long epochs = 0;
    double final_training_error = -1.0;
    double final_validation_error = -1.0;
  } history;

  int n_leaves() const { return 1 << depth; }
  int n_parameters() const { return 3 * (1 << depth) - 1; }
};

// Per-node weights, same ragged layout as theta. weights[i][k] is the sum
// of its descendant leaf weights; weights[N][j] = max(z_j, 0).
using WeightTree = std::vector<std::vector<double>>;

MaterialNetwork init_random(int depth, std::uint64_t seed);

// Throws DeadNetwork when the root weight is zero.
WeightTree propagate_weights(const MaterialNetwork& net);

// Weight sums without the liveness check (root may be zero).
WeightTree propagate_weights_unchecked(const MaterialNetwork& net);

int count_active(const MaterialNetwork& net);

double phase_volume_fraction(const MaterialNetwork& net);

// Forward pass caches for backpropagation and inspection. Entries for
// inactive nodes are left untouched.
struct ForwardCache {
  WeightTree weights;
  std::vector<std::vector<Mat3>> pre_rotation;   // a: Dr per node (layer N: phase input)
  std::vector<std::vector<Mat3>> post_rotation;  // d: D per node
  std::vector<std::vector<double>> f1;           // block volume fraction, layers 0..N-1
};

Mat3 forward_elastic(const MaterialNetwork& net, const Mat3& dp1, const Mat3& dp2);
Mat3 forward_elastic(const MaterialNetwork& net, const Mat3& dp1, const Mat3& dp2,
                     ForwardCache& cache);

// JSON checkpoint (schema version 1); lossless double round trip.
std::string save(const MaterialNetwork& net);
MaterialNetwork load(const std::string& bytes);
void save_file(const MaterialNetwork& net, const std::string& path);
MaterialNetwork load_file(const std::string& path);

}  // namespace dmn
