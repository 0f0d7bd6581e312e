// Cost evaluation, backpropagation through the tree, mini-batch SGD with
// a bold-driver learning rate, and the epoch loop with periodic network
// compression.
#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dmn/network.hpp"
#include "dmn/sampling.hpp"

namespace dmn {

struct TrainerConfig {
  int batch_size = 20;
  long epochs = 10000;
  double lambda = -1;        // < 0: auto-scale to ~1% of initial data cost
  double eta0 = 0.02;
  double eta_min = -1;       // < 0: eta0 / 100; floor against noise-driven decay
  double growth = 1.05;
  double decay = 0.5;
  int compression_period = 10;  // epochs; 0 disables compression
  double merge_tol_f = 0.05;
  double merge_tol_theta = 0.05;
  std::uint64_t seed = 0;
  int threads = 1;
  bool early_stop = false;
  long early_stop_patience = 500;
};

struct GradientVector {
  std::vector<double> z;                   // per leaf
  std::vector<std::vector<double>> theta;  // per node, ragged like the network

  static GradientVector zeros_like(const MaterialNetwork& net);
  void add_scaled(const GradientVector& o, double s);
};

struct EpochRecord {
  long epoch = 0;
  double train_error = 0;  // mean relative error over the training set
  double valid_error = 0;
  double cost = 0;
  double eta = 0;
  int n_active = 0;
};

struct TrainingHistory {
  std::vector<EpochRecord> records;
  long best_epoch = -1;
  double best_valid_error = -1;

  std::string to_csv() const;
  std::string to_json() const;
};

// xi = 2^(N-2): target for the leaf-weight sum regularizer.
double regularizer_target(int depth);

// C = (1/2M) sum_s ||Ddns - h||^2 / ||Ddns||^2 + lambda (sum ReLU(z) - xi)^2
double cost(const MaterialNetwork& net, const std::vector<TrainingSample>& batch,
            double lambda, double xi);

// ||Ddns - h|| / ||Ddns|| for one sample.
double sample_error(const MaterialNetwork& net, const TrainingSample& s);

double mean_error(const MaterialNetwork& net, const std::vector<TrainingSample>& set);

// Gradient of C_s/2 with respect to every z and theta. Deactivated leaves
// get a zero component.
GradientVector backprop(const MaterialNetwork& net, const TrainingSample& sample);

struct SgdState {
  double eta = 0;
  double lambda = 0;
  double xi = 0;
  double prev_cost = -1;
  std::mt19937_64 rng;
};

// One pass over the shuffled dataset in mini-batches; returns the mean
// batch cost observed during the epoch.
double sgd_epoch(MaterialNetwork& net, const std::vector<TrainingSample>& train,
                 const TrainerConfig& cfg, SgdState& state);

double bold_driver_update(double eta, double cost_now, double cost_prev, double growth,
                          double decay);

// Full training loop; returns the best-validation checkpoint and history.
std::pair<MaterialNetwork, TrainingHistory> train(MaterialNetwork net,
                                                  const std::vector<TrainingSample>& train_set,
                                                  const std::vector<TrainingSample>& valid_set,
                                                  const TrainerConfig& cfg);

}  // namespace dmn
