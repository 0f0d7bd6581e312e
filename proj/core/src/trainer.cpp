#include "dmn/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

#include "dmn/compression.hpp"
#include "dmn/errors.hpp"
#include "json.hpp"

namespace dmn {

GradientVector GradientVector::zeros_like(const MaterialNetwork& net) {
  GradientVector g;
  g.z.assign(net.n_leaves(), 0.0);
  g.theta.resize(net.depth + 1);
  for (int i = 0; i <= net.depth; ++i) g.theta[i].assign(std::size_t{1} << i, 0.0);
  return g;
}

void GradientVector::add_scaled(const GradientVector& o, double s) {
  for (std::size_t j = 0; j < z.size(); ++j) z[j] += s * o.z[j];
  for (std::size_t i = 0; i < theta.size(); ++i)
    for (std::size_t k = 0; k < theta[i].size(); ++k) theta[i][k] += s * o.theta[i][k];
}

double regularizer_target(int depth) { return std::pow(2.0, depth - 2); }

namespace {

double inner(const Mat3& a, const Mat3& b) {
  double s = 0;
  for (int i = 0; i < 9; ++i) s += a.m[i] * b.m[i];
  return s;
}

double relu_sum(const MaterialNetwork& net) {
  double s = 0;
  for (double v : net.z) s += std::max(v, 0.0);
  return s;
}

double data_cost_half(const MaterialNetwork& net, const TrainingSample& s) {
  const Mat3 d0 = forward_elastic(net, s.dp1, s.dp2);
  const double tn = frobenius_norm(s.ddns);
  const double en = frobenius_norm(d0 - s.ddns);
  return 0.5 * en * en / (tn * tn);
}

struct BackpropSweep {
  const MaterialNetwork& net;
  const ForwardCache& cache;
  GradientVector& grad;

  void down(int layer, std::size_t k, const Mat3& g, double s_acc) {
    const int n = net.depth;
    const double theta = net.theta[layer][k];
    const Mat3& a = cache.pre_rotation[layer][k];

    // Rotation-angle gradient from D = R(-t) a R(t).
    const Mat3 rn = rotation_matrix(-theta);
    const Mat3 rp = rotation_matrix(theta);
    const Mat3 rpn = rotation_matrix_derivative(-theta);
    const Mat3 rpp = rotation_matrix_derivative(theta);
    grad.theta[layer][k] += inner(g, (rn * a * rpp) - (rpn * a * rp));

    if (layer == n) {
      grad.z[k] += (net.z[k] > 0) ? s_acc : 0.0;
      return;
    }

    // Adjoint in the un-rotated frame: <G, R(-t) dA R(t)> = <R(t) G R(-t), dA>.
    const Mat3 ga = rp * g * rn;

    const double w1 = cache.weights[layer + 1][2 * k];
    const double w2 = cache.weights[layer + 1][2 * k + 1];
    if (w2 == 0) {
      down(layer + 1, 2 * k, ga, s_acc);
      return;
    }
    if (w1 == 0) {
      down(layer + 1, 2 * k + 1, ga, s_acc);
      return;
    }

    BlockInputsSmall in;
    in.d1 = cache.post_rotation[layer + 1][2 * k];
    in.d2 = cache.post_rotation[layer + 1][2 * k + 1];
    in.f1 = cache.f1[layer][k];
    in.theta = theta;
    const BlockGradients bg = block_gradients(in);

    const double gf = inner(ga, bg.dDr_df1);
    const double wp = cache.weights[layer][k];

    Mat3 gc1 = Mat3::zero(), gc2 = Mat3::zero();
    static constexpr int row[6] = {0, 0, 0, 1, 1, 2};
    static constexpr int col[6] = {0, 1, 2, 1, 2, 2};
    for (int m = 0; m < 6; ++m) {
      const double g1 = inner(ga, bg.dDr_dD1[m]);
      const double g2 = inner(ga, bg.dDr_dD2[m]);
      const double h = (row[m] == col[m]) ? 1.0 : 0.5;
      gc1(row[m], col[m]) += h * g1;
      gc1(col[m], row[m]) = gc1(row[m], col[m]);
      gc2(row[m], col[m]) += h * g2;
      gc2(col[m], row[m]) = gc2(row[m], col[m]);
    }

    down(layer + 1, 2 * k, gc1, s_acc + gf * (1.0 - in.f1) / wp);
    down(layer + 1, 2 * k + 1, gc2, s_acc - gf * in.f1 / wp);
  }
};

}  // namespace

double cost(const MaterialNetwork& net, const std::vector<TrainingSample>& batch,
            double lambda, double xi) {
  double c = 0;
  for (const auto& s : batch) c += data_cost_half(net, s);
  c /= batch.size();
  const double excess = relu_sum(net) - xi;
  return c + lambda * excess * excess;
}

double sample_error(const MaterialNetwork& net, const TrainingSample& s) {
  const Mat3 d0 = forward_elastic(net, s.dp1, s.dp2);
  return frobenius_norm(d0 - s.ddns) / frobenius_norm(s.ddns);
}

double mean_error(const MaterialNetwork& net, const std::vector<TrainingSample>& set) {
  double e = 0;
  for (const auto& s : set) e += sample_error(net, s);
  return e / set.size();
}

GradientVector backprop(const MaterialNetwork& net, const TrainingSample& sample) {
  ForwardCache cache;
  const Mat3 d0 = forward_elastic(net, sample.dp1, sample.dp2, cache);
  const double tn = frobenius_norm(sample.ddns);
  const Mat3 g = (d0 - sample.ddns) * (1.0 / (tn * tn));

  GradientVector grad = GradientVector::zeros_like(net);
  BackpropSweep sweep{net, cache, grad};
  sweep.down(0, 0, g, 0.0);
  return grad;
}

namespace {

// Mean of per-sample gradients plus the regularizer term; per-sample
// slots are summed in index order so the result does not depend on the
// thread count.
GradientVector batch_gradient(const MaterialNetwork& net, const std::vector<TrainingSample>& train,
                              const std::vector<std::size_t>& idx, std::size_t begin,
                              std::size_t end, double lambda, double xi, int threads) {
  const std::size_t m = end - begin;
  std::vector<GradientVector> slots(m);
  if (threads > 1 && m > 1) {
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t j; (j = next.fetch_add(1)) < m;)
          slots[j] = backprop(net, train[idx[begin + j]]);
      });
    for (auto& th : pool) th.join();
  } else {
    for (std::size_t j = 0; j < m; ++j) slots[j] = backprop(net, train[idx[begin + j]]);
  }

  GradientVector g = GradientVector::zeros_like(net);
  for (std::size_t j = 0; j < m; ++j) g.add_scaled(slots[j], 1.0 / m);

  const double excess = relu_sum(net) - xi;
  for (std::size_t j = 0; j < net.z.size(); ++j)
    if (net.z[j] > 0) g.z[j] += 2.0 * lambda * excess;
  return g;
}

}  // namespace

double sgd_epoch(MaterialNetwork& net, const std::vector<TrainingSample>& train,
                 const TrainerConfig& cfg, SgdState& state) {
  std::vector<std::size_t> idx(train.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), state.rng);

  const std::size_t m = std::min<std::size_t>(cfg.batch_size, train.size());
  double cost_sum = 0;
  std::size_t n_batches = 0;
  for (std::size_t begin = 0; begin + m <= train.size(); begin += m) {
    const GradientVector g =
        batch_gradient(net, train, idx, begin, begin + m, state.lambda, state.xi, cfg.threads);
    for (std::size_t j = 0; j < net.z.size(); ++j) net.z[j] -= state.eta * g.z[j];
    for (std::size_t i = 0; i < net.theta.size(); ++i)
      for (std::size_t k = 0; k < net.theta[i].size(); ++k)
        net.theta[i][k] -= state.eta * g.theta[i][k];
    propagate_weights(net);  // throws DeadNetwork if everything deactivated

    std::vector<TrainingSample> batch;
    batch.reserve(m);
    for (std::size_t j = begin; j < begin + m; ++j) batch.push_back(train[idx[j]]);
    cost_sum += cost(net, batch, state.lambda, state.xi);
    ++n_batches;
  }
  return cost_sum / n_batches;
}

double bold_driver_update(double eta, double cost_now, double cost_prev, double growth,
                          double decay) {
  return (cost_now <= cost_prev) ? eta * growth : eta * decay;
}

std::pair<MaterialNetwork, TrainingHistory> train(MaterialNetwork net,
                                                  const std::vector<TrainingSample>& train_set,
                                                  const std::vector<TrainingSample>& valid_set,
                                                  const TrainerConfig& cfg) {
  SgdState state;
  state.eta = cfg.eta0;
  state.xi = regularizer_target(net.depth);
  state.rng.seed(cfg.seed ^ 0xd1b54a32d192ed03ull);

  if (cfg.lambda >= 0) {
    state.lambda = cfg.lambda;
  } else {
    // Auto-scale: regularizer ~1% of the initial data cost on a pilot batch.
    const std::size_t m = std::min<std::size_t>(cfg.batch_size, train_set.size());
    const std::vector<TrainingSample> pilot(train_set.begin(), train_set.begin() + m);
    const double c0 = cost(net, pilot, 0.0, state.xi);
    const double excess = relu_sum(net) - state.xi;
    state.lambda = (excess * excess > 1e-12) ? 0.01 * c0 / (excess * excess) : 0.01 * c0;
  }

  TrainingHistory hist;
  MaterialNetwork best = net;
  for (long epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double c = sgd_epoch(net, train_set, cfg, state);
    if (state.prev_cost >= 0)
      state.eta = bold_driver_update(state.eta, c, state.prev_cost, cfg.growth, cfg.decay);
    // Minibatch costs fluctuate around any plateau, so roughly every other
    // epoch decays eta; without a floor it vanishes and training freezes.
    const double floor = cfg.eta_min >= 0 ? cfg.eta_min : cfg.eta0 * 1e-2;
    state.eta = std::max(state.eta, floor);
    state.prev_cost = c;

    if (cfg.compression_period > 0 && (epoch + 1) % cfg.compression_period == 0) {
      reorder(net);
      delete_pass_through(net);
      merge_similar_subtrees(net, cfg.merge_tol_f, cfg.merge_tol_theta);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_error = mean_error(net, train_set);
    rec.valid_error = valid_set.empty() ? -1.0 : mean_error(net, valid_set);
    rec.cost = c;
    rec.eta = state.eta;
    rec.n_active = count_active(net);
    hist.records.push_back(rec);

    const double score = valid_set.empty() ? rec.train_error : rec.valid_error;
    if (hist.best_epoch < 0 || score < hist.best_valid_error) {
      hist.best_epoch = epoch;
      hist.best_valid_error = score;
      best = net;
      best.history.epochs = epoch + 1;
      best.history.final_training_error = rec.train_error;
      best.history.final_validation_error = rec.valid_error;
    }

    if (cfg.early_stop && epoch - hist.best_epoch > cfg.early_stop_patience) break;
  }
  return {std::move(best), std::move(hist)};
}

std::string TrainingHistory::to_csv() const {
  std::ostringstream out;
  out << "epoch,train_err,valid_err,eta,n_active\n";
  out.precision(12);
  for (const auto& r : records)
    out << r.epoch << "," << r.train_error << "," << r.valid_error << "," << r.eta << ","
        << r.n_active << "\n";
  return out.str();
}

std::string TrainingHistory::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : records)
    arr.push_back({{"epoch", r.epoch},
                   {"train_err", r.train_error},
                   {"valid_err", r.valid_error},
                   {"cost", r.cost},
                   {"eta", r.eta},
                   {"n_active", r.n_active}});
  return nlohmann::json{{"best_epoch", best_epoch},
                        {"best_valid_error", best_valid_error},
                        {"records", arr}}
      .dump(2);
}

}  // namespace dmn
