#include "dmn/network.hpp"

#include <fstream>
#include <random>

#include "dmn/errors.hpp"
#include "json.hpp"

namespace dmn {

MaterialNetwork init_random(int depth, std::uint64_t seed) {
  if (depth < 1) throw Error("network depth must be >= 1");
  MaterialNetwork net;
  net.depth = depth;
  net.seed = seed;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uz(0.2, 0.8);
  std::uniform_real_distribution<double> ut(-M_PI / 2, M_PI / 2);

  const int leaves = net.n_leaves();
  net.z.resize(leaves);
  for (double& v : net.z) v = uz(rng);

  net.theta.resize(depth + 1);
  for (int i = 0; i <= depth; ++i) {
    net.theta[i].resize(std::size_t{1} << i);
    for (double& v : net.theta[i]) v = ut(rng);
  }

  net.phase_of_leaf.resize(leaves);
  for (int j = 0; j < leaves; ++j) net.phase_of_leaf[j] = (j % 2 == 0) ? 1 : 2;
  return net;
}

WeightTree propagate_weights_unchecked(const MaterialNetwork& net) {
  const int n = net.depth;
  WeightTree w(n + 1);
  for (int i = 0; i <= n; ++i) w[i].resize(std::size_t{1} << i);
  for (int j = 0; j < net.n_leaves(); ++j) w[n][j] = std::max(net.z[j], 0.0);
  for (int i = n - 1; i >= 0; --i)
    for (std::size_t k = 0; k < w[i].size(); ++k)
      w[i][k] = w[i + 1][2 * k] + w[i + 1][2 * k + 1];
  return w;
}

WeightTree propagate_weights(const MaterialNetwork& net) {
  WeightTree w = propagate_weights_unchecked(net);
  if (!(w[0][0] > 0)) throw DeadNetwork("all leaves deactivated");
  return w;
}

int count_active(const MaterialNetwork& net) {
  int n = 0;
  for (double v : net.z)
    if (v > 0) ++n;
  return n;
}

double phase_volume_fraction(const MaterialNetwork& net) {
  double w1 = 0, total = 0;
  for (int j = 0; j < net.n_leaves(); ++j) {
    const double w = std::max(net.z[j], 0.0);
    total += w;
    if (net.phase_of_leaf[j] == 1) w1 += w;
  }
  if (!(total > 0)) throw DeadNetwork("all leaves deactivated");
  return w1 / total;
}

namespace {

// Bottom-up evaluation of the subtree rooted at (layer, k). Returns the
// post-rotation compliance; dead subtrees are never entered.
Mat3 eval_node(const MaterialNetwork& net, const Mat3& dp1, const Mat3& dp2,
               ForwardCache& cache, int layer, std::size_t k) {
  const int n = net.depth;
  if (layer == n) {
    const Mat3& phase = (net.phase_of_leaf[k] == 1) ? dp1 : dp2;
    cache.pre_rotation[n][k] = phase;
    cache.post_rotation[n][k] = rotate_compliance(phase, net.theta[n][k]);
    return cache.post_rotation[n][k];
  }
  const double w1 = cache.weights[layer + 1][2 * k];
  const double w2 = cache.weights[layer + 1][2 * k + 1];
  Mat3 a;
  double f = 0;
  if (w2 == 0) {
    a = eval_node(net, dp1, dp2, cache, layer + 1, 2 * k);
    f = 1;
  } else if (w1 == 0) {
    a = eval_node(net, dp1, dp2, cache, layer + 1, 2 * k + 1);
    f = 0;
  } else {
    const Mat3 d1 = eval_node(net, dp1, dp2, cache, layer + 1, 2 * k);
    const Mat3 d2 = eval_node(net, dp1, dp2, cache, layer + 1, 2 * k + 1);
    f = w1 / (w1 + w2);
    a = homogenize_small(d1, d2, f);
  }
  cache.pre_rotation[layer][k] = a;
  cache.f1[layer][k] = f;
  cache.post_rotation[layer][k] = rotate_compliance(a, net.theta[layer][k]);
  return cache.post_rotation[layer][k];
}

}  // namespace

Mat3 forward_elastic(const MaterialNetwork& net, const Mat3& dp1, const Mat3& dp2,
                     ForwardCache& cache) {
  const int n = net.depth;
  cache.weights = propagate_weights(net);
  cache.pre_rotation.resize(n + 1);
  cache.post_rotation.resize(n + 1);
  cache.f1.resize(n);
  for (int i = 0; i <= n; ++i) {
    cache.pre_rotation[i].resize(std::size_t{1} << i);
    cache.post_rotation[i].resize(std::size_t{1} << i);
    if (i < n) cache.f1[i].assign(std::size_t{1} << i, -1.0);
  }
  return eval_node(net, dp1, dp2, cache, 0, 0);
}

Mat3 forward_elastic(const MaterialNetwork& net, const Mat3& dp1, const Mat3& dp2) {
  ForwardCache cache;
  return forward_elastic(net, dp1, dp2, cache);
}

std::string save(const MaterialNetwork& net) {
  nlohmann::json j;
  j["version"] = 1;
  j["depth"] = net.depth;
  j["seed"] = net.seed;
  j["z"] = net.z;
  j["theta"] = net.theta;
  j["phase_of_leaf"] = net.phase_of_leaf;
  j["history"] = {{"epochs", net.history.epochs},
                  {"final_training_error", net.history.final_training_error},
                  {"final_validation_error", net.history.final_validation_error}};
  return j.dump(2);
}

MaterialNetwork load(const std::string& bytes) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint parse failure: ") + e.what());
  }
  try {
    if (!j.contains("version") || j["version"].get<int>() != 1)
      throw FormatError("unsupported checkpoint version (expected 1)");
    MaterialNetwork net;
    net.depth = j.at("depth").get<int>();
    net.seed = j.at("seed").get<std::uint64_t>();
    net.z = j.at("z").get<std::vector<double>>();
    net.theta = j.at("theta").get<std::vector<std::vector<double>>>();
    net.phase_of_leaf = j.at("phase_of_leaf").get<std::vector<int>>();
    const auto& h = j.at("history");
    net.history.epochs = h.at("epochs").get<long>();
    net.history.final_training_error = h.at("final_training_error").get<double>();
    net.history.final_validation_error = h.at("final_validation_error").get<double>();

    if (net.depth < 1 || net.z.size() != std::size_t(1) << net.depth ||
        net.theta.size() != std::size_t(net.depth) + 1 ||
        net.phase_of_leaf.size() != net.z.size())
      throw FormatError("checkpoint field sizes inconsistent with depth");
    for (int i = 0; i <= net.depth; ++i)
      if (net.theta[i].size() != std::size_t{1} << i)
        throw FormatError("checkpoint theta layer size mismatch");
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint field failure: ") + e.what());
  }
}

void save_file(const MaterialNetwork& net, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << save(net);
}

MaterialNetwork load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return load(bytes);
}

}  // namespace dmn
