#include "dmn/sampling.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "dmn/errors.hpp"
#include "json.hpp"

namespace dmn {

Mat3 PhaseProperties::compliance() const {
  return Mat3::sym(1.0 / E11, -nu12 / E22, 0, 1.0 / E22, 0, 1.0 / (2.0 * G12));
}

namespace {

double lerp(double lo, double hi, double u) { return lo + (hi - lo) * u; }

PhaseProperties phase_from(double log_product, double log_ratio, double ug, double unu) {
  PhaseProperties p;
  p.E11 = std::pow(10.0, 0.5 * (log_product - log_ratio));
  p.E22 = std::pow(10.0, 0.5 * (log_product + log_ratio));
  p.G12 = lerp(0.25, 0.5, ug) * std::sqrt(p.E11 * p.E22);
  p.nu12 = lerp(0.3, 0.7, unu) * std::sqrt(p.E22 / p.E11);
  return p;
}

}  // namespace

std::pair<PhaseProperties, PhaseProperties> sample_phase_pair(const std::array<double, 7>& u) {
  const PhaseProperties p1 = phase_from(0.0, lerp(-1, 1, u[0]), u[1], u[2]);
  const PhaseProperties p2 = phase_from(lerp(-4, 4, u[3]), lerp(-1, 1, u[4]), u[5], u[6]);
  return {p1, p2};
}

std::vector<std::vector<double>> latin_hypercube(int n_samples, int dims, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  std::vector<std::vector<double>> pts(n_samples, std::vector<double>(dims));
  std::vector<int> perm(n_samples);
  for (int d = 0; d < dims; ++d) {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (int s = 0; s < n_samples; ++s)
      pts[s][d] = (perm[s] + u01(rng)) / n_samples;
  }
  return pts;
}

namespace {

Dataset make_dataset(const HomogenizationOracle& oracle, int n, std::uint64_t seed) {
  Dataset ds;
  ds.seed = seed;
  const auto pts = latin_hypercube(n, 7, seed);
  ds.samples.reserve(n);
  for (int s = 0; s < n; ++s) {
    std::array<double, 7> u;
    std::copy_n(pts[s].begin(), 7, u.begin());
    const auto [p1, p2] = sample_phase_pair(u);
    TrainingSample ts;
    ts.dp1 = p1.compliance();
    ts.dp2 = p2.compliance();
    try {
      ts.ddns = oracle(ts.dp1, ts.dp2);
    } catch (const Error& e) {
      throw OracleFailure("oracle failed at sample " + std::to_string(s) + ": " + e.what());
    }
    ds.samples.push_back(ts);
  }
  return ds;
}

}  // namespace

std::pair<Dataset, Dataset> build_dataset(const HomogenizationOracle& oracle, int n_train,
                                          int n_valid, std::uint64_t seed) {
  // Disjoint substreams for the two sets.
  Dataset train = make_dataset(oracle, n_train, seed);
  Dataset valid = make_dataset(oracle, n_valid, seed ^ 0x9e3779b97f4a7c15ull);
  return {std::move(train), std::move(valid)};
}

Mat3 isotropic_compliance(double e, double nu) {
  PhaseProperties p;
  p.E11 = p.E22 = e;
  p.nu12 = nu;
  p.G12 = e / (2.0 * (1.0 + nu));
  return p.compliance();
}

Dataset testing_dataset_high_contrast(int n, std::uint64_t seed) {
  Dataset ds;
  ds.seed = seed;
  ds.oracle = "none";
  const auto pts = latin_hypercube(n, 3, seed);
  ds.samples.reserve(n);
  for (int s = 0; s < n; ++s) {
    TrainingSample ts;
    ts.dp1 = isotropic_compliance(1.0, lerp(0.005, 0.495, pts[s][0]));
    ts.dp2 = isotropic_compliance(std::pow(10.0, lerp(-3, 3, pts[s][1])),
                                  lerp(0.005, 0.495, pts[s][2]));
    ds.samples.push_back(ts);
  }
  return ds;
}

namespace {

nlohmann::json mat_to_json(const Mat3& d) {
  return {d(0, 0), d(0, 1), d(0, 2), d(1, 1), d(1, 2), d(2, 2)};
}

Mat3 mat_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 6) throw FormatError("expected 6-entry matrix array");
  return Mat3::sym(j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
                   j[3].get<double>(), j[4].get<double>(), j[5].get<double>());
}

}  // namespace

std::string dataset_to_jsonl(const Dataset& ds) {
  std::ostringstream out;
  out << nlohmann::json{{"oracle", ds.oracle},
                        {"microstructure", ds.microstructure},
                        {"seed", ds.seed},
                        {"count", ds.samples.size()}}
             .dump()
      << "\n";
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const auto& s = ds.samples[i];
    out << nlohmann::json{{"id", i},
                          {"Dp1", mat_to_json(s.dp1)},
                          {"Dp2", mat_to_json(s.dp2)},
                          {"Ddns", mat_to_json(s.ddns)}}
               .dump()
        << "\n";
  }
  return out.str();
}

Dataset dataset_from_jsonl(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty dataset file");

  Dataset ds;
  try {
    const auto header = nlohmann::json::parse(line);
    ds.oracle = header.at("oracle").get<std::string>();
    ds.microstructure = header.at("microstructure").get<std::string>();
    ds.seed = header.at("seed").get<std::uint64_t>();
    const std::size_t count = header.at("count").get<std::size_t>();

    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      TrainingSample s;
      s.dp1 = mat_from_json(j.at("Dp1"));
      s.dp2 = mat_from_json(j.at("Dp2"));
      s.ddns = mat_from_json(j.at("Ddns"));
      ds.samples.push_back(s);
    }
    if (ds.samples.size() != count)
      throw FormatError("dataset sample count mismatch: header says " + std::to_string(count) +
                        ", found " + std::to_string(ds.samples.size()));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("dataset parse failure: ") + e.what());
  }
  return ds;
}

void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << dataset_to_jsonl(ds);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return dataset_from_jsonl(text);
}

}  // namespace dmn
