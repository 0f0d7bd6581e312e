// Training data generation: orthotropic phase-property sampling, Latin
// hypercube designs, dataset assembly against a homogenization oracle,
// and JSON Lines persistence.
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dmn/mandel.hpp"

namespace dmn {

struct PhaseProperties {
  double E11 = 1, E22 = 1, G12 = 0.375, nu12 = 0.5;

  Mat3 compliance() const;
};

struct TrainingSample {
  Mat3 dp1, dp2;   // phase compliances
  Mat3 ddns;       // homogenized target
};

struct Dataset {
  std::vector<TrainingSample> samples;
  std::string oracle;          // provenance
  std::string microstructure;
  std::uint64_t seed = 0;
};

// Orthotropic phase pair from a point in [0,1]^7.
//
// Phase 1: E11*E22 = 1 with log10(E22/E11) in U[-1,1] (dims 0); phase 2:
// log10(E11*E22) in U[-4,4], log10(E22/E11) in U[-1,1] (dims 3,4). Both
// phases: G12/sqrt(E11*E22) in U[0.25,0.5], nu12/sqrt(E22/E11) in
// U[0.3,0.7] (dims 1,2 and 5,6). The ranges keep both compliances
// positive definite.
std::pair<PhaseProperties, PhaseProperties> sample_phase_pair(const std::array<double, 7>& u);

// One point per stratum in each dimension, strata paired by random
// permutation.
std::vector<std::vector<double>> latin_hypercube(int n_samples, int dims, std::uint64_t seed);

using HomogenizationOracle = std::function<Mat3(const Mat3& dp1, const Mat3& dp2)>;

std::pair<Dataset, Dataset> build_dataset(const HomogenizationOracle& oracle, int n_train,
                                          int n_valid, std::uint64_t seed);

// Isotropic high-contrast test inputs: E1 = 1, log10(E2) in U[-3,3],
// both Poisson ratios in U[0.005, 0.495]. Targets left empty.
Dataset testing_dataset_high_contrast(int n, std::uint64_t seed);

// Isotropic plane compliance in the same matrix form as the orthotropic
// sampler (E11 = E22 = E, G12 = E/(2(1+nu)), nu12 = nu).
Mat3 isotropic_compliance(double e, double nu);

// JSON Lines: header {oracle, microstructure, seed, count} then one
// {id, Dp1, Dp2, Ddns} per line, 17 significant digits.
std::string dataset_to_jsonl(const Dataset& ds);
Dataset dataset_from_jsonl(const std::string& text);
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace dmn
