#include "doctest.h"

#include <filesystem>
#include <random>
#include <set>

#include "dmn/errors.hpp"
#include "dmn/oracle.hpp"
#include "dmn/sampling.hpp"
#include "test_helpers.hpp"

using namespace dmn;
using namespace dmn::testing;

TEST_CASE("hypercube center gives the midpoint properties") {
  std::array<double, 7> u;
  u.fill(0.5);
  const auto [p1, p2] = sample_phase_pair(u);
  CHECK(p1.E11 == doctest::Approx(1.0));
  CHECK(p1.E22 == doctest::Approx(1.0));
  CHECK(p1.G12 == doctest::Approx(0.375));
  CHECK(p1.nu12 == doctest::Approx(0.5));
  CHECK(p2.E11 * p2.E22 == doctest::Approx(1.0));  // log-product midpoint is 0
}

TEST_CASE("sampled phase pairs are always SPD and in range") {
  std::mt19937_64 rng(61);
  double max_prod = 0, min_prod = 1e18;
  for (int i = 0; i < 10000; ++i) {
    std::array<double, 7> u;
    for (auto& x : u) x = urand(rng, 0, 1);
    const auto [p1, p2] = sample_phase_pair(u);
    CHECK(is_spd(p1.compliance()));
    CHECK(is_spd(p2.compliance()));
    CHECK(p1.E11 * p1.E22 == doctest::Approx(1.0));
    const double prod = p2.E11 * p2.E22;
    max_prod = std::max(max_prod, prod);
    min_prod = std::min(min_prod, prod);
  }
  CHECK(max_prod > 1e3);   // spans toward 1e4
  CHECK(min_prod < 1e-3);  // spans toward 1e-4
}

TEST_CASE("latin hypercube covers every stratum once") {
  const auto pts = latin_hypercube(8, 3, 17);
  REQUIRE(pts.size() == 8);
  for (int d = 0; d < 3; ++d) {
    std::set<int> strata;
    for (const auto& p : pts) {
      CHECK(p[d] >= 0.0);
      CHECK(p[d] < 1.0);
      strata.insert(int(p[d] * 8));
    }
    CHECK(strata.size() == 8);
  }
  CHECK(latin_hypercube(8, 3, 17) == pts);       // deterministic
  CHECK(latin_hypercube(8, 3, 18) != pts);       // seed-sensitive
}

TEST_CASE("build_dataset queries the oracle and keeps sizes") {
  const auto [train, valid] = build_dataset(
      [](const Mat3& d1, const Mat3& d2) { return laminate_exact(d1, d2, 0.4, 0.3); }, 12, 5,
      99);
  CHECK(train.samples.size() == 12);
  CHECK(valid.samples.size() == 5);
  for (const auto& s : train.samples) {
    CHECK(is_spd(s.dp1));
    CHECK(is_spd(s.dp2));
    CHECK(is_spd(s.ddns));
  }
  // training and validation designs differ
  CHECK(rel_diff(train.samples[0].dp1, valid.samples[0].dp1) > 1e-6);
}

TEST_CASE("oracle failure carries the sample index") {
  int count = 0;
  try {
    build_dataset(
        [&](const Mat3&, const Mat3&) -> Mat3 {
          if (++count == 3) throw NoConvergence("boom");
          return Mat3::identity();
        },
        10, 0, 1);
    FAIL("expected OracleFailure");
  } catch (const OracleFailure& e) {
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
}

TEST_CASE("identical phases make the target equal the phase compliance") {
  const Mat3 d = isotropic_compliance(3.0, 0.2);
  const Mat3 t = laminate_exact(d, d, 0.5, 0.7);
  CHECK(rel_diff(t, d) < 1e-12);
}

TEST_CASE("high-contrast testing set spans the documented ranges") {
  const Dataset ds = testing_dataset_high_contrast(200, 7);
  CHECK(ds.samples.size() == 200);
  double emax = 0, emin = 1e18;
  for (const auto& s : ds.samples) {
    CHECK(is_spd(s.dp1));
    CHECK(is_spd(s.dp2));
    const double e2 = 1.0 / s.dp2(0, 0);  // for nu ~ 0 this approaches E2
    emax = std::max(emax, e2);
    emin = std::min(emin, e2);
  }
  CHECK(emax > 1e1);
  CHECK(emin < 1e-1);
}

TEST_CASE("dataset JSONL round trip") {
  auto [ds, unused] = build_dataset(
      [](const Mat3& d1, const Mat3& d2) { return laminate_exact(d1, d2, 0.5, 0.0); }, 6, 1,
      123);
  ds.oracle = "laminate";
  ds.microstructure = "laminate";
  const std::string text = dataset_to_jsonl(ds);
  const Dataset back = dataset_from_jsonl(text);
  REQUIRE(back.samples.size() == ds.samples.size());
  CHECK(back.oracle == "laminate");
  CHECK(back.seed == ds.seed);
  for (std::size_t i = 0; i < ds.samples.size(); ++i)
    CHECK(rel_diff(back.samples[i].ddns, ds.samples[i].ddns) == 0.0);  // lossless doubles
  CHECK(dataset_to_jsonl(back) == text);

  const std::string path =
      (std::filesystem::temp_directory_path() / "dmn_ds_test.jsonl").string();
  save_dataset(ds, path);
  CHECK(dataset_to_jsonl(load_dataset(path)) == text);
  std::filesystem::remove(path);
}

TEST_CASE("malformed dataset text is rejected") {
  CHECK_THROWS_AS(dataset_from_jsonl(""), FormatError);
  CHECK_THROWS_AS(dataset_from_jsonl("{\"oracle\":\"x\"}\nnot json\n"), FormatError);
}
