#include "doctest.h"

#include "dmn/errors.hpp"
#include "dmn/treemap.hpp"

using namespace dmn;

TEST_CASE("treemap rectangles tile the unit square by weight") {
  MaterialNetwork net = init_random(4, 13);
  const Treemap tm = to_treemap(net);
  CHECK(tm.rects.size() == 16);

  double area = 0, wsum = 0;
  const WeightTree w = propagate_weights(net);
  for (const auto& r : tm.rects) {
    CHECK(r.w > 0);
    CHECK(r.h > 0);
    CHECK(r.x >= -1e-12);
    CHECK(r.y >= -1e-12);
    CHECK(r.x + r.w <= 1 + 1e-12);
    CHECK(r.y + r.h <= 1 + 1e-12);
    area += r.w * r.h;
    wsum += r.weight_fraction;
    CHECK(r.w * r.h == doctest::Approx(std::max(net.z[r.leaf], 0.0) / w[0][0]));
    CHECK(r.phase == net.phase_of_leaf[r.leaf]);
  }
  CHECK(area == doctest::Approx(1.0));
  CHECK(wsum == doctest::Approx(1.0));
}

TEST_CASE("single active leaf fills the square") {
  MaterialNetwork net = init_random(3, 14);
  for (int j = 1; j < net.n_leaves(); ++j) net.z[j] = -0.5;
  const Treemap tm = to_treemap(net);
  REQUIRE(tm.rects.size() == 1);
  CHECK(tm.rects[0].w * tm.rects[0].h == doctest::Approx(1.0));
  CHECK(tm.rects[0].leaf == 0);
}

TEST_CASE("dead network cannot be rendered") {
  MaterialNetwork net = init_random(2, 15);
  for (auto& z : net.z) z = -1;
  CHECK_THROWS_AS(to_treemap(net), DeadNetwork);
}

TEST_CASE("exports are well formed") {
  MaterialNetwork net = init_random(3, 16);
  const Treemap tm = to_treemap(net);
  const std::string j = treemap_json(tm);
  CHECK(j.find("\"rects\"") != std::string::npos);
  const std::string svg = treemap_svg(tm);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
}
