// Nested-rectangle rendering of leaf weights: one rectangle per active
// leaf, area proportional to weight, tagged by phase. Split orientation
// alternates per layer.
#pragma once

#include <string>
#include <vector>

#include "dmn/network.hpp"

namespace dmn {

struct TreemapRect {
  double x = 0, y = 0, w = 0, h = 0;  // unit square coordinates
  int leaf = 0;
  int phase = 0;
  double weight_fraction = 0;
};

struct Treemap {
  std::vector<TreemapRect> rects;
};

// Throws DeadNetwork when no leaf is active.
Treemap to_treemap(const MaterialNetwork& net);

std::string treemap_json(const Treemap& tm);
std::string treemap_svg(const Treemap& tm, double size = 512);

}  // namespace dmn
