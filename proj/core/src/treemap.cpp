#include "dmn/treemap.hpp"

#include "json.hpp"

namespace dmn {

namespace {

void subdivide(const MaterialNetwork& net, const WeightTree& w, Treemap& tm, int layer,
               std::size_t k, double x, double y, double width, double height) {
  const double wk = w[layer][k];
  if (wk <= 0) return;
  if (layer == net.depth) {
    tm.rects.push_back({x, y, width, height, int(k), net.phase_of_leaf[k], wk / w[0][0]});
    return;
  }
  const double frac = w[layer + 1][2 * k] / wk;
  if (layer % 2 == 0) {
    subdivide(net, w, tm, layer + 1, 2 * k, x, y, width * frac, height);
    subdivide(net, w, tm, layer + 1, 2 * k + 1, x + width * frac, y, width * (1 - frac), height);
  } else {
    subdivide(net, w, tm, layer + 1, 2 * k, x, y, width, height * frac);
    subdivide(net, w, tm, layer + 1, 2 * k + 1, x, y + height * frac, width, height * (1 - frac));
  }
}

}  // namespace

Treemap to_treemap(const MaterialNetwork& net) {
  const WeightTree w = propagate_weights(net);
  Treemap tm;
  subdivide(net, w, tm, 0, 0, 0, 0, 1, 1);
  return tm;
}

std::string treemap_json(const Treemap& tm) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : tm.rects)
    arr.push_back({{"x", r.x}, {"y", r.y}, {"w", r.w}, {"h", r.h},
                   {"leaf", r.leaf}, {"phase", r.phase},
                   {"weight_fraction", r.weight_fraction}});
  return nlohmann::json{{"rects", arr}}.dump(2);
}

std::string treemap_svg(const Treemap& tm, double size) {
  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(int(size)) +
       "\" height=\"" + std::to_string(int(size)) + "\" viewBox=\"0 0 " +
       std::to_string(int(size)) + " " + std::to_string(int(size)) + "\">\n";
  for (const auto& r : tm.rects) {
    const char* fill = (r.phase == 1) ? "#3465a4" : "#cc6600";
    s += "  <rect x=\"" + std::to_string(r.x * size) + "\" y=\"" + std::to_string(r.y * size) +
         "\" width=\"" + std::to_string(r.w * size) + "\" height=\"" + std::to_string(r.h * size) +
         "\" fill=\"" + fill + "\" stroke=\"white\" stroke-width=\"1\"/>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace dmn
