#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "json.hpp"

#include "dmn/errors.hpp"
#include "dmn/oracle.hpp"

namespace dmn {

double PixelMicrostructure::vf1() const {
  if (phases.empty()) return 0;
  std::size_t n1 = 0;
  for (auto p : phases)
    if (p == 0) ++n1;
  return double(n1) / double(phases.size());
}

PixelMicrostructure stripes_micro(int n, double vf1) {
  PixelMicrostructure m;
  m.n = n;
  m.label = "stripes";
  m.phases.assign(std::size_t(n) * n, 1);
  const int cut = int(std::lround(vf1 * n));
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < cut; ++ix) m.phases[std::size_t(iy) * n + ix] = 0;
  return m;
}

PixelMicrostructure checkerboard_micro(int n, int period) {
  PixelMicrostructure m;
  m.n = n;
  m.label = "checkerboard";
  m.phases.assign(std::size_t(n) * n, 0);
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix)
      if (((ix / period) + (iy / period)) % 2 == 1) m.phases[std::size_t(iy) * n + ix] = 1;
  return m;
}

PixelMicrostructure inclusion_micro(int n, double vf2) {
  PixelMicrostructure m;
  m.n = n;
  m.label = "inclusion";
  m.phases.assign(std::size_t(n) * n, 0);
  const double r2 = vf2 * n * n / M_PI;  // pi r^2 = vf2 n^2
  const double cx = 0.5 * (n - 1), cy = 0.5 * (n - 1);
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const double dx = ix - cx, dy = iy - cy;
      if (dx * dx + dy * dy <= r2) m.phases[std::size_t(iy) * n + ix] = 1;
    }
  return m;
}

PixelMicrostructure blob_micro(int n, double vf1, std::uint64_t seed) {
  PixelMicrostructure m;
  m.n = n;
  m.label = "blobs";
  const std::size_t np = std::size_t(n) * n;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> field(np);
  for (auto& v : field) v = u(rng);

  // A few periodic box blurs smooth the noise into connected blobs.
  std::vector<double> tmp(np);
  for (int pass = 0; pass < 4; ++pass) {
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix) {
        double s = 0;
        for (int dy = -2; dy <= 2; ++dy)
          for (int dx = -2; dx <= 2; ++dx) {
            const int jx = (ix + dx + n) % n, jy = (iy + dy + n) % n;
            s += field[std::size_t(jy) * n + jx];
          }
        tmp[std::size_t(iy) * n + ix] = s / 25.0;
      }
    field.swap(tmp);
  }

  // Threshold at the requested volume fraction.
  std::vector<double> sorted = field;
  std::size_t cut = std::size_t(std::lround(vf1 * double(np)));
  cut = std::min(cut, np);
  std::nth_element(sorted.begin(), sorted.begin() + std::ptrdiff_t(cut), sorted.end());
  const double thr = (cut < np) ? sorted[cut] : std::numeric_limits<double>::infinity();

  m.phases.assign(np, 1);
  for (std::size_t p = 0; p < np; ++p)
    if (field[p] < thr) m.phases[p] = 0;
  return m;
}

std::string micro_to_json(const PixelMicrostructure& m) {
  nlohmann::json j;
  j["n"] = m.n;
  j["label"] = m.label;
  j["phases"] = m.phases;
  return j.dump();
}

PixelMicrostructure micro_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad microstructure json: ") + e.what());
  }
  if (!j.is_object() || !j.contains("n") || !j.contains("phases"))
    throw FormatError("microstructure json missing n or phases");
  PixelMicrostructure m;
  m.n = j["n"].get<int>();
  if (m.n <= 0) throw FormatError("microstructure grid side must be positive");
  m.phases = j["phases"].get<std::vector<std::uint8_t>>();
  if (m.phases.size() != std::size_t(m.n) * m.n)
    throw FormatError("microstructure phase count does not match grid");
  for (auto p : m.phases)
    if (p > 1) throw FormatError("microstructure phases must be 0 or 1");
  m.label = j.value("label", std::string{});
  return m;
}

void save_micro(const PixelMicrostructure& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << micro_to_json(m) << "\n";
  if (!out) throw Error("write failed for " + path);
}

PixelMicrostructure load_micro(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return micro_from_json(text);
}

}  // namespace dmn
