#include "geoprog/primitives/distance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace geoprog {

namespace {

constexpr double kFar = 1e20;

// Lower envelope of parabolas: 1-D squared distance transform of `f` (n samples).
void squared_edt_1d(const double* f, double* d, std::size_t n, std::vector<std::size_t>& v,
                    std::vector<double>& z) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  v.assign(n, 0);
  z.assign(n + 1, 0.0);
  auto intersect = [&](std::size_t q, std::size_t p) {
    const double dq = static_cast<double>(q), dp = static_cast<double>(p);
    return ((f[q] + dq * dq) - (f[p] + dp * dp)) / (2.0 * dq - 2.0 * dp);
  };
  std::size_t k = 0;
  z[0] = -inf;
  z[1] = inf;
  for (std::size_t q = 1; q < n; ++q) {
    double s = intersect(q, v[k]);
    while (s <= z[k]) {
      --k;
      s = intersect(q, v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = inf;
  }
  k = 0;
  for (std::size_t q = 0; q < n; ++q) {
    while (z[k + 1] < static_cast<double>(q)) ++k;
    const double dq = static_cast<double>(q) - static_cast<double>(v[k]);
    d[q] = dq * dq + f[v[k]];
  }
}

Grid euclidean(const Mask& mask) {
  const std::size_t w = mask.width, h = mask.height;
  Grid g(w, h);
  for (std::size_t i = 0; i < mask.size(); ++i) g.cells[i] = mask.cells[i] ? 0.0 : kFar;

  std::vector<std::size_t> v;
  std::vector<double> z;
  std::vector<double> in(std::max(w, h)), out(std::max(w, h));
  for (std::size_t x = 0; x < w; ++x) {
    for (std::size_t y = 0; y < h; ++y) in[y] = g.at(x, y);
    squared_edt_1d(in.data(), out.data(), h, v, z);
    for (std::size_t y = 0; y < h; ++y) g.at(x, y) = out[y];
  }
  for (std::size_t y = 0; y < h; ++y) {
    squared_edt_1d(&g.cells[y * w], out.data(), w, v, z);
    for (std::size_t x = 0; x < w; ++x) g.at(x, y) = std::sqrt(out[x]);
  }
  return g;
}

Grid chebyshev(const Mask& mask) {
  const std::size_t w = mask.width, h = mask.height;
  Grid g(w, h);
  for (std::size_t i = 0; i < mask.size(); ++i) g.cells[i] = mask.cells[i] ? 0.0 : kFar;
  auto relax = [&](std::size_t x, std::size_t y, long dx, long dy) {
    const long nx = static_cast<long>(x) + dx, ny = static_cast<long>(y) + dy;
    if (nx < 0 || ny < 0 || nx >= static_cast<long>(w) || ny >= static_cast<long>(h)) return;
    g.at(x, y) = std::min(g.at(x, y), g.at(static_cast<std::size_t>(nx), static_cast<std::size_t>(ny)) + 1.0);
  };
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      relax(x, y, -1, 0);
      relax(x, y, -1, -1);
      relax(x, y, 0, -1);
      relax(x, y, 1, -1);
    }
  for (std::size_t y = h; y-- > 0;)
    for (std::size_t x = w; x-- > 0;) {
      relax(x, y, 1, 0);
      relax(x, y, 1, 1);
      relax(x, y, 0, 1);
      relax(x, y, -1, 1);
    }
  return g;
}

}  // namespace

Grid distance_transform(const Mask& mask, DistanceMetric metric) {
  const bool any = std::any_of(mask.cells.begin(), mask.cells.end(), [](auto c) { return c != 0; });
  if (!any) return Grid(mask.width, mask.height, static_cast<double>(mask.width + mask.height));
  return metric == DistanceMetric::Euclidean ? euclidean(mask) : chebyshev(mask);
}

}  // namespace geoprog
