#ifndef POREVOX_TEST_ORACLES_HPP
#define POREVOX_TEST_ORACLES_HPP

// Independent brute-force oracles used by the unit and acceptance suites.
// Everything here is deliberately naive and shares no code path with the
// library implementations it checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <random>
#include <vector>

#include "porevox/volume.hpp"

namespace oracle {

using porevox::BinaryVolume;
using porevox::Dims;
using porevox::GrayVolume;
using porevox::voxel_index;

inline BinaryVolume random_binary(Dims d, double scale, double p, uint64_t seed) {
  BinaryVolume v = porevox::make_binary(d, scale);
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution bern(p);
  for (auto& b : v.data) b = bern(rng) ? 1 : 0;
  return v;
}

inline GrayVolume random_gray(Dims d, double scale, int levels, uint64_t seed) {
  GrayVolume v;
  v.dims = d;
  v.scale_um = scale;
  v.bit_depth = 8;
  v.data.resize((size_t)d.count());
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> u(0, levels - 1);
  for (auto& b : v.data) b = (uint16_t)u(rng);
  return v;
}

// BFS flood-fill component partition: labels[i] > 0 per pore voxel.
inline std::vector<int32_t> flood_fill_labels(const BinaryVolume& v, int connectivity,
                                              int32_t* count_out = nullptr) {
  const Dims& d = v.dims;
  std::vector<int32_t> labels((size_t)d.count(), 0);
  int32_t next = 0;
  std::deque<std::array<int64_t, 3>> queue;
  for (int64_t z0 = 0; z0 < d.nz; ++z0)
    for (int64_t y0 = 0; y0 < d.ny; ++y0)
      for (int64_t x0 = 0; x0 < d.nx; ++x0) {
        int64_t i0 = voxel_index(d, x0, y0, z0);
        if (!v.data[(size_t)i0] || labels[(size_t)i0]) continue;
        labels[(size_t)i0] = ++next;
        queue.push_back({x0, y0, z0});
        while (!queue.empty()) {
          auto [x, y, z] = queue.front();
          queue.pop_front();
          for (int dz = -1; dz <= 1; ++dz)
            for (int dy = -1; dy <= 1; ++dy)
              for (int dx = -1; dx <= 1; ++dx) {
                if (!dx && !dy && !dz) continue;
                if (connectivity == 6 && std::abs(dx) + std::abs(dy) + std::abs(dz) != 1)
                  continue;
                int64_t nx = x + dx, ny = y + dy, nz = z + dz;
                if (nx < 0 || ny < 0 || nz < 0 || nx >= d.nx || ny >= d.ny || nz >= d.nz)
                  continue;
                int64_t ni = voxel_index(d, nx, ny, nz);
                if (v.data[(size_t)ni] && !labels[(size_t)ni]) {
                  labels[(size_t)ni] = next;
                  queue.push_back({nx, ny, nz});
                }
              }
        }
      }
  if (count_out) *count_out = next;
  return labels;
}

// Exhaustive Otsu: best split {v < t} vs {v >= t} over every candidate t.
inline int exhaustive_otsu(const GrayVolume& g, int levels) {
  double best_var = -1.0;
  int best_t = -1;
  for (int t = 1; t < levels; ++t) {
    int64_t n0 = 0, n1 = 0;
    double s0 = 0, s1 = 0;
    for (uint16_t v : g.data) {
      if (v < t) {
        n0++;
        s0 += v;
      } else {
        n1++;
        s1 += v;
      }
    }
    if (!n0 || !n1) continue;
    double mu0 = s0 / (double)n0, mu1 = s1 / (double)n1;
    double var = (double)n0 * (double)n1 * (mu0 - mu1) * (mu0 - mu1);
    if (var > best_var) {
      best_var = var;
      best_t = t;
    }
  }
  return best_t;
}

// Any pore voxel within Chebyshev distance r.
inline BinaryVolume chebyshev_dilate(const BinaryVolume& v, int r) {
  const Dims& d = v.dims;
  BinaryVolume out = porevox::make_binary(d, v.scale_um);
  for (int64_t z = 0; z < d.nz; ++z)
    for (int64_t y = 0; y < d.ny; ++y)
      for (int64_t x = 0; x < d.nx; ++x) {
        uint8_t hit = 0;
        for (int64_t dz = -r; dz <= r && !hit; ++dz)
          for (int64_t dy = -r; dy <= r && !hit; ++dy)
            for (int64_t dx = -r; dx <= r && !hit; ++dx) {
              int64_t px = x + dx, py = y + dy, pz = z + dz;
              if (px < 0 || py < 0 || pz < 0 || px >= d.nx || py >= d.ny || pz >= d.nz)
                continue;
              if (v.at(px, py, pz)) hit = 1;
            }
        out.at(x, y, z) = hit;
      }
  return out;
}

// All-pairs exact EDT with the outside-is-rock convention.
inline std::vector<double> allpairs_edt(const BinaryVolume& v) {
  const Dims& d = v.dims;
  std::vector<double> out((size_t)d.count(), 0.0);
  for (int64_t z = 0; z < d.nz; ++z)
    for (int64_t y = 0; y < d.ny; ++y)
      for (int64_t x = 0; x < d.nx; ++x) {
        if (!v.at(x, y, z)) continue;
        // nearest in-domain rock
        int64_t best = std::numeric_limits<int64_t>::max();
        for (int64_t rz = 0; rz < d.nz; ++rz)
          for (int64_t ry = 0; ry < d.ny; ++ry)
            for (int64_t rx = 0; rx < d.nx; ++rx) {
              if (v.at(rx, ry, rz)) continue;
              int64_t dx = rx - x, dy = ry - y, dz = rz - z;
              best = std::min(best, dx * dx + dy * dy + dz * dz);
            }
        // virtual rock just outside each domain face
        int64_t edge = std::min({x + 1, y + 1, z + 1, d.nx - x, d.ny - y, d.nz - z});
        best = std::min(best, edge * edge);
        out[(size_t)voxel_index(d, x, y, z)] = std::sqrt((double)best);
      }
  return out;
}

// Axis-aligned S2 by direct pair enumeration.
inline double allpairs_s2(const BinaryVolume& v, int64_t r) {
  const Dims& d = v.dims;
  double acc = 0;
  int64_t hits = 0, total = 0;
  for (int64_t z = 0; z < d.nz; ++z)
    for (int64_t y = 0; y < d.ny; ++y)
      for (int64_t x = 0; x + r < d.nx; ++x) {
        hits += v.at(x, y, z) && v.at(x + r, y, z);
        total++;
      }
  acc += (double)hits / (double)total;
  hits = total = 0;
  for (int64_t z = 0; z < d.nz; ++z)
    for (int64_t y = 0; y + r < d.ny; ++y)
      for (int64_t x = 0; x < d.nx; ++x) {
        hits += v.at(x, y, z) && v.at(x, y + r, z);
        total++;
      }
  acc += (double)hits / (double)total;
  hits = total = 0;
  for (int64_t z = 0; z + r < d.nz; ++z)
    for (int64_t y = 0; y < d.ny; ++y)
      for (int64_t x = 0; x < d.nx; ++x) {
        hits += v.at(x, y, z) && v.at(x, y, z + r);
        total++;
      }
  acc += (double)hits / (double)total;
  return acc / 3.0;
}

inline int hamming27(uint32_t a, uint32_t b) {
  uint32_t x = a ^ b;
  int n = 0;
  while (x) {
    n += x & 1;
    x >>= 1;
  }
  return n;
}

}  // namespace oracle

#endif  // POREVOX_TEST_ORACLES_HPP
