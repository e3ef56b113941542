#ifndef POREVOX_OPS_HPP
#define POREVOX_OPS_HPP

// Classical voxel-grid operations: Otsu thresholding, block-mean
// downsampling, two-pass connected-component labeling, morphological
// dilation, and an exact Euclidean distance transform.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <vector>

#include "porevox/volume.hpp"

namespace porevox {

// ---------------------------------------------------------------------------
// Otsu threshold
// ---------------------------------------------------------------------------

// Threshold t maximizing between-class variance of the intensity histogram;
// the split is {v < t} vs {v >= t}. With pores_are_dark the dark class maps
// to pore (1).
inline BinaryVolume otsu_threshold(const GrayVolume& gray, bool pores_are_dark = true) {
  const int levels = gray.bit_depth == 8 ? 256 : 65536;
  std::vector<int64_t> hist((size_t)levels, 0);
  for (uint16_t v : gray.data) hist[v]++;

  int lo = 0, hi = levels - 1;
  while (lo < levels && hist[(size_t)lo] == 0) lo++;
  while (hi >= 0 && hist[(size_t)hi] == 0) hi--;
  if (lo >= hi)
    throw std::invalid_argument("otsu_threshold: constant-intensity volume");

  const int64_t total = (int64_t)gray.data.size();
  int64_t sum_all = 0;
  for (int v = lo; v <= hi; ++v) sum_all += (int64_t)v * hist[(size_t)v];

  double best_var = -1.0;
  int best_t = lo + 1;
  int64_t w0 = 0, sum0 = 0;
  for (int t = lo + 1; t <= hi; ++t) {
    w0 += hist[(size_t)(t - 1)];
    sum0 += (int64_t)(t - 1) * hist[(size_t)(t - 1)];
    int64_t w1 = total - w0;
    if (w0 == 0 || w1 == 0) continue;
    double mu0 = (double)sum0 / (double)w0;
    double mu1 = (double)(sum_all - sum0) / (double)w1;
    double var = (double)w0 * (double)w1 * (mu0 - mu1) * (mu0 - mu1);
    if (var > best_var) {
      best_var = var;
      best_t = t;
    }
  }

  BinaryVolume out;
  out.dims = gray.dims;
  out.scale_um = gray.scale_um;
  out.data.resize(gray.data.size());
  for (size_t i = 0; i < gray.data.size(); ++i) {
    bool dark = gray.data[i] < best_t;
    out.data[i] = (dark == pores_are_dark) ? 1 : 0;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Block-mean downsampling
// ---------------------------------------------------------------------------

namespace detail {
inline Dims downsampled_dims(const Dims& d, int64_t factor, const char* what) {
  if (factor < 1) throw std::invalid_argument("downsample_mean: factor < 1");
  Dims out{d.nx / factor, d.ny / factor, d.nz / factor};
  if (out.nx == 0 || out.ny == 0 || out.nz == 0)
    throw std::invalid_argument("downsample_mean: factor larger than volume");
  if (d.nx % factor || d.ny % factor || d.nz % factor)
    std::fprintf(stderr,
                 "warning: downsample_mean(%s): dims (%lld,%lld,%lld) not divisible "
                 "by %lld, dropping trailing voxels\n",
                 what, (long long)d.nx, (long long)d.ny, (long long)d.nz,
                 (long long)factor);
  return out;
}

template <typename Vol, typename Commit>
void block_means(const Vol& in, int64_t f, const Dims& od, Commit&& commit) {
  const int64_t block = f * f * f;
  for (int64_t z = 0; z < od.nz; ++z)
    for (int64_t y = 0; y < od.ny; ++y)
      for (int64_t x = 0; x < od.nx; ++x) {
        int64_t sum = 0;
        for (int64_t dz = 0; dz < f; ++dz)
          for (int64_t dy = 0; dy < f; ++dy)
            for (int64_t dx = 0; dx < f; ++dx)
              sum += in.at(x * f + dx, y * f + dy, z * f + dz);
        commit(voxel_index(od, x, y, z), sum, block);
      }
}
}  // namespace detail

// Mean over each factor^3 block; output scale = input scale * factor.
// Binary volumes threshold the block mean at 0.5 (>= 0.5 -> pore).
inline BinaryVolume downsample_mean(const BinaryVolume& in, int64_t factor) {
  Dims od = detail::downsampled_dims(in.dims, factor, "binary");
  BinaryVolume out = make_binary(od, in.scale_um * (double)factor);
  detail::block_means(in, factor, od, [&](int64_t i, int64_t sum, int64_t block) {
    out.data[(size_t)i] = (2 * sum >= block) ? 1 : 0;
  });
  return out;
}

inline GrayVolume downsample_mean(const GrayVolume& in, int64_t factor) {
  Dims od = detail::downsampled_dims(in.dims, factor, "gray");
  GrayVolume out;
  out.dims = od;
  out.scale_um = in.scale_um * (double)factor;
  out.bit_depth = in.bit_depth;
  out.data.resize((size_t)od.count());
  detail::block_means(in, factor, od, [&](int64_t i, int64_t sum, int64_t block) {
    out.data[(size_t)i] = (uint16_t)((sum + block / 2) / block);  // rounded mean
  });
  return out;
}

// ---------------------------------------------------------------------------
// Connected components, two-pass with union-find
// ---------------------------------------------------------------------------

enum class Connectivity : int { Faces6 = 6, Full26 = 26 };

namespace detail {

struct UnionFind {
  std::vector<int32_t> parent;

  int32_t make() {
    parent.push_back((int32_t)parent.size());
    return (int32_t)parent.size() - 1;
  }
  int32_t find(int32_t a) {
    while (parent[(size_t)a] != a) {
      parent[(size_t)a] = parent[(size_t)parent[(size_t)a]];
      a = parent[(size_t)a];
    }
    return a;
  }
  void unite(int32_t a, int32_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[(size_t)std::max(a, b)] = std::min(a, b);
  }
};

// Offsets to already-scanned neighbors in raster order (x fastest).
inline std::vector<std::array<int, 3>> prior_neighbors(Connectivity conn) {
  std::vector<std::array<int, 3>> out;
  for (int dz = -1; dz <= 0; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dz == 0 && (dy > 0 || (dy == 0 && dx >= 0))) continue;
        if (conn == Connectivity::Faces6 &&
            std::abs(dx) + std::abs(dy) + std::abs(dz) != 1)
          continue;
        out.push_back({dx, dy, dz});
      }
  return out;
}

}  // namespace detail

inline LabelField label_components(const BinaryVolume& vol,
                                   Connectivity conn = Connectivity::Full26) {
  const Dims& d = vol.dims;
  LabelField out;
  out.dims = d;
  out.labels.assign((size_t)d.count(), 0);

  detail::UnionFind uf;
  uf.make();  // slot 0 reserved for background
  const auto nbrs = detail::prior_neighbors(conn);

  // First pass: provisional labels plus equivalences.
  std::vector<int32_t> prov((size_t)d.count(), 0);
  for (int64_t z = 0; z < d.nz; ++z)
    for (int64_t y = 0; y < d.ny; ++y)
      for (int64_t x = 0; x < d.nx; ++x) {
        int64_t i = voxel_index(d, x, y, z);
        if (!vol.data[(size_t)i]) continue;
        int32_t label = 0;
        for (const auto& n : nbrs) {
          int64_t px = x + n[0], py = y + n[1], pz = z + n[2];
          if (px < 0 || py < 0 || pz < 0 || px >= d.nx || py >= d.ny) continue;
          int32_t pl = prov[(size_t)voxel_index(d, px, py, pz)];
          if (!pl) continue;
          if (!label)
            label = pl;
          else
            uf.unite(label, pl);
        }
        if (!label) label = uf.make();
        prov[(size_t)i] = label;
      }

  // Second pass: resolve equivalences into a contiguous label set.
  std::vector<int32_t> remap(uf.parent.size(), 0);
  int32_t next = 0;
  for (int64_t i = 0; i < d.count(); ++i) {
    int32_t pl = prov[(size_t)i];
    if (!pl) continue;
    int32_t root = uf.find(pl);
    if (!remap[(size_t)root]) remap[(size_t)root] = ++next;
    out.labels[(size_t)i] = remap[(size_t)root];
  }
  out.num_components = next;
  return out;
}

// ---------------------------------------------------------------------------
// Morphological dilation
// ---------------------------------------------------------------------------

// `radius` applications of the 3^3 (26-neighbor) structuring element,
// equivalent to a Chebyshev ball of the given radius.
inline BinaryVolume dilate(const BinaryVolume& vol, int radius) {
  if (radius < 0) throw std::invalid_argument("dilate: negative radius");
  BinaryVolume cur = vol;
  const Dims& d = vol.dims;
  auto pass = [&](int axis) {
    BinaryVolume next = cur;
    for (int64_t z = 0; z < d.nz; ++z)
      for (int64_t y = 0; y < d.ny; ++y)
        for (int64_t x = 0; x < d.nx; ++x) {
          if (cur.at(x, y, z)) continue;
          int64_t c[3] = {x, y, z};
          for (int s = -1; s <= 1; s += 2) {
            int64_t p[3] = {c[0], c[1], c[2]};
            p[axis] += s;
            int64_t lim = axis == 0 ? d.nx : axis == 1 ? d.ny : d.nz;
            if (p[axis] >= 0 && p[axis] < lim && cur.at(p[0], p[1], p[2])) {
              next.at(x, y, z) = 1;
              break;
            }
          }
        }
    cur = std::move(next);
  };
  for (int r = 0; r < radius; ++r) {
    pass(0);
    pass(1);
    pass(2);
  }
  return cur;
}

// ---------------------------------------------------------------------------
// Exact Euclidean distance transform
// ---------------------------------------------------------------------------

namespace detail {

// 1D squared-distance lower envelope (Felzenszwalb & Huttenlocher).
inline void edt_1d(const std::vector<double>& f, std::vector<double>& out) {
  const int n = (int)f.size();
  std::vector<int> v((size_t)n);
  std::vector<double> z((size_t)n + 1);
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  // Rows always begin and end in the rock shell, so f[0] is finite and
  // infinite parabolas can simply be skipped.
  for (int q = 1; q < n; ++q) {
    if (f[(size_t)q] == std::numeric_limits<double>::infinity()) continue;
    double s;
    while (true) {
      s = ((f[(size_t)q] + (double)q * q) -
           (f[(size_t)v[(size_t)k]] + (double)v[(size_t)k] * v[(size_t)k])) /
          (2.0 * (q - v[(size_t)k]));
      if (s <= z[(size_t)k])
        --k;
      else
        break;
    }
    ++k;
    v[(size_t)k] = q;
    z[(size_t)k] = s;
    z[(size_t)k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[(size_t)k + 1] < (double)q) ++k;
    double dq = (double)q - (double)v[(size_t)k];
    out[(size_t)q] = dq * dq + f[(size_t)v[(size_t)k]];
  }
}

}  // namespace detail

// Per-voxel Euclidean distance (in voxel units) from pore voxels to the
// nearest rock voxel center; rock voxels map to 0. Voxels outside the
// domain count as rock, so the transform runs on a rock-padded shell.
inline std::vector<double> euclidean_distance_transform(const BinaryVolume& vol) {
  const Dims& d = vol.dims;
  const Dims p{d.nx + 2, d.ny + 2, d.nz + 2};  // one-voxel rock shell
  const double INF = std::numeric_limits<double>::infinity();

  std::vector<double> g((size_t)p.count(), 0.0);
  for (int64_t z = 0; z < d.nz; ++z)
    for (int64_t y = 0; y < d.ny; ++y)
      for (int64_t x = 0; x < d.nx; ++x)
        if (vol.at(x, y, z))
          g[(size_t)voxel_index(p, x + 1, y + 1, z + 1)] = INF;

  std::vector<double> f, o;
  // x pass
  f.resize((size_t)p.nx);
  o.resize((size_t)p.nx);
  for (int64_t z = 0; z < p.nz; ++z)
    for (int64_t y = 0; y < p.ny; ++y) {
      for (int64_t x = 0; x < p.nx; ++x) f[(size_t)x] = g[(size_t)voxel_index(p, x, y, z)];
      detail::edt_1d(f, o);
      for (int64_t x = 0; x < p.nx; ++x) g[(size_t)voxel_index(p, x, y, z)] = o[(size_t)x];
    }
  // y pass
  f.resize((size_t)p.ny);
  o.resize((size_t)p.ny);
  for (int64_t z = 0; z < p.nz; ++z)
    for (int64_t x = 0; x < p.nx; ++x) {
      for (int64_t y = 0; y < p.ny; ++y) f[(size_t)y] = g[(size_t)voxel_index(p, x, y, z)];
      detail::edt_1d(f, o);
      for (int64_t y = 0; y < p.ny; ++y) g[(size_t)voxel_index(p, x, y, z)] = o[(size_t)y];
    }
  // z pass
  f.resize((size_t)p.nz);
  o.resize((size_t)p.nz);
  for (int64_t y = 0; y < p.ny; ++y)
    for (int64_t x = 0; x < p.nx; ++x) {
      for (int64_t z = 0; z < p.nz; ++z) f[(size_t)z] = g[(size_t)voxel_index(p, x, y, z)];
      detail::edt_1d(f, o);
      for (int64_t z = 0; z < p.nz; ++z) g[(size_t)voxel_index(p, x, y, z)] = o[(size_t)z];
    }

  std::vector<double> out((size_t)d.count(), 0.0);
  for (int64_t z = 0; z < d.nz; ++z)
    for (int64_t y = 0; y < d.ny; ++y)
      for (int64_t x = 0; x < d.nx; ++x)
        out[(size_t)voxel_index(d, x, y, z)] =
            std::sqrt(g[(size_t)voxel_index(p, x + 1, y + 1, z + 1)]);
  return out;
}

}  // namespace porevox

#endif  // POREVOX_OPS_HPP
