#ifndef POREVOX_DICTIONARY_HPP
#define POREVOX_DICTIONARY_HPP

// Pattern dictionaries learned from the high-resolution volume:
//  - EdgePatternDictionary: 5^3 scan templates split into a 3^3 skeleton
//    code (even-lattice voxels) and a 98-bit edge fill (pending voxels),
//    one dictionary per scale level.
//  - MicroPoreDictionary: small connected components harvested as tight
//    bounding-box masks.

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "porevox/ops.hpp"
#include "porevox/scale_plan.hpp"
#include "porevox/volume.hpp"

namespace porevox {

// 27-bit code over the 3^3 even-lattice positions of a 5^3 block,
// bit = (x/2) + 3*(y/2) + 9*(z/2), x fastest.
using SkeletonCode = uint32_t;

constexpr int kSkeletonBits = 27;
constexpr int kEdgeFillBits = 98;  // 5^3 - 3^3 pending positions

// 98-bit edge-fill code over the pending (non-even-lattice) positions of a
// 5^3 block, in x-fastest scan order.
struct EdgeFill {
  uint64_t lo = 0, hi = 0;

  bool get(int bit) const {
    return bit < 64 ? (lo >> bit) & 1 : (hi >> (bit - 64)) & 1;
  }
  void set(int bit, bool v) {
    uint64_t& w = bit < 64 ? lo : hi;
    int b = bit < 64 ? bit : bit - 64;
    w = v ? (w | (1ULL << b)) : (w & ~(1ULL << b));
  }
  bool operator==(const EdgeFill&) const = default;
};

struct EdgeFillHash {
  size_t operator()(const EdgeFill& f) const {
    uint64_t h = f.lo * 0x9e3779b97f4a7c15ULL;
    h ^= f.hi + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return (size_t)h;
  }
};

namespace detail {

// Index of a 5^3 position within the pending ordering, or -1 if it lies on
// the even lattice. x fastest, then y, then z.
struct TemplateLayout {
  std::array<int, 125> pending_index;
  std::array<int, 98> pending_pos;  // inverse: pending bit -> linear 5^3 index

  TemplateLayout() {
    int next = 0;
    for (int z = 0; z < 5; ++z)
      for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 5; ++x) {
          int lin = x + 5 * y + 25 * z;
          if (x % 2 == 0 && y % 2 == 0 && z % 2 == 0) {
            pending_index[(size_t)lin] = -1;
          } else {
            pending_index[(size_t)lin] = next;
            pending_pos[(size_t)next] = lin;
            ++next;
          }
        }
  }
};

inline const TemplateLayout& template_layout() {
  static const TemplateLayout layout;
  return layout;
}

inline int skeleton_bit(int x, int y, int z) {
  return (x / 2) + 3 * (y / 2) + 9 * (z / 2);
}

}  // namespace detail

// Skeleton code of a 5^3 block given as 125 phase values, x fastest.
inline SkeletonCode extract_skeleton(const uint8_t* block125) {
  SkeletonCode code = 0;
  for (int z = 0; z < 5; z += 2)
    for (int y = 0; y < 5; y += 2)
      for (int x = 0; x < 5; x += 2)
        if (block125[x + 5 * y + 25 * z])
          code |= 1u << detail::skeleton_bit(x, y, z);
  return code;
}

inline SkeletonCode extract_skeleton(const std::vector<uint8_t>& block) {
  if (block.size() != 125)
    throw std::invalid_argument("extract_skeleton: block must be 5^3");
  return extract_skeleton(block.data());
}

inline EdgeFill extract_edge_fill(const uint8_t* block125) {
  const auto& layout = detail::template_layout();
  EdgeFill f;
  for (int b = 0; b < kEdgeFillBits; ++b)
    if (block125[layout.pending_pos[(size_t)b]]) f.set(b, true);
  return f;
}

// Reassemble a 5^3 block from a skeleton code and an edge fill.
inline std::array<uint8_t, 125> assemble_block(SkeletonCode code, const EdgeFill& fill) {
  const auto& layout = detail::template_layout();
  std::array<uint8_t, 125> block{};
  for (int z = 0; z < 5; ++z)
    for (int y = 0; y < 5; ++y)
      for (int x = 0; x < 5; ++x) {
        int lin = x + 5 * y + 25 * z;
        int pb = layout.pending_index[(size_t)lin];
        if (pb < 0)
          block[(size_t)lin] = (code >> detail::skeleton_bit(x, y, z)) & 1;
        else
          block[(size_t)lin] = fill.get(pb) ? 1 : 0;
      }
  return block;
}

struct EdgeClass {
  SkeletonCode code = 0;
  std::vector<EdgeFill> fills;  // deduplicated, first-occurrence order
};

struct EdgePatternDictionary {
  int level = 1;          // 1 = native HR scale; level k uses k-1 halvings
  double source_scale_um = 0;
  std::vector<EdgeClass> classes;                   // first-occurrence order
  std::unordered_map<SkeletonCode, size_t> index;   // code -> classes slot

  bool empty() const { return classes.empty(); }

  size_t fill_count() const {
    size_t n = 0;
    for (const auto& c : classes) n += c.fills.size();
    return n;
  }
};

// Scan every 5^3 block (stride 1) of the level-downsampled HR volume,
// deduplicating fills within each skeleton class.
inline EdgePatternDictionary build_epd(const BinaryVolume& hr, int level) {
  if (level < 1) throw std::invalid_argument("build_epd: level must be >= 1");
  BinaryVolume vol = hr;
  for (int k = 1; k < level; ++k) vol = downsample_mean(vol, 2);
  const Dims& d = vol.dims;
  if (d.nx < 5 || d.ny < 5 || d.nz < 5)
    throw std::invalid_argument("build_epd: volume too small for 5^3 template");

  EdgePatternDictionary epd;
  epd.level = level;
  epd.source_scale_um = vol.scale_um;

  std::unordered_map<SkeletonCode, std::unordered_set<EdgeFill, EdgeFillHash>> seen;
  uint8_t block[125];
  for (int64_t z = 0; z + 5 <= d.nz; ++z)
    for (int64_t y = 0; y + 5 <= d.ny; ++y)
      for (int64_t x = 0; x + 5 <= d.nx; ++x) {
        int i = 0;
        for (int dz = 0; dz < 5; ++dz)
          for (int dy = 0; dy < 5; ++dy)
            for (int dx = 0; dx < 5; ++dx)
              block[i++] = vol.at(x + dx, y + dy, z + dz);
        SkeletonCode code = extract_skeleton(block);
        EdgeFill fill = extract_edge_fill(block);
        auto it = epd.index.find(code);
        if (it == epd.index.end()) {
          epd.index.emplace(code, epd.classes.size());
          epd.classes.push_back({code, {fill}});
          seen[code].insert(fill);
        } else if (seen[code].insert(fill).second) {
          epd.classes[it->second].fills.push_back(fill);
        }
      }
  return epd;
}

// One dictionary per level, coarsest (m_max) first, ready for staged
// reconstruction.
inline std::vector<EdgePatternDictionary> build_multi_epd(const BinaryVolume& hr,
                                                          const ScalePlan& plan) {
  std::vector<EdgePatternDictionary> dicts;
  for (int level = plan.m_max; level >= 1; --level)
    dicts.push_back(build_epd(hr, level));
  return dicts;
}

// ---------------------------------------------------------------------------
// Micro-pore dictionary
// ---------------------------------------------------------------------------

struct MicroPoreElement {
  Dims bbox;                   // tight bounding box
  std::vector<uint8_t> mask;   // bbox-local, x fastest
  int64_t voxel_count = 0;
};

struct MicroPoreDictionary {
  std::vector<MicroPoreElement> elements;
  double source_scale_um = 0;
};

// Connected components of hr with voxel counts inside plan.cc_range, stored
// as tight bounding-box masks.
inline MicroPoreDictionary build_mpd(const BinaryVolume& hr, const ScalePlan& plan,
                                     Connectivity conn = Connectivity::Full26) {
  LabelField lf = label_components(hr, conn);
  const Dims& d = hr.dims;

  struct Box {
    int64_t x0 = INT64_MAX, y0 = INT64_MAX, z0 = INT64_MAX;
    int64_t x1 = -1, y1 = -1, z1 = -1;
    int64_t count = 0;
  };
  std::vector<Box> boxes((size_t)lf.num_components + 1);
  for (int64_t z = 0; z < d.nz; ++z)
    for (int64_t y = 0; y < d.ny; ++y)
      for (int64_t x = 0; x < d.nx; ++x) {
        int32_t l = lf.at(x, y, z);
        if (!l) continue;
        Box& b = boxes[(size_t)l];
        b.x0 = std::min(b.x0, x); b.x1 = std::max(b.x1, x);
        b.y0 = std::min(b.y0, y); b.y1 = std::max(b.y1, y);
        b.z0 = std::min(b.z0, z); b.z1 = std::max(b.z1, z);
        b.count++;
      }

  MicroPoreDictionary mpd;
  mpd.source_scale_um = hr.scale_um;
  for (int32_t l = 1; l <= lf.num_components; ++l) {
    const Box& b = boxes[(size_t)l];
    if (b.count < plan.cc_lo || b.count > plan.cc_hi) continue;
    MicroPoreElement el;
    el.bbox = {b.x1 - b.x0 + 1, b.y1 - b.y0 + 1, b.z1 - b.z0 + 1};
    el.voxel_count = b.count;
    el.mask.assign((size_t)el.bbox.count(), 0);
    for (int64_t z = b.z0; z <= b.z1; ++z)
      for (int64_t y = b.y0; y <= b.y1; ++y)
        for (int64_t x = b.x0; x <= b.x1; ++x)
          if (lf.at(x, y, z) == l)
            el.mask[(size_t)voxel_index(el.bbox, x - b.x0, y - b.y0, z - b.z0)] = 1;
    mpd.elements.push_back(std::move(el));
  }
  if (mpd.elements.empty())
    std::fprintf(stderr, "warning: build_mpd: no components in cc_range [%lld,%lld]\n",
                 (long long)plan.cc_lo, (long long)plan.cc_hi);
  return mpd;
}

// ---------------------------------------------------------------------------
// Binary serialization
// ---------------------------------------------------------------------------

namespace detail {

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("dictionary file truncated");
  return v;
}

constexpr uint32_t kEpdMagic = 0x45504446;  // "EPDF"
constexpr uint32_t kMpdMagic = 0x4d504446;  // "MPDF"
constexpr uint32_t kDictVersion = 1;

}  // namespace detail

inline void save_epd(const EdgePatternDictionary& epd, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_epd: cannot open " + path);
  detail::put(os, detail::kEpdMagic);
  detail::put(os, detail::kDictVersion);
  detail::put(os, (uint32_t)epd.level);
  detail::put(os, epd.source_scale_um);
  detail::put(os, (uint64_t)epd.classes.size());
  for (const auto& c : epd.classes) {
    detail::put(os, c.code);
    detail::put(os, (uint64_t)c.fills.size());
    for (const auto& f : c.fills) {
      detail::put(os, f.lo);
      detail::put(os, f.hi);
    }
  }
}

inline EdgePatternDictionary load_epd(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_epd: cannot open " + path);
  if (detail::get<uint32_t>(is) != detail::kEpdMagic)
    throw std::runtime_error("load_epd: bad magic");
  if (detail::get<uint32_t>(is) != detail::kDictVersion)
    throw std::runtime_error("load_epd: unsupported version");
  EdgePatternDictionary epd;
  epd.level = (int)detail::get<uint32_t>(is);
  epd.source_scale_um = detail::get<double>(is);
  uint64_t nclasses = detail::get<uint64_t>(is);
  for (uint64_t i = 0; i < nclasses; ++i) {
    EdgeClass c;
    c.code = detail::get<SkeletonCode>(is);
    uint64_t nfills = detail::get<uint64_t>(is);
    c.fills.reserve(nfills);
    for (uint64_t k = 0; k < nfills; ++k) {
      EdgeFill f;
      f.lo = detail::get<uint64_t>(is);
      f.hi = detail::get<uint64_t>(is);
      c.fills.push_back(f);
    }
    epd.index.emplace(c.code, epd.classes.size());
    epd.classes.push_back(std::move(c));
  }
  return epd;
}

inline void save_mpd(const MicroPoreDictionary& mpd, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_mpd: cannot open " + path);
  detail::put(os, detail::kMpdMagic);
  detail::put(os, detail::kDictVersion);
  detail::put(os, mpd.source_scale_um);
  detail::put(os, (uint64_t)mpd.elements.size());
  for (const auto& el : mpd.elements) {
    detail::put(os, (uint32_t)el.bbox.nx);
    detail::put(os, (uint32_t)el.bbox.ny);
    detail::put(os, (uint32_t)el.bbox.nz);
    detail::put(os, (uint64_t)el.voxel_count);
    os.write(reinterpret_cast<const char*>(el.mask.data()), (std::streamsize)el.mask.size());
  }
}

inline MicroPoreDictionary load_mpd(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_mpd: cannot open " + path);
  if (detail::get<uint32_t>(is) != detail::kMpdMagic)
    throw std::runtime_error("load_mpd: bad magic");
  if (detail::get<uint32_t>(is) != detail::kDictVersion)
    throw std::runtime_error("load_mpd: unsupported version");
  MicroPoreDictionary mpd;
  mpd.source_scale_um = detail::get<double>(is);
  uint64_t n = detail::get<uint64_t>(is);
  for (uint64_t i = 0; i < n; ++i) {
    MicroPoreElement el;
    el.bbox.nx = detail::get<uint32_t>(is);
    el.bbox.ny = detail::get<uint32_t>(is);
    el.bbox.nz = detail::get<uint32_t>(is);
    el.voxel_count = (int64_t)detail::get<uint64_t>(is);
    el.mask.resize((size_t)el.bbox.count());
    is.read(reinterpret_cast<char*>(el.mask.data()), (std::streamsize)el.mask.size());
    if (!is) throw std::runtime_error("load_mpd: file truncated");
    mpd.elements.push_back(std::move(el));
  }
  return mpd;
}

}  // namespace porevox

#endif  // POREVOX_DICTIONARY_HPP
