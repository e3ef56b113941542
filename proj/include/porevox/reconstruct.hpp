#ifndef POREVOX_RECONSTRUCT_HPP
#define POREVOX_RECONSTRUCT_HPP

// Staged super-resolution reconstruction: interleaved upsampling, two-step
// pattern matching against the edge dictionaries, write-once edge
// commitment, and mask-guarded micro-pore padding.

#include <array>
#include <bit>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "porevox/dictionary.hpp"
#include "porevox/ops.hpp"
#include "porevox/scale_plan.hpp"
#include "porevox/volume.hpp"

namespace porevox {

enum class TieBreak { First, SeededRandom };

struct ReconstructionConfig {
  uint64_t seed = 0;
  TieBreak tie_break = TieBreak::SeededRandom;
  int dilation_radius = 1;             // micro-pore mask guard
  int max_placement_attempts = 1000;   // per element copy
  bool single_epd_baseline = false;    // every stage uses the finest EPD
  Connectivity connectivity = Connectivity::Full26;
};

// Interleaved upsampled grid: input voxels become skeleton points at the
// all-even coordinates, inserted voxels start pending-unset.
enum class GridState : uint8_t {
  SkelRock = 0,
  SkelPore = 1,
  PendUnset = 2,
  PendRock = 3,
  PendPore = 4,
};

struct PseudoHRGrid {
  Dims dims;        // 2*n-1 per axis
  double scale_um;  // input scale / 2
  std::vector<GridState> states;

  GridState at(int64_t x, int64_t y, int64_t z) const {
    return states[(size_t)voxel_index(dims, x, y, z)];
  }
  GridState& at(int64_t x, int64_t y, int64_t z) {
    return states[(size_t)voxel_index(dims, x, y, z)];
  }
};

inline PseudoHRGrid phi_upsample(const BinaryVolume& in) {
  const Dims& d = in.dims;
  if (d.nx < 3 || d.ny < 3 || d.nz < 3)
    throw std::invalid_argument("phi_upsample: dims must be >= 3 per axis");
  PseudoHRGrid g;
  g.dims = {2 * d.nx - 1, 2 * d.ny - 1, 2 * d.nz - 1};
  g.scale_um = in.scale_um / 2.0;
  g.states.assign((size_t)g.dims.count(), GridState::PendUnset);
  for (int64_t z = 0; z < d.nz; ++z)
    for (int64_t y = 0; y < d.ny; ++y)
      for (int64_t x = 0; x < d.nx; ++x)
        g.at(2 * x, 2 * y, 2 * z) =
            in.at(x, y, z) ? GridState::SkelPore : GridState::SkelRock;
  return g;
}

namespace detail {

inline bool committed(GridState s) { return s != GridState::PendUnset; }

inline uint8_t grid_value(GridState s) {
  return (s == GridState::SkelPore || s == GridState::PendPore) ? 1 : 0;
}

// Uniform choice among the minimizers collected so far. Draws from the RNG
// only when there is an actual tie.
template <typename T>
const T& pick(const std::vector<T>& minimizers, TieBreak tie, std::mt19937_64& rng) {
  if (minimizers.size() == 1 || tie == TieBreak::First) return minimizers.front();
  std::uniform_int_distribution<size_t> d(0, minimizers.size() - 1);
  return minimizers[d(rng)];
}

}  // namespace detail

// Committed-face context of a 5^3 block: for each face (-x,+x,-y,+y,-z,+z)
// 25 entries, -1 = not committed, else the committed phase value. In-face
// indexing is u + 5*v with (u,v) the remaining axes in x,y,z order.
struct FaceContext {
  std::array<std::array<int8_t, 25>, 6> faces;

  FaceContext() {
    for (auto& f : faces) f.fill(-1);
  }
};

// Hamming-nearest skeleton class (ties per tie_break).
inline size_t match_skeleton(SkeletonCode code, const EdgePatternDictionary& epd,
                             TieBreak tie, std::mt19937_64& rng) {
  if (epd.empty()) throw std::invalid_argument("match_skeleton: empty dictionary");
  auto it = epd.index.find(code);
  if (it != epd.index.end()) return it->second;

  int best = kSkeletonBits + 1;
  std::vector<size_t> minimizers;
  for (size_t i = 0; i < epd.classes.size(); ++i) {
    int dist = std::popcount(code ^ epd.classes[i].code);
    if (dist < best) {
      best = dist;
      minimizers.clear();
      minimizers.push_back(i);
    } else if (dist == best) {
      minimizers.push_back(i);
    }
  }
  return detail::pick(minimizers, tie, rng);
}

namespace detail {

// Face coordinates of a 5^3 block: face axis fixed at 0 or 4, remaining
// axes (u,v) sweep 0..4.
inline void face_coords(int face, int t, int& x, int& y, int& z) {
  int u = t % 5, v = t / 5;
  int axis = face / 2;
  int plane = (face % 2) ? 4 : 0;
  if (axis == 0) { x = plane; y = u; z = v; }
  else if (axis == 1) { x = u; y = plane; z = v; }
  else { x = u; y = v; z = plane; }
}

inline int score_candidate(const std::array<uint8_t, 125>& cand, const FaceContext& ctx) {
  int score = 0;
  for (int face = 0; face < 6; ++face)
    for (int t = 0; t < 25; ++t) {
      int8_t c = ctx.faces[(size_t)face][(size_t)t];
      if (c < 0) continue;
      int x, y, z;
      face_coords(face, t, x, y, z);
      score += std::abs((int)cand[(size_t)(x + 5 * y + 25 * z)] - (int)c);
    }
  return score;
}

}  // namespace detail

// Edge fill whose assembled block best matches the committed face context.
inline const EdgeFill& select_edge_fill(SkeletonCode class_code,
                                        const std::vector<EdgeFill>& fills,
                                        const FaceContext& ctx, TieBreak tie,
                                        std::mt19937_64& rng) {
  if (fills.empty()) throw std::invalid_argument("select_edge_fill: empty fill list");
  int best = INT32_MAX;
  std::vector<const EdgeFill*> minimizers;
  for (const auto& f : fills) {
    int s = detail::score_candidate(assemble_block(class_code, f), ctx);
    if (s < best) {
      best = s;
      minimizers.clear();
      minimizers.push_back(&f);
    } else if (s == best) {
      minimizers.push_back(&f);
    }
  }
  return *detail::pick(minimizers, tie, rng);
}

struct StageStats {
  int64_t blocks = 0;
  int64_t exact_skeleton_hits = 0;  // Hamming distance 0 matches
};

namespace detail {

// Block offsets over one input axis: stride 2 from 0, last clamped to dim-3.
inline std::vector<int64_t> block_offsets(int64_t dim) {
  std::vector<int64_t> offs;
  for (int64_t i = 0; i + 3 <= dim; i += 2) offs.push_back(i);
  if (offs.empty() || offs.back() != dim - 3) offs.push_back(dim - 3);
  return offs;
}

}  // namespace detail

// One reconstruction stage: upsample, then match and commit a 5^3 pattern
// block for every 3^3 input block in raster order. Committed voxels
// (skeleton always, pending once written) are never overwritten.
inline BinaryVolume reconstruct_stage(const BinaryVolume& in,
                                      const EdgePatternDictionary& epd,
                                      const ReconstructionConfig& cfg,
                                      std::mt19937_64& rng,
                                      StageStats* stats = nullptr) {
  if (epd.empty()) throw std::invalid_argument("reconstruct_stage: empty dictionary");
  PseudoHRGrid grid = phi_upsample(in);
  const Dims& d = in.dims;

  const auto xs = detail::block_offsets(d.nx);
  const auto ys = detail::block_offsets(d.ny);
  const auto zs = detail::block_offsets(d.nz);

  for (int64_t bz : zs)
    for (int64_t by : ys)
      for (int64_t bx : xs) {
        // skeleton code from the 3^3 input block
        SkeletonCode code = 0;
        for (int dz = 0; dz < 3; ++dz)
          for (int dy = 0; dy < 3; ++dy)
            for (int dx = 0; dx < 3; ++dx)
              if (in.at(bx + dx, by + dy, bz + dz))
                code |= 1u << (dx + 3 * dy + 9 * dz);

        size_t cls = match_skeleton(code, epd, cfg.tie_break, rng);
        if (stats) {
          stats->blocks++;
          if (epd.classes[cls].code == code) stats->exact_skeleton_hits++;
        }

        // committed-face context at the block's grid footprint
        const int64_t gx = 2 * bx, gy = 2 * by, gz = 2 * bz;
        FaceContext ctx;
        for (int face = 0; face < 6; ++face)
          for (int t = 0; t < 25; ++t) {
            int x, y, z;
            detail::face_coords(face, t, x, y, z);
            GridState s = grid.at(gx + x, gy + y, gz + z);
            if (detail::committed(s))
              ctx.faces[(size_t)face][(size_t)t] = (int8_t)detail::grid_value(s);
          }

        const EdgeFill& fill = select_edge_fill(epd.classes[cls].code,
                                                epd.classes[cls].fills, ctx,
                                                cfg.tie_break, rng);

        // write-once commit of pending voxels
        const auto& layout = porevox::detail::template_layout();
        for (int b = 0; b < kEdgeFillBits; ++b) {
          int lin = layout.pending_pos[(size_t)b];
          int x = lin % 5, y = (lin / 5) % 5, z = lin / 25;
          GridState& s = grid.at(gx + x, gy + y, gz + z);
          if (s == GridState::PendUnset)
            s = fill.get(b) ? GridState::PendPore : GridState::PendRock;
        }
      }

  BinaryVolume out;
  out.dims = grid.dims;
  out.scale_um = grid.scale_um;
  out.data.resize((size_t)grid.dims.count());
  for (size_t i = 0; i < grid.states.size(); ++i) {
    if (grid.states[i] == GridState::PendUnset)
      throw std::logic_error("reconstruct_stage: uncommitted pending voxel");
    out.data[i] = detail::grid_value(grid.states[i]);
  }
  return out;
}

struct ReconstructionReport {
  std::vector<StageStats> stages;
  int64_t placements_ok = 0;
  int64_t placements_skipped = 0;
};

// Staged reconstruction with dictionaries ordered coarsest first; with the
// single-EPD baseline every stage reuses the finest dictionary.
inline BinaryVolume reconstruct_multistage(const BinaryVolume& lri,
                                           const std::vector<EdgePatternDictionary>& dicts,
                                           const ReconstructionConfig& cfg,
                                           ReconstructionReport* report = nullptr) {
  if (dicts.empty()) throw std::invalid_argument("reconstruct_multistage: no dictionaries");
  std::mt19937_64 rng(cfg.seed);
  BinaryVolume cur = lri;
  for (size_t k = 0; k < dicts.size(); ++k) {
    const EdgePatternDictionary& epd = cfg.single_epd_baseline ? dicts.back() : dicts[k];
    StageStats stats;
    cur = reconstruct_stage(cur, epd, cfg, rng, &stats);
    if (report) report->stages.push_back(stats);
  }
  return cur;
}

// ---------------------------------------------------------------------------
// Micro-pore padding
// ---------------------------------------------------------------------------

// Pad each dictionary element pad_multiplicity times at seeded random
// anchors. A placement is legal when the element's bounding box fits in the
// domain and its voxels touch neither the dilated pore mask nor any prior
// placement's dilated footprint. Placement failures beyond the attempt cap
// are skipped and counted.
inline BinaryVolume pad_micropores(const BinaryVolume& pms, const MicroPoreDictionary& mpd,
                                   const ScalePlan& plan, const ReconstructionConfig& cfg,
                                   ReconstructionReport* report = nullptr) {
  BinaryVolume out = pms;
  const Dims& d = pms.dims;
  BinaryVolume occupied = dilate(pms, cfg.dilation_radius);
  std::mt19937_64 rng(cfg.seed ^ 0x6d70645061644030ULL);  // distinct stream from edge stages

  auto mark_footprint = [&](const MicroPoreElement& el, int64_t ax, int64_t ay, int64_t az) {
    const int r = cfg.dilation_radius;
    for (int64_t z = 0; z < el.bbox.nz; ++z)
      for (int64_t y = 0; y < el.bbox.ny; ++y)
        for (int64_t x = 0; x < el.bbox.nx; ++x) {
          if (!el.mask[(size_t)voxel_index(el.bbox, x, y, z)]) continue;
          for (int64_t dz = -r; dz <= r; ++dz)
            for (int64_t dy = -r; dy <= r; ++dy)
              for (int64_t dx = -r; dx <= r; ++dx) {
                int64_t px = ax + x + dx, py = ay + y + dy, pz = az + z + dz;
                if (px < 0 || py < 0 || pz < 0 || px >= d.nx || py >= d.ny || pz >= d.nz)
                  continue;
                occupied.at(px, py, pz) = 1;
              }
        }
  };

  for (const auto& el : mpd.elements) {
    if (el.voxel_count < plan.cc_lo || el.voxel_count > plan.cc_hi)
      throw std::invalid_argument("pad_micropores: element outside cc_range");
    if (el.bbox.nx > d.nx || el.bbox.ny > d.ny || el.bbox.nz > d.nz) {
      if (report) report->placements_skipped += plan.pad_multiplicity;
      continue;
    }
    std::uniform_int_distribution<int64_t> ux(0, d.nx - el.bbox.nx);
    std::uniform_int_distribution<int64_t> uy(0, d.ny - el.bbox.ny);
    std::uniform_int_distribution<int64_t> uz(0, d.nz - el.bbox.nz);

    for (int64_t copy = 0; copy < plan.pad_multiplicity; ++copy) {
      bool placed = false;
      for (int attempt = 0; attempt < cfg.max_placement_attempts && !placed; ++attempt) {
        int64_t ax = ux(rng), ay = uy(rng), az = uz(rng);
        bool clear = true;
        for (int64_t z = 0; z < el.bbox.nz && clear; ++z)
          for (int64_t y = 0; y < el.bbox.ny && clear; ++y)
            for (int64_t x = 0; x < el.bbox.nx && clear; ++x)
              if (el.mask[(size_t)voxel_index(el.bbox, x, y, z)] &&
                  occupied.at(ax + x, ay + y, az + z))
                clear = false;
        if (!clear) continue;
        for (int64_t z = 0; z < el.bbox.nz; ++z)
          for (int64_t y = 0; y < el.bbox.ny; ++y)
            for (int64_t x = 0; x < el.bbox.nx; ++x)
              if (el.mask[(size_t)voxel_index(el.bbox, x, y, z)])
                out.at(ax + x, ay + y, az + z) = 1;
        mark_footprint(el, ax, ay, az);
        placed = true;
      }
      if (report) {
        if (placed)
          report->placements_ok++;
        else
          report->placements_skipped++;
      }
    }
  }
  return out;
}

}  // namespace porevox

#endif  // POREVOX_RECONSTRUCT_HPP
