#include <doctest.h>

#include <filesystem>
#include <map>
#include <set>

#include "porevox/dictionary.hpp"
#include "oracles.hpp"

using namespace porevox;

TEST_CASE("extract_skeleton reads only the even-lattice positions") {
  std::vector<uint8_t> block(125, 1);
  CHECK(extract_skeleton(block) == (1u << 27) - 1);

  std::fill(block.begin(), block.end(), 0);
  CHECK(extract_skeleton(block) == 0u);

  // pore only at the pending position (1,1,1)
  block[(size_t)(1 + 5 * 1 + 25 * 1)] = 1;
  CHECK(extract_skeleton(block) == 0u);

  CHECK_THROWS_AS(extract_skeleton(std::vector<uint8_t>(27, 0)), std::invalid_argument);
}

TEST_CASE("assemble/extract are inverse on random codes and fills") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    SkeletonCode code = (SkeletonCode)(rng() & ((1u << 27) - 1));
    EdgeFill fill;
    fill.lo = rng();
    fill.hi = rng() & ((1ULL << 34) - 1);
    auto block = assemble_block(code, fill);
    CHECK(extract_skeleton(block.data()) == code);
    CHECK(extract_edge_fill(block.data()) == fill);
  }
}

TEST_CASE("EPD of a constant volume has one class with one fill") {
  BinaryVolume rock = make_binary({8, 8, 8}, 1.0, 0);
  EdgePatternDictionary d0 = build_epd(rock, 1);
  REQUIRE(d0.classes.size() == 1);
  CHECK(d0.classes[0].code == 0u);
  REQUIRE(d0.classes[0].fills.size() == 1);
  CHECK(d0.classes[0].fills[0] == EdgeFill{});

  BinaryVolume pore = make_binary({8, 8, 8}, 1.0, 1);
  EdgePatternDictionary d1 = build_epd(pore, 1);
  REQUIRE(d1.classes.size() == 1);
  CHECK(d1.classes[0].code == (1u << 27) - 1);
  REQUIRE(d1.classes[0].fills.size() == 1);
  EdgeFill all_ones;
  all_ones.lo = ~0ULL;
  all_ones.hi = (1ULL << 34) - 1;
  CHECK(d1.classes[0].fills[0] == all_ones);
}

TEST_CASE("EPD equals a naive nested-loop scan oracle") {
  BinaryVolume v = oracle::random_binary({8, 8, 8}, 1.0, 0.5, 99);
  EdgePatternDictionary epd = build_epd(v, 1);

  // oracle: collect (code, fill multiset) by direct re-scan
  std::map<SkeletonCode, std::set<std::pair<uint64_t, uint64_t>>> ref;
  int64_t positions = 0;
  for (int64_t z = 0; z + 5 <= 8; ++z)
    for (int64_t y = 0; y + 5 <= 8; ++y)
      for (int64_t x = 0; x + 5 <= 8; ++x) {
        std::vector<uint8_t> block;
        for (int dz = 0; dz < 5; ++dz)
          for (int dy = 0; dy < 5; ++dy)
            for (int dx = 0; dx < 5; ++dx)
              block.push_back(v.at(x + dx, y + dy, z + dz));
        EdgeFill f = extract_edge_fill(block.data());
        ref[extract_skeleton(block)].insert({f.lo, f.hi});
        positions++;
      }

  REQUIRE(epd.classes.size() == ref.size());
  size_t total_fills = 0;
  for (const auto& c : epd.classes) {
    auto it = ref.find(c.code);
    REQUIRE(it != ref.end());
    std::set<std::pair<uint64_t, uint64_t>> got;
    for (const auto& f : c.fills) got.insert({f.lo, f.hi});
    CHECK(got == it->second);
    CHECK(got.size() == c.fills.size());  // no duplicates
    total_fills += c.fills.size();
  }
  CHECK((int64_t)total_fills <= positions);
}

TEST_CASE("every stored pair reassembles to a block observed in the volume") {
  BinaryVolume v = oracle::random_binary({7, 7, 7}, 1.0, 0.4, 3);
  EdgePatternDictionary epd = build_epd(v, 1);
  std::set<std::array<uint8_t, 125>> observed;
  for (int64_t z = 0; z + 5 <= 7; ++z)
    for (int64_t y = 0; y + 5 <= 7; ++y)
      for (int64_t x = 0; x + 5 <= 7; ++x) {
        std::array<uint8_t, 125> b{};
        int i = 0;
        for (int dz = 0; dz < 5; ++dz)
          for (int dy = 0; dy < 5; ++dy)
            for (int dx = 0; dx < 5; ++dx)
              b[(size_t)i++] = v.at(x + dx, y + dy, z + dz);
        observed.insert(b);
      }
  for (const auto& c : epd.classes)
    for (const auto& f : c.fills)
      CHECK(observed.count(assemble_block(c.code, f)) == 1);
}

TEST_CASE("build_epd rejects a too-small volume") {
  BinaryVolume v = make_binary({4, 6, 6}, 1.0);
  CHECK_THROWS_AS(build_epd(v, 1), std::invalid_argument);
  BinaryVolume v8 = make_binary({8, 8, 8}, 1.0);
  CHECK_THROWS_AS(build_epd(v8, 2), std::invalid_argument);  // 4^3 after one halving
}

TEST_CASE("multi-level dictionaries are coarsest-first and match per-level rebuilds") {
  BinaryVolume hr = oracle::random_binary({32, 32, 32}, 2.35, 0.3, 21);
  ScalePlan p = plan(9.4, 2.35, 8, 32);
  REQUIRE(p.m_max == 2);
  auto dicts = build_multi_epd(hr, p);
  REQUIRE(dicts.size() == 2);
  CHECK(dicts[0].level == 2);
  CHECK(dicts[1].level == 1);
  for (const auto& d : dicts) {
    EdgePatternDictionary ref = build_epd(hr, d.level);
    REQUIRE(d.classes.size() == ref.classes.size());
    for (size_t i = 0; i < d.classes.size(); ++i) {
      CHECK(d.classes[i].code == ref.classes[i].code);
      CHECK(d.classes[i].fills == ref.classes[i].fills);
    }
  }
}

TEST_CASE("dictionary construction is deterministic") {
  BinaryVolume hr = oracle::random_binary({16, 16, 16}, 1.0, 0.5, 8);
  auto a = build_epd(hr, 1);
  auto b = build_epd(hr, 1);
  REQUIRE(a.classes.size() == b.classes.size());
  for (size_t i = 0; i < a.classes.size(); ++i) {
    CHECK(a.classes[i].code == b.classes[i].code);
    CHECK(a.classes[i].fills == b.classes[i].fills);
  }
}

TEST_CASE("EPD serialization round trip") {
  auto dir = std::filesystem::temp_directory_path() / "porevox_dict_tests";
  std::filesystem::create_directories(dir);
  BinaryVolume hr = oracle::random_binary({10, 10, 10}, 2.0, 0.4, 17);
  EdgePatternDictionary epd = build_epd(hr, 1);
  save_epd(epd, (dir / "d.epd").string());
  EdgePatternDictionary back = load_epd((dir / "d.epd").string());
  CHECK(back.level == epd.level);
  CHECK(back.source_scale_um == doctest::Approx(epd.source_scale_um));
  REQUIRE(back.classes.size() == epd.classes.size());
  for (size_t i = 0; i < epd.classes.size(); ++i) {
    CHECK(back.classes[i].code == epd.classes[i].code);
    CHECK(back.classes[i].fills == epd.classes[i].fills);
  }
}

// ---------------------------------------------------------------------------
// Micro-pore dictionary
// ---------------------------------------------------------------------------

TEST_CASE("MPD of an all-rock volume is empty") {
  BinaryVolume v = make_binary({16, 16, 16}, 2.35);
  ScalePlan p = plan(9.4, 2.35, 4, 16);
  CHECK(build_mpd(v, p).elements.empty());
}

TEST_CASE("MPD excludes components outside cc_range") {
  ScalePlan p = plan(9.4, 2.35, 16, 64);
  REQUIRE(p.cc_lo == 1);
  REQUIRE(p.cc_hi == 64);
  BinaryVolume v = make_binary({64, 64, 64}, 2.35);
  // 4x4x4 = 64 voxels, inside the range
  for (int64_t z = 1; z < 5; ++z)
    for (int64_t y = 1; y < 5; ++y)
      for (int64_t x = 1; x < 5; ++x) v.at(x, y, z) = 1;
  // 65-voxel component, outside
  for (int64_t z = 20; z < 24; ++z)
    for (int64_t y = 20; y < 24; ++y)
      for (int64_t x = 20; x < 24; ++x) v.at(x, y, z) = 1;
  v.at(24, 23, 23) = 1;
  MicroPoreDictionary mpd = build_mpd(v, p);
  REQUIRE(mpd.elements.size() == 1);
  CHECK(mpd.elements[0].voxel_count == 64);
  CHECK(mpd.elements[0].bbox == Dims{4, 4, 4});
}

TEST_CASE("MPD equals flood-fill + size-filter oracle on a random volume") {
  BinaryVolume v = oracle::random_binary({32, 32, 32}, 2.35, 0.15, 31);
  ScalePlan p = plan(9.4, 2.35, 8, 32);
  MicroPoreDictionary mpd = build_mpd(v, p);

  int32_t n = 0;
  auto labels = oracle::flood_fill_labels(v, 26, &n);
  std::vector<int64_t> sizes((size_t)n + 1, 0);
  for (int32_t l : labels)
    if (l) sizes[(size_t)l]++;
  std::multiset<int64_t> expected, got;
  for (int32_t l = 1; l <= n; ++l)
    if (sizes[(size_t)l] >= p.cc_lo && sizes[(size_t)l] <= p.cc_hi)
      expected.insert(sizes[(size_t)l]);
  for (const auto& el : mpd.elements) {
    got.insert(el.voxel_count);
    int64_t mask_count = 0;
    for (uint8_t m : el.mask) mask_count += m;
    CHECK(mask_count == el.voxel_count);
  }
  CHECK(got == expected);
}

TEST_CASE("each MPD element is a single connected component in isolation") {
  BinaryVolume v = oracle::random_binary({24, 24, 24}, 2.35, 0.2, 55);
  ScalePlan p = plan(9.4, 2.35, 6, 24);
  MicroPoreDictionary mpd = build_mpd(v, p);
  REQUIRE(!mpd.elements.empty());
  for (const auto& el : mpd.elements) {
    BinaryVolume probe = make_binary({el.bbox.nx + 2, el.bbox.ny + 2, el.bbox.nz + 2}, 1.0);
    for (int64_t z = 0; z < el.bbox.nz; ++z)
      for (int64_t y = 0; y < el.bbox.ny; ++y)
        for (int64_t x = 0; x < el.bbox.nx; ++x)
          probe.at(x + 1, y + 1, z + 1) =
              el.mask[(size_t)voxel_index(el.bbox, x, y, z)];
    int32_t n = 0;
    oracle::flood_fill_labels(probe, 26, &n);
    CHECK(n == 1);
    CHECK(probe.pore_count() == el.voxel_count);
  }
}

TEST_CASE("MPD serialization round trip") {
  auto dir = std::filesystem::temp_directory_path() / "porevox_dict_tests";
  std::filesystem::create_directories(dir);
  BinaryVolume v = oracle::random_binary({20, 20, 20}, 2.35, 0.2, 4);
  ScalePlan p = plan(9.4, 2.35, 5, 20);
  MicroPoreDictionary mpd = build_mpd(v, p);
  save_mpd(mpd, (dir / "m.mpd").string());
  MicroPoreDictionary back = load_mpd((dir / "m.mpd").string());
  REQUIRE(back.elements.size() == mpd.elements.size());
  for (size_t i = 0; i < mpd.elements.size(); ++i) {
    CHECK(back.elements[i].bbox == mpd.elements[i].bbox);
    CHECK(back.elements[i].mask == mpd.elements[i].mask);
    CHECK(back.elements[i].voxel_count == mpd.elements[i].voxel_count);
  }
}
