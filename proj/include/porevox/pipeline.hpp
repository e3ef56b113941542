#ifndef POREVOX_PIPELINE_HPP
#define POREVOX_PIPELINE_HPP

// End-to-end pipeline orchestration: simulation-pair preparation, the
// synthetic sphere-pack fixture generator, and the run-directory emitter.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "porevox/dictionary.hpp"
#include "porevox/metrics.hpp"
#include "porevox/ops.hpp"
#include "porevox/reconstruct.hpp"
#include "porevox/scale_plan.hpp"
#include "porevox/volume.hpp"

namespace porevox {

// ---------------------------------------------------------------------------
// Synthetic fixture: random sphere pack (pore spheres in rock)
// ---------------------------------------------------------------------------

struct SpherePackParams {
  Dims dims{224, 96, 96};  // room for two disjoint 96^3 cuts along x
  double scale_um = 2.35;
  int sphere_count = 180;
  double r_min = 4.0, r_max = 10.0;  // voxel units
  int micro_count = 200;             // small single-voxel-scale pores
  double micro_r_max = 1.6;
  uint64_t seed = 1;
};

inline BinaryVolume make_sphere_pack(const SpherePackParams& p) {
  BinaryVolume v = make_binary(p.dims, p.scale_um);
  std::mt19937_64 rng(p.seed);
  std::uniform_real_distribution<double> ux(0, (double)p.dims.nx);
  std::uniform_real_distribution<double> uy(0, (double)p.dims.ny);
  std::uniform_real_distribution<double> uz(0, (double)p.dims.nz);

  auto carve = [&](double cx, double cy, double cz, double r) {
    int64_t x0 = std::max<int64_t>(0, (int64_t)(cx - r) - 1);
    int64_t x1 = std::min<int64_t>(p.dims.nx - 1, (int64_t)(cx + r) + 1);
    int64_t y0 = std::max<int64_t>(0, (int64_t)(cy - r) - 1);
    int64_t y1 = std::min<int64_t>(p.dims.ny - 1, (int64_t)(cy + r) + 1);
    int64_t z0 = std::max<int64_t>(0, (int64_t)(cz - r) - 1);
    int64_t z1 = std::min<int64_t>(p.dims.nz - 1, (int64_t)(cz + r) + 1);
    for (int64_t z = z0; z <= z1; ++z)
      for (int64_t y = y0; y <= y1; ++y)
        for (int64_t x = x0; x <= x1; ++x) {
          double dx = (double)x - cx, dy = (double)y - cy, dz = (double)z - cz;
          if (dx * dx + dy * dy + dz * dz <= r * r) v.at(x, y, z) = 1;
        }
  };

  std::uniform_real_distribution<double> ur(p.r_min, p.r_max);
  for (int i = 0; i < p.sphere_count; ++i) carve(ux(rng), uy(rng), uz(rng), ur(rng));
  std::uniform_real_distribution<double> um(0.5, p.micro_r_max);
  for (int i = 0; i < p.micro_count; ++i) carve(ux(rng), uy(rng), uz(rng), um(rng));
  return v;
}

// ---------------------------------------------------------------------------
// Simulation pair: two disjoint cuts, one downsampled
// ---------------------------------------------------------------------------

struct SimulationPair {
  BinaryVolume hr;
  BinaryVolume sim_lr;
  std::array<int64_t, 3> hr_offset{}, lr_offset{};
};

namespace detail {

template <typename Vol>
Vol cut_volume(const Vol& src, const Dims& cut, int64_t ox, int64_t oy, int64_t oz) {
  Vol out;
  out.dims = cut;
  out.scale_um = src.scale_um;
  if constexpr (std::is_same_v<Vol, GrayVolume>) out.bit_depth = src.bit_depth;
  out.data.resize((size_t)cut.count());
  for (int64_t z = 0; z < cut.nz; ++z)
    for (int64_t y = 0; y < cut.ny; ++y)
      for (int64_t x = 0; x < cut.nx; ++x)
        out.data[(size_t)voxel_index(cut, x, y, z)] = src.at(ox + x, oy + y, oz + z);
  return out;
}

inline bool boxes_overlap(const std::array<int64_t, 3>& a, const std::array<int64_t, 3>& b,
                          const Dims& cut) {
  for (int i = 0; i < 3; ++i) {
    int64_t len = i == 0 ? cut.nx : i == 1 ? cut.ny : cut.nz;
    if (a[(size_t)i] + len <= b[(size_t)i] || b[(size_t)i] + len <= a[(size_t)i])
      return false;
  }
  return true;
}

}  // namespace detail

// Cut two disjoint sub-volumes at seeded random offsets; the second is
// downsampled by `factor` (and Otsu-thresholded when the source is
// grayscale) to become the simulated low-resolution input.
template <typename Vol>
SimulationPair make_simulation_pair(const Vol& source, const Dims& cut, int64_t factor,
                                    uint64_t seed, bool pores_are_dark = true) {
  const Dims& sd = source.dims;
  if (cut.nx > sd.nx || cut.ny > sd.ny || cut.nz > sd.nz)
    throw std::invalid_argument("make_simulation_pair: source too small for cut");
  if (cut.nx % factor || cut.ny % factor || cut.nz % factor)
    throw std::invalid_argument("make_simulation_pair: factor must divide cut dims");
  // disjointness must be achievable along at least one axis
  if (2 * cut.nx > sd.nx && 2 * cut.ny > sd.ny && 2 * cut.nz > sd.nz)
    throw std::invalid_argument("make_simulation_pair: no room for two disjoint cuts");

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int64_t> ux(0, sd.nx - cut.nx);
  std::uniform_int_distribution<int64_t> uy(0, sd.ny - cut.ny);
  std::uniform_int_distribution<int64_t> uz(0, sd.nz - cut.nz);
  auto draw = [&]() {
    return std::array<int64_t, 3>{ux(rng), uy(rng), uz(rng)};
  };

  auto a = draw();
  auto b = draw();
  int attempts = 0;
  while (detail::boxes_overlap(a, b, cut)) {
    if (++attempts > 100000) {  // degenerate geometry: fall back to opposite corners
      a = {0, 0, 0};
      b = {sd.nx - cut.nx, sd.ny - cut.ny, sd.nz - cut.nz};
      break;
    }
    b = draw();
  }

  SimulationPair pair;
  pair.hr_offset = a;
  pair.lr_offset = b;

  auto hr_cut = detail::cut_volume(source, cut, a[0], a[1], a[2]);
  auto lr_cut = detail::cut_volume(source, cut, b[0], b[1], b[2]);

  if constexpr (std::is_same_v<Vol, GrayVolume>) {
    pair.hr = otsu_threshold(hr_cut, pores_are_dark);
    pair.sim_lr = otsu_threshold(downsample_mean(lr_cut, factor), pores_are_dark);
  } else {
    pair.hr = hr_cut;
    pair.sim_lr = downsample_mean(lr_cut, factor);
  }
  return pair;
}

// ---------------------------------------------------------------------------
// Pipeline configuration and run directory
// ---------------------------------------------------------------------------

struct PipelineConfig {
  std::string mode = "simulation";  // "simulation" | "real"
  std::string hr_path;              // real mode: HR input volume
  std::string lr_path;              // real mode: LR input volume
  std::string source_path;          // simulation mode: source volume (optional;
                                    // empty = built-in sphere pack)
  Dims cut{96, 96, 96};             // simulation cut dims
  int64_t factor = 4;               // simulation downsample factor
  std::string out_dir = "run";
  ReconstructionConfig recon;
  bool pores_are_dark = true;
  bool baseline = false;            // also run the single-EPD branch
  int repeats = 1;
  int64_t max_lag = 32;
  std::vector<double> bins_um;      // pore-radius bin edges; empty = auto
  SpherePackParams sphere;          // built-in fixture parameters

  static PipelineConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

inline PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
  PipelineConfig c;
  c.mode = j.value("mode", c.mode);
  c.hr_path = j.value("hr_path", c.hr_path);
  c.lr_path = j.value("lr_path", c.lr_path);
  c.source_path = j.value("source_path", c.source_path);
  if (j.contains("cut")) {
    c.cut.nx = j["cut"][0].get<int64_t>();
    c.cut.ny = j["cut"][1].get<int64_t>();
    c.cut.nz = j["cut"][2].get<int64_t>();
  }
  c.factor = j.value("factor", c.factor);
  c.out_dir = j.value("out_dir", c.out_dir);
  c.recon.seed = j.value("seed", (uint64_t)0);
  c.recon.tie_break = j.value("tie_break", std::string("seeded-random")) == "first"
                          ? TieBreak::First
                          : TieBreak::SeededRandom;
  c.recon.dilation_radius = j.value("dilation_radius", 1);
  c.recon.max_placement_attempts = j.value("max_placement_attempts", 1000);
  c.recon.connectivity =
      j.value("connectivity", 26) == 6 ? Connectivity::Faces6 : Connectivity::Full26;
  c.pores_are_dark = j.value("pores_are_dark", true);
  c.baseline = j.value("baseline", false);
  c.repeats = j.value("repeats", 1);
  c.max_lag = j.value("max_lag", (int64_t)32);
  if (j.contains("bins_um")) c.bins_um = j["bins_um"].get<std::vector<double>>();
  if (j.contains("sphere")) {
    const auto& s = j["sphere"];
    if (s.contains("dims")) {
      c.sphere.dims.nx = s["dims"][0].get<int64_t>();
      c.sphere.dims.ny = s["dims"][1].get<int64_t>();
      c.sphere.dims.nz = s["dims"][2].get<int64_t>();
    }
    c.sphere.scale_um = s.value("scale_um", c.sphere.scale_um);
    c.sphere.sphere_count = s.value("sphere_count", c.sphere.sphere_count);
    c.sphere.r_min = s.value("r_min", c.sphere.r_min);
    c.sphere.r_max = s.value("r_max", c.sphere.r_max);
    c.sphere.micro_count = s.value("micro_count", c.sphere.micro_count);
    c.sphere.micro_r_max = s.value("micro_r_max", c.sphere.micro_r_max);
    c.sphere.seed = s.value("seed", c.sphere.seed);
  }
  return c;
}

inline nlohmann::json PipelineConfig::to_json() const {
  nlohmann::json j;
  j["mode"] = mode;
  j["hr_path"] = hr_path;
  j["lr_path"] = lr_path;
  j["source_path"] = source_path;
  j["cut"] = {cut.nx, cut.ny, cut.nz};
  j["factor"] = factor;
  j["out_dir"] = out_dir;
  j["seed"] = recon.seed;
  j["tie_break"] = recon.tie_break == TieBreak::First ? "first" : "seeded-random";
  j["dilation_radius"] = recon.dilation_radius;
  j["max_placement_attempts"] = recon.max_placement_attempts;
  j["connectivity"] = recon.connectivity == Connectivity::Faces6 ? 6 : 26;
  j["pores_are_dark"] = pores_are_dark;
  j["baseline"] = baseline;
  j["repeats"] = repeats;
  j["max_lag"] = max_lag;
  j["bins_um"] = bins_um;
  j["sphere"] = {{"dims", {sphere.dims.nx, sphere.dims.ny, sphere.dims.nz}},
                 {"scale_um", sphere.scale_um},
                 {"sphere_count", sphere.sphere_count},
                 {"r_min", sphere.r_min},
                 {"r_max", sphere.r_max},
                 {"micro_count", sphere.micro_count},
                 {"micro_r_max", sphere.micro_r_max},
                 {"seed", sphere.seed}};
  return j;
}

namespace detail {

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << text;
}

inline void write_json(const std::filesystem::path& p, const nlohmann::json& j) {
  write_text(p, j.dump(2) + "\n");
}

}  // namespace detail

// Runs the full flow into cfg.out_dir: plan, dictionaries, staged volumes,
// padded volume, metrics, comparison, manifest. Timings go to a separate
// timings.json so everything else is byte-reproducible for a fixed seed.
// Returns the run directory path.
inline std::string run_pipeline(const PipelineConfig& cfg) {
  namespace fs = std::filesystem;
  using clock = std::chrono::steady_clock;
  fs::path dir(cfg.out_dir);
  fs::create_directories(dir);

  if (cfg.repeats > 1) {
    // per-repeat seeds at fixed offsets from the master seed
    for (int r = 0; r < cfg.repeats; ++r) {
      PipelineConfig rep = cfg;
      rep.repeats = 1;
      rep.recon.seed = cfg.recon.seed + (uint64_t)r * 1000;
      rep.out_dir = (dir / ("rep" + std::to_string(r))).string();
      run_pipeline(rep);
    }
    nlohmann::json top;
    top["repeats"] = cfg.repeats;
    top["master_seed"] = cfg.recon.seed;
    detail::write_json(dir / "manifest.json", top);
    return dir.string();
  }

  nlohmann::json manifest;
  manifest["artifacts"] = nlohmann::json::array();
  auto note = [&](const std::string& name) { manifest["artifacts"].push_back(name); };
  nlohmann::json timings = nlohmann::json::object();

  try {
    detail::write_json(dir / "config_echo.json", cfg.to_json());
    note("config_echo.json");

    // --- inputs ---
    BinaryVolume hr, lri;
    bool have_hr_reference = false;
    if (cfg.mode == "simulation") {
      BinaryVolume source;
      if (!cfg.source_path.empty()) {
        auto any = load_volume(cfg.source_path);
        if (std::holds_alternative<GrayVolume>(any)) {
          auto pair = make_simulation_pair(std::get<GrayVolume>(any), cfg.cut, cfg.factor,
                                           cfg.recon.seed, cfg.pores_are_dark);
          hr = std::move(pair.hr);
          lri = std::move(pair.sim_lr);
        } else {
          auto pair = make_simulation_pair(std::get<BinaryVolume>(any), cfg.cut, cfg.factor,
                                           cfg.recon.seed);
          hr = std::move(pair.hr);
          lri = std::move(pair.sim_lr);
        }
      } else {
        SpherePackParams sp = cfg.sphere;
        BinaryVolume pack = make_sphere_pack(sp);
        auto pair = make_simulation_pair(pack, cfg.cut, cfg.factor, cfg.recon.seed);
        hr = std::move(pair.hr);
        lri = std::move(pair.sim_lr);
      }
      have_hr_reference = true;
    } else if (cfg.mode == "real") {
      hr = load_binary(cfg.hr_path);
      lri = load_binary(cfg.lr_path);
    } else {
      throw std::invalid_argument("run_pipeline: unknown mode '" + cfg.mode + "'");
    }
    save_volume(hr, (dir / "hr.raw").string());
    note("hr.raw");
    save_volume(lri, (dir / "lri.raw").string());
    note("lri.raw");

    // --- plan ---
    int64_t lr_size = std::min({lri.dims.nx, lri.dims.ny, lri.dims.nz});
    int64_t hr_size = std::min({hr.dims.nx, hr.dims.ny, hr.dims.nz});
    ScalePlan sp = plan(lri.scale_um, hr.scale_um, lr_size, hr_size);
    detail::write_json(dir / "plan.json", sp);
    note("plan.json");

    // --- dictionaries ---
    auto t0 = clock::now();
    auto dicts = build_multi_epd(hr, sp);
    for (const auto& epd : dicts) {
      std::string name = "epd_level" + std::to_string(epd.level) + ".epd";
      save_epd(epd, (dir / name).string());
      note(name);
    }
    MicroPoreDictionary mpd = build_mpd(hr, sp, cfg.recon.connectivity);
    save_mpd(mpd, (dir / "mpd.mpd").string());
    note("mpd.mpd");
    timings["dictionaries_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(clock::now() - t0).count();

    auto bins = cfg.bins_um;
    if (bins.empty()) {
      // auto bins: up to 8x the output voxel size
      for (int i = 0; i <= 8; ++i) bins.push_back(sp.out_scale_um * (double)i);
    }

    nlohmann::json run_report;
    run_report["seed"] = cfg.recon.seed;
    run_report["downsampling"] = "block-mean (bicubic replaced)";
    run_report["branches"] = nlohmann::json::array();

    std::vector<MetricsReport> for_compare;
    MetricsReport ref;
    if (have_hr_reference)
      ref = compute_metrics(hr, "hr", cfg.max_lag, bins, cfg.recon.connectivity);
    MetricsReport lri_metrics =
        compute_metrics(lri, "lri", cfg.max_lag, bins, cfg.recon.connectivity);
    detail::write_json(dir / "metrics_lri.json", lri_metrics);
    note("metrics_lri.json");
    if (have_hr_reference) {
      detail::write_json(dir / "metrics_hr.json", ref);
      note("metrics_hr.json");
      for_compare.push_back(lri_metrics);
    }

    // --- reconstruction branches ---
    std::vector<std::pair<std::string, bool>> branches{{"multi", false}};
    if (cfg.baseline) branches.push_back({"single", true});

    for (const auto& [branch, single] : branches) {
      ReconstructionConfig rc = cfg.recon;
      rc.single_epd_baseline = single;
      std::string suffix = branches.size() > 1 ? "_" + branch : "";

      auto t1 = clock::now();
      ReconstructionReport rr;
      BinaryVolume cur = lri;
      for (size_t k = 0; k < dicts.size(); ++k) {
        std::mt19937_64 stage_rng(rc.seed + (uint64_t)k * 0x9e3779b97f4a7c15ULL);
        const EdgePatternDictionary& epd = single ? dicts.back() : dicts[k];
        StageStats stats;
        cur = reconstruct_stage(cur, epd, rc, stage_rng, &stats);
        rr.stages.push_back(stats);
        std::string name = "pms_" + std::to_string(k + 1) + suffix + ".raw";
        save_volume(cur, (dir / name).string());
        note(name);
      }
      BinaryVolume ms = pad_micropores(cur, mpd, sp, rc, &rr);
      save_volume(ms, (dir / ("ms" + suffix + ".raw")).string());
      note("ms" + suffix + ".raw");
      timings["reconstruct" + suffix + "_ms"] =
          std::chrono::duration_cast<std::chrono::milliseconds>(clock::now() - t1).count();

      MetricsReport pms_metrics = compute_metrics(cur, "pms" + suffix, cfg.max_lag, bins,
                                                  cfg.recon.connectivity);
      MetricsReport ms_metrics =
          compute_metrics(ms, "ms" + suffix, cfg.max_lag, bins, cfg.recon.connectivity);
      detail::write_json(dir / ("metrics_pms" + suffix + ".json"), pms_metrics);
      note("metrics_pms" + suffix + ".json");
      detail::write_json(dir / ("metrics_ms" + suffix + ".json"), ms_metrics);
      note("metrics_ms" + suffix + ".json");
      for_compare.push_back(pms_metrics);
      for_compare.push_back(ms_metrics);

      nlohmann::json branch_report;
      branch_report["branch"] = branch;
      branch_report["single_epd_baseline"] = single;
      nlohmann::json stages = nlohmann::json::array();
      for (const auto& s : rr.stages)
        stages.push_back({{"blocks", s.blocks},
                          {"exact_match_rate",
                           s.blocks ? (double)s.exact_skeleton_hits / (double)s.blocks : 0.0}});
      branch_report["stages"] = stages;
      branch_report["placements_ok"] = rr.placements_ok;
      branch_report["placements_skipped"] = rr.placements_skipped;
      run_report["branches"].push_back(branch_report);
    }

    if (have_hr_reference && !for_compare.empty()) {
      ComparisonTable table = compare(ref, for_compare);
      nlohmann::json jt = table;
      detail::write_json(dir / "comparison.json", jt);
      note("comparison.json");
      detail::write_text(dir / "comparison.csv", comparison_csv(table));
      note("comparison.csv");
    }

    detail::write_json(dir / "run_report.json", run_report);
    note("run_report.json");
    manifest["status"] = "complete";
  } catch (const std::exception& e) {
    manifest["status"] = "aborted";
    manifest["error"] = e.what();
    detail::write_json(dir / "manifest.json", manifest);
    throw;
  }

  detail::write_json(dir / "manifest.json", manifest);
  detail::write_json(dir / "timings.json", timings);  // excluded from manifest
  return dir.string();
}

}  // namespace porevox

#endif  // POREVOX_PIPELINE_HPP
