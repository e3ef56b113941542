// porevox command-line interface.
//
// Subcommands: plan, build-dicts, reconstruct, pad, metrics, simulate-pair,
// pipeline. See README.md for the config file key set.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "porevox/porevox.hpp"

namespace pv = porevox;

namespace {

pv::PipelineConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("config not found: " + path);
  nlohmann::json j;
  f >> j;
  return pv::PipelineConfig::from_json(j);
}

std::vector<pv::EdgePatternDictionary> load_dicts(const std::vector<std::string>& paths) {
  std::vector<pv::EdgePatternDictionary> dicts;
  for (const auto& p : paths) dicts.push_back(pv::load_epd(p));
  // coarsest (highest level) first
  std::sort(dicts.begin(), dicts.end(),
            [](const auto& a, const auto& b) { return a.level > b.level; });
  return dicts;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"porevox: multiscale pore-structure reconstruction"};
  app.require_subcommand(1);

  // plan
  auto* plan_cmd = app.add_subcommand("plan", "Compute the stage/scale plan");
  double lr_scale = 0, hr_scale = 0;
  int64_t lr_size = 0, hr_size = 0;
  plan_cmd->add_option("--lr-scale", lr_scale, "LR voxel length, um")->required();
  plan_cmd->add_option("--hr-scale", hr_scale, "HR voxel length, um")->required();
  plan_cmd->add_option("--lr-size", lr_size, "LR voxels per axis")->required();
  plan_cmd->add_option("--hr-size", hr_size, "HR voxels per axis")->required();
  std::string plan_out;
  plan_cmd->add_option("--out", plan_out, "Write plan JSON here");

  // build-dicts
  auto* dicts_cmd = app.add_subcommand("build-dicts", "Build EPDs and MPD from an HR volume");
  std::string dict_hr, dict_out = ".";
  double dict_lr_scale = 0;
  int64_t dict_lr_size = 0;
  dicts_cmd->add_option("--hr", dict_hr, "HR binary volume (.raw)")->required();
  dicts_cmd->add_option("--lr-scale", dict_lr_scale, "Target LR voxel length, um")->required();
  dicts_cmd->add_option("--lr-size", dict_lr_size, "LR voxels per axis")->required();
  dicts_cmd->add_option("--out", dict_out, "Output directory");

  // reconstruct
  auto* rec_cmd = app.add_subcommand("reconstruct", "Staged edge reconstruction");
  std::string rec_lr, rec_out = "pms.raw";
  std::vector<std::string> rec_dicts;
  uint64_t rec_seed = 0;
  bool rec_single = false;
  rec_cmd->add_option("--lr", rec_lr, "LR binary volume (.raw)")->required();
  rec_cmd->add_option("--epd", rec_dicts, "EPD files (any order)")->required();
  rec_cmd->add_option("--out", rec_out, "Output volume path");
  rec_cmd->add_option("--seed", rec_seed, "RNG seed");
  rec_cmd->add_flag("--baseline", rec_single, "Use the finest EPD at every stage");

  // pad
  auto* pad_cmd = app.add_subcommand("pad", "Micro-pore padding");
  std::string pad_in, pad_mpd, pad_plan, pad_out = "ms.raw";
  uint64_t pad_seed = 0;
  pad_cmd->add_option("--pms", pad_in, "Reconstructed volume (.raw)")->required();
  pad_cmd->add_option("--mpd", pad_mpd, "Micro-pore dictionary file")->required();
  pad_cmd->add_option("--plan", pad_plan, "Plan JSON")->required();
  pad_cmd->add_option("--out", pad_out, "Output volume path");
  pad_cmd->add_option("--seed", pad_seed, "RNG seed");

  // metrics
  auto* met_cmd = app.add_subcommand("metrics", "Metrics report for a volume");
  std::string met_in, met_out;
  int64_t met_lag = 32;
  met_cmd->add_option("--volume", met_in, "Binary volume (.raw)")->required();
  met_cmd->add_option("--max-lag", met_lag, "Max S2 lag, voxels");
  met_cmd->add_option("--out", met_out, "Write report JSON here (default stdout)");

  // simulate-pair
  auto* sim_cmd = app.add_subcommand("simulate-pair", "Cut an HR/LR pair from a source volume");
  std::string sim_src, sim_out = ".";
  std::vector<int64_t> sim_cut{64, 64, 64};
  int64_t sim_factor = 4;
  uint64_t sim_seed = 0;
  sim_cmd->add_option("--source", sim_src, "Source volume (.raw); empty = sphere pack");
  sim_cmd->add_option("--cut", sim_cut, "Cut dims (3 values)")->expected(3);
  sim_cmd->add_option("--factor", sim_factor, "Downsample factor");
  sim_cmd->add_option("--seed", sim_seed, "RNG seed");
  sim_cmd->add_option("--out", sim_out, "Output directory");

  // pipeline
  auto* pipe_cmd = app.add_subcommand("pipeline", "Run the full pipeline from a config file");
  std::string pipe_cfg;
  std::string pipe_out;
  uint64_t pipe_seed = 0;
  bool pipe_baseline = false;
  int pipe_repeats = 0;
  pipe_cmd->add_option("--config", pipe_cfg, "Config file (JSON)")->required();
  pipe_cmd->add_option("--out", pipe_out, "Override output directory");
  pipe_cmd->add_option("--seed", pipe_seed, "Override seed");
  pipe_cmd->add_flag("--baseline", pipe_baseline, "Also run the single-EPD branch");
  pipe_cmd->add_option("--repeats", pipe_repeats, "Repeat count with derived seeds");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*plan_cmd) {
      pv::ScalePlan p = pv::plan(lr_scale, hr_scale, lr_size, hr_size);
      nlohmann::json j = p;
      std::printf("n_max=%d m_max=%d out_scale_um=%.6g cc_range=[%lld,%lld] pad=%lld\n",
                  p.n_max, p.m_max, p.out_scale_um, (long long)p.cc_lo,
                  (long long)p.cc_hi, (long long)p.pad_multiplicity);
      if (!plan_out.empty()) pv::detail::write_json(plan_out, j);
    } else if (*dicts_cmd) {
      pv::BinaryVolume hr = pv::load_binary(dict_hr);
      int64_t hr_min = std::min({hr.dims.nx, hr.dims.ny, hr.dims.nz});
      pv::ScalePlan p = pv::plan(dict_lr_scale, hr.scale_um, dict_lr_size, hr_min);
      std::filesystem::create_directories(dict_out);
      pv::detail::write_json(std::filesystem::path(dict_out) / "plan.json", nlohmann::json(p));
      auto dicts = pv::build_multi_epd(hr, p);
      for (const auto& epd : dicts) {
        std::string name = dict_out + "/epd_level" + std::to_string(epd.level) + ".epd";
        pv::save_epd(epd, name);
        std::printf("level %d: %zu classes, %zu fills -> %s\n", epd.level,
                    epd.classes.size(), epd.fill_count(), name.c_str());
      }
      pv::MicroPoreDictionary mpd = pv::build_mpd(hr, p);
      pv::save_mpd(mpd, dict_out + "/mpd.mpd");
      std::printf("mpd: %zu elements, cc_range=[%lld,%lld]\n", mpd.elements.size(),
                  (long long)p.cc_lo, (long long)p.cc_hi);
    } else if (*rec_cmd) {
      pv::BinaryVolume lri = pv::load_binary(rec_lr);
      auto dicts = load_dicts(rec_dicts);
      pv::ReconstructionConfig rc;
      rc.seed = rec_seed;
      rc.single_epd_baseline = rec_single;
      pv::ReconstructionReport rr;
      pv::BinaryVolume out = pv::reconstruct_multistage(lri, dicts, rc, &rr);
      pv::save_volume(out, rec_out);
      for (size_t k = 0; k < rr.stages.size(); ++k)
        std::printf("stage %zu: %lld blocks, exact-match rate %.3f\n", k + 1,
                    (long long)rr.stages[k].blocks,
                    rr.stages[k].blocks
                        ? (double)rr.stages[k].exact_skeleton_hits / (double)rr.stages[k].blocks
                        : 0.0);
    } else if (*pad_cmd) {
      pv::BinaryVolume pms = pv::load_binary(pad_in);
      pv::MicroPoreDictionary mpd = pv::load_mpd(pad_mpd);
      std::ifstream pf(pad_plan);
      if (!pf) throw std::runtime_error("plan not found: " + pad_plan);
      nlohmann::json pj;
      pf >> pj;
      pv::ScalePlan p = pj.get<pv::ScalePlan>();
      pv::ReconstructionConfig rc;
      rc.seed = pad_seed;
      pv::ReconstructionReport rr;
      pv::BinaryVolume ms = pv::pad_micropores(pms, mpd, p, rc, &rr);
      pv::save_volume(ms, pad_out);
      std::printf("placed %lld, skipped %lld\n", (long long)rr.placements_ok,
                  (long long)rr.placements_skipped);
    } else if (*met_cmd) {
      pv::BinaryVolume v = pv::load_binary(met_in);
      std::vector<double> bins;
      for (int i = 0; i <= 8; ++i) bins.push_back(v.scale_um * (double)i);
      pv::MetricsReport r = pv::compute_metrics(v, met_in, met_lag, bins);
      nlohmann::json j = r;
      if (met_out.empty())
        std::cout << j.dump(2) << "\n";
      else
        pv::detail::write_json(met_out, j);
    } else if (*sim_cmd) {
      pv::Dims cut{sim_cut[0], sim_cut[1], sim_cut[2]};
      std::filesystem::create_directories(sim_out);
      pv::SimulationPair pair;
      if (sim_src.empty()) {
        pv::SpherePackParams sp;
        sp.seed = sim_seed;
        pair = pv::make_simulation_pair(pv::make_sphere_pack(sp), cut, sim_factor, sim_seed);
      } else {
        auto any = pv::load_volume(sim_src);
        if (std::holds_alternative<pv::GrayVolume>(any))
          pair = pv::make_simulation_pair(std::get<pv::GrayVolume>(any), cut, sim_factor,
                                          sim_seed);
        else
          pair = pv::make_simulation_pair(std::get<pv::BinaryVolume>(any), cut, sim_factor,
                                          sim_seed);
      }
      pv::save_volume(pair.hr, sim_out + "/hr.raw");
      pv::save_volume(pair.sim_lr, sim_out + "/lri.raw");
      std::printf("hr %lldx%lldx%lld @ %.4g um, lri %lldx%lldx%lld @ %.4g um\n",
                  (long long)pair.hr.dims.nx, (long long)pair.hr.dims.ny,
                  (long long)pair.hr.dims.nz, pair.hr.scale_um,
                  (long long)pair.sim_lr.dims.nx, (long long)pair.sim_lr.dims.ny,
                  (long long)pair.sim_lr.dims.nz, pair.sim_lr.scale_um);
    } else if (*pipe_cmd) {
      pv::PipelineConfig cfg = load_config(pipe_cfg);
      if (!pipe_out.empty()) cfg.out_dir = pipe_out;
      if (pipe_cmd->count("--seed")) cfg.recon.seed = pipe_seed;
      if (pipe_baseline) cfg.baseline = true;
      if (pipe_repeats > 0) cfg.repeats = pipe_repeats;
      std::string dir = pv::run_pipeline(cfg);
      std::printf("run directory: %s\n", dir.c_str());
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error (invalid input): %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
