#ifndef POREVOX_SCALE_PLAN_HPP
#define POREVOX_SCALE_PLAN_HPP

// Length-scale arithmetic: field of view, legal upsampling stage counts,
// dictionary levels, output resolution, micro-pore size range, and padding
// multiplicity.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <json.hpp>

namespace porevox {

constexpr int kTemplateSize = 5;

// Relative tolerance keeping exact power-of-two scale ratios stable across
// serialization round trips.
constexpr double kScaleRelTol = 1e-9;

inline double fov(double length_scale_um, int64_t size_voxels) {
  if (length_scale_um <= 0 || size_voxels <= 0)
    throw std::invalid_argument("fov: non-positive input");
  return length_scale_um * (double)size_voxels;
}

struct StageSpec {
  int stage = 0;           // 1-based reconstruction stage
  double input_scale_um = 0;
  int dict_level = 0;      // dictionary level consumed by this stage
};

struct ScalePlan {
  double lr_scale_um = 0;  // iL of the low-resolution input
  double hr_scale_um = 0;  // iL of the high-resolution dictionary source
  int64_t lr_size = 0;     // voxels per axis
  int64_t hr_size = 0;
  int n_max = 0;           // max upsampling stages
  int m_max = 0;           // dictionary levels
  std::vector<StageSpec> stages;
  double out_scale_um = 0; // lr_scale / 2^m_max
  int64_t cc_lo = 0, cc_hi = 0;  // inclusive micro-pore voxel-count range
  int64_t pad_multiplicity = 1;
};

namespace detail {

inline int64_t ceil_tol(double x) {
  return (int64_t)std::ceil(x - kScaleRelTol * std::fabs(x) - 1e-12);
}

// Largest k with 2^k * small <= big, honoring the relative tolerance so an
// exact power-of-two ratio picks the larger count.
inline int max_doublings(double small, double big) {
  int k = 0;
  double s = small;
  while (s * 2.0 <= big * (1.0 + kScaleRelTol)) {
    s *= 2.0;
    ++k;
  }
  return k;
}

}  // namespace detail

inline ScalePlan plan(double lr_scale_um, double hr_scale_um, int64_t lr_size,
                      int64_t hr_size, int template_size = kTemplateSize) {
  if (lr_scale_um <= 0 || hr_scale_um <= 0 || lr_size <= 0 || hr_size <= 0)
    throw std::invalid_argument("plan: non-positive input");
  if (lr_scale_um < hr_scale_um * (1.0 - kScaleRelTol))
    throw std::invalid_argument("plan: nothing to reconstruct (LR finer than HR)");

  ScalePlan p;
  p.lr_scale_um = lr_scale_um;
  p.hr_scale_um = hr_scale_um;
  p.lr_size = lr_size;
  p.hr_size = hr_size;

  p.n_max = detail::max_doublings(hr_scale_um, lr_scale_um);
  if (p.n_max == 0)
    throw std::invalid_argument("plan: nothing to reconstruct (scales equal)");

  // Dictionary levels: scale bound plus the template-size bound on the
  // downsampled HR volume.
  int m = p.n_max;
  while (m > 0 && (double)hr_size / std::pow(2.0, m) < (double)template_size)
    --m;
  if (m == 0)
    throw std::invalid_argument("plan: HR volume too small for template");
  p.m_max = m;

  p.out_scale_um = lr_scale_um / std::pow(2.0, p.m_max);
  for (int k = 1; k <= p.m_max; ++k)
    p.stages.push_back({k, lr_scale_um / std::pow(2.0, k - 1), p.m_max - k + 1});

  p.cc_lo = detail::ceil_tol(p.out_scale_um / hr_scale_um);
  p.cc_lo = p.cc_lo * p.cc_lo * p.cc_lo;
  if (p.cc_lo < 1) p.cc_lo = 1;
  p.cc_hi = detail::ceil_tol(lr_scale_um / hr_scale_um);
  p.cc_hi = p.cc_hi * p.cc_hi * p.cc_hi;
  if (p.cc_hi < p.cc_lo) p.cc_hi = p.cc_lo;

  double fov_ratio = (lr_scale_um * (double)lr_size) / (hr_scale_um * (double)hr_size);
  p.pad_multiplicity = (int64_t)std::llround(fov_ratio * fov_ratio * fov_ratio);
  if (p.pad_multiplicity < 1) p.pad_multiplicity = 1;
  return p;
}

inline void to_json(nlohmann::json& j, const StageSpec& s) {
  j = {{"stage", s.stage},
       {"input_scale_um", s.input_scale_um},
       {"dict_level", s.dict_level}};
}

inline void from_json(const nlohmann::json& j, StageSpec& s) {
  j.at("stage").get_to(s.stage);
  j.at("input_scale_um").get_to(s.input_scale_um);
  j.at("dict_level").get_to(s.dict_level);
}

inline void to_json(nlohmann::json& j, const ScalePlan& p) {
  j = {{"lr_scale_um", p.lr_scale_um},
       {"hr_scale_um", p.hr_scale_um},
       {"lr_size", p.lr_size},
       {"hr_size", p.hr_size},
       {"n_max", p.n_max},
       {"m_max", p.m_max},
       {"stages", p.stages},
       {"out_scale_um", p.out_scale_um},
       {"cc_range", {p.cc_lo, p.cc_hi}},
       {"pad_multiplicity", p.pad_multiplicity}};
}

inline void from_json(const nlohmann::json& j, ScalePlan& p) {
  j.at("lr_scale_um").get_to(p.lr_scale_um);
  j.at("hr_scale_um").get_to(p.hr_scale_um);
  j.at("lr_size").get_to(p.lr_size);
  j.at("hr_size").get_to(p.hr_size);
  j.at("n_max").get_to(p.n_max);
  j.at("m_max").get_to(p.m_max);
  j.at("stages").get_to(p.stages);
  j.at("out_scale_um").get_to(p.out_scale_um);
  p.cc_lo = j.at("cc_range")[0].get<int64_t>();
  p.cc_hi = j.at("cc_range")[1].get<int64_t>();
  j.at("pad_multiplicity").get_to(p.pad_multiplicity);
}

}  // namespace porevox

#endif  // POREVOX_SCALE_PLAN_HPP
