#ifndef POREVOX_METRICS_HPP
#define POREVOX_METRICS_HPP

// Statistical validation: porosity, axis-aligned two-point correlation,
// connected-component size histogram, EDT-based pore-radius histogram, and
// side-by-side report comparison.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "porevox/ops.hpp"
#include "porevox/volume.hpp"

namespace porevox {

inline double porosity(const BinaryVolume& v) {
  return (double)v.pore_count() / (double)v.dims.count();
}

// Axis-aligned S2: probability that two voxels at lag r along a coordinate
// axis are both pore, averaged over the three axes. All in-domain pairs are
// counted once; no periodic wrap.
inline std::vector<double> two_point_correlation(const BinaryVolume& v, int64_t max_lag) {
  const Dims& d = v.dims;
  if (max_lag >= std::min({d.nx, d.ny, d.nz}))
    throw std::invalid_argument("two_point_correlation: max_lag out of range");

  std::vector<double> s2((size_t)max_lag + 1, 0.0);
  for (int64_t r = 0; r <= max_lag; ++r) {
    double acc = 0.0;
    // x axis
    int64_t hits = 0;
    for (int64_t z = 0; z < d.nz; ++z)
      for (int64_t y = 0; y < d.ny; ++y)
        for (int64_t x = 0; x + r < d.nx; ++x)
          hits += v.at(x, y, z) & v.at(x + r, y, z);
    acc += (double)hits / (double)((d.nx - r) * d.ny * d.nz);
    // y axis
    hits = 0;
    for (int64_t z = 0; z < d.nz; ++z)
      for (int64_t y = 0; y + r < d.ny; ++y)
        for (int64_t x = 0; x < d.nx; ++x)
          hits += v.at(x, y, z) & v.at(x, y + r, z);
    acc += (double)hits / (double)(d.nx * (d.ny - r) * d.nz);
    // z axis
    hits = 0;
    for (int64_t z = 0; z + r < d.nz; ++z)
      for (int64_t y = 0; y < d.ny; ++y)
        for (int64_t x = 0; x < d.nx; ++x)
          hits += v.at(x, y, z) & v.at(x, y, z + r);
    acc += (double)hits / (double)(d.nx * d.ny * (d.nz - r));
    s2[(size_t)r] = acc / 3.0;
  }
  return s2;
}

inline std::map<int64_t, int64_t> cc_size_histogram(const BinaryVolume& v,
                                                    Connectivity conn = Connectivity::Full26) {
  LabelField lf = label_components(v, conn);
  std::vector<int64_t> sizes((size_t)lf.num_components + 1, 0);
  for (int32_t l : lf.labels)
    if (l) sizes[(size_t)l]++;
  std::map<int64_t, int64_t> hist;
  for (int32_t l = 1; l <= lf.num_components; ++l) hist[sizes[(size_t)l]]++;
  return hist;
}

// Per-component covering radius: max EDT value inside the component, scaled
// to micrometers. An approximation flag travels with every report because
// this is not a network-extraction radius.
inline std::map<double, int64_t> pore_radius_histogram(const BinaryVolume& v,
                                                       const std::vector<double>& bin_edges_um,
                                                       Connectivity conn = Connectivity::Full26) {
  if (bin_edges_um.size() < 2)
    throw std::invalid_argument("pore_radius_histogram: need at least two bin edges");
  LabelField lf = label_components(v, conn);
  std::vector<double> edt = euclidean_distance_transform(v);

  std::vector<double> max_r((size_t)lf.num_components + 1, 0.0);
  for (int64_t i = 0; i < v.dims.count(); ++i) {
    int32_t l = lf.labels[(size_t)i];
    if (l) max_r[(size_t)l] = std::max(max_r[(size_t)l], edt[(size_t)i]);
  }

  std::map<double, int64_t> hist;  // keyed by lower bin edge
  for (size_t b = 0; b + 1 < bin_edges_um.size(); ++b) hist[bin_edges_um[b]] = 0;
  for (int32_t l = 1; l <= lf.num_components; ++l) {
    double r_um = max_r[(size_t)l] * v.scale_um;
    // clamp out-of-range radii into the end bins so every component counts
    size_t b = 0;
    while (b + 2 < bin_edges_um.size() && r_um >= bin_edges_um[b + 1]) ++b;
    hist[bin_edges_um[b]]++;
  }
  return hist;
}

struct MetricsReport {
  std::string volume_id;
  Dims dims;
  double scale_um = 0;
  double porosity_value = 0;
  std::vector<double> s2;                  // index = lag in voxels
  std::map<int64_t, int64_t> cc_histogram;
  std::map<double, int64_t> radius_histogram;  // lower bin edge (um) -> count
  std::string radius_method = "approximation: EDT covering radius";
};

inline MetricsReport compute_metrics(const BinaryVolume& v, const std::string& id,
                                     int64_t max_lag, const std::vector<double>& bins_um,
                                     Connectivity conn = Connectivity::Full26) {
  MetricsReport r;
  r.volume_id = id;
  r.dims = v.dims;
  r.scale_um = v.scale_um;
  r.porosity_value = porosity(v);
  int64_t lag = std::min(max_lag, std::min({v.dims.nx, v.dims.ny, v.dims.nz}) - 1);
  r.s2 = two_point_correlation(v, lag);
  r.cc_histogram = cc_size_histogram(v, conn);
  r.radius_histogram = pore_radius_histogram(v, bins_um, conn);
  return r;
}

// Smallest lag where S2 has decayed to within a 5% band above porosity^2.
inline int64_t decorrelation_lag(const std::vector<double>& s2) {
  if (s2.empty()) throw std::invalid_argument("decorrelation_lag: empty curve");
  double p = s2[0];
  double cut = p * p + 0.05 * (p - p * p);
  for (size_t r = 0; r < s2.size(); ++r)
    if (s2[r] <= cut) return (int64_t)r;
  return (int64_t)s2.size();  // did not decorrelate within the curve
}

struct MetricDelta {
  std::string metric;
  std::string candidate_id;
  double reference = 0, candidate = 0;
  double abs_delta = 0;
  double rel_delta = 0;  // fraction of the reference; 0 when reference is 0
};

struct ComparisonTable {
  std::string reference_id;
  std::vector<MetricDelta> rows;
};

namespace detail {

inline MetricDelta delta_row(const std::string& metric, const std::string& cand_id,
                             double ref, double cand) {
  MetricDelta d;
  d.metric = metric;
  d.candidate_id = cand_id;
  d.reference = ref;
  d.candidate = cand;
  d.abs_delta = cand - ref;
  d.rel_delta = ref != 0.0 ? (cand - ref) / ref : 0.0;
  return d;
}

}  // namespace detail

// Side-by-side deltas against a reference report. S2 curves are compared on
// the coarsest common lag range; the mean absolute S2 deviation and the
// decorrelation lags are included per candidate.
inline ComparisonTable compare(const MetricsReport& ref,
                               const std::vector<MetricsReport>& candidates) {
  ComparisonTable t;
  t.reference_id = ref.volume_id;
  for (const auto& c : candidates) {
    t.rows.push_back(detail::delta_row("porosity", c.volume_id, ref.porosity_value,
                                       c.porosity_value));
    size_t lags = std::min(ref.s2.size(), c.s2.size());
    if (lags == 0) throw std::invalid_argument("compare: incompatible S2 curves");
    double mad = 0;
    for (size_t r = 0; r < lags; ++r) mad += std::fabs(ref.s2[r] - c.s2[r]);
    mad /= (double)lags;
    t.rows.push_back(detail::delta_row("s2_mean_abs_dev", c.volume_id, 0.0, mad));
    t.rows.push_back(detail::delta_row("s2_decorrelation_lag", c.volume_id,
                                       (double)decorrelation_lag(ref.s2),
                                       (double)decorrelation_lag(c.s2)));
    auto total = [](const std::map<int64_t, int64_t>& h) {
      int64_t n = 0;
      for (auto& [k, v] : h) n += v;
      return (double)n;
    };
    t.rows.push_back(detail::delta_row("component_count", c.volume_id,
                                       total(ref.cc_histogram), total(c.cc_histogram)));
  }
  return t;
}

// ---------------------------------------------------------------------------
// JSON / CSV emission
// ---------------------------------------------------------------------------

inline void to_json(nlohmann::json& j, const MetricsReport& r) {
  nlohmann::json cc = nlohmann::json::object();
  for (auto& [size, count] : r.cc_histogram) cc[std::to_string(size)] = count;
  nlohmann::json rh = nlohmann::json::array();
  for (auto& [edge, count] : r.radius_histogram)
    rh.push_back({{"bin_lo_um", edge}, {"count", count}});
  j = {{"volume_id", r.volume_id},
       {"dims", {r.dims.nx, r.dims.ny, r.dims.nz}},
       {"scale_um", r.scale_um},
       {"porosity", r.porosity_value},
       {"s2", r.s2},
       {"s2_estimator", "axis-aligned, non-periodic"},
       {"cc_histogram", cc},
       {"pore_radius_histogram", rh},
       {"pore_radius_method", r.radius_method}};
}

inline void to_json(nlohmann::json& j, const ComparisonTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : t.rows)
    rows.push_back({{"metric", r.metric},
                    {"candidate", r.candidate_id},
                    {"reference", r.reference},
                    {"value", r.candidate},
                    {"abs_delta", r.abs_delta},
                    {"rel_delta", r.rel_delta}});
  j = {{"reference", t.reference_id}, {"rows", rows}};
}

inline std::string comparison_csv(const ComparisonTable& t) {
  std::string out = "metric,candidate,reference,value,abs_delta,rel_delta\n";
  char buf[256];
  for (const auto& r : t.rows) {
    std::snprintf(buf, sizeof buf, "%s,%s,%.9g,%.9g,%.9g,%.9g\n", r.metric.c_str(),
                  r.candidate_id.c_str(), r.reference, r.candidate, r.abs_delta,
                  r.rel_delta);
    out += buf;
  }
  return out;
}

}  // namespace porevox

#endif  // POREVOX_METRICS_HPP
