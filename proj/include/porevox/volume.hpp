#ifndef POREVOX_VOLUME_HPP
#define POREVOX_VOLUME_HPP

// Core 3D voxel volume types and raw+sidecar file I/O.
//
// Layout is always linear with x fastest, then y, then z:
//   index = x + y*nx + z*nx*ny
// Phase encoding: 0 = rock, 1 = pore.

#include <array>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace porevox {

struct Dims {
  int64_t nx = 0, ny = 0, nz = 0;

  int64_t count() const { return nx * ny * nz; }
  bool operator==(const Dims&) const = default;
};

inline int64_t voxel_index(const Dims& d, int64_t x, int64_t y, int64_t z) {
  return x + y * d.nx + z * d.nx * d.ny;
}

struct BinaryVolume {
  Dims dims;
  double scale_um = 1.0;           // isotropic voxel edge length
  std::vector<uint8_t> data;       // 0 = rock, 1 = pore

  uint8_t at(int64_t x, int64_t y, int64_t z) const {
    return data[voxel_index(dims, x, y, z)];
  }
  uint8_t& at(int64_t x, int64_t y, int64_t z) {
    return data[voxel_index(dims, x, y, z)];
  }

  int64_t pore_count() const {
    int64_t n = 0;
    for (uint8_t v : data) n += v;
    return n;
  }

  void validate() const {
    if (dims.nx <= 0 || dims.ny <= 0 || dims.nz <= 0)
      throw std::invalid_argument("BinaryVolume: non-positive dims");
    if (scale_um <= 0.0)
      throw std::invalid_argument("BinaryVolume: non-positive scale");
    if ((int64_t)data.size() != dims.count())
      throw std::invalid_argument("BinaryVolume: data length mismatch");
    for (uint8_t v : data)
      if (v > 1) throw std::invalid_argument("BinaryVolume: phase value not 0/1");
  }
};

inline BinaryVolume make_binary(Dims d, double scale_um, uint8_t fill = 0) {
  BinaryVolume v;
  v.dims = d;
  v.scale_um = scale_um;
  v.data.assign((size_t)d.count(), fill);
  return v;
}

struct GrayVolume {
  Dims dims;
  double scale_um = 1.0;
  int bit_depth = 8;               // 8 or 16
  std::vector<uint16_t> data;      // 8-bit values stored widened

  uint16_t at(int64_t x, int64_t y, int64_t z) const {
    return data[voxel_index(dims, x, y, z)];
  }
};

struct LabelField {
  Dims dims;
  std::vector<int32_t> labels;     // 0 = background
  int32_t num_components = 0;

  int32_t at(int64_t x, int64_t y, int64_t z) const {
    return labels[voxel_index(dims, x, y, z)];
  }
};

using AnyVolume = std::variant<BinaryVolume, GrayVolume>;

// ---------------------------------------------------------------------------
// Raw + JSON-sidecar file format.
//
// Payload: little-endian, one u8 per voxel for binary/gray8, u16 LE for
// gray16, x-fastest index order. Sidecar shares the basename with a ".json"
// extension:
//   {"dims":[nx,ny,nz], "scale_um": float, "kind":"binary"|"gray8"|"gray16",
//    "pore_value": 1}
// ---------------------------------------------------------------------------

inline std::string sidecar_path(const std::string& raw_path) {
  auto dot = raw_path.find_last_of('.');
  auto slash = raw_path.find_last_of("/\\");
  std::string base = (dot == std::string::npos ||
                      (slash != std::string::npos && dot < slash))
                         ? raw_path
                         : raw_path.substr(0, dot);
  return base + ".json";
}

inline AnyVolume load_volume(const std::string& path) {
  std::ifstream side(sidecar_path(path));
  if (!side)
    throw std::runtime_error("load_volume: missing sidecar " + sidecar_path(path));
  nlohmann::json j;
  try {
    side >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("load_volume: corrupt sidecar: " + std::string(e.what()));
  }
  if (!j.contains("dims") || !j.contains("scale_um") || !j.contains("kind"))
    throw std::runtime_error("load_volume: sidecar missing required keys");

  Dims d;
  d.nx = j["dims"][0].get<int64_t>();
  d.ny = j["dims"][1].get<int64_t>();
  d.nz = j["dims"][2].get<int64_t>();
  double scale = j["scale_um"].get<double>();
  std::string kind = j["kind"].get<std::string>();
  if (d.nx <= 0 || d.ny <= 0 || d.nz <= 0 || scale <= 0)
    throw std::runtime_error("load_volume: invalid dims/scale in sidecar");

  std::ifstream raw(path, std::ios::binary);
  if (!raw) throw std::runtime_error("load_volume: cannot open " + path);
  std::vector<char> bytes((std::istreambuf_iterator<char>(raw)),
                          std::istreambuf_iterator<char>());

  const int64_t n = d.count();
  if (kind == "binary") {
    if ((int64_t)bytes.size() != n)
      throw std::runtime_error("load_volume: data length mismatch");
    int pore_value = j.value("pore_value", 1);
    BinaryVolume v;
    v.dims = d;
    v.scale_um = scale;
    v.data.resize((size_t)n);
    for (int64_t i = 0; i < n; ++i) {
      uint8_t b = (uint8_t)bytes[(size_t)i];
      if (b != 0 && b != (uint8_t)pore_value)
        throw std::runtime_error("load_volume: unknown phase encoding");
      v.data[(size_t)i] = (b == (uint8_t)pore_value) ? 1 : 0;
    }
    return v;
  } else if (kind == "gray8") {
    if ((int64_t)bytes.size() != n)
      throw std::runtime_error("load_volume: data length mismatch");
    GrayVolume v;
    v.dims = d;
    v.scale_um = scale;
    v.bit_depth = 8;
    v.data.resize((size_t)n);
    for (int64_t i = 0; i < n; ++i) v.data[(size_t)i] = (uint8_t)bytes[(size_t)i];
    return v;
  } else if (kind == "gray16") {
    if ((int64_t)bytes.size() != 2 * n)
      throw std::runtime_error("load_volume: data length mismatch");
    GrayVolume v;
    v.dims = d;
    v.scale_um = scale;
    v.bit_depth = 16;
    v.data.resize((size_t)n);
    for (int64_t i = 0; i < n; ++i) {
      uint8_t lo = (uint8_t)bytes[(size_t)(2 * i)];
      uint8_t hi = (uint8_t)bytes[(size_t)(2 * i + 1)];
      v.data[(size_t)i] = (uint16_t)(lo | (hi << 8));
    }
    return v;
  }
  throw std::runtime_error("load_volume: unknown kind '" + kind + "'");
}

inline BinaryVolume load_binary(const std::string& path) {
  auto any = load_volume(path);
  if (!std::holds_alternative<BinaryVolume>(any))
    throw std::runtime_error("expected binary volume at " + path);
  return std::get<BinaryVolume>(std::move(any));
}

inline void save_volume(const BinaryVolume& v, const std::string& path) {
  v.validate();
  std::ofstream raw(path, std::ios::binary);
  if (!raw) throw std::runtime_error("save_volume: cannot open " + path);
  raw.write(reinterpret_cast<const char*>(v.data.data()), (std::streamsize)v.data.size());
  if (!raw) throw std::runtime_error("save_volume: write failed on " + path);

  nlohmann::json j;
  j["dims"] = {v.dims.nx, v.dims.ny, v.dims.nz};
  j["scale_um"] = v.scale_um;
  j["kind"] = "binary";
  j["pore_value"] = 1;
  std::ofstream side(sidecar_path(path));
  if (!side) throw std::runtime_error("save_volume: cannot open sidecar");
  side << j.dump(2) << "\n";
}

inline void save_volume(const GrayVolume& v, const std::string& path) {
  std::ofstream raw(path, std::ios::binary);
  if (!raw) throw std::runtime_error("save_volume: cannot open " + path);
  if (v.bit_depth == 8) {
    for (uint16_t u : v.data) {
      char b = (char)(uint8_t)u;
      raw.put(b);
    }
  } else {
    for (uint16_t u : v.data) {
      raw.put((char)(uint8_t)(u & 0xff));
      raw.put((char)(uint8_t)(u >> 8));
    }
  }
  if (!raw) throw std::runtime_error("save_volume: write failed on " + path);

  nlohmann::json j;
  j["dims"] = {v.dims.nx, v.dims.ny, v.dims.nz};
  j["scale_um"] = v.scale_um;
  j["kind"] = v.bit_depth == 8 ? "gray8" : "gray16";
  std::ofstream side(sidecar_path(path));
  if (!side) throw std::runtime_error("save_volume: cannot open sidecar");
  side << j.dump(2) << "\n";
}

}  // namespace porevox

#endif  // POREVOX_VOLUME_HPP
