#pragma once

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "gnrf/autodiff/tensor.hpp"

namespace gnrf::ad {

static_assert(std::endian::native == std::endian::little, "checkpoint format assumes a little-endian host");

struct CheckpointEntry {
  Shape shape;
  std::vector<float> values;
};

using CheckpointMap = std::map<std::string, CheckpointEntry>;

// Layout: magic "GNRFCKPT", u32 tensor count, then per tensor:
// u16 name length, name bytes, u8 ndim, u32 dims, float32 values. All
// integers and floats little-endian. Round-trips bit-exactly.
inline void save_checkpoint(const std::string& path, const CheckpointMap& tensors) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("save_checkpoint: cannot open " + path);
  f.write("GNRFCKPT", 8);
  uint32_t count = static_cast<uint32_t>(tensors.size());
  f.write(reinterpret_cast<const char*>(&count), 4);
  for (const auto& [name, entry] : tensors) {
    uint16_t nlen = static_cast<uint16_t>(name.size());
    f.write(reinterpret_cast<const char*>(&nlen), 2);
    f.write(name.data(), nlen);
    uint8_t ndim = static_cast<uint8_t>(entry.shape.size());
    f.write(reinterpret_cast<const char*>(&ndim), 1);
    for (int64_t d : entry.shape) {
      uint32_t d32 = static_cast<uint32_t>(d);
      f.write(reinterpret_cast<const char*>(&d32), 4);
    }
    f.write(reinterpret_cast<const char*>(entry.values.data()),
            static_cast<std::streamsize>(entry.values.size() * sizeof(float)));
  }
  if (!f) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

inline CheckpointMap load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_checkpoint: cannot open " + path);
  char magic[8];
  f.read(magic, 8);
  if (!f || std::memcmp(magic, "GNRFCKPT", 8) != 0)
    throw std::runtime_error("load_checkpoint: bad magic in " + path);
  uint32_t count = 0;
  f.read(reinterpret_cast<char*>(&count), 4);
  CheckpointMap out;
  for (uint32_t t = 0; t < count; ++t) {
    uint16_t nlen = 0;
    f.read(reinterpret_cast<char*>(&nlen), 2);
    std::string name(nlen, '\0');
    f.read(name.data(), nlen);
    uint8_t ndim = 0;
    f.read(reinterpret_cast<char*>(&ndim), 1);
    CheckpointEntry entry;
    int64_t n = 1;
    for (int d = 0; d < ndim; ++d) {
      uint32_t d32 = 0;
      f.read(reinterpret_cast<char*>(&d32), 4);
      entry.shape.push_back(static_cast<int64_t>(d32));
      n *= d32;
    }
    entry.values.resize(static_cast<size_t>(n));
    f.read(reinterpret_cast<char*>(entry.values.data()), static_cast<std::streamsize>(n * sizeof(float)));
    if (!f) throw std::runtime_error("load_checkpoint: truncated file " + path);
    out.emplace(std::move(name), std::move(entry));
  }
  return out;
}

}  // namespace gnrf::ad
