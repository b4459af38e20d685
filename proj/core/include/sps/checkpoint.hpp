#pragma once

#include <string>

#include "sps/tensor.hpp"

namespace sps::ag {

// Binary parameter checkpoint. Layout, all little-endian:
//   magic "SPSCKPT1", u32 version,
//   u32 header length + header bytes (opaque architecture description),
//   u32 tensor count,
//   per tensor: u32 name length + bytes, u32 rank, u64 extents..., f32 data.
// Round-trips bit-exactly; parameter values are kept float32-representable
// throughout the engine so no precision is lost on save.

struct Checkpoint {
    std::string header;
    ParamSet params;
};

void save_checkpoint(const std::string& path, const std::string& header,
                     const ParamSet& params);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace sps::ag
