#pragma once

#include <string>

#include "xdeval/model.hpp"

namespace xdeval {

// Versioned binary checkpoint: magic "MMDL", format version u32, then one
// record per tensor — name length (u32) + name bytes, rank (u64), dims
// (u64 each), payload as 64-bit little-endian floats, row-major. Records
// are read until end of file. Round-trips are bit-exact.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const ModelParams& params, const std::string& path);
ModelParams load_checkpoint(const std::string& path);

void save_backbone(const BackboneWeights& backbone, const std::string& path);
BackboneWeights load_backbone(const std::string& path);

}  // namespace xdeval
