#pragma once

#include <filesystem>

#include "boxdistill/model.hpp"

namespace boxdistill {

// Checkpoint container, version 1:
//   magic "BXDCKPT1" | u32 version | u32 spec_json_len | spec json |
//   u64 param_count | float64 params (little-endian) | u32 crc32(params)
// The spec header is readable without touching the parameter blob. Files
// carry no timestamps, so identical parameters give identical bytes.

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const SegmentationModel& model,
                     const std::filesystem::path& file);

/// Rebuilds the model from the embedded spec; parameters restored
/// bit-exactly. Throws CheckpointError on corrupt files.
SegmentationModel load_checkpoint(const std::filesystem::path& file);

/// Loads parameters into an existing model. The stored spec must equal the
/// model's spec, otherwise CheckpointError.
void load_checkpoint_into(SegmentationModel& model,
                          const std::filesystem::path& file);

/// Header-only read of the embedded spec.
ModelSpec read_checkpoint_spec(const std::filesystem::path& file);

}  // namespace boxdistill
