#pragma once

// Checkpoint layout (little-endian):
//   "TSNC" | u16 version | u32 header_len | header JSON
//   f32 parameters | f32 buffers | f32 adam m | f32 adam v
//   u32 CRC32 of every preceding byte
// The header records the model and training configs, history, metadata and
// the element count of each payload section.

#include <filesystem>
#include <span>
#include <vector>

#include "aisq/train.hpp"

namespace aisq::tsnet {

inline constexpr char kCheckpointMagic[4] = {'T', 'S', 'N', 'C'};
inline constexpr std::uint16_t kCheckpointVersion = 1;

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
/// MagicMismatch, VersionMismatch, ChecksumMismatch, FormatError, InvalidConfig.
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Copies weights and running statistics into `net`; InvalidConfig if the
/// network was built from a different config.
void load_into(Network<float>& net, const Checkpoint& ckpt);

/// Builds a network from the checkpoint's config and loads it.
Network<float> restore_network(const Checkpoint& ckpt);

}  // namespace aisq::tsnet
