#pragma once

// Shard layout (little-endian):
//   "AISQ" | u16 version | u32 count
//   count x { u32 L | u32 true_length | u8 label | u32 mmsi_hash | L*9 f32 }
//   u32 CRC32 of every preceding byte

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "aisq/pipeline.hpp"

namespace aisq::shard {

inline constexpr char kMagic[4] = {'A', 'I', 'S', 'Q'};
inline constexpr std::uint16_t kVersion = 1;

/// Bijective 32-bit mixer (murmur3 finalizer) used to store vessel ids.
std::uint32_t mmsi_hash(std::uint32_t mmsi);
std::uint32_t mmsi_unhash(std::uint32_t hash);

std::uint32_t crc32(std::span<const std::uint8_t> bytes);

/// Identifier of a file's contents. Shards and checkpoints end in the CRC32
/// of everything before it, which is returned as is (the CRC of such a whole
/// file is the same constant for every file). Anything else: crc32(bytes).
std::uint32_t content_id(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_shard(std::span<const pipeline::FeatureSequence> sequences);
std::vector<pipeline::FeatureSequence> decode_shard(std::span<const std::uint8_t> bytes);

/// Writes the shard and returns its content_id.
std::uint32_t write_shard(std::span<const pipeline::FeatureSequence> sequences, const std::filesystem::path& path);
std::vector<pipeline::FeatureSequence> read_shard(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

std::string hex32(std::uint32_t value);

}  // namespace aisq::shard
