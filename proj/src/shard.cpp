#include "aisq/shard.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>

#include "aisq/error.hpp"
#include "byteio.hpp"

namespace aisq::shard {

using detail::Reader;
using detail::Writer;

namespace {

constexpr std::uint32_t mul_inverse(std::uint32_t a) {
    std::uint32_t x = a;  // correct to 3 bits for odd a; each step doubles that
    for (int i = 0; i < 5; ++i) x *= 2u - a * x;
    return x;
}

constexpr std::uint32_t kMix1 = 0x85ebca6bu;
constexpr std::uint32_t kMix2 = 0xc2b2ae35u;
static_assert(kMix1 * mul_inverse(kMix1) == 1u);
static_assert(kMix2 * mul_inverse(kMix2) == 1u);

}  // namespace

std::uint32_t mmsi_hash(std::uint32_t h) {
    h ^= h >> 16;
    h *= kMix1;
    h ^= h >> 13;
    h *= kMix2;
    h ^= h >> 16;
    return h;
}

std::uint32_t mmsi_unhash(std::uint32_t h) {
    h ^= h >> 16;
    h *= mul_inverse(kMix2);
    h ^= (h >> 13) ^ (h >> 26);
    h *= mul_inverse(kMix1);
    h ^= h >> 16;
    return h;
}

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
    uLong crc = ::crc32(0L, Z_NULL, 0);
    std::size_t off = 0;
    while (off < bytes.size()) {
        const auto n = static_cast<uInt>(std::min<std::size_t>(bytes.size() - off, 1u << 30));
        crc = ::crc32(crc, bytes.data() + off, n);
        off += n;
    }
    return static_cast<std::uint32_t>(crc);
}

std::vector<std::uint8_t> encode_shard(std::span<const pipeline::FeatureSequence> sequences) {
    Writer w;
    w.bytes(kMagic, 4);
    w.le<std::uint16_t>(kVersion);
    w.le<std::uint32_t>(static_cast<std::uint32_t>(sequences.size()));
    for (const auto& s : sequences) {
        if (s.values.size() != s.length * pipeline::kChannels)
            throw Error(ErrorCode::ShapeMismatch, "sequence values do not match L x 9");
        w.le<std::uint32_t>(static_cast<std::uint32_t>(s.length));
        w.le<std::uint32_t>(static_cast<std::uint32_t>(s.true_length));
        w.le<std::uint8_t>(static_cast<std::uint8_t>(s.label));
        w.le<std::uint32_t>(mmsi_hash(s.mmsi));
        for (float v : s.values) w.f32(v);
    }
    const auto crc = crc32(w.buffer());
    w.le<std::uint32_t>(crc);
    return std::move(w.buffer());
}

std::vector<pipeline::FeatureSequence> decode_shard(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw Error(ErrorCode::MagicMismatch, "not an AISQ shard");
    if (bytes.size() < 14) throw Error(ErrorCode::ChecksumMismatch, "shard truncated");
    const auto version = static_cast<std::uint16_t>(bytes[4] | (bytes[5] << 8));
    if (version != kVersion)
        throw Error(ErrorCode::VersionMismatch, "shard version " + std::to_string(version));
    const auto body = bytes.first(bytes.size() - 4);
    Reader tail(bytes.last(4), "shard trailer");
    if (crc32(body) != tail.le<std::uint32_t>()) throw Error(ErrorCode::ChecksumMismatch, "shard CRC32 mismatch");

    Reader r(body.subspan(6), "shard record");
    const auto count = r.le<std::uint32_t>();
    std::vector<pipeline::FeatureSequence> out;
    out.reserve(std::min<std::size_t>(count, body.size() / 17));
    for (std::uint32_t k = 0; k < count; ++k) {
        pipeline::FeatureSequence s;
        s.length = r.le<std::uint32_t>();
        s.true_length = r.le<std::uint32_t>();
        const auto label = r.le<std::uint8_t>();
        if (label >= pipeline::kNumClasses || s.true_length > s.length)
            throw Error(ErrorCode::FormatError, "invalid sequence header in shard");
        s.label = static_cast<pipeline::ClassLabel>(label);
        s.mmsi = mmsi_unhash(r.le<std::uint32_t>());
        if (r.remaining() / 4 < s.length * pipeline::kChannels)
            throw Error(ErrorCode::FormatError, "shard record runs past end of payload");
        s.values.resize(s.length * pipeline::kChannels);
        for (auto& v : s.values) v = r.f32();
        out.push_back(std::move(s));
    }
    if (r.remaining() != 0) throw Error(ErrorCode::FormatError, "trailing bytes in shard");
    return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

std::uint32_t content_id(std::span<const std::uint8_t> bytes) {
    if (bytes.size() >= 4) {
        const auto n = bytes.size() - 4;
        const std::uint32_t stored = static_cast<std::uint32_t>(bytes[n]) | static_cast<std::uint32_t>(bytes[n + 1]) << 8 |
                                     static_cast<std::uint32_t>(bytes[n + 2]) << 16 |
                                     static_cast<std::uint32_t>(bytes[n + 3]) << 24;
        if (crc32(bytes.first(n)) == stored) return stored;
    }
    return crc32(bytes);
}

std::uint32_t write_shard(std::span<const pipeline::FeatureSequence> sequences, const std::filesystem::path& path) {
    const auto bytes = encode_shard(sequences);
    write_file(path, bytes);
    return content_id(bytes);
}

std::vector<pipeline::FeatureSequence> read_shard(const std::filesystem::path& path) {
    return decode_shard(read_file(path));
}

std::string hex32(std::uint32_t value) {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string s(8, '0');
    for (int i = 7; i >= 0; --i, value >>= 4) s[static_cast<std::size_t>(i)] = kHex[value & 15];
    return s;
}

}  // namespace aisq::shard
