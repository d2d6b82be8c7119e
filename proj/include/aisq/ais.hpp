#pragma once

// AIVDM/AIVDO decoding and the canonical pre-decoded CSV record format.
// Bit layouts follow https://gpsd.gitlab.io/gpsd/AIVDM.html

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace aisq::ais {

struct NmeaSentence {
    std::string talker_tag;  // e.g. "AIVDM"
    int fragment_count = 1;
    int fragment_index = 1;
    std::optional<int> message_id;
    char radio_channel = 'A';
    std::string payload;
    int fill_bits = 0;
    std::uint8_t checksum = 0;
};

/// XOR of every byte in `body` (the text strictly between '!' and '*').
std::uint8_t nmea_checksum(std::string_view body);

NmeaSentence parse_sentence(std::string_view line);

/// Inverse of parse_sentence; the checksum field is recomputed.
std::string render_sentence(const NmeaSentence& sentence);

/// A fixed sequence of bits, most significant bit of each field first.
class BitVector {
public:
    BitVector() = default;
    explicit BitVector(std::size_t n) : bits_(n, 0) {}

    std::size_t size() const noexcept { return bits_.size(); }
    bool operator[](std::size_t i) const { return bits_[i] != 0; }
    void push_back(bool b) { bits_.push_back(b ? 1 : 0); }
    void append(const BitVector& other) { bits_.insert(bits_.end(), other.bits_.begin(), other.bits_.end()); }

    /// Unsigned field of `len` bits starting at bit `start` (len <= 64).
    std::uint64_t uint(std::size_t start, std::size_t len) const;
    /// Two's complement signed field.
    std::int64_t sint(std::size_t start, std::size_t len) const;
    /// Overwrites a field; `value` is truncated to `len` bits.
    void set_uint(std::size_t start, std::size_t len, std::uint64_t value);

    friend bool operator==(const BitVector&, const BitVector&) = default;

private:
    std::vector<std::uint8_t> bits_;
};

/// Six-bit armoring value of one payload character.
int armor_value(char c);
char armor_char(int value);

BitVector decode_payload(std::string_view payload, int fill_bits);

struct ArmoredPayload {
    std::string payload;
    int fill_bits = 0;
};
ArmoredPayload encode_payload(const BitVector& bits);

struct AisRecord {
    std::uint32_t mmsi = 0;
    std::int64_t timestamp = 0;  // seconds since Unix epoch, UTC
    double lat = 0.0;
    double lon = 0.0;
    int sog = 0;       // knots x 10, 0..1022
    double cog = 0.0;  // degrees, 0..359.9
    std::optional<int> shiptype;

    friend bool operator==(const AisRecord&, const AisRecord&) = default;
};

/// True iff the record satisfies every AisRecord invariant.
bool is_valid(const AisRecord& r);

inline constexpr int kSogUnavailable = 1023;
inline constexpr int kCogUnavailable = 3600;
inline constexpr std::int64_t kLatUnavailable = 91 * 600000;
inline constexpr std::int64_t kLonUnavailable = 181 * 600000;

/// Fields of a type 1/2/3 report; `timestamp` and `shiptype` are left unset.
AisRecord decode_position_report(const BitVector& bits);

/// Raw kinematic fields for building a position report (used for fixtures).
struct PositionFields {
    int message_type = 1;
    std::uint32_t mmsi = 0;
    int sog = 0;
    std::int64_t lon_raw = 0;  // 1/600000 degree
    std::int64_t lat_raw = 0;
    int cog = 0;  // tenths of degree
};
BitVector encode_position_report(const PositionFields& fields);

struct StaticReport {
    std::uint32_t mmsi = 0;
    int shiptype = 0;  // 0..255, 0 = not available
};
StaticReport decode_static_report(const BitVector& bits);
BitVector encode_static_report(const StaticReport& report);

/// Reassembles multi-fragment messages keyed by (message_id, radio_channel).
/// A pending group is dropped when `window` further sentences arrive without
/// completing it, when a conflicting fragment replaces it, or on flush().
class MultipartAssembler {
public:
    explicit MultipartAssembler(std::size_t window = 64) : window_(window) {}

    std::optional<BitVector> push(const NmeaSentence& sentence);
    /// Drops every incomplete group; returns how many were dropped.
    std::size_t flush();

    std::size_t dropped() const noexcept { return dropped_; }
    std::size_t pending() const noexcept { return groups_.size(); }

private:
    struct Group {
        int fragment_count = 0;
        std::size_t first_seen = 0;
        std::vector<std::optional<NmeaSentence>> parts;
        int received = 0;
    };

    void expire();

    std::size_t window_;
    std::size_t clock_ = 0;
    std::size_t dropped_ = 0;
    std::map<std::pair<int, char>, Group> groups_;
};

/// One input line: optional NMEA 4.0 tag block or leading epoch seconds,
/// followed by the sentence.
struct TimedLine {
    std::optional<std::int64_t> timestamp;
    std::string_view sentence;
};
TimedLine split_timed_line(std::string_view line);

struct DecodeStats {
    std::size_t lines = 0;
    std::size_t ignored_sentences = 0;  // not AIVDM/AIVDO
    std::size_t malformed = 0;
    std::size_t checksum_errors = 0;
    std::size_t armor_errors = 0;
    std::size_t unsupported_types = 0;
    std::size_t sentinel_rejects = 0;
    std::size_t out_of_range = 0;
    std::size_t truncated = 0;
    std::size_t missing_timestamp = 0;
    std::size_t multipart_dropped = 0;
    std::size_t position_reports = 0;
    std::size_t static_reports = 0;
};

/// Streaming NMEA decoder. Position reports are stamped with the line time
/// and the latest static shiptype (codes above 99 are treated as unknown).
class NmeaDecoder {
public:
    explicit NmeaDecoder(std::size_t multipart_window = 64) : assembler_(multipart_window) {}

    /// Returns a record when the line completes a valid position report.
    std::optional<AisRecord> feed(std::string_view line);
    void finish();

    const DecodeStats& stats() const noexcept { return stats_; }

private:
    std::optional<AisRecord> handle(const BitVector& bits, std::optional<std::int64_t> timestamp);

    MultipartAssembler assembler_;
    DecodeStats stats_;
    std::map<std::uint32_t, int> shiptypes_;
};

inline constexpr std::string_view kCsvHeader = "mmsi,timestamp,lat,lon,sog,cog,shiptype";

struct CsvReadResult {
    std::vector<AisRecord> records;
    std::size_t skipped = 0;
};

CsvReadResult read_records_csv(const std::filesystem::path& path);
CsvReadResult parse_records_csv(std::string_view text);
std::string format_record_csv(const AisRecord& r);
void write_records_csv(const std::filesystem::path& path, const std::vector<AisRecord>& records);

struct VesselTrack {
    std::uint32_t mmsi = 0;
    std::vector<AisRecord> records;
    std::optional<int> shiptype;
};

/// Partitions by mmsi (ascending), sorts by time keeping the first of any
/// duplicate timestamp, and resolves the shiptype by majority vote with ties
/// going to the most recent report.
std::vector<VesselTrack> group_tracks(const std::vector<AisRecord>& records);

}  // namespace aisq::ais
