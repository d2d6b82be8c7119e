#include "aisq/ais.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "aisq/error.hpp"

namespace aisq::ais {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == '\r' || s.back() == '\n' || s.back() == ' ' || s.back() == '\t'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            break;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
    if (s.empty()) return false;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if constexpr (std::is_floating_point_v<T>) {
        if (*first == '+') ++first;
    }
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

int hex_digit(char c) {
    // NMEA checksums are upper-case hexadecimal.
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

constexpr char kHex[] = "0123456789ABCDEF";

template <typename T>
void append_number(std::string& out, T value) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    out.append(buf.data(), ptr);
}

}  // namespace

std::uint8_t nmea_checksum(std::string_view body) {
    std::uint8_t sum = 0;
    for (char c : body) sum ^= static_cast<std::uint8_t>(c);
    return sum;
}

NmeaSentence parse_sentence(std::string_view line) {
    line = trim(line);
    if (line.size() < 4 || (line.front() != '!' && line.front() != '$'))
        throw Error(ErrorCode::MalformedSentence, "sentence must start with '!'");
    const auto star = line.rfind('*');
    if (star == std::string_view::npos || star + 3 != line.size())
        throw Error(ErrorCode::MalformedSentence, "missing '*hh' checksum suffix");
    const int hi = hex_digit(line[star + 1]);
    const int lo = hex_digit(line[star + 2]);
    if (hi < 0 || lo < 0) throw Error(ErrorCode::MalformedSentence, "checksum is not two hex digits");

    const std::string_view body = line.substr(1, star - 1);
    const auto stated = static_cast<std::uint8_t>(hi * 16 + lo);
    const auto actual = nmea_checksum(body);
    if (stated != actual) {
        std::ostringstream msg;
        msg << "stated 0x" << kHex[stated >> 4] << kHex[stated & 15] << ", computed 0x" << kHex[actual >> 4]
            << kHex[actual & 15];
        throw Error(ErrorCode::ChecksumMismatch, msg.str());
    }

    const auto fields = split(body, ',');
    if (fields.size() != 7)
        throw Error(ErrorCode::MalformedSentence, "expected 7 fields, got " + std::to_string(fields.size()));

    NmeaSentence s;
    s.talker_tag = std::string(fields[0]);
    if (s.talker_tag.empty()) throw Error(ErrorCode::MalformedSentence, "empty talker tag");
    if (!parse_number(fields[1], s.fragment_count) || !parse_number(fields[2], s.fragment_index) ||
        s.fragment_count < 1 || s.fragment_index < 1 || s.fragment_index > s.fragment_count)
        throw Error(ErrorCode::MalformedSentence, "bad fragment count/index");
    if (!fields[3].empty()) {
        int id = 0;
        if (!parse_number(fields[3], id) || id < 0) throw Error(ErrorCode::MalformedSentence, "bad message id");
        s.message_id = id;
    }
    if (fields[4].size() > 1) throw Error(ErrorCode::MalformedSentence, "bad radio channel");
    s.radio_channel = fields[4].empty() ? '?' : fields[4][0];
    s.payload = std::string(fields[5]);
    if (!parse_number(fields[6], s.fill_bits) || s.fill_bits < 0 || s.fill_bits > 5)
        throw Error(ErrorCode::InvalidFillBits, "fill bits must be 0..5, got '" + std::string(fields[6]) + "'");
    s.checksum = stated;
    return s;
}

std::string render_sentence(const NmeaSentence& s) {
    std::string body = s.talker_tag;
    body += ',';
    append_number(body, s.fragment_count);
    body += ',';
    append_number(body, s.fragment_index);
    body += ',';
    if (s.message_id) append_number(body, *s.message_id);
    body += ',';
    if (s.radio_channel != '?') body += s.radio_channel;
    body += ',';
    body += s.payload;
    body += ',';
    append_number(body, s.fill_bits);
    const auto sum = nmea_checksum(body);
    std::string out = "!";
    out += body;
    out += '*';
    out += kHex[sum >> 4];
    out += kHex[sum & 15];
    return out;
}

std::uint64_t BitVector::uint(std::size_t start, std::size_t len) const {
    if (len > 64 || start + len > bits_.size())
        throw Error(ErrorCode::TruncatedPayload, "field past end of bit vector");
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < len; ++i) v = (v << 1) | bits_[start + i];
    return v;
}

std::int64_t BitVector::sint(std::size_t start, std::size_t len) const {
    const std::uint64_t raw = uint(start, len);
    if (len == 0 || len == 64) return static_cast<std::int64_t>(raw);
    const std::uint64_t sign = std::uint64_t{1} << (len - 1);
    return static_cast<std::int64_t>(raw ^ sign) - static_cast<std::int64_t>(sign);
}

void BitVector::set_uint(std::size_t start, std::size_t len, std::uint64_t value) {
    if (start + len > bits_.size()) bits_.resize(start + len, 0);
    for (std::size_t i = 0; i < len; ++i) bits_[start + len - 1 - i] = (value >> i) & 1u;
}

int armor_value(char c) {
    const int a = static_cast<unsigned char>(c);
    if (!((a >= 48 && a <= 87) || (a >= 96 && a <= 119)))
        throw Error(ErrorCode::InvalidArmorCharacter, std::string("character code ") + std::to_string(a));
    int v = a - 48;
    if (v > 40) v -= 8;
    return v;
}

char armor_char(int value) {
    value &= 63;
    return static_cast<char>(value < 40 ? value + 48 : value + 56);
}

BitVector decode_payload(std::string_view payload, int fill_bits) {
    if (fill_bits < 0 || fill_bits > 5 || static_cast<std::size_t>(fill_bits) > 6 * payload.size())
        throw Error(ErrorCode::InvalidFillBits, "fill bits " + std::to_string(fill_bits));
    BitVector bits(6 * payload.size());
    for (std::size_t i = 0; i < payload.size(); ++i) bits.set_uint(6 * i, 6, armor_value(payload[i]));
    BitVector out;
    const std::size_t n = 6 * payload.size() - fill_bits;
    for (std::size_t i = 0; i < n; ++i) out.push_back(bits[i]);
    return out;
}

ArmoredPayload encode_payload(const BitVector& bits) {
    ArmoredPayload out;
    const std::size_t chars = (bits.size() + 5) / 6;
    out.fill_bits = static_cast<int>(chars * 6 - bits.size());
    out.payload.reserve(chars);
    for (std::size_t c = 0; c < chars; ++c) {
        int v = 0;
        for (std::size_t b = 0; b < 6; ++b) {
            const std::size_t i = 6 * c + b;
            v = (v << 1) | (i < bits.size() && bits[i] ? 1 : 0);
        }
        out.payload += armor_char(v);
    }
    return out;
}

bool is_valid(const AisRecord& r) {
    return r.mmsi < (1u << 30) && r.lat >= -90.0 && r.lat <= 90.0 && r.lon >= -180.0 && r.lon <= 180.0 &&
           r.sog >= 0 && r.sog <= 1022 && r.cog >= 0.0 && r.cog < 360.0 &&
           (!r.shiptype || (*r.shiptype >= 0 && *r.shiptype <= 99));
}

AisRecord decode_position_report(const BitVector& bits) {
    if (bits.size() < 6) throw Error(ErrorCode::TruncatedPayload, "no message type");
    const auto type = bits.uint(0, 6);
    if (type < 1 || type > 3) throw Error(ErrorCode::UnsupportedMessageType, "type " + std::to_string(type));
    if (bits.size() < 168)
        throw Error(ErrorCode::TruncatedPayload, "position report has " + std::to_string(bits.size()) + " bits");

    const auto mmsi = bits.uint(8, 30);
    const auto sog = static_cast<int>(bits.uint(50, 10));
    const auto lon_raw = bits.sint(61, 28);
    const auto lat_raw = bits.sint(89, 27);
    const auto cog = static_cast<int>(bits.uint(116, 12));

    if (sog == kSogUnavailable) throw Error(ErrorCode::SentinelValue, "sog");
    if (lon_raw == kLonUnavailable) throw Error(ErrorCode::SentinelValue, "lon");
    if (lat_raw == kLatUnavailable) throw Error(ErrorCode::SentinelValue, "lat");
    if (cog == kCogUnavailable) throw Error(ErrorCode::SentinelValue, "cog");
    if (cog > kCogUnavailable) throw Error(ErrorCode::OutOfRange, "cog " + std::to_string(cog));
    if (lon_raw < -180 * 600000 || lon_raw > 180 * 600000)
        throw Error(ErrorCode::OutOfRange, "lon " + std::to_string(lon_raw));
    if (lat_raw < -90 * 600000 || lat_raw > 90 * 600000)
        throw Error(ErrorCode::OutOfRange, "lat " + std::to_string(lat_raw));

    AisRecord r;
    r.mmsi = static_cast<std::uint32_t>(mmsi);
    r.sog = sog;
    r.lon = static_cast<double>(lon_raw) / 600000.0;
    r.lat = static_cast<double>(lat_raw) / 600000.0;
    r.cog = cog / 10.0;
    return r;
}

BitVector encode_position_report(const PositionFields& f) {
    BitVector bits(168);
    bits.set_uint(0, 6, static_cast<std::uint64_t>(f.message_type));
    bits.set_uint(8, 30, f.mmsi);
    bits.set_uint(50, 10, static_cast<std::uint64_t>(f.sog));
    bits.set_uint(61, 28, static_cast<std::uint64_t>(f.lon_raw));
    bits.set_uint(89, 27, static_cast<std::uint64_t>(f.lat_raw));
    bits.set_uint(116, 12, static_cast<std::uint64_t>(f.cog));
    bits.set_uint(128, 9, 511);  // heading not available
    bits.set_uint(137, 6, 60);   // time stamp not available
    return bits;
}

StaticReport decode_static_report(const BitVector& bits) {
    if (bits.size() < 6) throw Error(ErrorCode::TruncatedPayload, "no message type");
    const auto type = bits.uint(0, 6);
    if (type != 5) throw Error(ErrorCode::UnsupportedMessageType, "type " + std::to_string(type));
    if (bits.size() < 240)
        throw Error(ErrorCode::TruncatedPayload, "static report has " + std::to_string(bits.size()) + " bits");
    StaticReport r;
    r.mmsi = static_cast<std::uint32_t>(bits.uint(8, 30));
    r.shiptype = static_cast<int>(bits.uint(232, 8));
    return r;
}

BitVector encode_static_report(const StaticReport& report) {
    BitVector bits(424);
    bits.set_uint(0, 6, 5);
    bits.set_uint(8, 30, report.mmsi);
    bits.set_uint(232, 8, static_cast<std::uint64_t>(report.shiptype));
    return bits;
}

std::optional<BitVector> MultipartAssembler::push(const NmeaSentence& s) {
    ++clock_;
    expire();
    if (s.fragment_count == 1) return decode_payload(s.payload, s.fill_bits);

    const auto key = std::make_pair(s.message_id.value_or(-1), s.radio_channel);
    auto it = groups_.find(key);
    if (it != groups_.end()) {
        auto& g = it->second;
        if (g.fragment_count != s.fragment_count || g.parts[s.fragment_index - 1]) {
            ++dropped_;
            groups_.erase(it);
            it = groups_.end();
        }
    }
    if (it == groups_.end()) {
        Group g;
        g.fragment_count = s.fragment_count;
        g.first_seen = clock_;
        g.parts.resize(s.fragment_count);
        it = groups_.emplace(key, std::move(g)).first;
    }
    auto& g = it->second;
    g.parts[s.fragment_index - 1] = s;
    if (++g.received < g.fragment_count) return std::nullopt;

    std::string payload;
    for (const auto& p : g.parts) payload += p->payload;
    const int fill = g.parts.back()->fill_bits;
    groups_.erase(it);
    return decode_payload(payload, fill);
}

void MultipartAssembler::expire() {
    for (auto it = groups_.begin(); it != groups_.end();) {
        if (clock_ - it->second.first_seen > window_) {
            ++dropped_;
            it = groups_.erase(it);
        } else {
            ++it;
        }
    }
}

std::size_t MultipartAssembler::flush() {
    const std::size_t n = groups_.size();
    dropped_ += n;
    groups_.clear();
    return n;
}

TimedLine split_timed_line(std::string_view line) {
    line = trim(line);
    TimedLine out;
    if (!line.empty() && line.front() == '\\') {
        const auto end = line.find('\\', 1);
        if (end == std::string_view::npos) {
            out.sentence = line;
            return out;
        }
        auto block = line.substr(1, end - 1);
        if (const auto star = block.find('*'); star != std::string_view::npos) block = block.substr(0, star);
        for (auto field : split(block, ',')) {
            if (field.size() > 2 && field.substr(0, 2) == "c:") {
                std::int64_t t = 0;
                if (parse_number(field.substr(2), t)) out.timestamp = t > 100000000000LL ? t / 1000 : t;
            }
        }
        out.sentence = trim(line.substr(end + 1));
        return out;
    }
    std::size_t i = 0;
    while (i < line.size() && line[i] >= '0' && line[i] <= '9') ++i;
    if (i > 0 && i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == ',' || line[i] == ';')) {
        std::int64_t t = 0;
        if (parse_number(line.substr(0, i), t)) {
            out.timestamp = t;
            std::size_t j = i;
            while (j < line.size() && (line[j] == ' ' || line[j] == '\t' || line[j] == ',' || line[j] == ';')) ++j;
            out.sentence = line.substr(j);
            return out;
        }
    }
    out.sentence = line;
    return out;
}

std::optional<AisRecord> NmeaDecoder::feed(std::string_view line) {
    ++stats_.lines;
    const auto timed = split_timed_line(line);
    if (timed.sentence.empty()) return std::nullopt;
    const auto s = timed.sentence;
    if (!(s.starts_with("!AIVDM,") || s.starts_with("!AIVDO,"))) {
        ++stats_.ignored_sentences;
        return std::nullopt;
    }
    try {
        const auto sentence = parse_sentence(s);
        auto bits = assembler_.push(sentence);
        stats_.multipart_dropped = assembler_.dropped();
        if (!bits) return std::nullopt;
        return handle(*bits, timed.timestamp);
    } catch (const Error& e) {
        switch (e.code()) {
            case ErrorCode::ChecksumMismatch: ++stats_.checksum_errors; break;
            case ErrorCode::InvalidArmorCharacter: ++stats_.armor_errors; break;
            case ErrorCode::UnsupportedMessageType: ++stats_.unsupported_types; break;
            case ErrorCode::SentinelValue: ++stats_.sentinel_rejects; break;
            case ErrorCode::OutOfRange: ++stats_.out_of_range; break;
            case ErrorCode::TruncatedPayload: ++stats_.truncated; break;
            default: ++stats_.malformed; break;
        }
    }
    stats_.multipart_dropped = assembler_.dropped();
    return std::nullopt;
}

std::optional<AisRecord> NmeaDecoder::handle(const BitVector& bits, std::optional<std::int64_t> timestamp) {
    if (bits.size() < 6) throw Error(ErrorCode::TruncatedPayload, "no message type");
    const auto type = bits.uint(0, 6);
    if (type == 5) {
        const auto st = decode_static_report(bits);
        ++stats_.static_reports;
        if (st.shiptype >= 1 && st.shiptype <= 99) shiptypes_[st.mmsi] = st.shiptype;
        return std::nullopt;
    }
    auto rec = decode_position_report(bits);
    if (!timestamp) {
        ++stats_.missing_timestamp;
        return std::nullopt;
    }
    rec.timestamp = *timestamp;
    if (auto it = shiptypes_.find(rec.mmsi); it != shiptypes_.end()) rec.shiptype = it->second;
    ++stats_.position_reports;
    return rec;
}

void NmeaDecoder::finish() {
    assembler_.flush();
    stats_.multipart_dropped = assembler_.dropped();
}

CsvReadResult parse_records_csv(std::string_view text) {
    CsvReadResult out;
    bool header_seen = false;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        const auto line = trim(text.substr(pos, end - pos));
        pos = end + 1;
        if (!header_seen) {
            if (line.empty() && pos > text.size()) break;
            if (line != kCsvHeader)
                throw Error(ErrorCode::HeaderMismatch, "expected '" + std::string(kCsvHeader) + "', got '" +
                                                           std::string(line) + "'");
            header_seen = true;
            continue;
        }
        if (line.empty()) continue;
        const auto f = split(line, ',');
        AisRecord r;
        bool ok = f.size() == 7 && parse_number(f[0], r.mmsi) && parse_number(f[1], r.timestamp) &&
                  parse_number(f[2], r.lat) && parse_number(f[3], r.lon) && parse_number(f[4], r.sog) &&
                  parse_number(f[5], r.cog);
        if (ok && !f[6].empty()) {
            int st = 0;
            ok = parse_number(f[6], st);
            r.shiptype = st;
        }
        if (ok && is_valid(r)) {
            out.records.push_back(r);
        } else {
            ++out.skipped;
        }
    }
    if (!header_seen) throw Error(ErrorCode::HeaderMismatch, "missing header line");
    return out;
}

CsvReadResult read_records_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_records_csv(ss.str());
}

std::string format_record_csv(const AisRecord& r) {
    std::string out;
    append_number(out, r.mmsi);
    out += ',';
    append_number(out, r.timestamp);
    out += ',';
    append_number(out, r.lat);
    out += ',';
    append_number(out, r.lon);
    out += ',';
    append_number(out, r.sog);
    out += ',';
    append_number(out, r.cog);
    out += ',';
    if (r.shiptype) append_number(out, *r.shiptype);
    return out;
}

void write_records_csv(const std::filesystem::path& path, const std::vector<AisRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << kCsvHeader << '\n';
    for (const auto& r : records) out << format_record_csv(r) << '\n';
    if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

std::vector<VesselTrack> group_tracks(const std::vector<AisRecord>& records) {
    std::map<std::uint32_t, std::vector<AisRecord>> by_mmsi;
    for (const auto& r : records) by_mmsi[r.mmsi].push_back(r);

    std::vector<VesselTrack> tracks;
    tracks.reserve(by_mmsi.size());
    for (auto& [mmsi, recs] : by_mmsi) {
        std::stable_sort(recs.begin(), recs.end(),
                         [](const AisRecord& a, const AisRecord& b) { return a.timestamp < b.timestamp; });
        recs.erase(std::unique(recs.begin(), recs.end(),
                               [](const AisRecord& a, const AisRecord& b) { return a.timestamp == b.timestamp; }),
                   recs.end());

        // code -> (votes, index of latest report)
        std::map<int, std::pair<std::size_t, std::size_t>> votes;
        for (std::size_t i = 0; i < recs.size(); ++i) {
            if (!recs[i].shiptype) continue;
            auto& v = votes[*recs[i].shiptype];
            ++v.first;
            v.second = i;
        }
        VesselTrack t;
        t.mmsi = mmsi;
        const std::pair<std::size_t, std::size_t>* best = nullptr;
        for (const auto& [code, v] : votes) {
            if (!best || v > *best) {
                best = &v;
                t.shiptype = code;
            }
        }
        t.records = std::move(recs);
        tracks.push_back(std::move(t));
    }
    return tracks;
}

}  // namespace aisq::ais
