#include <doctest.h>

#include <cstdio>
#include <random>
#include <string>

#include "aisq/ais.hpp"
#include "aisq/error.hpp"

using namespace aisq;
using namespace aisq::ais;

namespace {

// Produced by tests/oracles/ais_oracle.py, an independent encoder.
struct OracleCase {
    const char* sentence;
    std::uint32_t mmsi;
    int sog;
    std::int64_t lon_raw, lat_raw;
    int cog;
};

const OracleCase kOracle[] = {
    {"!AIVDM,1,1,,A,139>Jh@P1s0PVshO>EB9:Owp0000,0*43", 211000001, 123, 4274040, 32740680, 2345},
    {"!AIVDM,1,1,,A,15M:Ih0P00G?Vt@EWFs00?wp0000,0*11", 366123456, 0, -73451640, 22664940, 0},
    {"!AIVDM,1,1,,A,1>qc9whP?vC81`1<P6P>3wwp0000,0*68", 999999999, 1022, -108000000, -54000000, 3599},
    {"!AIVDM,1,1,,A,100000@P0o<ovH0kOqP72?wp0000,0*0D", 1, 55, 108000000, 54000000, 1800},
};

const char* kStatic1 = "!AIVDM,2,1,3,B,539>Jh@0Bm`L<4hh001@E=B1HE=<Dh00000000161@D344GV8?20C@UDQh00,0*29";
const char* kStatic2 = "!AIVDM,2,2,3,B,00000000000,2*24";

AisRecord decode_line(std::string_view line) {
    const auto s = parse_sentence(line);
    return decode_position_report(decode_payload(s.payload, s.fill_bits));
}

}  // namespace

TEST_CASE("oracle sentences decode to their fields") {
    for (const auto& c : kOracle) {
        CAPTURE(c.sentence);
        const auto r = decode_line(c.sentence);
        CHECK(r.mmsi == c.mmsi);
        CHECK(r.sog == c.sog);
        CHECK(r.lon == doctest::Approx(static_cast<double>(c.lon_raw) / 600000.0).epsilon(1e-15));
        CHECK(r.lat == doctest::Approx(static_cast<double>(c.lat_raw) / 600000.0).epsilon(1e-15));
        CHECK(r.cog == doctest::Approx(c.cog / 10.0));
        CHECK(is_valid(r));
    }
}

TEST_CASE("checksum is the XOR between ! and *") {
    CHECK(nmea_checksum("AIVDM,1,1,,A,139>Jh@P1s0PVshO>EB9:Owp0000,0") == 0x43);
    const auto s = parse_sentence(kOracle[0].sentence);
    CHECK(s.checksum == 0x43);
    CHECK(render_sentence(s) == kOracle[0].sentence);
}

TEST_CASE("every single-bit corruption is rejected") {
    for (const auto& c : kOracle) {
        const std::string good = c.sentence;
        for (std::size_t i = 0; i < good.size(); ++i)
            for (int b = 0; b < 8; ++b) {
                std::string bad = good;
                bad[i] = static_cast<char>(static_cast<unsigned char>(bad[i]) ^ (1u << b));
                CAPTURE(bad);
                CHECK_THROWS_AS(parse_sentence(bad), Error);
            }
    }
}

TEST_CASE("armor alphabet boundaries") {
    CHECK(armor_value('0') == 0);
    CHECK(armor_value('W') == 39);
    CHECK(armor_value('`') == 40);
    CHECK(armor_value('w') == 63);
    for (int v = 0; v < 64; ++v) CHECK(armor_value(armor_char(v)) == v);
    CHECK_THROWS_AS(armor_value('X'), Error);
    CHECK_THROWS_AS(decode_payload("1X", 0), Error);
    CHECK_THROWS_AS(decode_payload("15", 6), Error);
}

TEST_CASE("random position reports survive pack and decode") {
    std::mt19937_64 rng(20240501);
    for (int i = 0; i < 1000; ++i) {
        PositionFields f;
        f.message_type = 1 + static_cast<int>(rng() % 3);
        f.mmsi = static_cast<std::uint32_t>(rng() % 1000000000u);
        f.sog = static_cast<int>(rng() % 1023);
        f.lon_raw = static_cast<std::int64_t>(rng() % (360ull * 600000 + 1)) - 180 * 600000;
        f.lat_raw = static_cast<std::int64_t>(rng() % (180ull * 600000 + 1)) - 90 * 600000;
        f.cog = static_cast<int>(rng() % 3600);
        const auto bits = encode_position_report(f);
        const auto armored = encode_payload(bits);
        NmeaSentence s;
        s.talker_tag = "AIVDM";
        s.radio_channel = (i % 2) ? 'B' : 'A';
        s.payload = armored.payload;
        s.fill_bits = armored.fill_bits;
        const auto line = render_sentence(s);
        const auto parsed = parse_sentence(line);
        CHECK(decode_payload(parsed.payload, parsed.fill_bits) == bits);
        const auto r = decode_position_report(decode_payload(parsed.payload, parsed.fill_bits));
        REQUIRE(r.mmsi == f.mmsi);
        REQUIRE(r.sog == f.sog);
        REQUIRE(std::llround(r.lon * 600000.0) == f.lon_raw);
        REQUIRE(std::llround(r.lat * 600000.0) == f.lat_raw);
        REQUIRE(std::llround(r.cog * 10.0) == f.cog);
    }
}

TEST_CASE("sentinels and out-of-range fields are rejected") {
    PositionFields f;
    f.mmsi = 211000001;
    auto decode = [](const PositionFields& p) { return decode_position_report(encode_position_report(p)); };
    auto code_of = [&](const PositionFields& p) {
        try {
            decode(p);
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::Usage;
    };
    auto p = f;
    p.sog = kSogUnavailable;
    CHECK(code_of(p) == ErrorCode::SentinelValue);
    p = f;
    p.lat_raw = kLatUnavailable;
    CHECK(code_of(p) == ErrorCode::SentinelValue);
    p = f;
    p.lon_raw = kLonUnavailable;
    CHECK(code_of(p) == ErrorCode::SentinelValue);
    p = f;
    p.cog = kCogUnavailable;
    CHECK(code_of(p) == ErrorCode::SentinelValue);
    p = f;
    p.cog = 3700;
    CHECK(code_of(p) == ErrorCode::OutOfRange);
    p = f;
    p.lat_raw = 90 * 600000 + 1;
    CHECK(code_of(p) == ErrorCode::OutOfRange);
    p = f;
    p.message_type = 4;
    CHECK(code_of(p) == ErrorCode::UnsupportedMessageType);
}

TEST_CASE("two-part static report sets the shiptype of later positions") {
    NmeaDecoder d;
    CHECK_FALSE(d.feed(std::string("\\c:1514764800*") + "\\" + kStatic1).has_value());
    CHECK_FALSE(d.feed(kStatic2).has_value());
    CHECK(d.stats().static_reports == 1);
    const auto r = d.feed(std::string("1514764810 ") + kOracle[0].sentence);
    REQUIRE(r.has_value());
    CHECK(r->timestamp == 1514764810);
    CHECK(r->shiptype == 70);
    const auto st = decode_static_report([] {
        BitVector b = decode_payload(parse_sentence(kStatic1).payload, 0);
        b.append(decode_payload(parse_sentence(kStatic2).payload, 2));
        return b;
    }());
    CHECK(st.mmsi == 211000001);
    CHECK(st.shiptype == 70);
}

TEST_CASE("decoder counts problems instead of failing") {
    NmeaDecoder d;
    CHECK_FALSE(d.feed("").has_value());
    CHECK_FALSE(d.feed("$GPGGA,123519,4807.038,N").has_value());
    std::string corrupt = std::string("1514764800 ") + kOracle[1].sentence;
    corrupt[corrupt.size() - 1] = corrupt.back() == '1' ? '2' : '1';
    CHECK_FALSE(d.feed(corrupt).has_value());
    CHECK_FALSE(d.feed(kOracle[1].sentence).has_value());  // no timestamp
    char cs[3];
    std::snprintf(cs, sizeof cs, "%02X", nmea_checksum("AIVDM,1,1,,A,1X,0"));
    CHECK_FALSE(d.feed(std::string("1514764800 !AIVDM,1,1,,A,1X,0*") + cs).has_value());
    const auto ok = d.feed(std::string("1514764801 ") + kOracle[1].sentence);
    REQUIRE(ok.has_value());
    CHECK_FALSE(ok->shiptype.has_value());
    d.finish();
    const auto& s = d.stats();
    CHECK(s.lines == 6);
    CHECK(s.ignored_sentences == 1);
    CHECK(s.checksum_errors == 1);
    CHECK(s.missing_timestamp == 1);
    CHECK(s.armor_errors == 1);
    CHECK(s.position_reports == 1);
}

TEST_CASE("multipart groups expire after the window") {
    const auto part1 = parse_sentence(kStatic1);
    const auto part2 = parse_sentence(kStatic2);
    const auto single = parse_sentence(kOracle[0].sentence);

    MultipartAssembler ok(64);
    CHECK_FALSE(ok.push(part1).has_value());
    for (int i = 0; i < 63; ++i) CHECK(ok.push(single).has_value());
    CHECK(ok.push(part2).has_value());
    CHECK(ok.dropped() == 0);

    MultipartAssembler late(64);
    CHECK_FALSE(late.push(part1).has_value());
    for (int i = 0; i < 64; ++i) late.push(single);
    CHECK_FALSE(late.push(part2).has_value());
    CHECK(late.dropped() == 1);

    MultipartAssembler flushed;
    flushed.push(part1);
    CHECK(flushed.pending() == 1);
    CHECK(flushed.flush() == 1);
    CHECK(flushed.pending() == 0);
}

TEST_CASE("timed lines accept tag blocks and leading epochs") {
    auto t = split_timed_line("\\s:base,c:1514764800*00\\!AIVDM,1,1,,A,x,0*00");
    REQUIRE(t.timestamp.has_value());
    CHECK(*t.timestamp == 1514764800);
    CHECK(t.sentence == "!AIVDM,1,1,,A,x,0*00");
    t = split_timed_line("1514764801 !AIVDM");
    CHECK(*t.timestamp == 1514764801);
    CHECK(t.sentence == "!AIVDM");
    t = split_timed_line("!AIVDM");
    CHECK_FALSE(t.timestamp.has_value());
}

TEST_CASE("records CSV round trip and rejects") {
    AisRecord a{211000001, 1514764800, 54.5, 7.25, 123, 234.5, 70};
    AisRecord b{211000002, 1514764900, -10.125, -170.0, 0, 0.0, std::nullopt};
    std::string text = std::string(kCsvHeader) + "\n" + format_record_csv(a) + "\n" + format_record_csv(b) + "\n";
    auto res = parse_records_csv(text);
    REQUIRE(res.records.size() == 2);
    CHECK(res.records[0] == a);
    CHECK(res.records[1] == b);
    CHECK(res.skipped == 0);

    text += "211000003,1514764900,95.0,0,10,10,70\n";   // latitude out of range
    text += "211000003,1514764900,50.0,0,1023,10,70\n";  // sog sentinel
    text += "garbage\n";
    res = parse_records_csv(text);
    CHECK(res.records.size() == 2);
    CHECK(res.skipped == 3);

    CHECK_THROWS_AS(parse_records_csv("mmsi,time,lat\n1,2,3\n"), Error);
    CHECK(parse_records_csv(std::string(kCsvHeader) + "\n").records.empty());
}

TEST_CASE("grouping sorts, drops duplicate timestamps and votes the shiptype") {
    std::vector<AisRecord> recs = {
        {7, 30, 1, 1, 0, 0, 70}, {5, 10, 0, 0, 0, 0, 30}, {7, 10, 2, 2, 0, 0, 30},
        {7, 10, 9, 9, 0, 0, 30}, {7, 20, 3, 3, 0, 0, 70}, {7, 40, 4, 4, 0, 0, 30},
    };
    const auto tracks = group_tracks(recs);
    REQUIRE(tracks.size() == 2);
    CHECK(tracks[0].mmsi == 5);
    CHECK(tracks[0].shiptype == 30);
    const auto& t = tracks[1];
    REQUIRE(t.records.size() == 4);
    CHECK(t.records[0].timestamp == 10);
    CHECK(t.records[0].lat == 2);  // first of the duplicate pair
    CHECK(t.records[3].timestamp == 40);
    // 30 x2 and 70 x2 after the duplicate drop; the latest report says 30.
    CHECK(t.shiptype == 30);
}
