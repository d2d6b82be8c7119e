#include "aisq/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "aisq/error.hpp"

namespace aisq::synth {

namespace {

constexpr double kMetersPerDegLat = 111320.0;
constexpr double kKnot = 0.514444;  // m/s
constexpr double kDeg = std::numbers::pi / 180.0;

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::int64_t randint(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

double gaussian(std::mt19937_64& rng) {
    const double u1 = 1.0 - uniform(rng, 0.0, 1.0);
    const double u2 = uniform(rng, 0.0, 1.0);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double wrap360(double deg) {
    deg = std::fmod(deg, 360.0);
    return deg < 0 ? deg + 360.0 : deg;
}

// Quantized the way an AIS position report carries it, so CSV and NMEA
// fixtures decode to identical records.
double quantize_deg(double v) { return static_cast<double>(std::llround(v * 600000.0)) / 600000.0; }

void push_record(std::vector<ais::AisRecord>& out, std::uint32_t mmsi, std::int64_t t, double lat, double lon,
                 double ve, double vn) {
    ais::AisRecord r;
    r.mmsi = mmsi;
    r.timestamp = t;
    r.lat = quantize_deg(lat);
    r.lon = quantize_deg(lon);
    const double speed_kn = std::hypot(ve, vn) / kKnot;
    r.sog = static_cast<int>(std::clamp<long long>(std::llround(speed_kn * 10.0), 0, 1022));
    r.cog = static_cast<double>(std::llround(wrap360(std::atan2(ve, vn) / kDeg) * 10.0) % 3600) / 10.0;
    out.push_back(r);
}

}  // namespace

std::string_view to_string(Pattern p) {
    switch (p) {
        case Pattern::Straight: return "straight";
        case Pattern::Zigzag: return "zigzag";
        case Pattern::Loiter: return "loiter";
    }
    return "?";
}

Pattern parse_pattern(std::string_view s) {
    if (s == "straight") return Pattern::Straight;
    if (s == "zigzag") return Pattern::Zigzag;
    if (s == "loiter") return Pattern::Loiter;
    throw Error(ErrorCode::InvalidConfig, "unknown pattern '" + std::string(s) + "'");
}

CorpusConfig three_class_corpus(std::size_t per_class, std::size_t samples_per_track, std::uint64_t seed) {
    CorpusConfig c;
    c.classes = {{Pattern::Straight, 70, per_class}, {Pattern::Zigzag, 30, per_class}, {Pattern::Loiter, 37, per_class}};
    c.samples_per_track = samples_per_track;
    c.seed = seed;
    return c;
}

CorpusConfig imbalanced_corpus(std::size_t total, double majority_share, std::size_t samples_per_track,
                               std::uint64_t seed) {
    const auto major = static_cast<std::size_t>(std::llround(majority_share * static_cast<double>(total)));
    const std::size_t rest = total - major;
    CorpusConfig c;
    c.classes = {{Pattern::Straight, 70, major}, {Pattern::Zigzag, 30, rest / 2}, {Pattern::Loiter, 37, rest - rest / 2}};
    c.samples_per_track = samples_per_track;
    c.seed = seed;
    return c;
}

std::vector<ais::AisRecord> generate_track(Pattern pattern, std::uint32_t mmsi, std::size_t samples,
                                           std::int64_t start_time, std::mt19937_64& rng) {
    std::vector<ais::AisRecord> out;
    out.reserve(samples);
    double lat = uniform(rng, 54.3, 55.7);
    double lon = uniform(rng, 4.5, 7.5);
    const double heading = uniform(rng, 0.0, 360.0);
    const double interval = uniform(rng, 5.0, 30.0);
    std::int64_t t = start_time + randint(rng, 0, 86400);

    // Every pattern draws its speed and reporting interval from the same
    // broad distributions, so speed level and distance covered overlap across
    // classes; the class shows in the shape of the track.
    const double speed = std::exp(uniform(rng, std::log(3.0), std::log(18.0)));
    double amplitude = 0, period = 0, phase = 0, turn = 0, drift = 0;
    switch (pattern) {
        case Pattern::Straight:
            break;
        case Pattern::Zigzag:
            amplitude = uniform(rng, 30.0, 60.0);
            period = uniform(rng, 16.0, 40.0);
            phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
            break;
        case Pattern::Loiter:
            turn = uniform(rng, 4.0, 12.0) * (rng() % 2 ? 1.0 : -1.0);
            drift = uniform(rng, 0.5, 0.9);
            break;
    }

    // Speed fluctuates around the track's level and straight tracks wander a
    // little, so speed and course spread alone do not give the class away.
    double gust = gaussian(rng), wander = 0.0;
    constexpr double kRho = 0.95;
    for (std::size_t i = 0; i < samples; ++i) {
        const double k = static_cast<double>(i);
        gust = kRho * gust + std::sqrt(1.0 - kRho * kRho) * gaussian(rng);
        wander = 0.98 * wander + 1.5 * gaussian(rng);
        double ve = 0, vn = 0;
        const double v = std::max(0.1, speed * (1.0 + 0.15 * gust) + 0.3 * gaussian(rng)) * kKnot;
        switch (pattern) {
            case Pattern::Straight: {
                const double h = (heading + wander + 2.0 * gaussian(rng)) * kDeg;
                ve = v * std::sin(h);
                vn = v * std::cos(h);
                break;
            }
            case Pattern::Zigzag: {
                const double h = (heading + amplitude * std::sin(2.0 * std::numbers::pi * k / period + phase) +
                                  2.0 * gaussian(rng)) *
                                 kDeg;
                ve = v * std::sin(h);
                vn = v * std::cos(h);
                break;
            }
            case Pattern::Loiter: {
                // circling while drifting along the heading, at the same ground speed
                const double h = (heading + turn * k + 2.0 * gaussian(rng)) * kDeg;
                const double d = heading * kDeg;
                const double e = std::sin(h) + drift * std::sin(d);
                const double n = std::cos(h) + drift * std::cos(d);
                const double norm = std::max(1e-9, std::hypot(e, n));
                ve = v * e / norm;
                vn = v * n / norm;
                break;
            }
        }
        push_record(out, mmsi, t, lat, lon, ve, vn);
        const auto dt = std::max<std::int64_t>(1, std::llround(interval + uniform(rng, -2.0, 2.0)));
        t += dt;
        lat += vn * static_cast<double>(dt) / kMetersPerDegLat;
        lon += ve * static_cast<double>(dt) / (kMetersPerDegLat * std::cos(lat * kDeg));
    }
    return out;
}

std::vector<ais::AisRecord> generate_records(const CorpusConfig& config) {
    std::mt19937_64 rng(config.seed);
    std::vector<ais::AisRecord> out;
    std::uint32_t mmsi = config.first_mmsi;
    for (const auto& cls : config.classes)
        for (std::size_t i = 0; i < cls.count; ++i) {
            auto track = generate_track(cls.pattern, mmsi++, config.samples_per_track, config.start_time, rng);
            for (auto& r : track) r.shiptype = cls.shiptype;
            out.insert(out.end(), track.begin(), track.end());
        }
    return out;
}

std::vector<ais::VesselTrack> generate_tracks(const CorpusConfig& config) {
    return ais::group_tracks(generate_records(config));
}

ais::VesselTrack fuzz_track(std::uint32_t mmsi, std::mt19937_64& rng) {
    static constexpr int kTypes[] = {70, 79, 80, 89, 30, 60, 69, 37, 52, 0, 20, 99};
    std::vector<ais::AisRecord> recs;
    const auto n = static_cast<std::size_t>(randint(rng, 1, 3000));
    double lat = uniform(rng, -75.0, 75.0);
    double lon = uniform(rng, -179.0, 179.0);
    std::int64_t t = 1514764800 + randint(rng, 0, 86400 * 365);
    const int shiptype = kTypes[rng() % std::size(kTypes)];
    bool stationary = false;
    double heading = uniform(rng, 0.0, 360.0);
    for (std::size_t i = 0; i < n; ++i) {
        ais::AisRecord r;
        r.mmsi = mmsi;
        r.timestamp = t;
        r.lat = lat;
        r.lon = lon;
        r.sog = static_cast<int>(randint(rng, 0, 1022));
        r.cog = static_cast<double>(randint(rng, 0, 3599)) / 10.0;
        if (rng() % 50 != 0) r.shiptype = shiptype;
        recs.push_back(r);

        const auto roll = rng() % 1000;
        if (roll < 20) t += randint(rng, 7000, 20000);  // straddles the gap threshold
        else if (roll < 30) t += 0;                     // duplicate timestamp
        else t += randint(rng, 1, 120);
        if (rng() % 100 == 0) stationary = !stationary;
        double step_deg = 0.0;
        if (rng() % 100 == 0) step_deg = uniform(rng, 0.005, 0.05);  // jump around the distance threshold
        else if (stationary) step_deg = uniform(rng, 0.0, 1e-6);
        else step_deg = uniform(rng, 0.0, 0.004);
        heading += 20.0 * gaussian(rng);
        lat = std::clamp(lat + step_deg * std::cos(heading * kDeg), -89.0, 89.0);
        lon += step_deg * std::sin(heading * kDeg);
        if (lon >= 180.0) lon -= 360.0;
        if (lon < -180.0) lon += 360.0;
    }
    auto tracks = ais::group_tracks(recs);
    return std::move(tracks.at(0));
}

std::vector<geo::GeoPoint> fixture_coastline() {
    std::vector<geo::GeoPoint> pts;
    for (int i = 0; i <= 300; ++i) pts.push_back({53.9, 3.0 + 0.02 * i});  // southern shore
    for (int i = 0; i <= 150; ++i) pts.push_back({53.9 + 0.02 * i, 9.0});  // eastern shore
    return pts;
}

std::vector<geo::GeoPoint> fixture_harbors() {
    return {{53.92, 4.2}, {53.92, 6.1}, {53.92, 8.0}, {55.0, 8.98}, {56.2, 8.98}};
}

std::vector<geo::GeoPoint> fixture_river() {
    std::vector<geo::GeoPoint> pts;
    for (int i = 0; i <= 100; ++i) pts.push_back({53.9 - 0.005 * i, 7.0 + 0.003 * i});
    return pts;
}

std::vector<std::string> to_nmea(const std::vector<ais::AisRecord>& records) {
    std::vector<std::string> lines;
    std::vector<std::uint32_t> announced;
    int message_id = 0;
    auto tag = [](std::int64_t t) {
        const std::string block = "c:" + std::to_string(t);
        char hex[3];
        std::snprintf(hex, sizeof hex, "%02X", ais::nmea_checksum(block));
        return "\\" + block + "*" + hex + "\\";
    };
    for (const auto& r : records) {
        if (r.shiptype && std::find(announced.begin(), announced.end(), r.mmsi) == announced.end()) {
            announced.push_back(r.mmsi);
            const auto payload = ais::encode_payload(ais::encode_static_report({r.mmsi, *r.shiptype}));
            const std::size_t parts = (payload.payload.size() + 59) / 60;
            for (std::size_t p = 0; p < parts; ++p) {
                ais::NmeaSentence s;
                s.talker_tag = "AIVDM";
                s.fragment_count = static_cast<int>(parts);
                s.fragment_index = static_cast<int>(p + 1);
                s.message_id = message_id;
                s.radio_channel = 'B';
                s.payload = payload.payload.substr(p * 60, 60);
                s.fill_bits = p + 1 == parts ? payload.fill_bits : 0;
                lines.push_back((p == 0 ? tag(r.timestamp) : std::string()) + ais::render_sentence(s));
            }
            message_id = (message_id + 1) % 10;
        }
        ais::PositionFields f;
        f.mmsi = r.mmsi;
        f.sog = r.sog;
        f.lat_raw = std::llround(r.lat * 600000.0);
        f.lon_raw = std::llround(r.lon * 600000.0);
        f.cog = static_cast<int>(std::llround(r.cog * 10.0));
        const auto payload = ais::encode_payload(ais::encode_position_report(f));
        ais::NmeaSentence s;
        s.talker_tag = "AIVDM";
        s.radio_channel = 'A';
        s.payload = payload.payload;
        s.fill_bits = payload.fill_bits;
        lines.push_back(tag(r.timestamp) + ais::render_sentence(s));
    }
    return lines;
}

}  // namespace aisq::synth
