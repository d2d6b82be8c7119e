#pragma once

// Synthetic AIS traffic for fixtures, the end-to-end tests and the benchmark.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "aisq/ais.hpp"
#include "aisq/geo.hpp"

namespace aisq::synth {

enum class Pattern : std::uint8_t { Straight, Zigzag, Loiter };

std::string_view to_string(Pattern p);
Pattern parse_pattern(std::string_view s);

struct ClassSpec {
    Pattern pattern = Pattern::Straight;
    int shiptype = 70;
    std::size_t count = 0;  // tracks
};

struct CorpusConfig {
    std::vector<ClassSpec> classes;
    std::size_t samples_per_track = 360;
    std::uint64_t seed = 1;
    std::uint32_t first_mmsi = 211000000;
    std::int64_t start_time = 1514764800;  // 2018-01-01T00:00:00Z
    bool emit_static_reports = true;
};

/// Straight (cargo/tanker), zigzag (fishing) and loiter (pleasure craft),
/// 200 tracks each, one sequence of `samples_per_track` per track.
CorpusConfig three_class_corpus(std::size_t per_class, std::size_t samples_per_track, std::uint64_t seed);

/// One class at `majority_share`, the other two splitting the rest.
CorpusConfig imbalanced_corpus(std::size_t total, double majority_share, std::size_t samples_per_track,
                               std::uint64_t seed);

/// Position reports of one vessel, all inside the fixture sea area.
std::vector<ais::AisRecord> generate_track(Pattern pattern, std::uint32_t mmsi, std::size_t samples,
                                           std::int64_t start_time, std::mt19937_64& rng);

/// Records of every track, shiptype attached to each record.
std::vector<ais::AisRecord> generate_records(const CorpusConfig& config);
std::vector<ais::VesselTrack> generate_tracks(const CorpusConfig& config);

/// Irregular tracks for property tests: gaps, jumps, stationary stretches,
/// duplicate timestamps and unmapped ship types.
ais::VesselTrack fuzz_track(std::uint32_t mmsi, std::mt19937_64& rng);

/// Coastline, harbours and a river polyline around the fixture sea area.
std::vector<geo::GeoPoint> fixture_coastline();
std::vector<geo::GeoPoint> fixture_harbors();
std::vector<geo::GeoPoint> fixture_river();

/// Renders records as AIVDM lines with `\c:<epoch>*hh\` tag blocks, one
/// static report per vessel ahead of its first position report.
std::vector<std::string> to_nmea(const std::vector<ais::AisRecord>& records);

}  // namespace aisq::synth
