#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aisq/ais.hpp"
#include "aisq/geo.hpp"

namespace aisq::pipeline {

enum class ClassLabel : std::uint8_t { CargoTanker = 0, Fishing = 1, Passenger = 2, PleasureCraft = 3, Tug = 4 };
inline constexpr int kNumClasses = 5;

std::string_view class_name(ClassLabel label);
std::string_view class_name(int label);

/// ITU type-of-ship code to class; throws UnmappedShipType for anything else.
ClassLabel map_class(int shiptype_code);
std::optional<ClassLabel> try_map_class(int shiptype_code);

enum class TransformTag : std::uint8_t { RelativeToFirst, RotateToZero };
enum class NormMode : std::uint8_t { Global, Local };

std::string_view to_string(TransformTag tag);
std::string_view to_string(NormMode mode);
TransformTag parse_transform(std::string_view s);
NormMode parse_norm_mode(std::string_view s);

inline constexpr std::size_t kChannels = 9;
enum Channel : std::size_t { kDt = 0, kSog, kCog, kXRtf, kYRtf, kXRtz, kYRtz, kDCoast, kDHarbor };
inline constexpr std::array<std::string_view, kChannels> kChannelNames = {
    "dt", "sog", "cog", "x_rtf", "y_rtf", "x_rtz", "y_rtz", "d_coast", "d_harbor"};
inline constexpr bool is_positional(std::size_t c) { return c >= kXRtf && c <= kYRtz; }

struct Sample {
    std::int64_t timestamp = 0;
    double lat = 0.0;
    double lon = 0.0;
    int sog = 0;
    double cog = 0.0;
};

struct TrackSegment {
    std::uint32_t mmsi = 0;
    std::uint32_t segment_id = 0;
    std::vector<Sample> samples;
    ClassLabel label = ClassLabel::CargoTanker;
};

/// A window of at most L true samples; padding is implicit.
struct Chunk {
    std::uint32_t mmsi = 0;
    std::uint32_t segment_id = 0;
    std::uint32_t chunk_id = 0;
    std::size_t length = 0;  // L
    std::vector<Sample> samples;
    ClassLabel label = ClassLabel::CargoTanker;

    std::size_t true_length() const noexcept { return samples.size(); }
};

struct SegmentationThresholds {
    double max_gap_s = 7200.0;
    double max_step_sq_deg = 1e-4;
};

/// Splits wherever dt > max_gap_s or dlat^2 + dlon^2 > max_step_sq_deg.
std::vector<TrackSegment> segment(const ais::VesselTrack& track, ClassLabel label,
                                  const SegmentationThresholds& thresholds = {});

struct ChunkResult {
    std::vector<Chunk> chunks;
    std::size_t discarded_samples = 0;
    std::size_t discarded_chunks = 0;
};

/// Minimum leftover length kept for a given L: ceil(fraction * L).
std::size_t min_leftover(std::size_t seq_len, double fraction);

ChunkResult chunk(const TrackSegment& segment, std::size_t seq_len, double min_fraction = 0.8);

/// Mean consecutive euclidean displacement in degrees: sum(|P_i - P_{i-1}|) / n.
double stationary_measure(std::span<const Sample> samples);

struct StationaryFilterResult {
    std::vector<Chunk> kept;
    std::size_t stationary = 0;
    std::size_t too_short = 0;
};

/// Removes chunks with measure < threshold (and chunks with fewer than 2 samples).
StationaryFilterResult filter_stationary(std::vector<Chunk> chunks, double threshold);

/// Keep unless strictly more than `max_fraction` of the samples are near a river.
bool filter_river(const Chunk& chunk, const geo::RiverMask& mask, double max_fraction = 0.5);

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

std::vector<Vec2> transform_relative_to_first(std::span<const Sample> samples);

struct RotateResult {
    std::vector<Vec2> points;
    bool degenerate = false;  // endpoint at origin, passed through unrotated
};

/// Rotates so that the last point lies on the positive x-axis.
RotateResult transform_rotate_to_zero(std::span<const Vec2> relative);

/// L x 9 row-major matrix in raw units; rows >= true_length are zero.
struct RawFeatures {
    std::size_t length = 0;
    std::size_t true_length = 0;
    std::vector<double> values;
    bool degenerate_endpoint = false;

    double& at(std::size_t row, std::size_t ch) { return values[row * kChannels + ch]; }
    double at(std::size_t row, std::size_t ch) const { return values[row * kChannels + ch]; }
};

RawFeatures compute_features(const Chunk& chunk, const geo::GeoGridIndex& coast, const geo::GeoGridIndex& harbor,
                             TransformTag tag);

struct ChannelBounds {
    double min = 0.0;
    double max = 1.0;
};

struct NormalizationSpec {
    NormMode mode = NormMode::Global;
    std::array<ChannelBounds, kChannels> bounds{};
};

/// Fixed bounds for the non-positional channels; positional bounds left at [0, 1].
NormalizationSpec default_normalization(NormMode mode, double max_gap_s, double coast_radius_km,
                                        double harbor_radius_km);

/// Positional channel bounds over the true rows of every matrix.
void fit_global_bounds(NormalizationSpec& spec, std::span<const RawFeatures> features);

struct NormalizedFeatures {
    std::vector<double> values;
    std::uint16_t constant_channels = 0;  // bit c set: channel c had max == min
};

/// (X - min) / (max - min) clamped to [0, 1]; padding rows stay exactly zero.
/// Local mode takes positional bounds from the sequence itself.
NormalizedFeatures normalize(const RawFeatures& raw, const NormalizationSpec& spec);

/// Inverse of normalize for a global-mode spec (true rows only).
std::vector<double> denormalize(std::span<const double> normalized, std::size_t true_length,
                                const NormalizationSpec& spec);

struct FeatureSequence {
    std::size_t length = 0;
    std::size_t true_length = 0;
    ClassLabel label = ClassLabel::CargoTanker;
    std::uint32_t mmsi = 0;
    std::uint32_t segment_id = 0;
    std::uint32_t chunk_id = 0;
    TransformTag transform = TransformTag::RelativeToFirst;
    std::vector<float> values;  // length x 9, row-major

    float at(std::size_t row, std::size_t ch) const { return values[row * kChannels + ch]; }
};

}  // namespace aisq::pipeline
