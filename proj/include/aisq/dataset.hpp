#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "aisq/ais.hpp"
#include "aisq/geo.hpp"
#include "aisq/pipeline.hpp"

namespace aisq::dataset {

enum class SplitMode : std::uint8_t { Sequence, Vessel };
enum class Split : std::uint8_t { Train = 0, Val = 1, Test = 2 };

std::string_view to_string(SplitMode mode);
std::string_view to_string(Split split);
SplitMode parse_split_mode(std::string_view s);
Split parse_split(std::string_view s);

struct DatasetConfig {
    std::size_t seq_len = 360;
    pipeline::TransformTag transform = pipeline::TransformTag::RelativeToFirst;
    pipeline::NormMode norm = pipeline::NormMode::Global;
    SplitMode split_mode = SplitMode::Sequence;
    std::uint64_t seed = 42;
    pipeline::SegmentationThresholds segmentation{};
    double chunk_min_fraction = 0.8;
    double stationary_threshold = 2e-5;
    double river_buffer_m = 200.0;
    double river_max_fraction = 0.5;
    double coast_cell_km = 40.0;
    double harbor_cell_km = 5000.0;
    double train_fraction = 0.64;
    double val_fraction = 0.16;
    std::size_t shard_size = 4096;
    int workers = 1;
};

nlohmann::ordered_json to_json(const DatasetConfig& config);
/// Keys missing from `j` keep their defaults.
DatasetConfig dataset_config_from_json(const nlohmann::json& j);

struct GeoContext {
    const geo::GeoGridIndex* coast = nullptr;
    const geo::GeoGridIndex* harbor = nullptr;
    const geo::RiverMask* rivers = nullptr;  // optional
};

struct DropCounters {
    std::size_t tracks = 0;
    std::size_t tracks_no_shiptype = 0;
    std::size_t tracks_unmapped_shiptype = 0;
    std::size_t segments = 0;
    std::size_t chunks = 0;
    std::size_t leftover_discarded = 0;
    std::size_t leftover_discarded_samples = 0;
    std::size_t too_short = 0;
    std::size_t stationary = 0;
    std::size_t river = 0;
    std::size_t degenerate_endpoint = 0;
    std::size_t constant_channel = 0;
    std::size_t kept = 0;

    DropCounters& operator+=(const DropCounters& o);
};

struct Dataset {
    DatasetConfig config;
    pipeline::NormalizationSpec normalization;
    std::vector<pipeline::FeatureSequence> sequences;  // shuffled order
    std::vector<Split> splits;                          // parallel to sequences
    DropCounters counters;
    bool river_filter = false;

    std::vector<const pipeline::FeatureSequence*> split(Split which) const;
    std::array<std::size_t, pipeline::kNumClasses> class_counts() const;
};

/// Pure pipeline: class map, segment, chunk, filter, features, normalize,
/// shuffle(seed) and split. Output is independent of config.workers.
Dataset build_dataset(const std::vector<ais::VesselTrack>& tracks, const GeoContext& geo,
                      const DatasetConfig& config);

/// Sequence counts per split for n sequences in sequence mode.
std::array<std::size_t, 3> split_sizes(std::size_t n, double train_fraction, double val_fraction);

/// Writes shards and manifest.json into `dir`; returns the manifest text.
std::string write_dataset(const Dataset& dataset, const std::filesystem::path& dir);

/// Reads manifest.json and every shard it lists (CRCs verified).
Dataset load_dataset(const std::filesystem::path& dir);

inline constexpr const char* kManifestName = "manifest.json";

}  // namespace aisq::dataset
