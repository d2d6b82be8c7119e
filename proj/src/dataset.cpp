#include "aisq/dataset.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "aisq/error.hpp"
#include "aisq/shard.hpp"

namespace aisq::dataset {

using pipeline::FeatureSequence;
using pipeline::kChannels;
using json = nlohmann::ordered_json;

std::string_view to_string(SplitMode mode) { return mode == SplitMode::Sequence ? "sequence" : "vessel"; }

std::string_view to_string(Split split) {
    switch (split) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
    }
    return "?";
}

SplitMode parse_split_mode(std::string_view s) {
    if (s == "sequence") return SplitMode::Sequence;
    if (s == "vessel") return SplitMode::Vessel;
    throw Error(ErrorCode::Usage, "split mode must be sequence or vessel, got '" + std::string(s) + "'");
}

Split parse_split(std::string_view s) {
    if (s == "train") return Split::Train;
    if (s == "val") return Split::Val;
    if (s == "test") return Split::Test;
    throw Error(ErrorCode::Usage, "split must be train, val or test, got '" + std::string(s) + "'");
}

json to_json(const DatasetConfig& c) {
    return {{"seq_len", c.seq_len},
            {"transform", pipeline::to_string(c.transform)},
            {"norm", pipeline::to_string(c.norm)},
            {"split_mode", to_string(c.split_mode)},
            {"seed", c.seed},
            {"max_gap_s", c.segmentation.max_gap_s},
            {"max_step_sq_deg", c.segmentation.max_step_sq_deg},
            {"chunk_min_fraction", c.chunk_min_fraction},
            {"stationary_threshold", c.stationary_threshold},
            {"river_buffer_m", c.river_buffer_m},
            {"river_max_fraction", c.river_max_fraction},
            {"coast_cell_km", c.coast_cell_km},
            {"harbor_cell_km", c.harbor_cell_km},
            {"train_fraction", c.train_fraction},
            {"val_fraction", c.val_fraction},
            {"shard_size", c.shard_size},
            {"workers", c.workers}};
}

DatasetConfig dataset_config_from_json(const nlohmann::json& j) {
    DatasetConfig c;
    try {
        c.seq_len = j.value("seq_len", c.seq_len);
        if (j.contains("transform")) c.transform = pipeline::parse_transform(j.at("transform").get<std::string>());
        if (j.contains("norm")) c.norm = pipeline::parse_norm_mode(j.at("norm").get<std::string>());
        if (j.contains("split_mode")) c.split_mode = parse_split_mode(j.at("split_mode").get<std::string>());
        c.seed = j.value("seed", c.seed);
        c.segmentation.max_gap_s = j.value("max_gap_s", c.segmentation.max_gap_s);
        c.segmentation.max_step_sq_deg = j.value("max_step_sq_deg", c.segmentation.max_step_sq_deg);
        c.chunk_min_fraction = j.value("chunk_min_fraction", c.chunk_min_fraction);
        c.stationary_threshold = j.value("stationary_threshold", c.stationary_threshold);
        c.river_buffer_m = j.value("river_buffer_m", c.river_buffer_m);
        c.river_max_fraction = j.value("river_max_fraction", c.river_max_fraction);
        c.coast_cell_km = j.value("coast_cell_km", c.coast_cell_km);
        c.harbor_cell_km = j.value("harbor_cell_km", c.harbor_cell_km);
        c.train_fraction = j.value("train_fraction", c.train_fraction);
        c.val_fraction = j.value("val_fraction", c.val_fraction);
        c.shard_size = j.value("shard_size", c.shard_size);
        c.workers = j.value("workers", c.workers);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("dataset config: ") + e.what());
    }
    return c;
}

DropCounters& DropCounters::operator+=(const DropCounters& o) {
    tracks += o.tracks;
    tracks_no_shiptype += o.tracks_no_shiptype;
    tracks_unmapped_shiptype += o.tracks_unmapped_shiptype;
    segments += o.segments;
    chunks += o.chunks;
    leftover_discarded += o.leftover_discarded;
    leftover_discarded_samples += o.leftover_discarded_samples;
    too_short += o.too_short;
    stationary += o.stationary;
    river += o.river;
    degenerate_endpoint += o.degenerate_endpoint;
    constant_channel += o.constant_channel;
    kept += o.kept;
    return *this;
}

std::vector<const FeatureSequence*> Dataset::split(Split which) const {
    std::vector<const FeatureSequence*> out;
    for (std::size_t i = 0; i < sequences.size(); ++i)
        if (splits[i] == which) out.push_back(&sequences[i]);
    return out;
}

std::array<std::size_t, pipeline::kNumClasses> Dataset::class_counts() const {
    std::array<std::size_t, pipeline::kNumClasses> counts{};
    for (const auto& s : sequences) ++counts[static_cast<std::size_t>(s.label)];
    return counts;
}

std::array<std::size_t, 3> split_sizes(std::size_t n, double train_fraction, double val_fraction) {
    const auto train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    const auto val = std::min(n - std::min(n, train),
                              static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(n))));
    const auto t = std::min(train, n);
    return {t, val, n - t - val};
}

namespace {

struct TrackOutput {
    std::vector<pipeline::Chunk> chunks;  // samples cleared after features
    std::vector<pipeline::RawFeatures> features;
    DropCounters counters;
};

TrackOutput process_track(const ais::VesselTrack& track, const GeoContext& geo, const DatasetConfig& cfg) {
    TrackOutput out;
    out.counters.tracks = 1;
    if (!track.shiptype) {
        out.counters.tracks_no_shiptype = 1;
        return out;
    }
    const auto label = pipeline::try_map_class(*track.shiptype);
    if (!label) {
        out.counters.tracks_unmapped_shiptype = 1;
        return out;
    }
    const auto segments = pipeline::segment(track, *label, cfg.segmentation);
    out.counters.segments = segments.size();
    for (const auto& seg : segments) {
        auto chunked = pipeline::chunk(seg, cfg.seq_len, cfg.chunk_min_fraction);
        out.counters.chunks += chunked.chunks.size();
        out.counters.leftover_discarded += chunked.discarded_chunks;
        out.counters.leftover_discarded_samples += chunked.discarded_samples;
        auto filtered = pipeline::filter_stationary(std::move(chunked.chunks), cfg.stationary_threshold);
        out.counters.stationary += filtered.stationary;
        out.counters.too_short += filtered.too_short;
        for (auto& c : filtered.kept) {
            if (geo.rivers && !pipeline::filter_river(c, *geo.rivers, cfg.river_max_fraction)) {
                ++out.counters.river;
                continue;
            }
            auto f = pipeline::compute_features(c, *geo.coast, *geo.harbor, cfg.transform);
            if (f.degenerate_endpoint) ++out.counters.degenerate_endpoint;
            c.samples.clear();
            c.samples.shrink_to_fit();
            out.features.push_back(std::move(f));
            out.chunks.push_back(std::move(c));
        }
    }
    return out;
}

}  // namespace

Dataset build_dataset(const std::vector<ais::VesselTrack>& tracks, const GeoContext& geo,
                      const DatasetConfig& cfg) {
    if (!geo.coast || !geo.harbor) throw Error(ErrorCode::InvalidConfig, "coast and harbor indices are required");
    if (cfg.seq_len == 0) throw Error(ErrorCode::InvalidConfig, "sequence length must be positive");

    std::vector<std::size_t> order(tracks.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return tracks[a].mmsi < tracks[b].mmsi; });

    std::vector<TrackOutput> outputs(tracks.size());
    const int workers = std::max(1, cfg.workers);
    const auto n_tracks = static_cast<std::int64_t>(order.size());
#pragma omp parallel for schedule(dynamic, 4) num_threads(workers)
    for (std::int64_t i = 0; i < n_tracks; ++i) outputs[i] = process_track(tracks[order[i]], geo, cfg);

    Dataset ds;
    ds.river_filter = geo.rivers != nullptr;
    ds.config = cfg;
    std::vector<pipeline::Chunk> chunks;
    std::vector<pipeline::RawFeatures> raw;
    for (auto& o : outputs) {
        ds.counters += o.counters;
        std::move(o.chunks.begin(), o.chunks.end(), std::back_inserter(chunks));
        std::move(o.features.begin(), o.features.end(), std::back_inserter(raw));
    }
    outputs.clear();
    if (raw.empty()) throw Error(ErrorCode::EmptyDataset, "no sequence survived preprocessing");

    ds.normalization = pipeline::default_normalization(cfg.norm, cfg.segmentation.max_gap_s,
                                                       cfg.coast_cell_km / 2.0, cfg.harbor_cell_km / 2.0);
    if (cfg.norm == pipeline::NormMode::Global) pipeline::fit_global_bounds(ds.normalization, raw);

    const auto n = static_cast<std::int64_t>(raw.size());
    std::vector<FeatureSequence> sequences(raw.size());
    std::vector<std::uint8_t> constant(raw.size(), 0);
#pragma omp parallel for schedule(static) num_threads(workers)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto norm = pipeline::normalize(raw[i], ds.normalization);
        auto& s = sequences[i];
        s.length = raw[i].length;
        s.true_length = raw[i].true_length;
        s.label = chunks[i].label;
        s.mmsi = chunks[i].mmsi;
        s.segment_id = chunks[i].segment_id;
        s.chunk_id = chunks[i].chunk_id;
        s.transform = cfg.transform;
        s.values.assign(norm.values.begin(), norm.values.end());
        constant[i] = norm.constant_channels != 0;
    }
    ds.counters.constant_channel = static_cast<std::size_t>(std::count(constant.begin(), constant.end(), 1));
    ds.counters.kept = sequences.size();

    // Fisher-Yates with the raw engine output so the order is portable.
    std::vector<std::size_t> perm(sequences.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(cfg.seed);
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng() % i]);

    ds.sequences.reserve(sequences.size());
    for (auto i : perm) ds.sequences.push_back(std::move(sequences[i]));

    const auto sizes = split_sizes(ds.sequences.size(), cfg.train_fraction, cfg.val_fraction);
    ds.splits.assign(ds.sequences.size(), Split::Test);
    auto split_at = [&](std::size_t position) {
        if (position < sizes[0]) return Split::Train;
        if (position < sizes[0] + sizes[1]) return Split::Val;
        return Split::Test;
    };
    if (cfg.split_mode == SplitMode::Sequence) {
        for (std::size_t i = 0; i < ds.sequences.size(); ++i) ds.splits[i] = split_at(i);
    } else {
        // Vessels in order of first appearance in the shuffled list; each vessel
        // goes to the split its first sequence position falls into.
        std::map<std::uint32_t, std::vector<std::size_t>> by_vessel;
        std::vector<std::uint32_t> vessel_order;
        for (std::size_t i = 0; i < ds.sequences.size(); ++i) {
            auto& v = by_vessel[ds.sequences[i].mmsi];
            if (v.empty()) vessel_order.push_back(ds.sequences[i].mmsi);
            v.push_back(i);
        }
        std::size_t position = 0;
        for (auto mmsi : vessel_order) {
            const auto& idx = by_vessel[mmsi];
            const auto split = split_at(position);
            for (auto i : idx) ds.splits[i] = split;
            position += idx.size();
        }
    }
    return ds;
}

namespace {

json counters_json(const DropCounters& c) {
    return json{{"tracks", c.tracks},
                {"tracks_no_shiptype", c.tracks_no_shiptype},
                {"tracks_unmapped_shiptype", c.tracks_unmapped_shiptype},
                {"segments", c.segments},
                {"chunks", c.chunks},
                {"leftover_discarded", c.leftover_discarded},
                {"leftover_discarded_samples", c.leftover_discarded_samples},
                {"too_short", c.too_short},
                {"stationary", c.stationary},
                {"river", c.river},
                {"degenerate_endpoint", c.degenerate_endpoint},
                {"constant_channel", c.constant_channel},
                {"kept", c.kept}};
}

DropCounters counters_from_json(const json& j) {
    DropCounters c;
    c.tracks = j.at("tracks");
    c.tracks_no_shiptype = j.at("tracks_no_shiptype");
    c.tracks_unmapped_shiptype = j.at("tracks_unmapped_shiptype");
    c.segments = j.at("segments");
    c.chunks = j.at("chunks");
    c.leftover_discarded = j.at("leftover_discarded");
    c.leftover_discarded_samples = j.at("leftover_discarded_samples");
    c.too_short = j.at("too_short");
    c.stationary = j.at("stationary");
    c.river = j.at("river");
    c.degenerate_endpoint = j.at("degenerate_endpoint");
    c.constant_channel = j.at("constant_channel");
    c.kept = j.at("kept");
    return c;
}

}  // namespace

std::string write_dataset(const Dataset& ds, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());

    const auto& cfg = ds.config;
    json manifest;
    manifest["format"] = "aisq-dataset";
    manifest["version"] = 1;
    manifest["sequence_length"] = cfg.seq_len;
    manifest["transform"] = pipeline::to_string(cfg.transform);
    json schema = json::array();
    for (auto name : pipeline::kChannelNames) schema.push_back(name);
    manifest["feature_schema"] = schema;
    json channels = json::array();
    for (std::size_t c = 0; c < kChannels; ++c)
        channels.push_back({{"name", pipeline::kChannelNames[c]},
                            {"min", ds.normalization.bounds[c].min},
                            {"max", ds.normalization.bounds[c].max},
                            {"source", pipeline::is_positional(c) ? (cfg.norm == pipeline::NormMode::Global
                                                                         ? "dataset"
                                                                         : "sequence")
                                                                  : "fixed"}});
    manifest["normalization"] = {{"mode", pipeline::to_string(cfg.norm)}, {"channels", channels}};
    manifest["thresholds"] = {{"max_gap_s", cfg.segmentation.max_gap_s},
                              {"max_step_sq_deg", cfg.segmentation.max_step_sq_deg},
                              {"chunk_min_fraction", cfg.chunk_min_fraction},
                              {"stationary_threshold_deg_per_sample", cfg.stationary_threshold},
                              {"river_filter_enabled", ds.river_filter},
                              {"river_buffer_m", cfg.river_buffer_m},
                              {"river_max_fraction", cfg.river_max_fraction},
                              {"coast_cell_km", cfg.coast_cell_km},
                              {"coast_radius_km", cfg.coast_cell_km / 2.0},
                              {"harbor_cell_km", cfg.harbor_cell_km},
                              {"harbor_radius_km", cfg.harbor_cell_km / 2.0},
                              {"filter_stage", "per-chunk"}};
    manifest["split_mode"] = to_string(cfg.split_mode);
    manifest["split_fractions"] = {{"train", cfg.train_fraction},
                                   {"val", cfg.val_fraction},
                                   {"test", 1.0 - cfg.train_fraction - cfg.val_fraction}};
    manifest["seed"] = cfg.seed;
    manifest["shard_size"] = cfg.shard_size;

    const auto counts = ds.class_counts();
    json class_counts = json::object();
    for (int c = 0; c < pipeline::kNumClasses; ++c)
        class_counts[std::string(pipeline::class_name(c))] = counts[static_cast<std::size_t>(c)];
    manifest["class_counts"] = class_counts;
    manifest["counters"] = counters_json(ds.counters);

    // Shards per split, in dataset order.
    json shards = json::array();
    json entries = json::array();
    std::array<std::size_t, 3> split_counts{};
    std::vector<std::pair<std::size_t, std::size_t>> location(ds.sequences.size());
    std::size_t shard_no = 0;
    for (auto split : {Split::Train, Split::Val, Split::Test}) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < ds.sequences.size(); ++i)
            if (ds.splits[i] == split) members.push_back(i);
        split_counts[static_cast<std::size_t>(split)] = members.size();
        const std::size_t per = std::max<std::size_t>(1, cfg.shard_size);
        for (std::size_t start = 0; start == 0 || start < members.size(); start += per) {
            const std::size_t end = std::min(members.size(), start + per);
            std::vector<FeatureSequence> batch;
            for (std::size_t k = start; k < end; ++k) {
                batch.push_back(ds.sequences[members[k]]);
                location[members[k]] = {shard_no, k - start};
            }
            char name[64];
            std::snprintf(name, sizeof name, "%s-%05zu.aisq", std::string(to_string(split)).c_str(),
                          start / per);
            const auto crc = shard::write_shard(batch, dir / name);
            shards.push_back({{"file", name},
                              {"split", to_string(split)},
                              {"count", batch.size()},
                              {"crc32", shard::hex32(crc)}});
            ++shard_no;
            if (members.empty()) break;
        }
    }
    manifest["split_counts"] = {{"train", split_counts[0]}, {"val", split_counts[1]}, {"test", split_counts[2]}};
    manifest["shards"] = shards;
    for (std::size_t i = 0; i < ds.sequences.size(); ++i) {
        const auto& s = ds.sequences[i];
        entries.push_back({{"mmsi", s.mmsi},
                           {"segment", s.segment_id},
                           {"chunk", s.chunk_id},
                           {"label", static_cast<int>(s.label)},
                           {"true_length", s.true_length},
                           {"split", to_string(ds.splits[i])},
                           {"shard", location[i].first},
                           {"index", location[i].second}});
    }
    manifest["sequences"] = entries;

    const std::string text = manifest.dump(1) + "\n";
    std::ofstream out(dir / kManifestName, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + (dir / kManifestName).string());
    out << text;
    if (!out) throw Error(ErrorCode::IoError, "write failed: " + (dir / kManifestName).string());
    return text;
}

Dataset load_dataset(const std::filesystem::path& dir) {
    const auto path = dir / kManifestName;
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    json m;
    try {
        m = json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::FormatError, path.string() + ": " + e.what());
    }
    try {
        if (m.at("format") != "aisq-dataset") throw Error(ErrorCode::MagicMismatch, path.string());
        if (m.at("version") != 1) throw Error(ErrorCode::VersionMismatch, path.string());

        Dataset ds;
        auto& cfg = ds.config;
        cfg.seq_len = m.at("sequence_length");
        cfg.transform = pipeline::parse_transform(m.at("transform").get<std::string>());
        cfg.norm = pipeline::parse_norm_mode(m.at("normalization").at("mode").get<std::string>());
        cfg.split_mode = parse_split_mode(m.at("split_mode").get<std::string>());
        cfg.seed = m.at("seed");
        cfg.shard_size = m.at("shard_size");
        const auto& t = m.at("thresholds");
        cfg.segmentation.max_gap_s = t.at("max_gap_s");
        cfg.segmentation.max_step_sq_deg = t.at("max_step_sq_deg");
        cfg.chunk_min_fraction = t.at("chunk_min_fraction");
        cfg.stationary_threshold = t.at("stationary_threshold_deg_per_sample");
        cfg.river_buffer_m = t.at("river_buffer_m");
        cfg.river_max_fraction = t.at("river_max_fraction");
        cfg.coast_cell_km = t.at("coast_cell_km");
        cfg.harbor_cell_km = t.at("harbor_cell_km");
        cfg.train_fraction = m.at("split_fractions").at("train");
        cfg.val_fraction = m.at("split_fractions").at("val");

        ds.normalization.mode = cfg.norm;
        const auto& channels = m.at("normalization").at("channels");
        if (channels.size() != kChannels) throw Error(ErrorCode::FormatError, "manifest must list 9 channels");
        for (std::size_t c = 0; c < kChannels; ++c)
            ds.normalization.bounds[c] = {channels[c].at("min"), channels[c].at("max")};
        ds.counters = counters_from_json(m.at("counters"));
        ds.river_filter = t.at("river_filter_enabled");

        std::vector<std::vector<FeatureSequence>> shards;
        for (const auto& sh : m.at("shards")) {
            const auto file = dir / sh.at("file").get<std::string>();
            const auto bytes = shard::read_file(file);
            if (shard::hex32(shard::content_id(bytes)) != sh.at("crc32").get<std::string>())
                throw Error(ErrorCode::ChecksumMismatch, file.string() + " does not match manifest checksum");
            shards.push_back(shard::decode_shard(bytes));
        }
        for (const auto& e : m.at("sequences")) {
            const std::size_t sh = e.at("shard");
            const std::size_t idx = e.at("index");
            if (sh >= shards.size() || idx >= shards[sh].size())
                throw Error(ErrorCode::FormatError, "manifest entry points outside its shard");
            FeatureSequence s = shards[sh][idx];
            if (s.mmsi != e.at("mmsi").get<std::uint32_t>() || static_cast<int>(s.label) != e.at("label") ||
                s.true_length != e.at("true_length").get<std::size_t>())
                throw Error(ErrorCode::FormatError, "manifest entry disagrees with shard record");
            s.segment_id = e.at("segment");
            s.chunk_id = e.at("chunk");
            s.transform = cfg.transform;
            ds.sequences.push_back(std::move(s));
            ds.splits.push_back(parse_split(e.at("split").get<std::string>()));
        }
        return ds;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::FormatError, path.string() + ": " + e.what());
    }
}

}  // namespace aisq::dataset
