#include "aisq/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "aisq/error.hpp"

namespace aisq::pipeline {

std::string_view class_name(ClassLabel label) {
    switch (label) {
        case ClassLabel::CargoTanker: return "Cargo-Tanker";
        case ClassLabel::Fishing: return "Fishing";
        case ClassLabel::Passenger: return "Passenger";
        case ClassLabel::PleasureCraft: return "Pleasure Craft";
        case ClassLabel::Tug: return "Tug";
    }
    return "?";
}

std::string_view class_name(int label) {
    if (label < 0 || label >= kNumClasses) throw Error(ErrorCode::LabelOutOfRange, std::to_string(label));
    return class_name(static_cast<ClassLabel>(label));
}

std::optional<ClassLabel> try_map_class(int code) {
    if (code >= 70 && code <= 89) return ClassLabel::CargoTanker;
    if (code == 30) return ClassLabel::Fishing;
    if (code >= 60 && code <= 69) return ClassLabel::Passenger;
    if (code == 37) return ClassLabel::PleasureCraft;
    if (code == 52) return ClassLabel::Tug;
    return std::nullopt;
}

ClassLabel map_class(int code) {
    if (const auto label = try_map_class(code)) return *label;
    throw Error(ErrorCode::UnmappedShipType, "shiptype " + std::to_string(code));
}

std::string_view to_string(TransformTag tag) { return tag == TransformTag::RelativeToFirst ? "rtf" : "rtz"; }
std::string_view to_string(NormMode mode) { return mode == NormMode::Global ? "global" : "local"; }

TransformTag parse_transform(std::string_view s) {
    if (s == "rtf") return TransformTag::RelativeToFirst;
    if (s == "rtz") return TransformTag::RotateToZero;
    throw Error(ErrorCode::Usage, "transform must be rtf or rtz, got '" + std::string(s) + "'");
}

NormMode parse_norm_mode(std::string_view s) {
    if (s == "global") return NormMode::Global;
    if (s == "local") return NormMode::Local;
    throw Error(ErrorCode::Usage, "norm must be global or local, got '" + std::string(s) + "'");
}

std::vector<TrackSegment> segment(const ais::VesselTrack& track, ClassLabel label,
                                  const SegmentationThresholds& thresholds) {
    std::vector<TrackSegment> out;
    const Sample* prev = nullptr;
    for (const auto& r : track.records) {
        const Sample s{r.timestamp, r.lat, r.lon, r.sog, r.cog};
        bool split = out.empty();
        if (prev) {
            const double dt = static_cast<double>(s.timestamp - prev->timestamp);
            const double dlat = s.lat - prev->lat;
            const double dlon = s.lon - prev->lon;
            split = dt > thresholds.max_gap_s || dlat * dlat + dlon * dlon > thresholds.max_step_sq_deg;
        }
        if (split) {
            TrackSegment seg;
            seg.mmsi = track.mmsi;
            seg.segment_id = static_cast<std::uint32_t>(out.size());
            seg.label = label;
            out.push_back(std::move(seg));
        }
        out.back().samples.push_back(s);
        prev = &out.back().samples.back();
    }
    return out;
}

std::size_t min_leftover(std::size_t seq_len, double fraction) {
    return static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(seq_len) - 1e-9));
}

ChunkResult chunk(const TrackSegment& seg, std::size_t seq_len, double min_fraction) {
    if (seq_len == 0) throw Error(ErrorCode::InvalidConfig, "sequence length must be positive");
    ChunkResult out;
    const std::size_t keep_min = min_leftover(seq_len, min_fraction);
    const auto& s = seg.samples;
    for (std::size_t start = 0; start < s.size(); start += seq_len) {
        const std::size_t n = std::min(seq_len, s.size() - start);
        if (n < seq_len && n < keep_min) {
            out.discarded_samples += n;
            ++out.discarded_chunks;
            break;
        }
        Chunk c;
        c.mmsi = seg.mmsi;
        c.segment_id = seg.segment_id;
        c.chunk_id = static_cast<std::uint32_t>(out.chunks.size());
        c.length = seq_len;
        c.label = seg.label;
        c.samples.assign(s.begin() + static_cast<std::ptrdiff_t>(start),
                         s.begin() + static_cast<std::ptrdiff_t>(start + n));
        out.chunks.push_back(std::move(c));
    }
    return out;
}

double stationary_measure(std::span<const Sample> samples) {
    const std::size_t n = samples.size();
    if (n < 2) throw Error(ErrorCode::TooShort, "stationary measure needs at least 2 samples");
    double sum = 0.0;
    for (std::size_t i = 1; i < n; ++i)
        sum += std::hypot(samples[i].lon - samples[i - 1].lon, samples[i].lat - samples[i - 1].lat);
    return sum / static_cast<double>(n);
}

StationaryFilterResult filter_stationary(std::vector<Chunk> chunks, double threshold) {
    StationaryFilterResult out;
    for (auto& c : chunks) {
        if (c.samples.size() < 2) {
            ++out.too_short;
        } else if (stationary_measure(c.samples) < threshold) {
            ++out.stationary;
        } else {
            out.kept.push_back(std::move(c));
        }
    }
    return out;
}

bool filter_river(const Chunk& c, const geo::RiverMask& mask, double max_fraction) {
    std::size_t near = 0;
    for (const auto& s : c.samples)
        if (mask.near_river({s.lat, s.lon})) ++near;
    return static_cast<double>(near) <= max_fraction * static_cast<double>(c.samples.size());
}

std::vector<Vec2> transform_relative_to_first(std::span<const Sample> samples) {
    std::vector<Vec2> out;
    out.reserve(samples.size());
    if (samples.empty()) return out;
    const double lon0 = samples.front().lon;
    const double lat0 = samples.front().lat;
    for (const auto& s : samples) out.push_back({s.lon - lon0, s.lat - lat0});
    return out;
}

RotateResult transform_rotate_to_zero(std::span<const Vec2> relative) {
    RotateResult out;
    out.points.assign(relative.begin(), relative.end());
    if (relative.empty()) {
        out.degenerate = true;
        return out;
    }
    const Vec2 end = relative.back();
    const double r = std::hypot(end.x, end.y);
    if (r == 0.0) {
        out.degenerate = true;
        return out;
    }
    // Rotation by -atan2(y_end, x_end).
    const double c = end.x / r;
    const double s = end.y / r;
    for (auto& p : out.points) {
        const Vec2 q = p;
        p.x = c * q.x + s * q.y;
        p.y = -s * q.x + c * q.y;
    }
    out.points.back() = {r, 0.0};
    return out;
}

RawFeatures compute_features(const Chunk& chunk, const geo::GeoGridIndex& coast, const geo::GeoGridIndex& harbor,
                             TransformTag tag) {
    RawFeatures f;
    f.length = chunk.length;
    f.true_length = chunk.samples.size();
    if (f.true_length > f.length) throw Error(ErrorCode::ShapeMismatch, "chunk longer than sequence length");
    f.values.assign(f.length * kChannels, 0.0);

    const auto rtf = transform_relative_to_first(chunk.samples);
    std::vector<Vec2> rtz = rtf;
    if (tag == TransformTag::RotateToZero) {
        auto rot = transform_rotate_to_zero(rtf);
        f.degenerate_endpoint = rot.degenerate;
        rtz = std::move(rot.points);
    }
    for (std::size_t i = 0; i < f.true_length; ++i) {
        const auto& s = chunk.samples[i];
        f.at(i, kDt) = i == 0 ? 0.0 : static_cast<double>(s.timestamp - chunk.samples[i - 1].timestamp);
        f.at(i, kSog) = s.sog;
        f.at(i, kCog) = s.cog;
        f.at(i, kXRtf) = rtf[i].x;
        f.at(i, kYRtf) = rtf[i].y;
        f.at(i, kXRtz) = rtz[i].x;
        f.at(i, kYRtz) = rtz[i].y;
        const geo::GeoPoint p{s.lat, s.lon};
        f.at(i, kDCoast) = coast.min_distance_within(p);
        f.at(i, kDHarbor) = harbor.min_distance_within(p);
    }
    return f;
}

NormalizationSpec default_normalization(NormMode mode, double max_gap_s, double coast_radius_km,
                                        double harbor_radius_km) {
    NormalizationSpec spec;
    spec.mode = mode;
    spec.bounds[kDt] = {0.0, max_gap_s};
    spec.bounds[kSog] = {0.0, 1022.0};
    spec.bounds[kCog] = {0.0, 359.9};
    for (std::size_t c = kXRtf; c <= kYRtz; ++c) spec.bounds[c] = {0.0, 1.0};
    spec.bounds[kDCoast] = {0.0, coast_radius_km};
    spec.bounds[kDHarbor] = {0.0, harbor_radius_km};
    return spec;
}

void fit_global_bounds(NormalizationSpec& spec, std::span<const RawFeatures> features) {
    for (std::size_t c = kXRtf; c <= kYRtz; ++c) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (const auto& f : features) {
            for (std::size_t i = 0; i < f.true_length; ++i) {
                lo = std::min(lo, f.at(i, c));
                hi = std::max(hi, f.at(i, c));
            }
        }
        if (lo > hi) lo = hi = 0.0;
        spec.bounds[c] = {lo, hi};
    }
}

NormalizedFeatures normalize(const RawFeatures& raw, const NormalizationSpec& spec) {
    NormalizedFeatures out;
    out.values.assign(raw.values.size(), 0.0);
    auto bounds = spec.bounds;
    if (spec.mode == NormMode::Local) {
        for (std::size_t c = kXRtf; c <= kYRtz; ++c) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < raw.true_length; ++i) {
                lo = std::min(lo, raw.at(i, c));
                hi = std::max(hi, raw.at(i, c));
            }
            bounds[c] = {lo, hi};
        }
    }
    for (std::size_t c = 0; c < kChannels; ++c) {
        const double lo = bounds[c].min;
        const double span = bounds[c].max - lo;
        if (!(span > 0.0)) {
            out.constant_channels |= static_cast<std::uint16_t>(1u << c);
            continue;
        }
        for (std::size_t i = 0; i < raw.true_length; ++i) {
            const double v = (raw.at(i, c) - lo) / span;
            out.values[i * kChannels + c] = std::clamp(v, 0.0, 1.0);
        }
    }
    return out;
}

std::vector<double> denormalize(std::span<const double> normalized, std::size_t true_length,
                                const NormalizationSpec& spec) {
    std::vector<double> out(normalized.size(), 0.0);
    for (std::size_t i = 0; i < true_length; ++i) {
        for (std::size_t c = 0; c < kChannels; ++c) {
            const auto& b = spec.bounds[c];
            out[i * kChannels + c] = b.min + normalized[i * kChannels + c] * (b.max - b.min);
        }
    }
    return out;
}

}  // namespace aisq::pipeline
