#include "aisq/geo.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

#include "aisq/error.hpp"

namespace aisq::geo {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;
// Slack on the longitude window so points exactly at the radius survive rounding.
constexpr double kWindowSlackDeg = 1e-6;

std::int32_t floor_div(double value, double step) { return static_cast<std::int32_t>(std::floor(value / step)); }

}  // namespace

bool is_valid(const GeoPoint& p) {
    return std::isfinite(p.lat) && std::isfinite(p.lon) && std::abs(p.lat) <= 90.0 && std::abs(p.lon) <= 180.0;
}

double haversine_km(const GeoPoint& a, const GeoPoint& b) {
    const double phi1 = a.lat * kDegToRad;
    const double phi2 = b.lat * kDegToRad;
    const double dphi = (b.lat - a.lat) * kDegToRad;
    const double dlambda = (b.lon - a.lon) * kDegToRad;
    const double s1 = std::sin(dphi / 2.0);
    const double s2 = std::sin(dlambda / 2.0);
    double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
    h = std::min(1.0, std::max(0.0, h));
    return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

GeoGridIndex::GeoGridIndex(std::span<const GeoPoint> points, double cell_size_km)
    : cell_size_km_(cell_size_km), cell_deg_(cell_size_km / kKmPerDegreeCell) {
    if (!(cell_size_km > 0.0)) throw Error(ErrorCode::InvalidConfig, "cell size must be positive");
    if (points.empty()) throw Error(ErrorCode::EmptyPointSet, "cannot index an empty point set");
    for (const auto& p : points) {
        if (!is_valid(p)) throw Error(ErrorCode::FormatError, "invalid point in index input");
        const auto [row, col] = cell_of(p);
        buckets_[key(row, col)].push_back(p);
    }
    point_count_ = points.size();
}

std::pair<std::int32_t, std::int32_t> GeoGridIndex::cell_of(const GeoPoint& p) const {
    return {floor_div(p.lat, cell_deg_), floor_div(p.lon, cell_deg_)};
}

const std::vector<GeoPoint>* GeoGridIndex::bucket(std::int32_t row, std::int32_t col) const {
    const auto it = buckets_.find(key(row, col));
    return it == buckets_.end() ? nullptr : &it->second;
}

std::optional<double> GeoGridIndex::nearest_within(const GeoPoint& p) const {
    const double radius = query_radius_km();
    const double angular = radius / kEarthRadiusKm;
    const double angular_deg = angular * kRadToDeg;

    // Longitude intervals (in [-180, 180]) that can hold a point within the radius.
    std::pair<double, double> spans[2];
    int span_count = 0;
    if (std::abs(p.lat) + angular_deg >= 90.0) {
        spans[span_count++] = {-180.0, 180.0};
    } else {
        const double ratio = std::sin(angular) / std::cos(p.lat * kDegToRad);
        const double half = ratio >= 1.0 ? 180.0 : std::asin(ratio) * kRadToDeg + kWindowSlackDeg;
        const double lo = p.lon - half;
        const double hi = p.lon + half;
        if (hi - lo >= 360.0) {
            spans[span_count++] = {-180.0, 180.0};
        } else {
            spans[span_count++] = {std::max(lo, -180.0), std::min(hi, 180.0)};
            if (lo < -180.0) spans[span_count++] = {lo + 360.0, 180.0};
            if (hi > 180.0) spans[span_count++] = {-180.0, hi - 360.0};
        }
    }

    std::optional<double> best;
    const auto row0 = floor_div(p.lat, cell_deg_);
    for (std::int32_t row = row0 - 1; row <= row0 + 1; ++row) {
        for (int s = 0; s < span_count; ++s) {
            const auto c0 = floor_div(spans[s].first, cell_deg_);
            const auto c1 = floor_div(spans[s].second, cell_deg_);
            for (std::int32_t col = c0; col <= c1; ++col) {
                const auto* pts = bucket(row, col);
                if (!pts) continue;
                for (const auto& q : *pts) {
                    const double d = haversine_km(p, q);
                    if (d <= radius && (!best || d < *best)) best = d;
                }
            }
        }
    }
    return best;
}

GeoGridIndex build_index(std::span<const GeoPoint> points, double cell_size_km) {
    return GeoGridIndex(points, cell_size_km);
}

RiverMask::RiverMask(std::span<const GeoPoint> vertices, double buffer_m)
    : buffer_m_(buffer_m), index_(vertices, buffer_m > 0.0 ? 2.0 * buffer_m / 1000.0 * (1.0 + 1e-6) : 1.0) {
    if (!(buffer_m > 0.0)) throw Error(ErrorCode::InvalidConfig, "river buffer must be positive");
}

bool RiverMask::near_river(const GeoPoint& p) const {
    const auto d = index_.nearest_within(p);
    return d && *d * 1000.0 <= buffer_m_;
}

std::vector<GeoPoint> subsample(std::span<const GeoPoint> points, std::size_t max_points) {
    const std::size_t n = points.size();
    if (max_points == 0 || n <= max_points) return {points.begin(), points.end()};
    if (max_points == 1) return {points.front()};
    std::vector<GeoPoint> out;
    out.reserve(max_points);
    const std::size_t m = max_points - 1;
    for (std::size_t i = 0; i <= m; ++i) out.push_back(points[(i * (n - 1) + m / 2) / m]);
    return out;
}

std::vector<GeoPoint> load_points(const std::filesystem::path& path, std::size_t max_points) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::vector<GeoPoint> points;
    std::string line;
    std::size_t line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view s(line);
        while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
        if (s.empty() || s.front() == '#' || s.front() == '>') continue;
        if (first && s.starts_with("lat")) {
            first = false;
            continue;
        }
        first = false;
        const auto c1 = s.find(',');
        if (c1 == std::string_view::npos)
            throw Error(ErrorCode::FormatError, path.string() + ":" + std::to_string(line_no) + ": expected lat,lon");
        auto c2 = s.find(',', c1 + 1);
        if (c2 == std::string_view::npos) c2 = s.size();
        GeoPoint p;
        const auto lat_s = s.substr(0, c1);
        const auto lon_s = s.substr(c1 + 1, c2 - c1 - 1);
        const auto r1 = std::from_chars(lat_s.data(), lat_s.data() + lat_s.size(), p.lat);
        const auto r2 = std::from_chars(lon_s.data(), lon_s.data() + lon_s.size(), p.lon);
        if (r1.ec != std::errc() || r1.ptr != lat_s.data() + lat_s.size() || r2.ec != std::errc() ||
            r2.ptr != lon_s.data() + lon_s.size())
            throw Error(ErrorCode::FormatError, path.string() + ":" + std::to_string(line_no) + ": bad number");
        if (!is_valid(p))
            throw Error(ErrorCode::FormatError,
                        path.string() + ":" + std::to_string(line_no) + ": coordinate out of range");
        points.push_back(p);
    }
    return subsample(points, max_points);
}

void write_points(const std::filesystem::path& path, std::span<const GeoPoint> points) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << "lat,lon\n";
    out.precision(17);
    for (const auto& p : points) out << p.lat << ',' << p.lon << '\n';
    if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

}  // namespace aisq::geo
