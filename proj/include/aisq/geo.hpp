#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

namespace aisq::geo {

inline constexpr double kEarthRadiusKm = 6371.0;
/// Kilometers per degree of longitude at the equator used to size grid cells.
inline constexpr double kKmPerDegreeCell = 111.32;

struct GeoPoint {
    double lat = 0.0;
    double lon = 0.0;

    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

bool is_valid(const GeoPoint& p);

/// Great-circle distance on a sphere of radius kEarthRadiusKm.
double haversine_km(const GeoPoint& a, const GeoPoint& b);

/// Immutable equirectangular grid over a point set. Queries look at most
/// `query_radius_km() = cell_size_km / 2` away.
///
/// Latitude rows always come from the 3 rows around the query. The longitude
/// span of each query is the exact bounding box of the spherical cap, so at
/// low latitude it is the usual 3x3 neighborhood and it widens toward the
/// poles, covering every longitude once the cap contains a pole.
class GeoGridIndex {
public:
    GeoGridIndex(std::span<const GeoPoint> points, double cell_size_km);

    double cell_size_km() const noexcept { return cell_size_km_; }
    double query_radius_km() const noexcept { return cell_size_km_ / 2.0; }
    double cell_degrees() const noexcept { return cell_deg_; }
    std::size_t point_count() const noexcept { return point_count_; }
    std::size_t bucket_count() const noexcept { return buckets_.size(); }

    /// Integer cell coordinates of a point.
    std::pair<std::int32_t, std::int32_t> cell_of(const GeoPoint& p) const;
    const std::vector<GeoPoint>* bucket(std::int32_t row, std::int32_t col) const;

    /// Minimum distance to an indexed point no farther than the query radius.
    std::optional<double> nearest_within(const GeoPoint& p) const;

    /// nearest_within capped at query_radius_km().
    double min_distance_within(const GeoPoint& p) const {
        return nearest_within(p).value_or(query_radius_km());
    }

private:
    static std::int64_t key(std::int32_t row, std::int32_t col) {
        return (static_cast<std::int64_t>(row) << 32) ^ static_cast<std::uint32_t>(col);
    }

    double cell_size_km_;
    double cell_deg_;
    std::size_t point_count_ = 0;
    std::unordered_map<std::int64_t, std::vector<GeoPoint>> buckets_;
};

GeoGridIndex build_index(std::span<const GeoPoint> points, double cell_size_km);

/// Vertices of river polylines with a proximity buffer in meters.
class RiverMask {
public:
    RiverMask(std::span<const GeoPoint> vertices, double buffer_m);

    double buffer_m() const noexcept { return buffer_m_; }
    const GeoGridIndex& index() const noexcept { return index_; }

    /// True iff some vertex lies within buffer_m (inclusive).
    bool near_river(const GeoPoint& p) const;

private:
    double buffer_m_;
    GeoGridIndex index_;
};

/// Reads a `lat,lon[,name]` point list. '#' lines, blank lines and '>'
/// polyline separators are skipped; a leading `lat,lon` header is allowed.
/// With max_points > 0 the list is subsampled uniformly keeping both ends.
std::vector<GeoPoint> load_points(const std::filesystem::path& path, std::size_t max_points = 0);

inline std::vector<GeoPoint> load_coastline(const std::filesystem::path& path, std::size_t max_points = 0) {
    return load_points(path, max_points);
}

inline std::vector<GeoPoint> load_harbors(const std::filesystem::path& path) { return load_points(path); }

std::vector<GeoPoint> subsample(std::span<const GeoPoint> points, std::size_t max_points);

void write_points(const std::filesystem::path& path, std::span<const GeoPoint> points);

}  // namespace aisq::geo
