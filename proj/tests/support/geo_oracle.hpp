#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "aisq/geo.hpp"

namespace aisq::testing {

/// Half the points in a North Sea box, half anywhere on the globe, with a
/// few at the poles and on the antimeridian.
inline std::vector<geo::GeoPoint> random_points(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<geo::GeoPoint> pts;
    pts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        switch (i % 10) {
            case 0: pts.push_back({90.0 - 0.5 * u(rng), -180.0 + 360.0 * u(rng)}); break;
            case 1: pts.push_back({-90.0 + 60.0 * u(rng), (u(rng) < 0.5 ? -180.0 : 179.5) + 0.5 * u(rng)}); break;
            case 2:
            case 3:
            case 4:
            case 5:
            case 6: pts.push_back({53.0 + 3.0 * u(rng), 3.0 + 6.0 * u(rng)}); break;
            default: {
                // uniform on the sphere
                const double z = 2.0 * u(rng) - 1.0;
                pts.push_back({std::asin(z) * 180.0 / 3.14159265358979323846, -180.0 + 360.0 * u(rng)});
            }
        }
    }
    return pts;
}

/// min over every point of the haversine distance, capped at `cap`.
inline double brute_min_distance(const std::vector<geo::GeoPoint>& pts, const geo::GeoPoint& q, double cap) {
    double best = cap;
    for (const auto& p : pts) best = std::min(best, geo::haversine_km(p, q));
    return best;
}

}  // namespace aisq::testing
