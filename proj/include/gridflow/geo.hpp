#pragma once

#include <cmath>

#include "gridflow/grid.hpp"

namespace gridflow {

constexpr double kEarthRadiusM = 6371000.0;
constexpr double kDegToRad = 0.017453292519943295;

/// Equirectangular projection about a reference point. At city scale the
/// distortion is sub-meter, which is far below the 100 m cell size.
struct GeoProjection {
    double lon0_deg = 0.0;
    double lat0_deg = 0.0;

    Vec2 to_planar(double lon_deg, double lat_deg) const {
        double kx = kEarthRadiusM * std::cos(lat0_deg * kDegToRad) * kDegToRad;
        double ky = kEarthRadiusM * kDegToRad;
        return {(lon_deg - lon0_deg) * kx, (lat_deg - lat0_deg) * ky};
    }

    void to_lonlat(Vec2 p, double& lon_deg, double& lat_deg) const {
        double kx = kEarthRadiusM * std::cos(lat0_deg * kDegToRad) * kDegToRad;
        double ky = kEarthRadiusM * kDegToRad;
        lon_deg = lon0_deg + p.x / kx;
        lat_deg = lat0_deg + p.y / ky;
    }
};

} // namespace gridflow
