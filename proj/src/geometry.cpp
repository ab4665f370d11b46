// SPDX-License-Identifier: Apache-2.0
//
// rfimap - UAV-borne GNSS interference survey and transmitter mapping
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include "rfimap/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rfimap {

namespace {
constexpr double kEarthRadiusM = 6371000.0;
constexpr double kDegPerRad = 180.0 / std::numbers::pi;
}  // namespace

double wrap_degrees(double deg) {
    double w = std::fmod(deg, 360.0);
    if (w < 0.0) w += 360.0;
    if (w >= 360.0) w = 0.0;  // fmod rounding can land exactly on 360
    return w;
}

double wrap_signed_degrees(double deg) {
    double w = std::fmod(deg, 360.0);
    if (w > 180.0) w -= 360.0;
    if (w <= -180.0) w += 360.0;
    return w;
}

Bearing bearing_to(const LocalPoint& from, const LocalPoint& to) {
    if (from == to) {
        throw std::invalid_argument("bearing_to: coincident points, bearing undefined");
    }
    const double de = to.east - from.east;
    const double dn = to.north - from.north;
    return Bearing(std::atan2(de, dn) * kDegPerRad);
}

double bearing_diff(Bearing a, Bearing b) {
    return wrap_signed_degrees(a.degrees() - b.degrees());
}

void GridSpec::validate() const {
    if (!(resolution > 0.0) || !std::isfinite(resolution)) {
        throw std::invalid_argument("GridSpec: resolution must be positive and finite");
    }
    if (width < 1 || height < 1) {
        throw std::invalid_argument("GridSpec: width and height must be >= 1");
    }
    if (!std::isfinite(origin.east) || !std::isfinite(origin.north)) {
        throw std::invalid_argument("GridSpec: origin must be finite");
    }
    const std::size_t cells =
        static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    if (cells > kMaxCells) {
        throw std::invalid_argument("GridSpec: cell count " + std::to_string(cells) +
                                    " exceeds limit " + std::to_string(kMaxCells));
    }
}

std::size_t GridSpec::cell_count() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
}

LocalPoint GridSpec::cell_center(int i, int j) const {
    if (i < 0 || i >= width || j < 0 || j >= height) {
        throw std::out_of_range("GridSpec::cell_center: index (" + std::to_string(i) +
                                ", " + std::to_string(j) + ") outside " +
                                std::to_string(width) + "x" + std::to_string(height));
    }
    return {origin.east + (i + 0.5) * resolution, origin.north + (j + 0.5) * resolution};
}

std::optional<std::pair<int, int>> GridSpec::cell_of(const LocalPoint& p) const {
    const double fi = std::floor((p.east - origin.east) / resolution);
    const double fj = std::floor((p.north - origin.north) / resolution);
    if (fi < 0.0 || fi >= width || fj < 0.0 || fj >= height) {
        return std::nullopt;
    }
    return std::make_pair(static_cast<int>(fi), static_cast<int>(fj));
}

LocalPoint geodetic_to_local(const GeoOrigin& origin, double lat_deg, double lon_deg) {
    const double coslat = std::cos(origin.lat_deg / kDegPerRad);
    return {(lon_deg - origin.lon_deg) / kDegPerRad * kEarthRadiusM * coslat,
            (lat_deg - origin.lat_deg) / kDegPerRad * kEarthRadiusM};
}

std::pair<double, double> local_to_geodetic(const GeoOrigin& origin, const LocalPoint& p) {
    const double coslat = std::cos(origin.lat_deg / kDegPerRad);
    const double lat = origin.lat_deg + p.north / kEarthRadiusM * kDegPerRad;
    const double lon = origin.lon_deg + p.east / (kEarthRadiusM * coslat) * kDegPerRad;
    return {lat, lon};
}

}  // namespace rfimap
