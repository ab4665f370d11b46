// SPDX-License-Identifier: Apache-2.0
//
// rfimap - UAV-borne GNSS interference survey and transmitter mapping
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <utility>

namespace rfimap {

/// Planar east/north offset in meters from the declared survey origin.
struct LocalPoint {
    double east = 0.0;
    double north = 0.0;

    bool operator==(const LocalPoint&) const = default;
};

/// Wrap an angle to [0, 360).
double wrap_degrees(double deg);

/// Wrap an angle to (-180, 180]. The antipodal angle maps to +180.
double wrap_signed_degrees(double deg);

/// Compass heading: 0 = local north, clockwise positive, normalized to [0, 360).
class Bearing {
  public:
    Bearing() = default;
    explicit Bearing(double deg) : deg_(wrap_degrees(deg)) {}

    double degrees() const { return deg_; }

    bool operator==(const Bearing&) const = default;

  private:
    double deg_ = 0.0;
};

/// Compass bearing from `from` to `to`. Throws std::invalid_argument on
/// coincident points (the bearing is undefined there).
Bearing bearing_to(const LocalPoint& from, const LocalPoint& to);

/// Signed angular difference a - b in (-180, 180].
double bearing_diff(Bearing a, Bearing b);

/// Uniform cell grid over the local plane. `origin` is the south-west corner;
/// cell (i, j) spans [origin + i*res, origin + (i+1)*res) east and the same
/// north with j.
struct GridSpec {
    LocalPoint origin;
    double resolution = 5.0;  // meters per cell
    int width = 0;            // cells east
    int height = 0;           // cells north

    static constexpr std::size_t kMaxCells = std::size_t{1} << 24;

    /// Throws std::invalid_argument unless resolution > 0, width/height >= 1
    /// and the total cell count is within kMaxCells.
    void validate() const;

    std::size_t cell_count() const;

    /// Geometric center of cell (i, j). Throws std::out_of_range for indices
    /// outside the grid.
    LocalPoint cell_center(int i, int j) const;

    /// Cell containing `p`, or nullopt if the point lies outside the grid.
    std::optional<std::pair<int, int>> cell_of(const LocalPoint& p) const;

    double east_extent() const { return resolution * width; }
    double north_extent() const { return resolution * height; }

    bool operator==(const GridSpec&) const = default;
};

/// Geodetic anchor of the local frame. Conversions use an equirectangular
/// approximation, adequate for survey areas up to a few km across.
struct GeoOrigin {
    double lat_deg = 0.0;
    double lon_deg = 0.0;
};

LocalPoint geodetic_to_local(const GeoOrigin& origin, double lat_deg, double lon_deg);
std::pair<double, double> local_to_geodetic(const GeoOrigin& origin, const LocalPoint& p);

}  // namespace rfimap
