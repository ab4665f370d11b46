// SPDX-License-Identifier: Apache-2.0
//
// rfimap - UAV-borne GNSS interference survey and transmitter mapping
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rfimap/fusion.hpp"
#include "rfimap/geometry.hpp"
#include "rfimap/scanops.hpp"

namespace rfimap {

/// One connected patch of above-threshold density.
struct RegionEstimate {
    std::vector<std::pair<int, int>> cells;  // (i, j) grid indices
    LocalPoint centroid;                     // density-weighted
    LocalPoint peak;                         // center of the strongest cell
    double total_density = 0.0;
};

/// Density-weighted second-moment ellipse of a region. Axis values are 2 sigma
/// along the principal directions (the semi-axes of the 2-sigma contour).
/// When the region is clipped by the grid boundary along its major axis the
/// long axis is unbounded and `center` holds the focus on the closed side.
struct EllipseFit {
    LocalPoint center;
    double long_axis = 0.0;  // meters; meaningless when unbounded
    bool unbounded = false;
    double short_axis = 0.0;       // meters, floored at one cell resolution
    double heading_deg = 0.0;      // major axis vs local north, (-90, 90]
    LocalPoint peak;               // carried over from the region
    double sigma_contour = 2.0;    // contour convention recorded in exports
};

/// 8-connected components of nonzero cells, sorted by total density
/// descending. An all-zero map yields an empty list.
std::vector<RegionEstimate> extract_regions(const FusedMap& map);

/// Fit the second-moment ellipse of a region (>= 3 cells). When the fit is
/// unbounded, `scan_positions` picks the reported focus (the one nearest the
/// scans); without them the focus nearest the region peak is used.
EllipseFit fit_ellipse(const RegionEstimate& region, const FusedMap& map,
                       std::span<const LocalPoint> scan_positions = {});

/// Distance in meters between the estimate and the true transmitter position.
/// Unbounded fits are judged by their peak cell.
double localization_error(const EllipseFit& fit, const LocalPoint& truth);

/// Angular dispersion of the scan directions around a candidate region:
/// 1 minus the resultant length of the unit bearing vectors from the region
/// to each pose. 0 = all scans on one bearing, near 1 = surrounding geometry.
double geometry_quality(std::span<const ScanPose> poses, const LocalPoint& region_center);
double geometry_quality(std::span<const ScanPose> poses, const RegionEstimate& region);

/// Fits below this quality are expected to degenerate (unbounded long axis).
constexpr double kDegenerateQuality = 0.3;

/// GeoJSON FeatureCollection: per region a peak point, a centroid point, and
/// a 64-segment ellipse polygon with the fit parameters as properties.
/// Coordinates are local east/north meters, or longitude/latitude when a
/// geodetic origin is given.
std::string results_geojson(std::span<const RegionEstimate> regions,
                            std::span<const EllipseFit> fits,
                            std::span<const double> quality,
                            const std::optional<GeoOrigin>& origin = std::nullopt);

}  // namespace rfimap
