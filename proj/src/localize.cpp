// SPDX-License-Identifier: Apache-2.0
//
// rfimap - UAV-borne GNSS interference survey and transmitter mapping
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include "rfimap/localize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace rfimap {

namespace {

double dist(const LocalPoint& a, const LocalPoint& b) {
    return std::hypot(a.east - b.east, a.north - b.north);
}

bool touches_boundary(const GridSpec& grid, int i, int j) {
    return i == 0 || i == grid.width - 1 || j == 0 || j == grid.height - 1;
}

}  // namespace

std::vector<RegionEstimate> extract_regions(const FusedMap& map) {
    map.grid.validate();
    const int w = map.grid.width;
    const int h = map.grid.height;
    if (map.values.size() != map.grid.cell_count()) {
        throw std::invalid_argument("extract_regions: value count does not match the grid");
    }

    std::vector<char> visited(map.values.size(), 0);
    std::vector<RegionEstimate> regions;

    for (int j0 = 0; j0 < h; ++j0) {
        for (int i0 = 0; i0 < w; ++i0) {
            const std::size_t start = static_cast<std::size_t>(j0) * w + i0;
            if (visited[start] || !(map.values[start] > 0.0)) continue;

            RegionEstimate region;
            double weighted_east = 0.0;
            double weighted_north = 0.0;
            double peak_value = -1.0;

            std::vector<std::pair<int, int>> stack{{i0, j0}};
            visited[start] = 1;
            while (!stack.empty()) {
                const auto [i, j] = stack.back();
                stack.pop_back();
                const double v = map.at(i, j);
                const LocalPoint c = map.grid.cell_center(i, j);
                region.cells.emplace_back(i, j);
                region.total_density += v;
                weighted_east += v * c.east;
                weighted_north += v * c.north;
                if (v > peak_value) {
                    peak_value = v;
                    region.peak = c;
                }
                for (int dj = -1; dj <= 1; ++dj) {
                    for (int di = -1; di <= 1; ++di) {
                        if (di == 0 && dj == 0) continue;
                        const int ni = i + di;
                        const int nj = j + dj;
                        if (ni < 0 || ni >= w || nj < 0 || nj >= h) continue;
                        const std::size_t nidx = static_cast<std::size_t>(nj) * w + ni;
                        if (visited[nidx] || !(map.values[nidx] > 0.0)) continue;
                        visited[nidx] = 1;
                        stack.emplace_back(ni, nj);
                    }
                }
            }
            region.centroid = {weighted_east / region.total_density,
                               weighted_north / region.total_density};
            regions.push_back(std::move(region));
        }
    }

    std::stable_sort(regions.begin(), regions.end(),
                     [](const RegionEstimate& a, const RegionEstimate& b) {
                         return a.total_density > b.total_density;
                     });
    return regions;
}

EllipseFit fit_ellipse(const RegionEstimate& region, const FusedMap& map,
                       std::span<const LocalPoint> scan_positions) {
    if (region.cells.size() < 3) {
        throw std::invalid_argument("fit_ellipse: region needs at least 3 cells");
    }

    const LocalPoint mu = region.centroid;
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    for (const auto& [i, j] : region.cells) {
        const double v = map.at(i, j);
        const LocalPoint c = map.grid.cell_center(i, j);
        const Eigen::Vector2d d(c.east - mu.east, c.north - mu.north);
        cov += v * d * d.transpose();
    }
    cov /= region.total_density;

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
    const Eigen::Vector2d major_dir = eig.eigenvectors().col(1);
    const double res = map.grid.resolution;

    EllipseFit fit;
    fit.peak = region.peak;
    fit.short_axis = std::max(2.0 * std::sqrt(std::max(eig.eigenvalues()[0], 0.0)), res);
    fit.long_axis = std::max(2.0 * std::sqrt(std::max(eig.eigenvalues()[1], 0.0)),
                             fit.short_axis);
    fit.heading_deg = std::atan2(major_dir.x(), major_dir.y()) * 180.0 / std::numbers::pi;
    if (fit.heading_deg <= -90.0) fit.heading_deg += 180.0;
    if (fit.heading_deg > 90.0) fit.heading_deg -= 180.0;

    // Clipped along the major axis? Check whether the extreme cells of the
    // major-axis projection sit on the grid boundary.
    double t_min = std::numeric_limits<double>::infinity();
    double t_max = -std::numeric_limits<double>::infinity();
    std::pair<int, int> cell_min{0, 0};
    std::pair<int, int> cell_max{0, 0};
    for (const auto& cell : region.cells) {
        const LocalPoint c = map.grid.cell_center(cell.first, cell.second);
        const double t =
            (c.east - mu.east) * major_dir.x() + (c.north - mu.north) * major_dir.y();
        if (t < t_min) {
            t_min = t;
            cell_min = cell;
        }
        if (t > t_max) {
            t_max = t;
            cell_max = cell;
        }
    }
    const bool open_pos = touches_boundary(map.grid, cell_max.first, cell_max.second);
    const bool open_neg = touches_boundary(map.grid, cell_min.first, cell_min.second);
    fit.unbounded = open_pos || open_neg;

    if (fit.unbounded) {
        const double focal =
            std::sqrt(std::max(fit.long_axis * fit.long_axis - fit.short_axis * fit.short_axis,
                               0.0));
        const LocalPoint f_pos{mu.east + focal * major_dir.x(),
                               mu.north + focal * major_dir.y()};
        const LocalPoint f_neg{mu.east - focal * major_dir.x(),
                               mu.north - focal * major_dir.y()};
        LocalPoint anchor = region.peak;
        if (!scan_positions.empty()) {
            anchor = {0.0, 0.0};
            for (const auto& p : scan_positions) {
                anchor.east += p.east;
                anchor.north += p.north;
            }
            anchor.east /= static_cast<double>(scan_positions.size());
            anchor.north /= static_cast<double>(scan_positions.size());
        }
        fit.center = dist(f_pos, anchor) <= dist(f_neg, anchor) ? f_pos : f_neg;
    } else {
        fit.center = mu;
    }
    return fit;
}

double localization_error(const EllipseFit& fit, const LocalPoint& truth) {
    const LocalPoint& estimate = fit.unbounded ? fit.peak : fit.center;
    return dist(estimate, truth);
}

double geometry_quality(std::span<const ScanPose> poses, const LocalPoint& region_center) {
    if (poses.size() < 2) {
        throw std::invalid_argument("geometry_quality: needs at least 2 poses");
    }
    double sin_sum = 0.0;
    double cos_sum = 0.0;
    for (const auto& pose : poses) {
        const double b =
            bearing_to(region_center, pose.position).degrees() * std::numbers::pi / 180.0;
        sin_sum += std::sin(b);
        cos_sum += std::cos(b);
    }
    const double resultant =
        std::hypot(sin_sum, cos_sum) / static_cast<double>(poses.size());
    return std::clamp(1.0 - resultant, 0.0, 1.0);
}

double geometry_quality(std::span<const ScanPose> poses, const RegionEstimate& region) {
    return geometry_quality(poses, region.centroid);
}

std::string results_geojson(std::span<const RegionEstimate> regions,
                            std::span<const EllipseFit> fits,
                            std::span<const double> quality,
                            const std::optional<GeoOrigin>& origin) {
    if (regions.size() != fits.size()) {
        throw std::invalid_argument("results_geojson: regions and fits differ in length");
    }

    const auto coord = [&origin](const LocalPoint& p) -> nlohmann::ordered_json {
        if (origin) {
            const auto [lat, lon] = local_to_geodetic(*origin, p);
            return {lon, lat};
        }
        return {p.east, p.north};
    };

    nlohmann::ordered_json fc;
    fc["type"] = "FeatureCollection";
    if (!origin) {
        fc["properties"] = {{"crs", "local-enu-m"}};
    }
    auto& features = fc["features"] = nlohmann::ordered_json::array();

    for (std::size_t r = 0; r < regions.size(); ++r) {
        const auto& fit = fits[r];
        nlohmann::ordered_json props;
        props["region"] = r;
        if (fit.unbounded) {
            props["long_axis_m"] = "unbounded";
        } else {
            props["long_axis_m"] = fit.long_axis;
        }
        props["short_axis_m"] = fit.short_axis;
        props["heading_deg"] = fit.heading_deg;
        props["center_east_m"] = fit.center.east;
        props["center_north_m"] = fit.center.north;
        props["sigma_contour"] = fit.sigma_contour;
        props["total_density"] = regions[r].total_density;
        if (r < quality.size()) {
            props["quality"] = quality[r];
            props["degenerate_geometry"] = quality[r] < kDegenerateQuality;
        }

        features.push_back({{"type", "Feature"},
                            {"geometry",
                             {{"type", "Point"}, {"coordinates", coord(regions[r].peak)}}},
                            {"properties",
                             {{"region", r}, {"role", "peak"}}}});
        features.push_back({{"type", "Feature"},
                            {"geometry",
                             {{"type", "Point"}, {"coordinates", coord(regions[r].centroid)}}},
                            {"properties",
                             {{"region", r}, {"role", "centroid"}}}});

        // 64-segment outline of the fitted contour; unbounded fits draw the
        // clipped extent so the ring stays finite and closed.
        const double h = fit.heading_deg * std::numbers::pi / 180.0;
        const double me = std::sin(h);
        const double mn = std::cos(h);
        auto ring = nlohmann::ordered_json::array();
        for (int k = 0; k <= 64; ++k) {
            const double t = 2.0 * std::numbers::pi * (k % 64) / 64.0;
            const double u = fit.long_axis * std::cos(t);
            const double v = fit.short_axis * std::sin(t);
            const LocalPoint p{fit.center.east + u * me + v * mn,
                               fit.center.north + u * mn - v * me};
            ring.push_back(coord(p));
        }
        nlohmann::ordered_json poly;
        poly["type"] = "Feature";
        poly["geometry"] = {{"type", "Polygon"},
                            {"coordinates", nlohmann::ordered_json::array({ring})}};
        poly["properties"] = props;
        poly["properties"]["role"] = "ellipse";
        features.push_back(std::move(poly));
    }
    return fc.dump(2) + "\n";
}

}  // namespace rfimap
