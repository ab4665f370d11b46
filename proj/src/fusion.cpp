// SPDX-License-Identifier: Apache-2.0
//
// rfimap - UAV-borne GNSS interference survey and transmitter mapping
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include "rfimap/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include <json.hpp>

#include "rfimap/io_util.hpp"

namespace rfimap {

double FusedMap::max_value() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, v);
    return m;
}

Heatmap expectation_density(const HorizonScan& scan, const SRPModel& srp,
                            const GridSpec& grid, ProjectionMode mode) {
    scan.validate();
    grid.validate();
    for (const auto& step : scan.steps) {
        if (!std::isfinite(step.rel_power)) {
            throw std::invalid_argument("expectation_density: non-finite step power");
        }
    }

    Heatmap map;
    map.grid = grid;
    map.source_pose = scan.pose;
    map.values.assign(grid.cell_count(), 0.0);

    const LocalPoint origin = scan.pose.position;
    std::size_t idx = 0;
    for (int j = 0; j < grid.height; ++j) {
        for (int i = 0; i < grid.width; ++i, ++idx) {
            const LocalPoint c = grid.cell_center(i, j);
            if (c == origin) continue;  // density undefined at the scan point
            const double cell_bearing = bearing_to(origin, c).degrees();
            double acc = 0.0;
            for (const auto& step : scan.steps) {
                const double dpsi = wrap_signed_degrees(step.heading.degrees() - cell_bearing);
                const double gain = srp_eval(srp, dpsi);
                acc += (mode == ProjectionMode::kPowerWeighted) ? step.rel_power * gain : gain;
            }
            map.values[idx] = acc;
        }
    }
    return map;
}

FusedMap fuse(std::span<const Heatmap> maps) {
    if (maps.empty()) {
        throw std::invalid_argument("fuse: no heatmaps");
    }
    const GridSpec& grid = maps[0].grid;
    for (const auto& m : maps) {
        if (!(m.grid == grid)) {
            throw std::invalid_argument("fuse: heatmap grids differ");
        }
        if (m.values.size() != grid.cell_count()) {
            throw std::invalid_argument("fuse: heatmap size does not match its grid");
        }
    }

    // Canonical accumulation order, so the cell sums see the same operand
    // sequence no matter how the caller ordered the inputs.
    std::vector<std::size_t> order(maps.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&maps](std::size_t a, std::size_t b) {
        const auto& ma = maps[a];
        const auto& mb = maps[b];
        const bool pa = ma.source_pose.has_value();
        const bool pb = mb.source_pose.has_value();
        if (pa != pb) return pa;
        if (pa && pb) {
            const auto ka = std::make_tuple(ma.source_pose->position.east,
                                            ma.source_pose->position.north,
                                            ma.source_pose->heading.degrees());
            const auto kb = std::make_tuple(mb.source_pose->position.east,
                                            mb.source_pose->position.north,
                                            mb.source_pose->heading.degrees());
            if (ka != kb) return ka < kb;
        }
        return std::lexicographical_compare(ma.values.begin(), ma.values.end(),
                                            mb.values.begin(), mb.values.end());
    });

    FusedMap fused;
    fused.grid = grid;
    fused.n_scans = static_cast<int>(maps.size());
    fused.values.assign(grid.cell_count(), 0.0);

    // Extended-precision accumulation keeps the mean of N identical maps
    // exactly equal to the map, for any N.
    std::vector<long double> acc(grid.cell_count(), 0.0L);
    for (std::size_t k : order) {
        const auto& v = maps[k].values;
        for (std::size_t c = 0; c < v.size(); ++c) {
            if (!(v[c] >= 0.0) || !std::isfinite(v[c])) {
                throw std::invalid_argument("fuse: heatmap values must be finite and >= 0");
            }
            acc[c] += v[c];
        }
    }
    const auto n = static_cast<long double>(maps.size());
    for (std::size_t c = 0; c < acc.size(); ++c) {
        fused.values[c] = static_cast<double>(acc[c] / n);
    }
    return fused;
}

FusedMap threshold(const FusedMap& map, double alpha) {
    if (!(alpha > 0.0) || !(alpha < 1.0)) {
        throw std::invalid_argument("threshold: alpha must lie in (0, 1)");
    }
    if (map.values.empty()) {
        throw std::domain_error("threshold: empty map");
    }
    const double max = map.max_value();
    if (!(max > 0.0)) {
        throw std::domain_error("threshold: all-zero map");
    }
    FusedMap out = map;
    const double cut = alpha * max;
    for (auto& v : out.values) {
        if (v < cut) v = 0.0;
    }
    out.threshold_applied = alpha;
    return out;
}

namespace {

nlohmann::ordered_json grid_to_json(const GridSpec& grid) {
    return {{"origin_east", grid.origin.east},
            {"origin_north", grid.origin.north},
            {"resolution_m", grid.resolution},
            {"width", grid.width},
            {"height", grid.height}};
}

GridSpec grid_from_json(const nlohmann::json& j) {
    GridSpec grid;
    grid.origin = {j.at("origin_east").get<double>(), j.at("origin_north").get<double>()};
    grid.resolution = j.at("resolution_m").get<double>();
    grid.width = j.at("width").get<int>();
    grid.height = j.at("height").get<int>();
    grid.validate();
    return grid;
}

}  // namespace

std::string fused_to_json(const FusedMap& map) {
    nlohmann::ordered_json j;
    j["grid"] = grid_to_json(map.grid);
    j["n_scans"] = map.n_scans;
    if (map.threshold_applied) {
        j["threshold_applied"] = *map.threshold_applied;
    } else {
        j["threshold_applied"] = nullptr;
    }
    j["values"] = map.values;
    return j.dump(2) + "\n";
}

FusedMap fused_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    FusedMap map;
    map.grid = grid_from_json(j.at("grid"));
    map.n_scans = j.at("n_scans").get<int>();
    if (j.contains("threshold_applied") && !j["threshold_applied"].is_null()) {
        map.threshold_applied = j["threshold_applied"].get<double>();
    }
    map.values = j.at("values").get<std::vector<double>>();
    if (map.values.size() != map.grid.cell_count()) {
        throw std::invalid_argument("fused map: value count does not match the grid");
    }
    for (double v : map.values) {
        if (!std::isfinite(v) || v < 0.0) {
            throw std::invalid_argument("fused map: values must be finite and >= 0");
        }
    }
    return map;
}

void save_fused_json(const FusedMap& map, const std::filesystem::path& path) {
    write_file_atomic(path, fused_to_json(map));
}

FusedMap load_fused_json(const std::filesystem::path& path) {
    return fused_from_json(read_text_file(path));
}

void save_fused_pgm(const FusedMap& map, const std::filesystem::path& path) {
    const double max = map.max_value();
    const double scale = max > 0.0 ? 65535.0 / max : 0.0;

    std::string out = "P5\n" + std::to_string(map.grid.width) + " " +
                      std::to_string(map.grid.height) + "\n65535\n";
    out.reserve(out.size() + map.values.size() * 2);
    for (int j = map.grid.height - 1; j >= 0; --j) {
        for (int i = 0; i < map.grid.width; ++i) {
            const double v = map.at(i, j) * scale;
            const auto q = static_cast<unsigned>(std::lround(std::clamp(v, 0.0, 65535.0)));
            out.push_back(static_cast<char>((q >> 8) & 0xff));
            out.push_back(static_cast<char>(q & 0xff));
        }
    }
    write_file_atomic(path, out);
}

}  // namespace rfimap
