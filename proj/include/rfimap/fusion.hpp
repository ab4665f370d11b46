// SPDX-License-Identifier: Apache-2.0
//
// rfimap - UAV-borne GNSS interference survey and transmitter mapping
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "rfimap/antenna.hpp"
#include "rfimap/geometry.hpp"
#include "rfimap/scanops.hpp"

namespace rfimap {

/// Per-scan expectation density over the grid. values are row-major with the
/// east index fastest: values[j * width + i].
struct Heatmap {
    GridSpec grid;
    std::vector<double> values;
    std::optional<ScanPose> source_pose;

    double at(int i, int j) const {
        return values[static_cast<std::size_t>(j) * static_cast<std::size_t>(grid.width) +
                      static_cast<std::size_t>(i)];
    }
};

/// Cell-wise mean of several per-scan densities, optionally thresholded.
struct FusedMap {
    GridSpec grid;
    std::vector<double> values;
    int n_scans = 0;
    std::optional<double> threshold_applied;

    double at(int i, int j) const {
        return values[static_cast<std::size_t>(j) * static_cast<std::size_t>(grid.width) +
                      static_cast<std::size_t>(i)];
    }
    double max_value() const;
};

enum class ProjectionMode {
    kPowerWeighted,  // each step contributes rel_power * SRP(heading - cell bearing)
    kUnweighted,     // each step contributes SRP(heading - cell bearing) alone
};

/// Project one horizon scan into the grid: each cell accumulates, over all
/// scan steps, the step's relative power times the SRP gain at the angle
/// between the step heading and the bearing from the scan position to the
/// cell. Cells coincident with the scan position stay 0 (bearing undefined
/// there). The scan position may lie outside the grid.
Heatmap expectation_density(const HorizonScan& scan, const SRPModel& srp,
                            const GridSpec& grid,
                            ProjectionMode mode = ProjectionMode::kPowerWeighted);

/// Cell-wise mean over scans. Inputs are summed in a canonical order (sorted
/// by source pose, then values), so the result is bit-identical under input
/// permutation. Throws std::invalid_argument on grid mismatch.
FusedMap fuse(std::span<const Heatmap> maps);

/// Zero every cell below alpha times the map maximum; surviving cells are
/// unchanged. alpha must lie in (0, 1). Throws std::domain_error on an
/// all-zero map.
FusedMap threshold(const FusedMap& map, double alpha);

// Heatmap JSON: {"grid": {...}, "n_scans", "threshold_applied", "values"}.
std::string fused_to_json(const FusedMap& map);
FusedMap fused_from_json(const std::string& text);
void save_fused_json(const FusedMap& map, const std::filesystem::path& path);
FusedMap load_fused_json(const std::filesystem::path& path);

/// 16-bit binary PGM, values scaled so the map maximum maps to 65535.
/// Rows are written north-to-south so the image reads like a map.
void save_fused_pgm(const FusedMap& map, const std::filesystem::path& path);

}  // namespace rfimap
