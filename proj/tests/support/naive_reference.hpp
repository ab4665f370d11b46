// SPDX-License-Identifier: Apache-2.0
//
// rfimap - UAV-borne GNSS interference survey and transmitter mapping
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

// Independent brute-force re-implementation of the expectation-density math,
// used only as a test oracle. It deliberately shares no helpers with the
// library: its own angle wrapping, its own mixture evaluation, its own cell
// loop, plain accumulation in whatever order the caller passes scans.

#pragma once

#include <cmath>
#include <vector>

#include "rfimap/fusion.hpp"
#include "rfimap/scanops.hpp"

namespace naive {

inline double wrap_pm180(double deg) {
    while (deg <= -180.0) deg += 360.0;
    while (deg > 180.0) deg -= 360.0;
    return deg;
}

inline double mixture_gain(const rfimap::SRPModel& model, double dpsi_deg) {
    const double a = std::fabs(wrap_pm180(dpsi_deg));
    double sum = 0.0;
    for (const auto& c : model.components) {
        const double d = wrap_pm180(a - c.mean_deg);
        sum += c.weight * std::exp(-d * d / (2.0 * c.sigma_deg * c.sigma_deg));
    }
    return sum;
}

inline std::vector<double> expectation_density(const rfimap::HorizonScan& scan,
                                               const rfimap::SRPModel& model,
                                               const rfimap::GridSpec& grid,
                                               bool weighted = true) {
    std::vector<double> out(static_cast<std::size_t>(grid.width) *
                                static_cast<std::size_t>(grid.height),
                            0.0);
    const double px = scan.pose.position.east;
    const double py = scan.pose.position.north;
    for (int j = 0; j < grid.height; ++j) {
        for (int i = 0; i < grid.width; ++i) {
            const double cx = grid.origin.east + (i + 0.5) * grid.resolution;
            const double cy = grid.origin.north + (j + 0.5) * grid.resolution;
            const double dx = cx - px;
            const double dy = cy - py;
            if (dx == 0.0 && dy == 0.0) continue;
            const double bearing = std::atan2(dx, dy) * 180.0 / 3.14159265358979323846;
            double acc = 0.0;
            for (const auto& step : scan.steps) {
                const double dpsi = wrap_pm180(step.heading.degrees() - bearing);
                const double g = mixture_gain(model, dpsi);
                acc += weighted ? step.rel_power * g : g;
            }
            out[static_cast<std::size_t>(j) * grid.width + i] = acc;
        }
    }
    return out;
}

inline std::vector<double> fuse_mean(const std::vector<std::vector<double>>& maps) {
    std::vector<double> out(maps.at(0).size(), 0.0);
    for (const auto& m : maps) {
        for (std::size_t k = 0; k < out.size(); ++k) out[k] += m[k];
    }
    for (auto& v : out) v /= static_cast<double>(maps.size());
    return out;
}

}  // namespace naive
