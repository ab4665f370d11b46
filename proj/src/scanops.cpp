// SPDX-License-Identifier: Apache-2.0
//
// rfimap - UAV-borne GNSS interference survey and transmitter mapping
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include "rfimap/scanops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "rfimap/io_util.hpp"

namespace rfimap {

namespace {

constexpr double kStepTolerance = 1e-9;

int revolution_bins(double step_deg) {
    if (!(step_deg > 0.0) || step_deg > 360.0) {
        throw std::invalid_argument("heading step must lie in (0, 360] deg");
    }
    const double bins = 360.0 / step_deg;
    const auto n = static_cast<int>(std::llround(bins));
    if (n < 1 || std::abs(n * step_deg - 360.0) > kStepTolerance * 360.0) {
        throw std::invalid_argument("heading step " + std::to_string(step_deg) +
                                    " does not divide 360");
    }
    return n;
}

}  // namespace

void HorizonScan::validate() const {
    const int n = revolution_bins(step_deg);
    if (static_cast<int>(steps.size()) != n) {
        throw std::invalid_argument("HorizonScan: expected " + std::to_string(n) +
                                    " steps, got " + std::to_string(steps.size()));
    }
    for (int k = 0; k < n; ++k) {
        const double expected = wrap_degrees(k * step_deg);
        if (std::abs(bearing_diff(steps[static_cast<std::size_t>(k)].heading,
                                  Bearing(expected))) > kStepTolerance * 360.0) {
            throw std::invalid_argument("HorizonScan: step " + std::to_string(k) +
                                        " heading off the uniform grid");
        }
        const double p = steps[static_cast<std::size_t>(k)].rel_power;
        if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
            throw std::invalid_argument("HorizonScan: rel_power outside [0, 1]");
        }
    }
    if (!std::isfinite(pose.position.east) || !std::isfinite(pose.position.north)) {
        throw std::invalid_argument("HorizonScan: non-finite pose");
    }
}

ScanPose reference_pose(const PoseTrace& trace) {
    if (trace.empty()) {
        throw std::invalid_argument("reference_pose: empty trace");
    }
    double east = 0.0;
    double north = 0.0;
    double sin_sum = 0.0;
    double cos_sum = 0.0;
    for (const auto& s : trace) {
        east += s.position.east;
        north += s.position.north;
        const double rad = s.heading.degrees() * std::numbers::pi / 180.0;
        sin_sum += std::sin(rad);
        cos_sum += std::cos(rad);
    }
    const double inv = 1.0 / static_cast<double>(trace.size());
    const double mean_heading = std::atan2(sin_sum, cos_sum) * 180.0 / std::numbers::pi;
    return {{east * inv, north * inv}, Bearing(mean_heading)};
}

std::vector<HorizonScan> build_scans(std::span<const PSDFrame> frames,
                                     std::span<const ChannelMask> masks, double step_deg) {
    const int n = revolution_bins(step_deg);
    if (frames.empty()) {
        throw std::invalid_argument("build_scans: no frames");
    }
    if (masks.empty()) {
        throw std::invalid_argument("build_scans: no channel masks");
    }

    std::vector<const PSDFrame*> by_bin(static_cast<std::size_t>(n), nullptr);
    for (const auto& frame : frames) {
        const double h = frame.heading.degrees();
        const int bin = static_cast<int>(std::llround(h / step_deg)) % n;
        if (std::abs(wrap_signed_degrees(h - bin * step_deg)) > step_deg / 2.0 + kStepTolerance) {
            throw std::invalid_argument("build_scans: heading " + std::to_string(h) +
                                        " too far from any step bin");
        }
        if (by_bin[static_cast<std::size_t>(bin)] != nullptr) {
            throw std::invalid_argument("build_scans: duplicate frames for heading bin " +
                                        std::to_string(bin * step_deg));
        }
        by_bin[static_cast<std::size_t>(bin)] = &frame;
    }
    for (int k = 0; k < n; ++k) {
        if (by_bin[static_cast<std::size_t>(k)] == nullptr) {
            throw std::invalid_argument("build_scans: incomplete revolution, missing heading " +
                                        std::to_string(k * step_deg));
        }
    }

    ScanPose pose;
    for (const auto& frame : frames) {
        pose.position.east += frame.position.east;
        pose.position.north += frame.position.north;
    }
    pose.position.east /= static_cast<double>(frames.size());
    pose.position.north /= static_cast<double>(frames.size());
    pose.heading = frames[0].heading;

    std::vector<HorizonScan> scans;
    scans.reserve(masks.size());
    for (const auto& mask : masks) {
        HorizonScan scan;
        scan.pose = pose;
        scan.band = mask.name;
        scan.step_deg = step_deg;
        scan.steps.resize(static_cast<std::size_t>(n));

        double max_power = 0.0;
        std::vector<double> powers(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) {
            const double p = band_power(*by_bin[static_cast<std::size_t>(k)], mask);
            if (!std::isfinite(p)) {
                throw std::invalid_argument("build_scans: non-finite band power");
            }
            powers[static_cast<std::size_t>(k)] = p;
            max_power = std::max(max_power, p);
        }
        for (int k = 0; k < n; ++k) {
            scan.steps[static_cast<std::size_t>(k)].heading = Bearing(k * step_deg);
            scan.steps[static_cast<std::size_t>(k)].rel_power =
                max_power > 0.0 ? powers[static_cast<std::size_t>(k)] / max_power : 0.0;
        }
        scans.push_back(std::move(scan));
    }
    return scans;
}

HorizonScan build_scan(std::span<const PSDFrame> frames, const ChannelMask& mask,
                       double step_deg) {
    return build_scans(frames, std::span<const ChannelMask>(&mask, 1), step_deg)[0];
}

double default_step(const SRPModel& srp) {
    const double hpbw = half_power_beamwidth(srp);
    if (hpbw >= 180.0) {
        throw std::domain_error("default_step: beamwidth " + std::to_string(hpbw) +
                                " deg is too wide for heading scanning");
    }
    int best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int d = 1; d <= 180; ++d) {
        if (360 % d != 0) continue;
        const double dist = std::abs(hpbw - d);
        if (dist < best_dist) {  // ties keep the smaller (finer) divisor
            best_dist = dist;
            best = d;
        }
    }
    return static_cast<double>(best);
}

std::string scan_to_json(const HorizonScan& scan) {
    nlohmann::ordered_json j;
    j["pose"] = {{"x", scan.pose.position.east},
                 {"y", scan.pose.position.north},
                 {"psi", scan.pose.heading.degrees()}};
    j["band"] = scan.band;
    j["step_deg"] = scan.step_deg;
    auto& steps = j["steps"] = nlohmann::ordered_json::array();
    for (const auto& s : scan.steps) {
        steps.push_back({{"heading_deg", s.heading.degrees()}, {"rel_power", s.rel_power}});
    }
    return j.dump(2) + "\n";
}

HorizonScan scan_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    HorizonScan scan;
    const auto& pose = j.at("pose");
    scan.pose.position = {pose.at("x").get<double>(), pose.at("y").get<double>()};
    scan.pose.heading = Bearing(pose.at("psi").get<double>());
    scan.band = j.at("band").get<std::string>();
    scan.step_deg = j.at("step_deg").get<double>();
    for (const auto& s : j.at("steps")) {
        scan.steps.push_back({Bearing(s.at("heading_deg").get<double>()),
                              s.at("rel_power").get<double>()});
    }
    scan.validate();
    return scan;
}

HorizonScan load_scan(const std::filesystem::path& path) {
    try {
        return scan_from_json(read_text_file(path));
    } catch (const std::exception& e) {
        throw std::runtime_error("load_scan: " + path.string() + ": " + e.what());
    }
}

void save_scan(const HorizonScan& scan, const std::filesystem::path& path) {
    write_file_atomic(path, scan_to_json(scan));
}

}  // namespace rfimap
