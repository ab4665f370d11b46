// SPDX-License-Identifier: Apache-2.0
//
// rfimap - UAV-borne GNSS interference survey and transmitter mapping
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "rfimap/antenna.hpp"
#include "rfimap/geometry.hpp"
#include "rfimap/spectrum.hpp"

namespace rfimap {

/// Position and heading of the survey receiver during one scan.
struct ScanPose {
    LocalPoint position;
    Bearing heading;
};

struct ScanStep {
    Bearing heading;
    double rel_power = 0.0;  // in [0, 1] after per-scan normalization
};

/// One full-revolution sweep from a hover point: relative band power per
/// heading step, normalized so the strongest step is exactly 1.
struct HorizonScan {
    ScanPose pose;
    std::string band;
    double step_deg = 0.0;
    std::vector<ScanStep> steps;

    /// Throws std::invalid_argument unless the steps uniformly cover a full
    /// revolution at step_deg spacing with finite powers in [0, 1].
    void validate() const;
};

struct PoseSample {
    double t = 0.0;  // seconds, strictly increasing within a trace
    LocalPoint position;
    Bearing heading;
};

/// Pose samples recorded while holding one heading dwell.
using PoseTrace = std::vector<PoseSample>;

/// Reference pose of a dwell: arithmetic mean position, circular mean
/// heading. Throws std::invalid_argument on an empty trace.
ScanPose reference_pose(const PoseTrace& trace);

/// Assemble one scan per channel mask from a full revolution of PSD frames.
/// Frames are matched to heading bins by nearest-bin assignment; a missing or
/// duplicated bin is an error. Per band, step powers are divided by that
/// band's maximum over the scan. The scan pose takes the mean frame position
/// and the first frame's heading.
std::vector<HorizonScan> build_scans(std::span<const PSDFrame> frames,
                                     std::span<const ChannelMask> masks, double step_deg);

/// Single-mask convenience wrapper around build_scans.
HorizonScan build_scan(std::span<const PSDFrame> frames, const ChannelMask& mask,
                       double step_deg);

/// Default heading increment: the SRP half-power beamwidth snapped to the
/// nearest divisor of 360. Throws std::domain_error for beamwidths >= 180
/// (no directivity to scan with).
double default_step(const SRPModel& srp);

// Scan log file: JSON {"pose": {"x", "y", "psi"}, "band", "step_deg",
// "steps": [{"heading_deg", "rel_power"}, ...]}.
HorizonScan load_scan(const std::filesystem::path& path);
void save_scan(const HorizonScan& scan, const std::filesystem::path& path);
std::string scan_to_json(const HorizonScan& scan);
HorizonScan scan_from_json(const std::string& text);

}  // namespace rfimap
